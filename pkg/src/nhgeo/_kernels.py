"""Hot numeric kernels.

Each kernel is ordinary Python over scalars and small arrays, compiled by
numba through :func:`nhgeo._accel.jit` unless ``NHGEO_DISABLE_NUMBA`` is set.
Kernels never raise; they return status codes that the public wrappers turn
into exceptions.
"""
import cmath
import math
import types

import numpy as np

from ._accel import jit

PI = math.pi

# status codes shared with the wrappers
OK = 0
SINGULAR = 1
ON_CUT = 2
NOT_CONVERGED = 3

# ---------------------------------------------------------------------------
# Carlson symmetric integrals (duplication algorithm, complex arguments)
# ---------------------------------------------------------------------------


@jit
def rf_kernel(x, y, z, rtol, maxiter):
    a0 = (x + y + z) / 3.0
    q = (3.0 * rtol) ** (-1.0 / 6.0) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    xn, yn, zn, an = x, y, z, a0
    fac = 1.0
    n = 0
    converged = True
    while fac * q >= abs(an):
        if n >= maxiter:
            converged = False
            break
        sx = cmath.sqrt(xn)
        sy = cmath.sqrt(yn)
        sz = cmath.sqrt(zn)
        lam = sx * sy + sx * sz + sy * sz
        xn = 0.25 * (xn + lam)
        yn = 0.25 * (yn + lam)
        zn = 0.25 * (zn + lam)
        an = 0.25 * (an + lam)
        fac *= 0.25
        n += 1
    X = fac * (a0 - x) / an
    Y = fac * (a0 - y) / an
    Z = -X - Y
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    series = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0
    return series / cmath.sqrt(an), n, converged


@jit
def rd_kernel(x, y, z, rtol, maxiter):
    a0 = (x + y + 3.0 * z) / 5.0
    q = (0.25 * rtol) ** (-1.0 / 6.0) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    xn, yn, zn, an = x, y, z, a0
    fac = 1.0
    acc = 0j
    n = 0
    converged = True
    while fac * q >= abs(an):
        if n >= maxiter:
            converged = False
            break
        sx = cmath.sqrt(xn)
        sy = cmath.sqrt(yn)
        sz = cmath.sqrt(zn)
        lam = sx * sy + sx * sz + sy * sz
        acc += fac / (sz * (zn + lam))
        xn = 0.25 * (xn + lam)
        yn = 0.25 * (yn + lam)
        zn = 0.25 * (zn + lam)
        an = 0.25 * (an + lam)
        fac *= 0.25
        n += 1
    X = fac * (a0 - x) / an
    Y = fac * (a0 - y) / an
    Z = -(X + Y) / 3.0
    xy = X * Y
    z2 = Z * Z
    e2 = xy - 6.0 * z2
    e3 = (3.0 * xy - 8.0 * z2) * Z
    e4 = 3.0 * (xy - z2) * z2
    e5 = xy * z2 * Z
    series = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
              - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return fac * series / (an * cmath.sqrt(an)) + 3.0 * acc, n, converged


@jit
def complete_ke_kernel(kc2, k2, rtol, maxiter):
    """K and E from the complementary parameter kc2 = 1 - k^2 (passed exactly)."""
    rf, n1, c1 = rf_kernel(0j, kc2, 1.0 + 0j, rtol, maxiter)
    rd, n2, c2 = rd_kernel(0j, kc2, 1.0 + 0j, rtol, maxiter)
    return rf, rf - k2 * rd / 3.0, max(n1, n2), c1 and c2


# ---------------------------------------------------------------------------
# Overall geometric phase of the dissipative Ising chain
# ---------------------------------------------------------------------------

_SERIES_SMALL = 0.05
_SERIES_LARGE = 20.0
_SERIES_TERMS = 18


@jit
def _hyp_coeff(n):
    # ((-1/2)_n / n!)^2, the Taylor coefficients of 2F1(-1/2, -1/2; 1; u)
    c = 1.0
    for j in range(1, n + 1):
        r = (j - 1.5) / j
        c *= r * r
    return c


@jit
def _gamma_series(g, derivative):
    if abs(g) < 1.0:
        # gamma/pi = 1 - 2 sum n c_n g^(2n-1)
        acc = 0j
        for n in range(_SERIES_TERMS, 0, -1):
            c = _hyp_coeff(n)
            if derivative:
                acc += n * (2 * n - 1) * c * g ** (2 * n - 2)
            else:
                acc += n * c * g ** (2 * n - 1)
        if derivative:
            return -2.0 * PI * acc
        return PI * (1.0 - 2.0 * acc)
    u = 1.0 / (g * g)
    acc = 0j
    for n in range(_SERIES_TERMS, 0, -1):
        c = _hyp_coeff(n)
        if derivative:
            acc += c * (2 * n - 1) * n * u ** (n - 1)
        else:
            acc += c * (2 * n - 1) * u ** n
    if derivative:
        return PI * acc * (-2.0 * u / g)
    return PI * acc


@jit
def overall_phase_closed_kernel(g, rtol, maxiter):
    """pi + (1-g)/g K(m) - (1+g)/g E(m), m = 2 sqrt(g)/(1+g); returns (value, status)."""
    if g == 0:
        return PI + 0j, OK
    ag = abs(g)
    if ag < _SERIES_SMALL or ag > _SERIES_LARGE:
        return _gamma_series(g, False), OK
    if g == -1.0:
        return complex(np.nan, np.nan), SINGULAR
    w = (1.0 - g) / (1.0 + g)
    kc2 = w * w
    if kc2 == 0:
        return complex(np.nan, np.nan), SINGULAR
    if kc2.imag == 0.0 and kc2.real < 0.0:
        return complex(np.nan, np.nan), ON_CUT
    k2 = 4.0 * g / ((1.0 + g) * (1.0 + g))
    kk, ee, _, conv = complete_ke_kernel(kc2, k2, rtol, maxiter)
    val = PI + (1.0 - g) / g * kk - (1.0 + g) / g * ee
    return val, OK if conv else NOT_CONVERGED


@jit
def overall_phase_derivative_kernel(g, rtol, maxiter):
    """d gamma_g / dg from the closed form; returns (value, status)."""
    ag = abs(g)
    if ag < _SERIES_SMALL or ag > _SERIES_LARGE:
        return _gamma_series(g, True), OK
    if g == -1.0:
        return complex(np.nan, np.nan), SINGULAR
    w = (1.0 - g) / (1.0 + g)
    kc2 = w * w
    if kc2 == 0:
        return complex(np.nan, np.nan), SINGULAR
    if kc2.imag == 0.0 and kc2.real < 0.0:
        return complex(np.nan, np.nan), ON_CUT
    k2 = 4.0 * g / ((1.0 + g) * (1.0 + g))
    kk, ee, _, conv = complete_ke_kernel(kc2, k2, rtol, maxiter)
    dlogm = (1.0 - g) / (2.0 * g * (1.0 + g))
    dk = (ee / kc2 - kk) * dlogm
    de = (ee - kk) * dlogm
    val = (ee - kk) / (g * g) + (1.0 - g) / g * dk - (1.0 + g) / g * de
    return val, OK if conv else NOT_CONVERGED


@jit
def elliptic_energy_kernel(g, rtol, maxiter):
    """(1 + g) E(2 sqrt(g)/(1+g)); returns (value, status)."""
    if g == -1.0:
        return complex(np.nan, np.nan), SINGULAR
    w = (1.0 - g) / (1.0 + g)
    kc2 = w * w
    if kc2.imag == 0.0 and kc2.real < 0.0:
        return complex(np.nan, np.nan), ON_CUT
    k2 = 4.0 * g / ((1.0 + g) * (1.0 + g))
    if kc2 == 0:
        # E(1) = 1
        return 1.0 + g, OK
    kk, ee, _, conv = complete_ke_kernel(kc2, k2, rtol, maxiter)
    return (1.0 + g) * ee, OK if conv else NOT_CONVERGED


@jit
def overall_phase_closed_many(gs, rtol, maxiter):
    out = np.empty(gs.shape[0], dtype=np.complex128)
    status = np.empty(gs.shape[0], dtype=np.int64)
    for i in range(gs.shape[0]):
        out[i], status[i] = overall_phase_closed_kernel(gs[i], rtol, maxiter)
    return out, status


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod (10/21) for the thermodynamic-limit integrand
# ---------------------------------------------------------------------------

XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0])
WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208643068016, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821])
WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338])


@jit
def mode_radius_kernel(g, x):
    """sqrt(g^2 - 2 g cos x + 1) on the branch analytic in x."""
    e = complex(math.cos(x), math.sin(x))
    ec = e.conjugate()
    if abs(g) <= 1.0:
        return cmath.sqrt(1.0 - g * e) * cmath.sqrt(1.0 - g * ec)
    return g * cmath.sqrt(1.0 - e / g) * cmath.sqrt(1.0 - ec / g)


@jit
def _b4_integrand(g, x):
    return 1.0 - (g - math.cos(x)) / mode_radius_kernel(g, x)


@jit
def _gk21_b4(g, a, b):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = _b4_integrand(g, center)
    resk = fc * WGK[10]
    resg = 0j
    for i in range(10):
        dx = half * XGK[i]
        f = _b4_integrand(g, center - dx) + _b4_integrand(g, center + dx)
        resk += WGK[i] * f
        if i % 2 == 1:
            resg += WG[i // 2] * f
    return resk * half, abs((resk - resg) * half)


@jit
def b4_quad_kernel(g, breaks, epsabs, epsrel, limit):
    """Adaptive bisection on the worst interval; returns (value, error, converged, n_intervals)."""
    lo = np.empty(limit)
    hi = np.empty(limit)
    res = np.empty(limit, dtype=np.complex128)
    err = np.empty(limit)
    m = 0
    for i in range(breaks.shape[0] - 1):
        lo[m] = breaks[i]
        hi[m] = breaks[i + 1]
        res[m], err[m] = _gk21_b4(g, breaks[i], breaks[i + 1])
        m += 1
    while True:
        total = 0j
        total_err = 0.0
        worst = 0
        for i in range(m):
            total += res[i]
            total_err += err[i]
            if err[i] > err[worst]:
                worst = i
        if total_err <= max(epsabs, epsrel * abs(total)):
            return total, total_err, True, m
        if m >= limit:
            return total, total_err, False, m
        a = lo[worst]
        b = hi[worst]
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b or (b - a) < 1e-15 * (1.0 + abs(a)):
            return total, total_err, False, m
        r1, e1 = _gk21_b4(g, a, mid)
        r2, e2 = _gk21_b4(g, mid, b)
        hi[worst] = mid
        res[worst] = r1
        err[worst] = e1
        lo[m] = mid
        hi[m] = b
        res[m] = r2
        err[m] = e2
        m += 1


# ---------------------------------------------------------------------------
# Level tracking along a discretized loop
# ---------------------------------------------------------------------------


@jit
def track_level_kernel(vecs, left, energies, start, gap_tol):
    """Follow one eigenvector by maximal biorthogonal overlap.

    Returns (columns, status, index) where status 1 flags a gap below
    ``gap_tol`` at sample ``index``.
    """
    n = energies.shape[0]
    dim = energies.shape[1]
    cols = np.empty(n, dtype=np.int64)
    cols[0] = start
    for j in range(n):
        if j > 0:
            prev = cols[j - 1]
            lnorm = 0.0
            for k in range(dim):
                lnorm += abs(left[j - 1, prev, k]) ** 2
            lnorm = math.sqrt(lnorm)
            best = 0
            best_val = -1.0
            for c in range(dim):
                ov = 0j
                rnorm = 0.0
                for k in range(dim):
                    ov += left[j - 1, prev, k] * vecs[j, k, c]
                    rnorm += abs(vecs[j, k, c]) ** 2
                val = abs(ov) / (lnorm * math.sqrt(rnorm))
                if val > best_val + 1e-12:
                    best = c
                    best_val = val
                elif abs(val - best_val) <= 1e-12:
                    e_prev = energies[j - 1, prev]
                    if abs(energies[j, c] - e_prev) < abs(energies[j, best] - e_prev):
                        best = c
            cols[j] = best
        c = cols[j]
        for o in range(dim):
            if o != c and abs(energies[j, o] - energies[j, c]) < gap_tol:
                return cols, 1, j
    return cols, 0, -1


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) for the adjoint Schroedinger pair
# ---------------------------------------------------------------------------

A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)
C2, C3, C4, C5 = 0.2, 0.3, 0.8, 8.0 / 9.0


def pair_rhs_from(hfun):
    """Right-hand side for a plain-Python ``hfun(t, params)`` returning (h00, h01, h10, h11)."""

    def rhs(t, y, params, out):
        h00, h01, h10, h11 = hfun(t, params)
        out[0] = -1j * (h00 * y[0] + h01 * y[1])
        out[1] = -1j * (h10 * y[0] + h11 * y[1])
        out[2] = 1j * (y[2] * h00 + y[3] * h10)
        out[3] = 1j * (y[2] * h01 + y[3] * h11)

    return rhs


def _integrate_pair_template(params, total_time, y0, tol, h_init, max_steps):
    """DP5(4) for i d psi/dt = H psi together with -i d chi/dt = chi H.

    The global name ``rhs`` is bound by :func:`bind_integrator`;
    ``rhs(t, y, params, out)`` writes the derivative of the stacked state
    y = (psi_0, psi_1, chi_0, chi_1) into ``out``.  The
    controller bounds the local error per unit time: the relative error of
    each of the two vectors must stay below ``tol * h``.  Status 1 means the
    step size underflowed, 2 that ``max_steps`` was exhausted.
    """
    cap = 4096
    ts = np.empty(cap)
    ys = np.empty((cap, 4), dtype=np.complex128)
    y = y0.copy()
    ts[0] = 0.0
    ys[0, :] = y
    n = 1
    t = 0.0
    h = min(h_init, total_time)
    hmin = 1e-13 * max(1.0, total_time)
    k1 = np.empty(4, dtype=np.complex128)
    k2 = np.empty(4, dtype=np.complex128)
    k3 = np.empty(4, dtype=np.complex128)
    k4 = np.empty(4, dtype=np.complex128)
    k5 = np.empty(4, dtype=np.complex128)
    k6 = np.empty(4, dtype=np.complex128)
    k7 = np.empty(4, dtype=np.complex128)
    tmp = np.empty(4, dtype=np.complex128)
    ynew = np.empty(4, dtype=np.complex128)
    rhs(t, y, params, k1)
    rejected = 0
    steps = 0
    status = 0
    while t < total_time:
        last = False
        if t + h >= total_time * (1.0 - 1e-14):
            h = total_time - t
            last = True
        for i in range(4):
            tmp[i] = y[i] + h * A21 * k1[i]
        rhs(t + C2 * h, tmp, params, k2)
        for i in range(4):
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        rhs(t + C3 * h, tmp, params, k3)
        for i in range(4):
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        rhs(t + C4 * h, tmp, params, k4)
        for i in range(4):
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        rhs(t + C5 * h, tmp, params, k5)
        for i in range(4):
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                 + A64 * k4[i] + A65 * k5[i])
        rhs(t + h, tmp, params, k6)
        for i in range(4):
            ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                  + B5 * k5[i] + B6 * k6[i])
        rhs(t + h, ynew, params, k7)
        err_psi = 0.0
        err_chi = 0.0
        for i in range(4):
            e = abs(h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                         + E6 * k6[i] + E7 * k7[i]))
            if i < 2:
                err_psi = max(err_psi, e)
            else:
                err_chi = max(err_chi, e)
        s_psi = max(max(abs(y[0]), abs(y[1])), max(abs(ynew[0]), abs(ynew[1])))
        s_chi = max(max(abs(y[2]), abs(y[3])), max(abs(ynew[2]), abs(ynew[3])))
        ratio = max(err_psi / s_psi, err_chi / s_chi) / (tol * h)
        steps += 1
        if ratio <= 1.0:
            t = total_time if last else t + h
            for i in range(4):
                y[i] = ynew[i]
                k1[i] = k7[i]
            if n == cap:
                cap *= 2
                ts2 = np.empty(cap)
                ys2 = np.empty((cap, 4), dtype=np.complex128)
                ts2[:n] = ts[:n]
                ys2[:n, :] = ys[:n, :]
                ts = ts2
                ys = ys2
            ts[n] = t
            ys[n, :] = y
            n += 1
            if ratio == 0.0:
                h *= 5.0
            else:
                h *= min(5.0, max(0.2, 0.9 * ratio ** -0.25))
        else:
            rejected += 1
            h *= max(0.2, 0.9 * ratio ** -0.25)
            if h < hmin:
                status = 1
                break
        if steps >= max_steps:
            status = 2
            break
    return ts[:n].copy(), ys[:n, :].copy(), rejected, status


def bind_integrator(rhs):
    """Copy of the DP5(4) loop with ``rhs`` bound as a global.

    Binding through globals rather than passing ``rhs`` as an argument keeps
    the compiled circle integrator cacheable by numba.
    """
    env = dict(globals())
    env["rhs"] = rhs
    f = types.FunctionType(_integrate_pair_template.__code__, env,
                           "integrate_pair", None, None)
    f.__doc__ = _integrate_pair_template.__doc__
    return f


@jit
def circle_rhs(t, y, params, out):
    # H = lambda0 + rho (cos 2 pi s, sin 2 pi s, 0) . sigma + zeta sigma_z, s = t / T
    phase = 2.0 * PI * t / params[3].real
    x = params[1] * math.cos(phase)
    yy = params[1] * math.sin(phase)
    h00 = params[0] + params[2]
    h11 = params[0] - params[2]
    h01 = x - 1j * yy
    h10 = x + 1j * yy
    out[0] = -1j * (h00 * y[0] + h01 * y[1])
    out[1] = -1j * (h10 * y[0] + h11 * y[1])
    out[2] = 1j * (y[2] * h00 + y[3] * h10)
    out[3] = 1j * (y[2] * h01 + y[3] * h11)


integrate_circle = jit(bind_integrator(circle_rhs))
