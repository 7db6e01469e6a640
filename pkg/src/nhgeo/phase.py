"""Complex geometric phases of non-Hermitian Hamiltonians.

Three independent routes are provided:

* closed-form monopole phases of a two-level field (:func:`monopole_phase`);
* a discretized biorthogonal Wilson loop of any level of an N x N family
  (:func:`wilson_loop_phase`);
* curvature by perturbation sums and its flux through a cap
  (:func:`curvature_fd`, :func:`curvature_flux`).

Loops are sampled uniformly in s in [0, 1).  The Wilson loop uses the
symmetric segment formula

    gamma = (i/2) sum_j log(<u~_j|u_{j+1}> / <u~_{j+1}|u_j>)

whose discretization error contains only even powers of 1/n, and is
Romberg-extrapolated over n, n/2, n/4.  Eigenvectors are gauge-fixed by
setting a reference component to 1 (``ref``); for two-level systems the
default (second component) reproduces the gauge of :mod:`nhgeo.core`, so the
real part of the phase is not reduced modulo 2 pi.
"""
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels as _K
from .core import TOL_DEGENERACY, ComplexVec3, TwoLevelHamiltonian, complex_radius
from .errors import (
    AmbiguousPairError,
    DegeneracyError,
    DomainError,
    ExceptionalPointError,
    LevelCrossingError,
    NonConvergenceError,
)

MAX_DIM = 8
GAP_TOL = 1e-8


class Method(enum.Enum):
    Analytic = "Analytic"
    WilsonLoop = "WilsonLoop"
    Adiabatic = "Adiabatic"
    Curvature = "Curvature"


@dataclass(frozen=True)
class PhaseResult:
    gamma: complex
    method: Method
    resolution: int = 0
    error_estimate: float = 0.0

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise DomainError("error_estimate must be non-negative")


@dataclass(frozen=True)
class LoopPath:
    """Closed contour s -> parameter point, s in [0, 1].

    ``func`` is evaluated at ``s % 1`` so the loop closes exactly.  For
    circles around the z axis ``circle`` holds ``(rho, zeta)``.
    """

    func: Callable
    n_segments: int = 2048
    dimension: int = 3
    circle: Optional[tuple] = field(default=None, compare=False)
    closed: bool = True

    def __post_init__(self):
        if self.n_segments < 16:
            raise DomainError("n_segments must be at least 16")
        if not self.closed:
            raise DomainError("LoopPath must be closed")
        a = np.asarray(self.func(0.0), dtype=complex)
        b = np.asarray(self.sample(1.0), dtype=complex)
        if a.shape != (self.dimension,) or not np.array_equal(a, b):
            raise DomainError("loop is not closed or has the wrong dimension")

    def sample(self, s):
        return np.asarray(self.func(s % 1.0), dtype=complex)

    def points(self, n=None):
        n = self.n_segments if n is None else n
        return np.array([self.sample(j / n) for j in range(n)])

    def with_segments(self, n):
        return LoopPath(self.func, n, self.dimension, self.circle)


def circle_loop(rho, zeta, n_segments=2048):
    """R(s) = (rho cos 2 pi s, rho sin 2 pi s, zeta); rho, zeta may be complex."""
    rho, zeta = complex(rho), complex(zeta)

    def f(s):
        a = 2.0 * math.pi * s
        return np.array([rho * math.cos(a), rho * math.sin(a), zeta])

    return LoopPath(f, n_segments, 3, (rho, zeta))


def theta_loop(radius, theta, n_segments=2048):
    """Loop of constant complex polar angle ``theta`` on a sphere of radius ``radius``."""
    r, t = complex(radius), complex(theta)
    return circle_loop(r * np.sin(t), r * np.cos(t), n_segments)


def point_loop(point, n_segments=16):
    """Zero-area loop that stays at ``point``."""
    p = np.array(point, dtype=complex)
    return LoopPath(lambda s: p, n_segments, p.shape[0])


def two_level_map(lambda0=0.0):
    """hamiltonian_map for fields R = (x, y, z): point -> 2x2 matrix."""
    lam = complex(lambda0)

    def hmap(point):
        x, y, z = point
        return np.array([[lam + z, x - 1j * y], [x + 1j * y, lam - z]])

    return hmap


def _as_matrix(h):
    if isinstance(h, TwoLevelHamiltonian):
        return h.matrix()
    return np.asarray(h, dtype=complex)


def _matrices(hmap, points):
    hs = np.array([_as_matrix(hmap(p)) for p in points])
    if hs.ndim != 3 or hs.shape[1] != hs.shape[2]:
        raise DomainError("hamiltonian_map must return square matrices")
    if hs.shape[1] > MAX_DIM:
        raise DomainError(f"matrix dimension {hs.shape[1]} exceeds {MAX_DIM}")
    return hs


def _ordered_eig(h):
    """Eigenvalues sorted by (Re, Im) with right columns and left rows."""
    w, v = np.linalg.eig(h)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = v[:, order]
    return w, v, np.linalg.inv(v)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def monopole_phase(v, level="minus", q=1.0, tol_degeneracy=TOL_DEGENERACY):
    """Phase q pi (1 -+ Z/R) of a constant-theta loop around the z axis.

    ``level`` is ``"minus"`` (ground, upper sign) or ``"plus"``.
    """
    if not isinstance(v, ComplexVec3):
        v = ComplexVec3(*v)
    r = complex_radius(v)
    if v.scale == 0 or abs(r) <= tol_degeneracy * v.scale:
        raise DegeneracyError(f"|R| = {abs(r):.3e}: monopole phase undefined", where=v)
    if level in ("minus", "ground", 0):
        sign = -1.0
    elif level in ("plus", "excited", 1):
        sign = 1.0
    else:
        raise DomainError(f"unknown level {level!r}")
    return PhaseResult(q * math.pi * (1.0 + sign * v.z / r), Method.Analytic)


def _check_limits_args(r, eps, tol):
    if r < 0 or eps < 0:
        raise DomainError("r and eps must be non-negative")
    if abs(r - eps) <= tol * max(1.0, eps):
        raise ExceptionalPointError(f"r = eps = {eps}: phase diverges at the exceptional point")


def phase_limits_re(r, z_sign, eps, tol=1e-12):
    """Re gamma on the z -> +-0 plane for R = (r, 0, z - i eps).

    pi for r > eps; pi (1 -+ eps/sqrt(eps^2 - r^2)) for r < eps, upper sign
    for ``z_sign="plus"``.
    """
    _check_limits_args(r, eps, tol)
    if r > eps:
        return math.pi
    if z_sign in ("plus", "+", 1):
        s = -1.0
    elif z_sign in ("minus", "-", -1):
        s = 1.0
    else:
        raise DomainError(f"z_sign must be 'plus' or 'minus', got {z_sign!r}")
    return math.pi * (1.0 + s * eps / math.sqrt(eps * eps - r * r))


def phase_limits_im(r, eps, tol=1e-12):
    """Im gamma on the z = 0 plane: 0 for r < eps, pi eps/sqrt(r^2 - eps^2) for r > eps."""
    _check_limits_args(r, eps, tol)
    if r < eps:
        return 0.0
    return math.pi * eps / math.sqrt(r * r - eps * eps)


# ---------------------------------------------------------------------------
# Wilson loops
# ---------------------------------------------------------------------------


def loop_phase_from_vectors(right, left):
    """Symmetric discrete phase of a closed chain of biorthonormal vectors.

    ``right[j]`` and ``left[j]`` (j = 0..n-1) are u_j and u~_j; the chain
    wraps from n-1 back to 0.  Returns (gamma, largest segment phase).
    """
    right = np.asarray(right)
    left = np.asarray(left)
    nxt_r = np.roll(right, -1, axis=0)
    nxt_l = np.roll(left, -1, axis=0)
    fwd = np.einsum("ij,ij->i", left, nxt_r)
    bwd = np.einsum("ij,ij->i", nxt_l, right)
    logs = np.log(fwd / bwd)
    return 0.5j * np.sum(logs), float(np.max(np.abs(logs.imag))) / 2.0


def _romberg(values):
    # values[0] at n, values[1] at n/2, ...; error series in even powers of 1/n
    table = list(values)
    for level in range(1, len(table)):
        fac = 4.0 ** level
        table = [(fac * table[i] - table[i + 1]) / (fac - 1.0) for i in range(len(table) - 1)]
    return table[0]


def _default_ref(u0):
    mags = np.abs(u0)
    big = np.nonzero(mags >= 1e-3 * mags.max())[0]
    return int(big[-1])


def _track(hs, start, gap_tol):
    n, dim, _ = hs.shape
    energies = np.empty((n, dim), dtype=complex)
    vecs = np.empty((n, dim, dim), dtype=complex)
    left = np.empty((n, dim, dim), dtype=complex)
    for j in range(n):
        energies[j], vecs[j], left[j] = _ordered_eig(hs[j])
    cols, status, where = _K.track_level_kernel(vecs, left, energies, start, gap_tol)
    if status:
        raise LevelCrossingError(f"gap below {gap_tol} at s = {where / n:.6f}")
    # closing step: the level must come back to itself
    last = vecs[-1][:, cols[-1]]
    ov = np.abs(left[0] @ last) / (np.linalg.norm(left[0], axis=1) * np.linalg.norm(last))
    if int(np.argmax(ov)) != start:
        raise LevelCrossingError("tracked level does not return to itself around the loop")
    idx = np.arange(n)
    return vecs[idx, :, cols], left[idx, cols, :], energies[idx, cols]


def wilson_loop_phase(hamiltonian_map, loop, level=0, tol=1e-6, gap_tol=GAP_TOL, ref=None):
    """Complex geometric phase of one level around ``loop``.

    Parameters
    ----------
    hamiltonian_map : callable
        point -> square matrix (N <= 8) or :class:`TwoLevelHamiltonian`.
    loop : LoopPath
    level : int or str
        Index into the spectrum at s = 0 sorted by (Re E, Im E); for two
        levels ``"minus"``/``"plus"`` are accepted.
    tol : float
        Largest accepted change between the extrapolated values at n and n/2.
    gap_tol : float
        Smallest allowed distance to another level along the loop.
    ref : int, optional
        Gauge-fixing component (u[ref] = 1); defaults to the last component
        with non-negligible weight at s = 0.

    Raises
    ------
    LevelCrossingError, NonConvergenceError
    """
    if level in ("minus", "ground"):
        level = 0
    elif level in ("plus", "excited"):
        level = 1
    n = loop.n_segments
    hs = _matrices(hamiltonian_map, loop.points(n))
    if not 0 <= level < hs.shape[1]:
        raise DomainError(f"level {level} out of range")
    right, left, _ = _track(hs, int(level), gap_tol)
    if ref is None:
        ref = _default_ref(right[0])
    piv = right[:, ref]
    if np.min(np.abs(piv)) == 0:
        raise NonConvergenceError(f"reference component {ref} vanishes on the loop")
    right = right / piv[:, None]
    left = left * piv[:, None]

    values = []
    stride = 1
    worst = 0.0
    while len(values) < 3 and n % stride == 0 and n // stride >= 4:
        g, seg = loop_phase_from_vectors(right[::stride], left[::stride])
        values.append(g)
        worst = max(worst, seg)
        stride *= 2
    if worst > math.pi / 2:
        raise NonConvergenceError(
            f"segment phase {worst:.3f} exceeds pi/2; increase n_segments (now {n})")
    best = _romberg(values)
    err = abs(best - _romberg(values[1:])) if len(values) > 1 else abs(values[0])
    if err > tol:
        raise NonConvergenceError(f"resolution change {err:.2e} exceeds tol {tol:.1e}")
    return PhaseResult(complex(best), Method.WilsonLoop, n, float(err))


def ground_phase_sum(hamiltonian_map, loop, levels=None, **kw):
    """Sum of the Wilson-loop phases of all (or the given) levels."""
    if levels is None:
        dim = _as_matrix(hamiltonian_map(loop.sample(0.0))).shape[0]
        levels = range(dim)
    total = 0j
    err = 0.0
    for lv in levels:
        r = wilson_loop_phase(hamiltonian_map, loop, lv, **kw)
        total += r.gamma
        err += r.error_estimate
    return PhaseResult(total, Method.WilsonLoop, loop.n_segments, err)


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------


def _curvature_from_derivs(h, da, db, level, gap_tol):
    w, v, vl = _ordered_eig(h)
    dim = w.shape[0]
    a_mat = vl @ da @ v
    b_mat = vl @ db @ v
    total = 0j
    for m in range(dim):
        if m == level:
            continue
        de = w[m] - w[level]
        if abs(de) < gap_tol:
            raise DegeneracyError(f"levels {level} and {m} degenerate", where=h)
        total += (a_mat[level, m] * b_mat[m, level] - b_mat[level, m] * a_mat[m, level]) / de ** 2
    return 1j * total


def curvature_fd(hamiltonian_map, point, level=0, plane=(0, 1), step=None, gap_tol=GAP_TOL):
    """Curvature component F_ab of ``level`` at ``point``.

    F_ab = i sum_{m != n} [<u~_n|d_a H|u_m><u~_m|d_b H|u_n> - (a <-> b)] / (E_m - E_n)^2

    with d_a H by central differences of step ``step`` (default
    1e-5 times the largest coordinate magnitude, at least 1e-5).
    """
    p = np.asarray(point, dtype=complex)
    a, b = plane
    if step is None:
        step = 1e-5 * max(1.0, float(np.max(np.abs(p))))
    if not step > 0:
        raise DomainError("step must be positive")

    def deriv(axis):
        e = np.zeros_like(p)
        e[axis] = step
        return (_as_matrix(hamiltonian_map(p + e)) - _as_matrix(hamiltonian_map(p - e))) / (2 * step)

    h = _as_matrix(hamiltonian_map(p))
    return complex(_curvature_from_derivs(h, deriv(a), deriv(b), level, gap_tol))


@dataclass(frozen=True)
class Cap:
    """Surface sigma(u, v), u in [0, 1] from the apex, v in [0, 1) around.

    The boundary u = 1 traversed with increasing v is ``boundary``.
    """

    func: Callable
    boundary: LoopPath


def spherical_cap(radius, theta_max, n_segments=2048):
    """Cap of the sphere |R| = radius around the north pole, up to polar angle theta_max."""
    r, tm = float(radius), float(theta_max)

    def f(u, v):
        t = u * tm
        a = 2.0 * math.pi * v
        return np.array([r * math.sin(t) * math.cos(a), r * math.sin(t) * math.sin(a),
                         r * math.cos(t)], dtype=complex)

    return Cap(f, theta_loop(r, tm, n_segments))


def curvature_flux(hamiltonian_map, cap, level=0, n_u=24, n_v=48, step=1e-5):
    """Flux of the curvature of ``level`` through ``cap`` by Gauss-Legendre quadrature.

    Derivatives of H are taken along the surface parameters, so the
    integrand is F_uv directly.  By Stokes this equals the Wilson-loop phase
    of ``cap.boundary``.
    """
    xu, wu = np.polynomial.legendre.leggauss(n_u)
    xu = 0.5 * (xu + 1.0)
    wu = 0.5 * wu
    vs = (np.arange(n_v) + 0.5) / n_v  # periodic direction: midpoint rule
    total = 0j
    for u, w1 in zip(xu, wu):
        for v in vs:
            h = _as_matrix(hamiltonian_map(cap.func(u, v)))
            du = (_as_matrix(hamiltonian_map(cap.func(u + step, v)))
                  - _as_matrix(hamiltonian_map(cap.func(u - step, v)))) / (2 * step)
            dv = (_as_matrix(hamiltonian_map(cap.func(u, v + step)))
                  - _as_matrix(hamiltonian_map(cap.func(u, v - step)))) / (2 * step)
            total += w1 / n_v * _curvature_from_derivs(h, du, dv, level, GAP_TOL)
    return PhaseResult(complex(total), Method.Curvature, n_u * n_v, 0.0)


# ---------------------------------------------------------------------------
# effective two-level reduction
# ---------------------------------------------------------------------------


def effective_two_level(hamiltonian_map, point, n=0):
    """Two-level Hamiltonian acting on levels n, n+1 at ``point``.

    The pair is projected onto the two basis rows where its eigenvector block
    is best conditioned; the result has eigenvalues E_n, E_{n+1} and radius
    (E_{n+1} - E_n)/2.

    Raises
    ------
    AmbiguousPairError
        Another level is closer to n or n+1 than the pair gap.
    """
    h = _as_matrix(hamiltonian_map(np.asarray(point, dtype=complex)))
    w, v, _ = _ordered_eig(h)
    dim = w.shape[0]
    if not 0 <= n < dim - 1:
        raise DomainError(f"pair ({n}, {n + 1}) out of range for dimension {dim}")
    gap = abs(w[n + 1] - w[n])
    for m in range(dim):
        if m in (n, n + 1):
            continue
        if min(abs(w[m] - w[n]), abs(w[m] - w[n + 1])) < gap:
            raise AmbiguousPairError(f"level {m} is closer to the pair ({n}, {n + 1}) than its gap")
    block = v[:, [n, n + 1]]
    best = None
    for i in range(dim):
        for j in range(i + 1, dim):
            d = abs(np.linalg.det(block[[i, j]]))
            if best is None or d > best[0]:
                best = (d, i, j)
    sub = block[[best[1], best[2]]]
    h_eff = sub @ np.diag(w[[n, n + 1]]) @ np.linalg.inv(sub)
    return TwoLevelHamiltonian.from_matrix(h_eff)


@dataclass(frozen=True)
class PhaseSplit:
    """Phase of level n split into the effective-pair monopole term and the rest."""

    pair: PhaseResult
    residual: PhaseResult
    total: PhaseResult


def phase_split(hamiltonian_map, loop, n=0, **kw):
    """Pair phase of level n from the effective two-level map, plus the residual.

    ``residual`` is the summed Wilson-loop phase of all levels other than
    n, n+1; ``total`` is the full-system Wilson-loop phase of level n.
    """
    def eff_map(p):
        return effective_two_level(hamiltonian_map, p, n).matrix()

    pair = wilson_loop_phase(eff_map, loop, 0, **kw)
    dim = _as_matrix(hamiltonian_map(loop.sample(0.0))).shape[0]
    others = [m for m in range(dim) if m not in (n, n + 1)]
    residual = (ground_phase_sum(hamiltonian_map, loop, others, **kw) if others
                else PhaseResult(0j, Method.WilsonLoop, loop.n_segments, 0.0))
    total = wilson_loop_phase(hamiltonian_map, loop, n, **kw)
    return PhaseSplit(pair, residual, total)
