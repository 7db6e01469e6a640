"""Dissipative transverse-field Ising chain.

After fermionization each pair of quasimomenta (k, -k) is a two-level system

    H(k) = -i J delta + 2J (sin(ka) cos(phi), sin(ka) sin(phi), g - cos(ka)) . sigma

with ``g = h - i delta``.  The chain ground state fills the lower mode of every
k > 0, so its geometric phase is a sum of monopole phases and the per-spin
average ``gamma_g`` acts as an order parameter.

Mode energies are taken on the branch of ``sqrt(g^2 - 2g cos(ka) + 1)`` that is
analytic in k.  It coincides with the principal branch (and hence with the
``minus`` level of :mod:`nhgeo.core`) except where ``h < 1`` and
``h^2 + delta^2 > 1``; there the continuously connected ground mode is the
``plus`` level of the principal-branch eigensystem.  ``ModeSpectrum.branch_sign``
records which.
"""
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as _K
from .core import (
    TOL_DEGENERACY,
    ComplexVec3,
    TwoLevelHamiltonian,
    complex_radius,
)
from .errors import (
    DegeneracyError,
    DomainError,
    ExceptionalCircleError,
    NearExceptionalWarning,
    NonConvergenceError,
    SingularArgumentError,
)
from .specfun import MAXITER, RTOL

CIRCLE_TOL = 1e-12
BAND = 1e-3
QUAD_RTOL = 1e-10
QUAD_RTOL_BAND = 1e-6
QUAD_LIMIT = 2000
EPSABS = 1e-14


@dataclass(frozen=True)
class IsingParams:
    """Chain parameters; ``g = h - i delta`` is derived on access."""

    h_field: float
    delta: float = 0.0
    j_coupling: float = 1.0
    phi: float = 0.0
    n_sites: int = 1024
    lattice_a: float = 1.0

    def __post_init__(self):
        if not self.j_coupling > 0:
            raise DomainError("j_coupling must be positive")
        if not self.h_field >= 0:
            raise DomainError("h_field must be non-negative")
        if not self.delta >= 0:
            raise DomainError("delta must be non-negative")
        if not self.lattice_a > 0:
            raise DomainError("lattice_a must be positive")
        if int(self.n_sites) != self.n_sites or self.n_sites < 2 or self.n_sites % 2:
            raise DomainError("n_sites must be an even integer >= 2")

    @property
    def g(self):
        return complex(self.h_field, -self.delta)

    @property
    def epsilon0(self):
        return -1j * self.j_coupling * self.delta

    def momenta(self):
        """Positive half-integer quasimomenta (2j - 1) pi / (N a), j = 1..N/2."""
        n = self.n_sites
        return (2.0 * np.arange(1, n // 2 + 1) - 1.0) * np.pi / (n * self.lattice_a)


@dataclass(frozen=True)
class ModeSpectrum:
    """Per-mode quantities on the ground-following branch.

    ``energies`` are eps(k) = 2J sqrt(g^2 - 2g cos(ka) + 1) and ``cos_theta``
    the matching Bogoliubov cosines; ``branch_sign`` is +1 where these agree
    with the principal-branch eigensystem and -1 where they are its
    ``plus`` level.
    """

    momenta: np.ndarray
    energies: np.ndarray
    cos_theta: np.ndarray
    branch_sign: np.ndarray
    epsilon0: complex


class QptOrder(enum.Enum):
    First = "First"
    Second = "Second"


@dataclass(frozen=True)
class QptDiagnosis:
    delta: float
    h_c: float
    k_c: float
    order: QptOrder
    jump: complex


def mode_hamiltonian(p, k):
    """Two-level Hamiltonian of the (k, -k) pair."""
    ka = k * p.lattice_a
    if not 0 < ka < math.pi:
        raise DomainError(f"k a = {ka} outside (0, pi)")
    j2 = 2.0 * p.j_coupling
    s = math.sin(ka)
    r = ComplexVec3(j2 * s * math.cos(p.phi), j2 * s * math.sin(p.phi), j2 * (p.g - math.cos(ka)))
    return TwoLevelHamiltonian(p.epsilon0, r)


def _mode_radius(g, ka):
    return np.array([_K.mode_radius_kernel(g, float(x)) for x in np.atleast_1d(ka)])


def mode_spectrum(p):
    """Energies and Bogoliubov cosines of all positive modes."""
    ks = p.momenta()
    ka = ks * p.lattice_a
    g = p.g
    rad = _mode_radius(g, ka)
    principal = np.sqrt(g * g - 2.0 * g * np.cos(ka) + 1.0)
    sign = np.where(np.abs(rad - principal) <= np.abs(rad + principal), 1, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_t = (g - np.cos(ka)) / rad
    return ModeSpectrum(ks, 2.0 * p.j_coupling * rad, cos_t, sign, p.epsilon0)


def bogoliubov_angle(p, k):
    """cos(theta_k) = Z/R of :func:`mode_hamiltonian` (principal branch).

    Raises
    ------
    DegeneracyError
        The mode sits at an exceptional point.
    """
    h = mode_hamiltonian(p, k)
    v = h.r_vec
    r = complex_radius(v)
    if _degenerate(r, v.scale):
        raise DegeneracyError(f"mode k={k} is degenerate", where=k)
    return v.z / r


def _degenerate(r, scale):
    # backward-error test on R^2: at an exceptional point a rounding-level
    # perturbation of H already moves |R| by O(sqrt(eps))
    return np.abs(r) ** 2 <= TOL_DEGENERACY * scale ** 2


def _check_modes(p, spec):
    j2 = 2.0 * p.j_coupling
    ka = spec.momenta * p.lattice_a
    scale = j2 * np.maximum(np.abs(np.sin(ka)), np.abs(p.g - np.cos(ka)))
    bad = np.nonzero(_degenerate(spec.energies, scale))[0]
    if bad.size:
        k = float(spec.momenta[bad[0]])
        raise DegeneracyError(f"mode k={k} is degenerate", where=k)


def ground_phase_finite(p):
    """Sum over k > 0 of the ground-mode monopole phases pi (1 - cos theta_k)."""
    spec = mode_spectrum(p)
    _check_modes(p, spec)
    return complex(np.pi * np.sum(1.0 - spec.cos_theta))


def overall_phase_finite(p):
    """(2 pi / N) sum_{k>0} (1 - cos theta_k); tends to :func:`overall_phase_thermo`."""
    spec = mode_spectrum(p)
    _check_modes(p, spec)
    return complex(2.0 * np.pi / p.n_sites * np.sum(1.0 - spec.cos_theta))


def circle_distance(g):
    """| |g| - 1 |, the distance of (h, delta) from the exceptional circle."""
    return abs(abs(complex(g)) - 1.0)


def _check_circle(g):
    if g == 1.0:
        return
    if circle_distance(g) <= CIRCLE_TOL:
        raise ExceptionalCircleError(f"g={g} is on the exceptional circle h^2 + delta^2 = 1")


def overall_phase_thermo(g, rtol=QUAD_RTOL, full_output=False):
    """Thermodynamic-limit overall phase by adaptive Gauss-Kronrod quadrature.

    Integrates 1 - (g - cos x)/sqrt(g^2 - 2g cos x + 1) over [0, pi].  Within
    ``BAND`` of the exceptional circle the tolerance is relaxed to
    ``QUAD_RTOL_BAND`` and a :class:`NearExceptionalWarning` is issued.

    Returns
    -------
    complex, or (complex, float) with ``full_output``: value and error estimate.
    """
    g = complex(g)
    _check_circle(g)
    if circle_distance(g) < BAND and g != 1.0:
        rtol = max(rtol, QUAD_RTOL_BAND)
        warnings.warn(f"g={g} within {BAND} of the exceptional circle; "
                      f"quadrature tolerance relaxed to {rtol}", NearExceptionalWarning,
                      stacklevel=2)
    breaks = [0.0, math.pi]
    if -1.0 < g.real < 1.0:
        breaks.insert(1, math.acos(g.real))
    # absolute floor: the integrand is O(1) and cancels to the phase itself
    val, err, conv, _ = _K.b4_quad_kernel(g, np.array(breaks), EPSABS, rtol, QUAD_LIMIT)
    if not conv:
        raise NonConvergenceError(f"B4 quadrature at g={g} reached error {err:.2e}")
    val = complex(val)
    return (val, float(err)) if full_output else val


def _closed_status(g, status):
    if status == _K.SINGULAR:
        raise SingularArgumentError(f"closed form singular at g={g}")
    if status == _K.ON_CUT:
        raise ExceptionalCircleError(f"g={g} is on the exceptional circle h^2 + delta^2 = 1")
    if status == _K.NOT_CONVERGED:
        raise NonConvergenceError(f"elliptic integrals at g={g} did not converge")


def overall_phase_closed(g):
    """pi + (1-g)/g K(m) - (1+g)/g E(m) with modulus m = 2 sqrt(g)/(1+g).

    Power series are used for |g| < 0.05 and |g| > 20.  At g = 1 (the
    Hermitian critical point) the limit pi - 2 is returned.
    """
    g = complex(g)
    if g == 1.0:
        return math.pi - 2.0 + 0j
    _check_circle(g)
    val, status = _K.overall_phase_closed_kernel(g, RTOL, MAXITER)
    _closed_status(g, status)
    return complex(val)


def overall_phase_closed_array(gs):
    """Vectorized :func:`overall_phase_closed`; failing points come back as NaN.

    Points on the exceptional circle are not detected here beyond the exact
    cut test of the kernel; screen them with :func:`circle_distance`.
    """
    gs = np.ascontiguousarray(np.asarray(gs, dtype=complex).ravel())
    out, status = _K.overall_phase_closed_many(gs, RTOL, MAXITER)
    out = np.where(gs == 1.0, math.pi - 2.0, out)
    out[(status != _K.OK) & (gs != 1.0)] = complex(np.nan, np.nan)
    return out


def overall_phase_derivative(g):
    """d gamma_g / dh (= d gamma_g / dg) from the closed form."""
    g = complex(g)
    _check_circle(g)
    val, status = _K.overall_phase_derivative_kernel(g, RTOL, MAXITER)
    _closed_status(g, status)
    return complex(val)


def ground_energy(g, delta, j=1.0):
    """Ground energy per spin, -i J delta - (2J/pi) (1 + g) E(2 sqrt(g)/(1+g))."""
    g = complex(g)
    val, status = _K.elliptic_energy_kernel(g, RTOL, MAXITER)
    _closed_status(g, status)
    return -1j * j * delta - 2.0 * j / math.pi * complex(val)


def magnetization_from_phase(g):
    """gamma_g / pi - 1, the transverse magnetization per spin."""
    return overall_phase_closed(g) / math.pi - 1.0


def critical_field(delta):
    """h_c on the exceptional circle, evaluated as cos(arcsin(delta))."""
    return math.cos(math.asin(delta))


def exceptional_point(delta, a=1.0, etas=(0.04, 0.02, 0.01)):
    """Locate the exceptional point for decay rate ``delta`` and classify the QPT.

    The jump of gamma_g across h_c is obtained from two-sided differences
    ``overall_phase_thermo(h_c + eta) - overall_phase_thermo(h_c - eta)``,
    Richardson-extrapolated to eta -> 0 over ``etas`` (each half the previous).
    """
    delta = float(delta)
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta={delta} outside [0, 1]")
    if not a > 0:
        raise DomainError("lattice spacing must be positive")
    h_c = critical_field(delta)
    k_c = math.asin(delta) / a
    if delta == 0.0:
        return QptDiagnosis(delta, h_c, k_c, QptOrder.Second, 0j)
    diffs = []
    with warnings.catch_warnings():
        # near delta = 1 the sample line is tangent to the circle
        warnings.simplefilter("ignore", NearExceptionalWarning)
        for eta in etas:
            lo = overall_phase_thermo(complex(h_c - eta, -delta))
            hi = overall_phase_thermo(complex(h_c + eta, -delta))
            diffs.append(hi - lo)
    # Neville table for a polynomial in eta, eta halving at each level
    table = list(diffs)
    for level in range(1, len(table)):
        fac = 2.0 ** level
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
    return QptDiagnosis(delta, h_c, k_c, QptOrder.First, complex(table[0]))
