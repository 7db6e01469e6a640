"""Two-level non-Hermitian Hamiltonians H = lambda0 + R . sigma.

Branch conventions used throughout the package:

* the complex radius ``R = sqrt(X^2 + Y^2 + Z^2)`` is the principal square
  root (``Re R >= 0``), with ``Im R >= 0`` when ``Re R == 0``;
* the complex polar angle satisfies ``cos(theta) = Z/R`` and
  ``sin(theta) = rho/R`` with ``rho = sqrt(X^2 + Y^2)`` (principal), and
  ``exp(i phi) = (X + iY)/rho``;
* eigenvectors are returned in the fixed gauge

      u_-  = (-exp(-i phi) sin(theta/2), cos(theta/2))
      u~_- = (-exp(+i phi) sin(theta/2), cos(theta/2))
      u_+  = ( exp(-i phi) cos(theta/2), sin(theta/2))
      u~_+ = ( exp(+i phi) cos(theta/2), sin(theta/2))

  with no extra normalization phase, so that <u~_m|u_n> = delta_mn.
"""
import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoordinateSingularityError,
    DegeneracyError,
    DomainError,
    StringProximityError,
)

TOL_DEGENERACY = 1e-10
TOL_STRING = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _finite(c):
    return math.isfinite(c.real) and math.isfinite(c.imag)


@dataclass(frozen=True)
class ComplexVec3:
    """Complex field R = (x, y, z) of a two-level Hamiltonian."""

    x: complex
    y: complex
    z: complex

    def __post_init__(self):
        for name in ("x", "y", "z"):
            val = complex(getattr(self, name))
            if not _finite(val):
                raise DomainError(f"component {name}={val!r} is not finite")
            object.__setattr__(self, name, val)

    @classmethod
    def from_rho_eps(cls, rho, eps):
        """Build R = rho - i eps from a real field ``rho`` and a real ``eps``.

        ``eps`` may be a scalar (taken along z) or a real 3-vector.
        """
        eps = np.asarray(eps, dtype=float)
        if eps.ndim == 0:
            eps = np.array([0.0, 0.0, float(eps)])
        r = np.asarray(rho, dtype=float) - 1j * eps
        return cls(r[0], r[1], r[2])

    @property
    def scale(self):
        """Largest component magnitude."""
        return max(abs(self.x), abs(self.y), abs(self.z))

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=complex)

    def __iter__(self):
        return iter((self.x, self.y, self.z))


@dataclass(frozen=True)
class TwoLevelHamiltonian:
    """H = lambda0 * 1 + r_vec . sigma."""

    lambda0: complex
    r_vec: ComplexVec3

    def __post_init__(self):
        lam = complex(self.lambda0)
        if not _finite(lam):
            raise DomainError("lambda0 is not finite")
        object.__setattr__(self, "lambda0", lam)
        if not isinstance(self.r_vec, ComplexVec3):
            object.__setattr__(self, "r_vec", ComplexVec3(*self.r_vec))

    def matrix(self):
        """Dense 2x2 matrix ``lambda0 + x sx + y sy + z sz``."""
        lam = self.lambda0
        x, y, z = self.r_vec
        return np.array([[lam + z, x - 1j * y], [x + 1j * y, lam - z]], dtype=complex)

    @classmethod
    def from_matrix(cls, m):
        """Inverse of :meth:`matrix` (Pauli decomposition)."""
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
        lam = 0.5 * (m[0, 0] + m[1, 1])
        z = 0.5 * (m[0, 0] - m[1, 1])
        x = 0.5 * (m[0, 1] + m[1, 0])
        y = 0.5j * (m[0, 1] - m[1, 0])
        return cls(lam, ComplexVec3(x, y, z))


@dataclass(frozen=True)
class ComplexAngles:
    """Complex spherical angles of a field, with the radius they refer to."""

    theta: complex
    phi: complex
    radius: complex = 1.0

    def reconstruct(self):
        """(R sin t cos p, R sin t sin p, R cos t)."""
        r, t, p = self.radius, self.theta, self.phi
        st = cmath.sin(t)
        return ComplexVec3(r * st * cmath.cos(p), r * st * cmath.sin(p), r * cmath.cos(t))


class DegeneracyKind(enum.Enum):
    NonDegenerate = "NonDegenerate"
    DiabolicPoint = "DiabolicPoint"
    ExceptionalPoint = "ExceptionalPoint"


@dataclass(frozen=True)
class DegeneracyClass:
    kind: DegeneracyKind
    residual: float

    Kind = DegeneracyKind


@dataclass(frozen=True)
class BiorthogonalEigensystem:
    """Energies and biorthonormal eigenvector pairs of a two-level H.

    ``ut_*`` are row (left) vectors: ``ut @ H = E * ut``.
    """

    e_minus: complex
    e_plus: complex
    u_minus: np.ndarray
    u_plus: np.ndarray
    ut_minus: np.ndarray
    ut_plus: np.ndarray
    radius: complex
    angles: ComplexAngles

    def right(self, level):
        return self.u_minus if _level_sign(level) < 0 else self.u_plus

    def left(self, level):
        return self.ut_minus if _level_sign(level) < 0 else self.ut_plus

    def energy(self, level):
        return self.e_minus if _level_sign(level) < 0 else self.e_plus


def _level_sign(level):
    if level in ("minus", "ground", -1, 0):
        return -1
    if level in ("plus", "excited", 1):
        return 1
    raise DomainError(f"unknown level {level!r}; use 'minus'/'plus'")


def _fix_branch(r):
    if r.real == 0.0:
        return complex(0.0, abs(r.imag))
    return r


def complex_radius(v):
    """Branch-fixed complex radius ``sqrt(x^2 + y^2 + z^2)``.

    Principal square root; purely imaginary results are returned with
    ``Im R >= 0``.
    """
    return _fix_branch(cmath.sqrt(v.x * v.x + v.y * v.y + v.z * v.z))


def radius_array(x, y, z):
    """Vectorized :func:`complex_radius` for broadcastable arrays."""
    r = np.sqrt(np.asarray(x, complex) ** 2 + np.asarray(y, complex) ** 2
                + np.asarray(z, complex) ** 2)
    return np.where(r.real == 0.0, 1j * np.abs(r.imag), r)


def classify_degeneracy(v, tol=TOL_DEGENERACY, scale=1.0):
    """Classify ``v`` as non-degenerate, diabolic or exceptional.

    The threshold is ``tol * scale``; pass ``scale=v.scale`` for a relative
    test.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    thr = tol * scale
    res = abs(complex_radius(v))
    if res > thr:
        kind = DegeneracyKind.NonDegenerate
    elif v.scale <= thr:
        kind = DegeneracyKind.DiabolicPoint
    else:
        kind = DegeneracyKind.ExceptionalPoint
    return DegeneracyClass(kind, res)


def _check_degenerate(v, r, tol_degeneracy):
    scale = v.scale
    if scale == 0.0 or abs(r) <= tol_degeneracy * scale:
        cls = classify_degeneracy(v, tol_degeneracy, scale if scale > 0 else 1.0)
        raise DegeneracyError(
            f"levels coincide: |R|={abs(r):.3e} ({cls.kind.value})",
            classification=cls, where=v)


def _azimuth(v, rho):
    """Return (phi, exp(-i phi)) for the field ``v`` with transverse radius ``rho``."""
    if v.x == 0 and v.y == 0:
        return 0j, 1.0 + 0j
    if abs(rho) <= 1e-12 * max(abs(v.x), abs(v.y)):
        raise CoordinateSingularityError(
            f"x^2 + y^2 vanishes with x={v.x}, y={v.y}: azimuth undefined")
    e_plus = (v.x + 1j * v.y) / rho
    return -1j * cmath.log(e_plus), (v.x - 1j * v.y) / rho


def spherical_angles(v, tol_degeneracy=TOL_DEGENERACY, tol_string=TOL_STRING):
    """Complex polar and azimuthal angles of ``v``.

    Raises
    ------
    DegeneracyError
        ``|R| <= tol_degeneracy * v.scale``.
    StringProximityError
        ``|1 + cos(theta)| <= tol_string`` (south pole, where the azimuth
        of the eigenvectors is ill-defined).
    CoordinateSingularityError
        ``x^2 + y^2 = 0`` with ``x, y`` not both zero.
    """
    r = complex_radius(v)
    _check_degenerate(v, r, tol_degeneracy)
    cos_t = v.z / r
    if abs(1.0 + cos_t) <= tol_string:
        raise StringProximityError(f"|1 + cos(theta)| = {abs(1 + cos_t):.3e} at {v}")
    rho = cmath.sqrt(v.x * v.x + v.y * v.y)
    theta = -1j * cmath.log((v.z + 1j * rho) / r)
    phi, _ = _azimuth(v, rho)
    return ComplexAngles(theta, phi, r)


def eigensystem(h, tol_degeneracy=TOL_DEGENERACY, tol_string=TOL_STRING):
    """Biorthogonal eigensystem of ``h`` in the fixed gauge (module docstring).

    ``u_minus`` (energy ``lambda0 - R``) is the ground level.
    """
    v = h.r_vec
    ang = spherical_angles(v, tol_degeneracy, tol_string)
    rho = cmath.sqrt(v.x * v.x + v.y * v.y)
    _, emi = _azimuth(v, rho)
    epi = 1.0 / emi
    c = cmath.cos(0.5 * ang.theta)
    s = cmath.sin(0.5 * ang.theta)
    r = ang.radius
    return BiorthogonalEigensystem(
        e_minus=h.lambda0 - r,
        e_plus=h.lambda0 + r,
        u_minus=np.array([-emi * s, c]),
        u_plus=np.array([emi * c, s]),
        ut_minus=np.array([-epi * s, c]),
        ut_plus=np.array([epi * c, s]),
        radius=r,
        angles=ang,
    )
