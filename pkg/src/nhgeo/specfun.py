"""Complete elliptic integrals for complex modulus via Carlson's R_F and R_D.

The argument of :func:`complete_k` and :func:`complete_e` is the modulus k
(not the parameter m = k^2):

    K(k) = R_F(0, 1 - k^2, 1)
    E(k) = R_F(0, 1 - k^2, 1) - k^2/3 R_D(0, 1 - k^2, 1)
"""
from dataclasses import dataclass

from . import _kernels as _K
from .errors import BranchCutError, NonConvergenceError, SingularModulusError

RTOL = 1e-15
MAXITER = 64


@dataclass(frozen=True)
class EllipticResult:
    value: complex
    iterations: int
    converged: bool


def _on_cut(c):
    return c.imag == 0.0 and c.real < 0.0


def _check_args(x, y, z, name, z_nonzero=False):
    args = (x, y, z)
    for a in args:
        if _on_cut(a):
            raise BranchCutError(f"{name}: argument {a} on the negative real axis")
    if sum(1 for a in args if a == 0) > 1:
        raise BranchCutError(f"{name}: more than one argument is zero")
    if z_nonzero and z == 0:
        raise BranchCutError(f"{name}: third argument must be non-zero")


def carlson_rf(x, y, z, rtol=RTOL, maxiter=MAXITER):
    """Carlson's R_F(x, y, z) by complex duplication.

    Raises
    ------
    BranchCutError
        An argument lies on the negative real axis, or two are zero.
    NonConvergenceError
        The duplication did not converge within ``maxiter`` steps.
    """
    x, y, z = complex(x), complex(y), complex(z)
    _check_args(x, y, z, "R_F")
    val, n, conv = _K.rf_kernel(x, y, z, rtol, maxiter)
    if not conv:
        raise NonConvergenceError(f"R_F({x}, {y}, {z}) did not converge in {maxiter} steps")
    return EllipticResult(complex(val), int(n), bool(conv))


def carlson_rd(x, y, z, rtol=RTOL, maxiter=MAXITER):
    """Carlson's R_D(x, y, z) = R_J(x, y, z, z); errors as :func:`carlson_rf`."""
    x, y, z = complex(x), complex(y), complex(z)
    _check_args(x, y, z, "R_D", z_nonzero=True)
    val, n, conv = _K.rd_kernel(x, y, z, rtol, maxiter)
    if not conv:
        raise NonConvergenceError(f"R_D({x}, {y}, {z}) did not converge in {maxiter} steps")
    return EllipticResult(complex(val), int(n), bool(conv))


def complete_ke(k=None, *, kc2=None):
    """Return (K, E) for modulus ``k``.

    The complementary parameter ``kc2 = 1 - k^2`` may be given instead, which
    avoids cancellation when k is close to 1.
    """
    if kc2 is None:
        k = complex(k)
        k2 = k * k
        kc2 = 1.0 - k2
    else:
        kc2 = complex(kc2)
        k2 = 1.0 - kc2
    if kc2 == 0:
        raise SingularModulusError("K(k) diverges at k^2 = 1")
    if _on_cut(kc2):
        raise BranchCutError(f"k^2 = {k2} lies on the cut [1, inf)")
    kk, ee, n, conv = _K.complete_ke_kernel(kc2, k2, RTOL, MAXITER)
    if not conv:
        raise NonConvergenceError(f"complete elliptic integrals at k^2 = {k2} did not converge")
    return complex(kk), complex(ee)


def complete_k(k):
    """Complete elliptic integral of the first kind, modulus ``k``."""
    return complete_ke(k)[0]


def complete_e(k):
    """Complete elliptic integral of the second kind, modulus ``k``."""
    return complete_ke(k)[1]
