"""Adiabatic transport of the adjoint pair i d|psi>/dt = H|psi>, -i d<psi~|/dt = <psi~|H.

The geometric phase is read off dynamically as

    gamma = -i log w(T),   w(t) = <u~(t)|psi(t)> / <u~(0)|psi(0)> exp(i int_0^t E dt')

with the logarithm unwrapped step by step along the stored trajectory.  The
instantaneous left vector is taken in the gauge u[1] = 1,

    u~ = (-(X + iY), R + Z) / (2R),

with R followed continuously from the initial level, so the phase carries the
same 2 pi branch as the Wilson loop and the closed forms.
"""
import csv
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from . import _kernels as _K
from .core import TwoLevelHamiltonian, eigensystem, radius_array
from .errors import DomainError, NonConvergenceError, StiffnessError, ToleranceError, UnwrapError
from .phase import LoopPath, Method, PhaseResult

DEFAULT_TOL = 1e-10
# the controller bounds the local error per unit time; running it this much
# tighter keeps the drift of <psi~|psi> below 10 tol over long runs
SAFETY = 0.1
MAX_STEPS = 10_000_000


class Ramp(enum.Enum):
    Linear = "Linear"


@dataclass(frozen=True)
class Schedule:
    loop: LoopPath
    total_time: float
    ramp: Ramp = Ramp.Linear

    def __post_init__(self):
        if not self.total_time > 0:
            raise DomainError("total_time must be positive")


@dataclass(frozen=True)
class CircleDrive:
    """h(t) = lambda0 + (rho cos 2 pi t/T, rho sin 2 pi t/T, zeta) . sigma.

    Callable like any ``h_of_t``; :func:`evolve_pair` recognises it and uses
    the compiled integrator.
    """

    rho: complex
    zeta: complex
    total_time: float
    lambda0: complex = 0j

    def __call__(self, t):
        a = 2.0 * math.pi * t / self.total_time
        return TwoLevelHamiltonian(self.lambda0, (self.rho * math.cos(a), self.rho * math.sin(a),
                                                  self.zeta))

    def fields(self, times):
        a = 2.0 * np.pi * np.asarray(times) / self.total_time
        n = a.shape[0]
        lam = np.full(n, complex(self.lambda0))
        return lam, self.rho * np.cos(a), self.rho * np.sin(a), np.full(n, complex(self.zeta))

    def params(self):
        return np.array([self.lambda0, self.rho, self.zeta, self.total_time], dtype=complex)


def schedule_drive(schedule, lambda0=0j):
    """h_of_t following ``schedule.loop`` linearly in time."""
    loop, T = schedule.loop, schedule.total_time
    if loop.circle is not None:
        return CircleDrive(loop.circle[0], loop.circle[1], T, lambda0)

    def h_of_t(t):
        return TwoLevelHamiltonian(lambda0, tuple(loop.sample(t / T)))

    return h_of_t


@dataclass(frozen=True)
class Trajectory:
    """Accepted steps of the adjoint pair.

    ``overlap_log`` is log(<psi~(T)|psi(T)> / <psi~(0)|psi(0)>), which
    vanishes for an exact integration.
    """

    times: np.ndarray
    psi: np.ndarray
    psi_tilde: np.ndarray
    overlap_log: complex
    drift: float
    rejected: int
    level: str = "minus"

    def to_csv(self, path, accumulated=None):
        """Write t, Re/Im of psi and psi~ and (optionally) the accumulated phase."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            head = ["t", "re_psi0", "im_psi0", "re_psi1", "im_psi1",
                    "re_psit0", "im_psit0", "re_psit1", "im_psit1"]
            if accumulated is not None:
                head += ["re_phase", "im_phase"]
            w.writerow(head)
            for i, t in enumerate(self.times):
                row = [repr(float(t))]
                for c in (*self.psi[i], *self.psi_tilde[i]):
                    row += [repr(float(c.real)), repr(float(c.imag))]
                if accumulated is not None:
                    row += [repr(float(accumulated[i].real)), repr(float(accumulated[i].imag))]
                w.writerow(row)


def _generic_rhs(h_of_t):
    def hfun(t, params):
        m = h_of_t(t).matrix()
        return m[0, 0], m[0, 1], m[1, 0], m[1, 1]

    return _K.bind_integrator(_K.pair_rhs_from(hfun))


def evolve_pair(h_of_t, schedule, tol=DEFAULT_TOL, level="minus", max_steps=MAX_STEPS):
    """Integrate the adjoint pair from the instantaneous eigenpair at t = 0.

    Dormand-Prince 5(4) with the local error of each vector kept below
    ``tol`` per unit time.

    Raises
    ------
    StiffnessError
        The step size underflowed (typically close to an exceptional point).
    ToleranceError
        <psi~|psi>, relative to |psi~| |psi|, drifted by more than 10 tol.
    """
    T = float(schedule.total_time)
    es = eigensystem(h_of_t(0.0))
    u, ut = es.right(level), es.left(level)
    y0 = np.concatenate([u, ut]).astype(complex)
    scale = max(1.0, abs(es.radius), abs(h_of_t(0.0).lambda0))
    h_init = min(0.01 / scale, T)
    ktol = SAFETY * tol
    if isinstance(h_of_t, CircleDrive) and h_of_t.total_time == T:
        ts, ys, rejected, status = _K.integrate_circle(h_of_t.params(), T, y0, ktol, h_init,
                                                       max_steps)
    else:
        ts, ys, rejected, status = _generic_rhs(h_of_t)(None, T, y0, ktol, h_init, max_steps)
    if status == 1:
        raise StiffnessError(f"step size underflow at t = {ts[-1]:.6g} of {T}")
    if status == 2:
        raise NonConvergenceError(f"{max_steps} steps exhausted at t = {ts[-1]:.6g} of {T}")
    psi, psit = ys[:, :2], ys[:, 2:]
    ov = np.einsum("ij,ij->i", psit, psi)
    norms = np.linalg.norm(psit, axis=1) * np.linalg.norm(psi, axis=1)
    drift = float(np.max(np.abs(ov - ov[0]) / norms))
    if drift > 10.0 * tol:
        raise ToleranceError(f"<psi~|psi> drifted by {drift:.2e} > {10 * tol:.1e}")
    return Trajectory(ts, psi, psit, complex(np.log(ov[-1] / ov[0])), drift, int(rejected),
                      str(level))


def _fields(h_of_t, times):
    if isinstance(h_of_t, CircleDrive):
        return h_of_t.fields(times)
    hs = [h_of_t(float(t)) for t in times]
    lam = np.array([h.lambda0 for h in hs])
    r = np.array([h.r_vec.as_array() for h in hs])
    return lam, r[:, 0], r[:, 1], r[:, 2]


def phase_history(traj, h_of_t):
    """Accumulated phase -i log w(t) at every stored step (unwrapped).

    Raises
    ------
    UnwrapError
        A per-step phase increment exceeds pi/2.
    """
    t = traj.times
    lam, x, y, z = _fields(h_of_t, t)
    r = radius_array(x, y, z)
    # follow R continuously from the initial level
    flip = np.ones(r.shape[0])
    flip[1:] = np.where(np.abs(r[1:] - r[:-1]) <= np.abs(r[1:] + r[:-1]), 1.0, -1.0)
    rc = np.cumprod(flip) * r
    if traj.level in ("plus", "excited", 1):
        rc = -rc
    energy = lam - rc
    left = np.stack([-(x + 1j * y), rc + z], axis=1) / (2.0 * rc)[:, None]
    w = np.einsum("ij,ij->i", left, traj.psi)
    # cumulative_simpson drops imaginary parts, so integrate them separately
    dyn = (cumulative_simpson(energy.real, x=t, initial=0.0)
           + 1j * cumulative_simpson(energy.imag, x=t, initial=0.0))
    w = w / w[0] * np.exp(1j * dyn)
    incr = np.log(w[1:] / w[:-1])
    bad = np.nonzero(np.abs(incr.imag) > math.pi / 2)[0]
    if bad.size:
        j = int(bad[0])
        raise UnwrapError(f"phase increment {incr[j].imag:.3f} at t = {t[j + 1]:.6g}")
    acc = np.zeros(t.shape[0], dtype=complex)
    acc[1:] = -1j * np.cumsum(incr)
    return acc


def extract_geometric_phase(traj, h_of_t, tol=DEFAULT_TOL):
    """Geometric phase of a closed adiabatic trajectory.

    ``error_estimate`` is the integrator-level bound (10 tol) only; the
    non-adiabatic error is O(1/T) and is not included.
    """
    acc = phase_history(traj, h_of_t)
    return PhaseResult(complex(acc[-1]), Method.Adiabatic, int(traj.times.shape[0]), 10.0 * tol)
