import csv
import math
from dataclasses import replace

import numpy as np
import pytest

import nhgeo.adiabatic as adiabatic
from nhgeo.adiabatic import (
    CircleDrive,
    Schedule,
    Trajectory,
    evolve_pair,
    extract_geometric_phase,
    phase_history,
    schedule_drive,
)
from nhgeo.core import ComplexVec3, TwoLevelHamiltonian, eigensystem
from nhgeo.errors import (
    DomainError,
    NonConvergenceError,
    StiffnessError,
    ToleranceError,
    UnwrapError,
)
from nhgeo.phase import Method, circle_loop, monopole_phase, point_loop, wilson_loop_phase, two_level_map

TOL = 1e-10


def run_circle(rho, zeta, T, tol=TOL, lambda0=0j):
    drive = CircleDrive(rho, zeta, T, lambda0)
    traj = evolve_pair(drive, Schedule(circle_loop(rho, zeta), T), tol)
    return traj, extract_geometric_phase(traj, drive, tol).gamma


def constant(h):
    return lambda t: h


def test_schedule_validation():
    with pytest.raises(DomainError):
        Schedule(circle_loop(1, 0), 0.0)


def test_constant_hermitian():
    h = TwoLevelHamiltonian(0.4, (0.3, 0.1, 0.5))
    T = 10.0
    traj = evolve_pair(constant(h), Schedule(point_loop([0.3, 0.1, 0.5]), T))
    es = eigensystem(h)
    assert traj.times[0] == 0 and traj.times[-1] == T
    assert np.all(np.diff(traj.times) > 0)
    expect = np.exp(-1j * es.e_minus * T) * traj.psi[0]
    assert np.max(np.abs(traj.psi[-1] - expect)) < 10 * TOL
    assert traj.drift < 10 * TOL


def test_constant_dissipative():
    kappa = 0.3
    h = TwoLevelHamiltonian(0.2 - 1j * kappa, (0.3, 0.1, 0.5))
    T = 10.0
    traj = evolve_pair(constant(h), Schedule(point_loop([0.3, 0.1, 0.5]), T))
    decay = np.linalg.norm(traj.psi[-1]) / np.linalg.norm(traj.psi[0])
    assert abs(decay - math.exp(-kappa * T)) < 1e-10
    ov = np.einsum("ij,ij->i", traj.psi_tilde, traj.psi)
    assert np.max(np.abs(ov - ov[0])) < 10 * TOL
    assert abs(traj.overlap_log) < 10 * TOL


@pytest.mark.parametrize("h", [TwoLevelHamiltonian(0.4, (0.3, 0.1, 0.5)),
                               TwoLevelHamiltonian(0.2 - 0.3j, (0.3, 0.1j, 0.5 - 0.2j))])
def test_dynamical_phase_consistency(h):
    T = 20.0
    traj = evolve_pair(constant(h), Schedule(point_loop([0, 0, 1]), T))
    res = extract_geometric_phase(traj, constant(h))
    assert abs(res.gamma) < 10 * TOL * T
    assert res.method == Method.Adiabatic


def test_zero_area_loop():
    drive = CircleDrive(0.0, 1.0, 50.0)
    traj = evolve_pair(drive, Schedule(circle_loop(0.0, 1.0), 50.0))
    assert abs(extract_geometric_phase(traj, drive).gamma) < 1e-8


def test_equator_converges_like_one_over_t():
    errs = []
    for T in (250.0, 500.0, 1000.0):
        _, g = run_circle(1.0, 0.0, T)
        errs.append(abs(g - math.pi))
    assert errs[-1] < 0.02
    for a, b in zip(errs, errs[1:]):
        assert 1.6 <= a / b <= 2.4


def test_equator_drift_bound_long_run():
    traj, _ = run_circle(1.0, 0.0, 1000.0)
    assert traj.drift < 10 * TOL


def test_complex_loop_against_monopole():
    theta, eps = math.pi / 3, 0.2
    rho, zeta = math.sin(theta), math.cos(theta) - 1j * eps
    _, g = run_circle(rho, zeta, 1000.0)
    exact = monopole_phase(ComplexVec3(rho, 0, zeta)).gamma
    assert abs(g - exact) < 1e-3


def test_complex_loop_tends_to_monopole():
    # the non-adiabatic part is O(1/T): check the T -> infinity extrapolation
    theta, eps = math.pi / 3, 0.2
    rho, zeta = math.sin(theta), math.cos(theta) - 1j * eps
    exact = monopole_phase(ComplexVec3(rho, 0, zeta)).gamma
    g1 = run_circle(rho, zeta, 500.0)[1]
    g2 = run_circle(rho, zeta, 1000.0)[1]
    assert abs(2 * g2 - g1 - exact) < 1e-4
    assert abs(wilson_loop_phase(two_level_map(), circle_loop(rho, zeta), 0).gamma - exact) < 1e-8


def test_schedule_drive_uses_circle():
    sched = Schedule(circle_loop(0.5, 0.3), 7.0)
    drive = schedule_drive(sched, 0.1j)
    assert isinstance(drive, CircleDrive) and drive.total_time == 7.0
    generic = schedule_drive(Schedule(point_loop([0.1, 0.2, 0.3]), 7.0))
    assert np.allclose(generic(3.0).r_vec.as_array(), [0.1, 0.2, 0.3])


def test_compiled_and_generic_paths_agree():
    T = 20.0
    drive = CircleDrive(0.8, 0.3 - 0.1j, T, 0.1 - 0.05j)
    sched = Schedule(circle_loop(0.8, 0.3 - 0.1j), T)
    fast = evolve_pair(drive, sched)
    slow = evolve_pair(lambda t: drive(t), sched)
    # same controller, so the step sequences agree up to rounding
    assert fast.times.shape == slow.times.shape
    assert np.max(np.abs(fast.times - slow.times)) < 1e-6
    g_fast = extract_geometric_phase(fast, drive).gamma
    g_slow = extract_geometric_phase(slow, lambda t: drive(t)).gamma
    assert abs(g_fast - g_slow) < 1e-9


def test_excited_level():
    T = 400.0
    drive = CircleDrive(1.0, 0.0, T)
    traj = evolve_pair(drive, Schedule(circle_loop(1.0, 0.0), T), level="plus")
    g = extract_geometric_phase(traj, drive).gamma
    assert abs(g - math.pi) < 0.05
    assert traj.level == "plus"


def test_csv_dump(tmp_path):
    drive = CircleDrive(1.0, 0.5, 5.0)
    traj = evolve_pair(drive, Schedule(circle_loop(1.0, 0.5), 5.0))
    acc = phase_history(traj, drive)
    path = tmp_path / "traj.csv"
    traj.to_csv(path, acc)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "re_psi0", "im_psi0", "re_psi1", "im_psi1",
                       "re_psit0", "im_psit0", "re_psit1", "im_psit1", "re_phase", "im_phase"]
    assert len(rows) == len(traj.times) + 1
    last = rows[-1]
    assert float(last[0]) == 5.0
    assert complex(float(last[9]), float(last[10])) == acc[-1]
    traj.to_csv(path)
    with open(path) as fh:
        assert len(next(csv.reader(fh))) == 9


def test_stiffness_error():
    # a jump in H can never be resolved: the step size collapses
    h = lambda t: TwoLevelHamiltonian(0, (0.3, 0, 1.0 if t < 0.5 else 3.0))
    with pytest.raises(StiffnessError):
        evolve_pair(h, Schedule(point_loop([0, 0, 1]), 1.0))


def test_step_budget():
    with pytest.raises(NonConvergenceError):
        evolve_pair(constant(TwoLevelHamiltonian(0, (0, 0, 1))), Schedule(point_loop([0, 0, 1]), 10.0),
                    max_steps=5)


def test_tolerance_error(monkeypatch):
    # a loose controller lets the overlap drift past 10 tol
    monkeypatch.setattr(adiabatic, "SAFETY", 1e6)
    with pytest.raises(ToleranceError):
        run_circle(1.0, 0.3 - 0.2j, 50.0, tol=1e-10)


def test_unwrap_error():
    drive = CircleDrive(1.0, 0.0, 20.0)
    traj = evolve_pair(drive, Schedule(circle_loop(1.0, 0.0), 20.0))
    # a trajectory whose stored phase jumps by 0.6 pi between samples
    kick = np.exp(0.6j * math.pi * np.arange(len(traj.times)))
    bad = replace(traj, psi=traj.psi * kick[:, None])
    with pytest.raises(UnwrapError):
        extract_geometric_phase(bad, drive)


def test_trajectory_is_dataclass():
    t = Trajectory(np.zeros(1), np.zeros((1, 2)), np.zeros((1, 2)), 0j, 0.0, 0)
    assert t.level == "minus"
