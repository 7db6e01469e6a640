import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhgeo.core import ComplexVec3, complex_radius
from nhgeo.errors import ConfigError, DomainError
from nhgeo.ising import critical_field, overall_phase_derivative
from nhgeo.scan import (
    FLAG_NEAR_EP,
    FLAG_OK,
    FLAG_SINGULAR,
    SCHEMA_VERSION,
    Axis,
    PhaseScanGrid,
    ScanConfig,
    adiabatic_bench,
    ep_trace,
    mode_table,
    run_scan,
)


def two_level_config(**kw):
    base = dict(mode="TwoLevelMap", grid=(Axis("r", 0, 2, 21), Axis("z", -1, 1, 21)), fixed={"eps": 0.0})
    base.update(kw)
    return ScanConfig(**base)


def test_axis_parse_and_validation():
    ax = Axis.parse("h=0:2:200")
    assert ax == Axis("h", 0.0, 2.0, 200)
    assert len(ax.values()) == 200 and ax.values()[-1] == 2.0
    for bad in ("h=0:2", "h0:2:3", "h=a:2:3"):
        with pytest.raises(ConfigError):
            Axis.parse(bad)
    with pytest.raises(ConfigError):
        Axis("h", 0, 1, 1)
    with pytest.raises(ConfigError):
        Axis("h", 1, 1, 5)


def test_config_validation():
    with pytest.raises(ConfigError):
        ScanConfig(mode="Nope", grid=(Axis("h", 0, 1, 3),))
    with pytest.raises(ConfigError):
        ScanConfig(mode="IsingMap", grid=(Axis("q", 0, 1, 3),))
    with pytest.raises(ConfigError):
        ScanConfig(mode="IsingMap", grid=(Axis("h", 0, 1, 3),), fixed={"h": 1.0})
    with pytest.raises(ConfigError):
        ScanConfig(mode="IsingMap", grid=())
    with pytest.raises(ConfigError):
        ScanConfig(mode="IsingMap", grid=(Axis("h", 0, 1, 3),), format="xml")
    with pytest.raises(ConfigError):
        ScanConfig(mode="IsingMap", grid=(Axis("h", 0, 1, 3),), fd_step=0)
    with pytest.raises(ConfigError):
        ScanConfig(mode="IsingMap", grid=(Axis("h", 0, 1, 3),), threads=0)
    with pytest.raises(ConfigError):
        ScanConfig(mode="AdiabaticBench", grid=(Axis("rho", 0, 1, 3),))


def test_trivial_grid_all_ok():
    cfg = ScanConfig(mode="IsingMap", grid=(Axis("h", 1.5, 2.5, 3), Axis("delta", 0.1, 0.3, 3)))
    grid = run_scan(cfg)
    assert len(grid.flags) == 9 and grid.values.shape == (9, 4)
    assert all(f == FLAG_OK for f in grid.flags)
    assert np.all(np.isfinite(grid.values))


def test_cell_count_is_product_of_steps():
    grid = run_scan(two_level_config(grid=(Axis("r", 0.1, 2, 5), Axis("z", -1, 1, 7), Axis("eps", 0, 0.3, 2)),
                                     fixed={}))
    assert len(grid.flags) == 5 * 7 * 2 == grid.values.shape[0]


def test_two_level_step_function():
    grid = run_scan(two_level_config())
    coords = np.array(grid.coordinates())
    re = grid.values[:, 0]
    # on the r = 0 line Re gamma is 0 above the origin and 2 pi below
    axis = coords[:, 0] == 0
    assert np.all(re[axis & (coords[:, 1] > 0)] == 0)
    assert np.allclose(re[axis & (coords[:, 1] < 0)], 2 * math.pi, rtol=0, atol=1e-15)
    # and the step sharpens as r -> 0
    width = [np.ptp(re[(coords[:, 0] == r) & (np.abs(coords[:, 1]) <= 0.2)]) for r in (0.1, 0.5, 1.0)]
    assert width[0] > width[1] > width[2]
    origin = (coords[:, 0] == 0) & (coords[:, 1] == 0)
    assert grid.flags[int(np.nonzero(origin)[0][0])] == FLAG_SINGULAR


def test_ising_rows():
    cfg = ScanConfig(mode="IsingMap", grid=(Axis("h", 0.0, 2.0, 201), Axis("delta", 0.0, 0.5, 2)))
    grid = run_scan(cfg)
    coords = np.array(grid.coordinates())
    for d, continuous in ((0.0, True), (0.5, False)):
        rows = coords[:, 1] == d
        h = coords[rows, 0]
        re = grid.values[rows, 0]
        finite = np.isfinite(re)
        jumps = np.abs(np.diff(re[finite]))
        if continuous:
            assert jumps.max() < 0.1
        else:
            i = int(np.argmax(jumps))
            assert jumps[i] > 0.5
            assert h[finite][i] <= critical_field(0.5) <= h[finite][i + 1]


def test_derivative_map_columns():
    cfg = ScanConfig(mode="DerivativeMap", grid=(Axis("h", 1.5, 2.5, 3),), fixed={"delta": 0.2},
                     fd_step=1e-4)
    grid = run_scan(cfg)
    assert grid.fields == ["re_gamma", "im_gamma", "re_dgamma_dh", "im_dgamma_dh",
                           "re_d2gamma_dh2", "im_d2gamma_dh2"]
    d = overall_phase_derivative(complex(2.0, -0.2))
    assert abs(complex(*grid.values[1, 2:4]) - d) < 1e-7


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_byte_determinism_across_threads(fmt, tmp_path):
    outs = []
    for threads in (1, 4, 8):
        path = tmp_path / f"out{threads}.{fmt}"
        cfg = two_level_config(grid=(Axis("r", 0, 2, 15), Axis("z", -1, 1, 15), Axis("eps", 0, 0.5, 3)),
                               fixed={}, format=fmt, threads=threads, output_path=str(path))
        run_scan(cfg)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_round_trip_json_and_csv():
    grid = run_scan(two_level_config())
    back = PhaseScanGrid.from_json(grid.to_json())
    assert back.equals(grid)
    back = PhaseScanGrid.from_csv(grid.to_csv())
    assert back.equals(grid)
    assert back.to_csv() == grid.to_csv()


def test_schema_version_fields():
    grid = run_scan(two_level_config())
    doc = json.loads(grid.to_json())
    assert doc["schema_version"] == SCHEMA_VERSION
    assert grid.to_csv().splitlines()[0] == f"# schema_version: {SCHEMA_VERSION}"
    doc["schema_version"] = 99
    with pytest.raises(ConfigError):
        PhaseScanGrid.from_json(json.dumps(doc))


def test_no_unflagged_non_finite():
    cfg = ScanConfig(mode="IsingMap", grid=(Axis("h", 0.0, 1.2, 61), Axis("delta", 0.0, 0.9, 46)))
    grid = run_scan(cfg)
    for row, flag in zip(grid.values, grid.flags):
        if not np.all(np.isfinite(row)):
            assert flag in (FLAG_NEAR_EP, FLAG_SINGULAR)


@given(st.floats(0.0, 2.0), st.floats(0.0, 0.95))
@settings(max_examples=40, deadline=None)
def test_flag_completeness_ising(h, d):
    band = 1e-3
    cfg = ScanConfig(mode="IsingMap", grid=(Axis("h", h, h + 1e-4, 2),), fixed={"delta": d}, band=band)
    grid = run_scan(cfg)
    for (hh,), row, flag in zip(grid.coordinates(), grid.values, grid.flags):
        if abs(math.hypot(hh, d) - 1) < band:
            assert flag in (FLAG_NEAR_EP, FLAG_SINGULAR)
        if not np.all(np.isfinite(row)):
            assert flag != FLAG_OK


@given(st.floats(0.0, 2e-3), st.floats(-2e-3, 2e-3), st.floats(0.0, 2.0))
@settings(max_examples=60, deadline=None)
def test_flag_completeness_two_level(r, z, eps):
    band = 1e-3
    cfg = two_level_config(grid=(Axis("r", r, r + 1e-5, 2),), fixed={"z": z, "eps": eps}, band=band)
    grid = run_scan(cfg)
    for (rr,), flag in zip(grid.coordinates(), grid.flags):
        v = ComplexVec3(rr, 0, complex(z, -eps))
        if abs(complex_radius(v)) < band * max(1.0, v.scale):
            assert flag in (FLAG_NEAR_EP, FLAG_SINGULAR)


def test_ep_trace_rows():
    table = ep_trace([0.0, 0.5, 0.6])
    rows = {r[0]: r for r in table.rows}
    assert rows[0.0][1:4] == [1.0, 0.0, "Second"] and rows[0.0][4] == 0
    assert abs(rows[0.6][1] - 0.8) < 1e-15
    assert abs(rows[0.5][4]) > 0.1
    for r in table.rows:
        assert abs(r[1] ** 2 + r[0] ** 2 - 1) < 1e-12
    with pytest.raises(DomainError):
        ep_trace([1.5])


def test_ep_trace_threads_identical():
    deltas = np.linspace(0, 1, 11)
    assert ep_trace(deltas).to_csv() == ep_trace(deltas, threads=4).to_csv()


def test_adiabatic_bench_equator():
    table = adiabatic_bench(times=[250.0, 500.0, 1000.0])
    errs = [r[3] for r in table.rows]
    assert errs[0] > errs[1] > errs[2]
    for r in table.rows[1:]:
        assert 1.6 <= r[4] <= 2.4
    assert math.isnan(table.rows[0][4])


def test_adiabatic_bench_complex_loop():
    theta = math.pi / 3
    table = adiabatic_bench(times=[1000.0], rho=math.sin(theta), zeta=math.cos(theta), eps=0.2)
    assert table.rows[-1][3] < 1e-3


def test_adiabatic_bench_from_config():
    cfg = ScanConfig(mode="AdiabaticBench", fixed={"t0": 20.0, "levels": 2.0, "zeta": 0.3})
    table = run_scan(cfg)
    assert [r[0] for r in table.rows] == [20.0, 40.0]
    assert table.columns == ["T", "re_gamma", "im_gamma", "error", "ratio"]


def test_mode_table():
    table = mode_table(0.5, 0.2, n_sites=8)
    assert len(table.rows) == 4
    assert table.columns[0] == "k"
    assert abs(table.rows[0][0] - math.pi / 8) < 1e-15
    doc = json.loads(table.to_json())
    assert doc["table"] == "mode_table" and len(doc["rows"]) == 4
