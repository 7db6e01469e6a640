"""Parameter scans, exceptional-point traces and adiabatic benchmarks.

Output files are versioned (``schema_version``).  CSV files start with a
``# schema_version: N`` comment line followed by a header; complex values are
split into ``re_``/``im_`` columns and cells are listed row-major with the
first axis outermost.  Floats are written with ``repr`` so a file re-parses to
the identical grid.
"""
import enum
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adiabatic import CircleDrive, Schedule, evolve_pair, extract_geometric_phase
from .core import ComplexVec3, complex_radius
from .errors import ConfigError, DomainError, NhgeoError
from .ising import (
    IsingParams,
    circle_distance,
    exceptional_point,
    mode_spectrum,
    overall_phase_closed,
)
from .phase import circle_loop, monopole_phase

SCHEMA_VERSION = 1
DEFAULT_FD_STEP = 1e-4
DEFAULT_BAND = 1e-3

FLAG_OK = "ok"
FLAG_NEAR_EP = "near_ep"
FLAG_SINGULAR = "singular"


class ScanMode(enum.Enum):
    TwoLevelMap = "TwoLevelMap"
    IsingMap = "IsingMap"
    DerivativeMap = "DerivativeMap"
    EpTrace = "EpTrace"
    AdiabaticBench = "AdiabaticBench"


class OutputFormat(enum.Enum):
    CSV = "csv"
    JSON = "json"


# parameter names per mode with their defaults
PARAMETERS = {
    ScanMode.TwoLevelMap: {"r": 1.0, "z": 0.0, "eps": 0.0},
    ScanMode.IsingMap: {"h": 0.5, "delta": 0.0},
    ScanMode.DerivativeMap: {"h": 0.5, "delta": 0.0},
    ScanMode.EpTrace: {"delta": 0.5, "a": 1.0},
    ScanMode.AdiabaticBench: {"rho": 1.0, "zeta": 0.0, "eps": 0.0, "t0": 250.0,
                              "levels": 3.0, "tol": 1e-10},
}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    steps: int

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise ConfigError(f"axis {self.name}: steps must be an integer >= 2")
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or not self.min < self.max:
            raise ConfigError(f"axis {self.name}: need finite min < max")

    def values(self):
        return np.linspace(self.min, self.max, int(self.steps))

    @classmethod
    def parse(cls, text):
        """Parse ``name=min:max:steps``."""
        try:
            name, rng = text.split("=", 1)
            lo, hi, steps = rng.split(":")
            return cls(name.strip(), float(lo), float(hi), int(steps))
        except ValueError as exc:
            raise ConfigError(f"bad grid spec {text!r}; expected name=min:max:steps") from exc


@dataclass(frozen=True)
class ScanConfig:
    mode: ScanMode
    grid: tuple = ()
    fixed: dict = field(default_factory=dict)
    output_path: str = None
    format: OutputFormat = OutputFormat.CSV
    fd_step: float = DEFAULT_FD_STEP
    threads: int = 1
    strict: bool = False
    band: float = DEFAULT_BAND

    def __post_init__(self):
        if not isinstance(self.mode, ScanMode):
            try:
                object.__setattr__(self, "mode", ScanMode(self.mode))
            except ValueError as exc:
                raise ConfigError(f"unknown mode {self.mode!r}") from exc
        if not isinstance(self.format, OutputFormat):
            try:
                object.__setattr__(self, "format", OutputFormat(str(self.format).lower()))
            except ValueError as exc:
                raise ConfigError(f"unknown format {self.format!r}") from exc
        object.__setattr__(self, "grid", tuple(self.grid))
        known = PARAMETERS[self.mode]
        names = [a.name for a in self.grid]
        for n in names + list(self.fixed):
            if n not in known:
                raise ConfigError(f"unknown parameter {n!r} for mode {self.mode.value}; "
                                  f"expected one of {sorted(known)}")
        if len(set(names)) != len(names):
            raise ConfigError("duplicate grid axis")
        if set(names) & set(self.fixed):
            raise ConfigError("a parameter cannot be both a grid axis and fixed")
        if self.mode in (ScanMode.TwoLevelMap, ScanMode.IsingMap, ScanMode.DerivativeMap,
                         ScanMode.EpTrace) and not names:
            raise ConfigError(f"mode {self.mode.value} needs at least one grid axis")
        if self.mode == ScanMode.AdiabaticBench and names:
            raise ConfigError("AdiabaticBench takes no grid axes")
        if not self.fd_step > 0:
            raise ConfigError("fd_step must be positive")
        if int(self.threads) != self.threads or self.threads < 1:
            raise ConfigError("threads must be a positive integer")

    def params(self):
        p = dict(PARAMETERS[self.mode])
        p.update({k: float(v) for k, v in self.fixed.items()})
        return p


@dataclass
class PhaseScanGrid:
    """Scan result: axes, per-cell field values and flags.

    ``values`` has one row per cell (row-major, first axis outermost) and one
    column per entry of ``fields``; singular cells hold NaN.
    """

    mode: str
    axes: list
    fields: list
    values: np.ndarray
    flags: list
    fixed: dict = field(default_factory=dict)

    def coordinates(self):
        return list(itertools.product(*(a.values() for a in self.axes)))

    def to_csv(self):
        buf = io.StringIO()
        buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
        buf.write(f"# mode: {self.mode}\n")
        for k in sorted(self.fixed):
            buf.write(f"# fix.{k}: {self.fixed[k]!r}\n")
        head = [a.name for a in self.axes] + list(self.fields) + ["flag"]
        buf.write(",".join(head) + "\n")
        for coord, row, flag in zip(self.coordinates(), self.values, self.flags):
            cells = [repr(float(c)) for c in coord] + [repr(float(v)) for v in row] + [flag]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def to_json(self):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "mode": self.mode,
            "fixed": {k: self.fixed[k] for k in sorted(self.fixed)},
            "axes": [{"name": a.name, "min": a.min, "max": a.max, "steps": a.steps}
                     for a in self.axes],
            "fields": list(self.fields),
            "cells": [
                {"coords": [float(c) for c in coord],
                 "values": [float(v) if math.isfinite(v) else None for v in row],
                 "flag": flag}
                for coord, row, flag in zip(self.coordinates(), self.values, self.flags)
            ],
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {doc.get('schema_version')!r}")
        axes = [Axis(a["name"], a["min"], a["max"], a["steps"]) for a in doc["axes"]]
        vals = np.array([[np.nan if v is None else v for v in c["values"]] for c in doc["cells"]],
                        dtype=float).reshape(len(doc["cells"]), len(doc["fields"]))
        return cls(doc["mode"], axes, doc["fields"], vals, [c["flag"] for c in doc["cells"]],
                   doc["fixed"])

    @classmethod
    def from_csv(cls, text):
        lines = text.splitlines()
        meta = {}
        while lines and lines[0].startswith("#"):
            key, _, val = lines.pop(0)[1:].partition(":")
            meta[key.strip()] = val.strip()
        if int(meta.get("schema_version", -1)) != SCHEMA_VERSION:
            raise ConfigError("unsupported or missing schema_version")
        head = lines[0].split(",")
        rows = [ln.split(",") for ln in lines[1:]]
        fixed = {k[4:]: float(v) for k, v in meta.items() if k.startswith("fix.")}
        n_axes = next(i for i, h in enumerate(head) if h.startswith(("re_", "im_")))
        axes = []
        for i in range(n_axes):
            col = sorted({float(r[i]) for r in rows})
            axes.append(Axis(head[i], col[0], col[-1], len(col)))
        vals = np.array([[float(v) for v in r[n_axes:-1]] for r in rows], dtype=float)
        return cls(meta["mode"], axes, head[n_axes:-1], vals, [r[-1] for r in rows], fixed)

    def dumps(self, fmt):
        return self.to_json() if OutputFormat(fmt) == OutputFormat.JSON else self.to_csv()

    def equals(self, other):
        return (self.mode == other.mode and self.axes == other.axes
                and list(self.fields) == list(other.fields) and self.flags == other.flags
                and np.array_equal(self.values, other.values, equal_nan=True))


# ---------------------------------------------------------------------------
# cell evaluators
# ---------------------------------------------------------------------------


def _two_level_gamma(p):
    v = ComplexVec3(p["r"], 0.0, complex(p["z"], -p["eps"]))
    return monopole_phase(v).gamma


def _two_level_near(p, band):
    v = ComplexVec3(p["r"], 0.0, complex(p["z"], -p["eps"]))
    return abs(complex_radius(v)) < band * max(1.0, v.scale)


def _ising_gamma(p):
    return overall_phase_closed(complex(p["h"], -p["delta"]))


def _ising_near(p, band):
    return circle_distance(complex(p["h"], -p["delta"])) < band


EVALUATORS = {
    ScanMode.TwoLevelMap: (_two_level_gamma, _two_level_near),
    ScanMode.IsingMap: (_ising_gamma, _ising_near),
    ScanMode.DerivativeMap: (_ising_gamma, _ising_near),
}


def _safe(f, p):
    try:
        val = complex(f(p))
    except (NhgeoError, ZeroDivisionError, OverflowError):
        return None
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        return None
    return val


def _cell(config, params, axis0):
    gamma_f, near_f = EVALUATORS[config.mode]
    step = config.fd_step
    g0 = _safe(gamma_f, params)
    if g0 is None:
        return [math.nan] * _n_fields(config), FLAG_SINGULAR
    shifted = {}
    for k in (-1, 1):
        q = dict(params)
        q[axis0] = params[axis0] + k * step
        shifted[k] = _safe(gamma_f, q)
    vals = [g0.real, g0.imag]
    ok = all(v is not None for v in shifted.values())
    if ok:
        d1 = (shifted[1] - shifted[-1]) / (2.0 * step)
        vals += [d1.real, d1.imag]
        if config.mode == ScanMode.DerivativeMap:
            d2 = (shifted[1] - 2.0 * g0 + shifted[-1]) / (step * step)
            vals += [d2.real, d2.imag]
    else:
        vals += [math.nan] * (_n_fields(config) - 2)
    flag = FLAG_OK
    try:
        near = near_f(params, config.band)
    except NhgeoError:
        near = True
    if near or not ok:
        flag = FLAG_NEAR_EP
    return vals, flag


def _n_fields(config):
    return 6 if config.mode == ScanMode.DerivativeMap else 4


def _field_names(config):
    a = config.grid[0].name
    names = ["re_gamma", "im_gamma", f"re_dgamma_d{a}", f"im_dgamma_d{a}"]
    if config.mode == ScanMode.DerivativeMap:
        names += [f"re_d2gamma_d{a}2", f"im_d2gamma_d{a}2"]
    return names


def _gather(func, items, threads):
    # results land in a pre-sized list by index, so order never depends on scheduling
    out = [None] * len(items)
    if threads == 1:
        for i, it in enumerate(items):
            out[i] = func(it)
        return out
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(func, it) for it in items]
        for i, fut in enumerate(futures):
            out[i] = fut.result()
    return out


def _write(text, path):
    if path is None or path == "-":
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run_scan(config):
    """Evaluate a map scan and write it to ``config.output_path`` (if set).

    For EpTrace and AdiabaticBench the corresponding report table is
    returned instead of a :class:`PhaseScanGrid`.
    """
    if config.mode == ScanMode.EpTrace:
        table = ep_trace(config.grid[0].values(), config.params()["a"], threads=config.threads)
        _write(table.dumps(config.format), config.output_path)
        return table
    if config.mode == ScanMode.AdiabaticBench:
        table = adiabatic_bench(config)
        _write(table.dumps(config.format), config.output_path)
        return table
    base = config.params()
    names = [a.name for a in config.grid]
    coords = list(itertools.product(*(a.values() for a in config.grid)))

    def work(coord):
        p = dict(base)
        p.update({n: float(c) for n, c in zip(names, coord)})
        return _cell(config, p, names[0])

    results = _gather(work, coords, config.threads)
    grid = PhaseScanGrid(config.mode.value, list(config.grid), _field_names(config),
                         np.array([r[0] for r in results], dtype=float).reshape(len(coords), -1),
                         [r[1] for r in results], {k: float(v) for k, v in config.fixed.items()})
    _write(grid.dumps(config.format), config.output_path)
    return grid


# ---------------------------------------------------------------------------
# report tables
# ---------------------------------------------------------------------------


@dataclass
class ReportTable:
    """Plain table of named columns (numbers or strings)."""

    name: str
    columns: list
    rows: list

    def to_csv(self):
        buf = io.StringIO()
        buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
        buf.write(f"# table: {self.name}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(repr(float(v)) if isinstance(v, (int, float)) else str(v)
                               for v in row) + "\n")
        return buf.getvalue()

    def to_json(self):
        doc = {"schema_version": SCHEMA_VERSION, "table": self.name,
               "columns": list(self.columns),
               "rows": [[v if not isinstance(v, float) or math.isfinite(v) else None for v in r]
                        for r in self.rows]}
        return json.dumps(doc, indent=1) + "\n"

    def dumps(self, fmt):
        return self.to_json() if OutputFormat(fmt) == OutputFormat.JSON else self.to_csv()


def ep_trace(deltas, a=1.0, threads=1):
    """(delta, h_c, k_c, order, jump) along the exceptional circle."""
    deltas = [float(d) for d in deltas]
    for d in deltas:
        if not 0.0 <= d <= 1.0:
            raise DomainError(f"delta={d} outside [0, 1]")
    diags = _gather(lambda d: exceptional_point(d, a), deltas, threads)
    rows = [[q.delta, q.h_c, q.k_c, q.order.value, q.jump.real, q.jump.imag] for q in diags]
    return ReportTable("ep_trace", ["delta", "h_c", "k_c", "order", "re_jump", "im_jump"], rows)


def adiabatic_bench(config=None, times=None, rho=None, zeta=None, eps=None, tol=None):
    """Adiabatic phase error on a T-ladder for the loop R = (rho cos, rho sin, zeta - i eps).

    Rows hold T, the extracted phase, its distance to the monopole phase and
    the error ratio to the previous (shorter) T.
    """
    p = dict(PARAMETERS[ScanMode.AdiabaticBench])
    if config is not None:
        p = config.params()
    rho = p["rho"] if rho is None else rho
    zeta = complex(p["zeta"], -p["eps"]) if zeta is None else complex(zeta)
    if eps is not None:
        zeta = complex(zeta.real, -eps)
    tol = p["tol"] if tol is None else tol
    if times is None:
        times = [p["t0"] * 2 ** i for i in range(int(p["levels"]))]
    exact = monopole_phase(ComplexVec3(rho, 0.0, zeta)).gamma
    threads = config.threads if config is not None else 1

    def run(T):
        drive = CircleDrive(rho, zeta, T)
        traj = evolve_pair(drive, Schedule(circle_loop(rho, zeta), T), tol)
        return extract_geometric_phase(traj, drive, tol).gamma

    gammas = _gather(run, list(times), threads)
    rows = []
    prev = None
    for T, g in zip(times, gammas):
        err = abs(g - exact)
        ratio = prev / err if prev is not None else math.nan
        rows.append([float(T), g.real, g.imag, err, ratio])
        prev = err
    return ReportTable("adiabatic_bench", ["T", "re_gamma", "im_gamma", "error", "ratio"], rows)


def mode_table(h, delta, n_sites=64, j=1.0, phi=0.0, a=1.0):
    """Per-mode Ising spectrum: k, eps(k), cos(theta_k) and the branch sign."""
    spec = mode_spectrum(IsingParams(h, delta, j, phi, n_sites, a))
    rows = [[float(k), e.real, e.imag, c.real, c.imag, float(s)]
            for k, e, c, s in zip(spec.momenta, spec.energies, spec.cos_theta, spec.branch_sign)]
    return ReportTable("mode_table", ["k", "re_eps", "im_eps", "re_cos_theta", "im_cos_theta",
                                      "branch_sign"], rows)
