"""Command-line front end: ``nhgeo scan | ep-trace | adiabatic-bench | mode-table``.

Settings are merged with precedence command line > environment > config file
> defaults.  Environment variables use the prefix ``NHGEO_``:

    NHGEO_MODE, NHGEO_FORMAT, NHGEO_OUT, NHGEO_THREADS, NHGEO_FD_STEP,
    NHGEO_STRICT, NHGEO_GRID (``;``-separated grid specs), NHGEO_FIX
    (``;``-separated ``name=value`` pairs)

Config files (``--config FILE``) hold one ``key = value`` per line; ``#``
starts a comment.  Keys are ``mode``, ``format``, ``out``, ``threads``,
``fd_step``, ``strict``, ``grid.<axis> = min:max:steps`` and
``fix.<name> = value``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (including
singular cells under ``--strict``).
"""
import argparse
import os
import sys

from .errors import ConfigError, DomainError, NhgeoError
from .scan import (
    FLAG_SINGULAR,
    Axis,
    OutputFormat,
    PhaseScanGrid,
    ScanConfig,
    ScanMode,
    mode_table,
    run_scan,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
ENV_PREFIX = "NHGEO_"

_SCALAR_KEYS = ("mode", "format", "out", "threads", "fd_step", "strict")


def parse_config_file(path):
    """Read a flat ``key = value`` file into a settings dict."""
    settings = {"grid": {}, "fix": {}}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key.startswith("grid."):
            settings["grid"][key[5:]] = Axis.parse(f"{key[5:]}={val}")
        elif key.startswith("fix."):
            settings["fix"][key[4:]] = _float(val, key)
        elif key in _SCALAR_KEYS:
            settings[key] = val
        else:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
    return settings


def env_settings(environ=None):
    environ = os.environ if environ is None else environ
    settings = {"grid": {}, "fix": {}}
    for key in _SCALAR_KEYS:
        val = environ.get(ENV_PREFIX + key.upper())
        if val is not None:
            settings[key] = val
    for spec in filter(None, environ.get(ENV_PREFIX + "GRID", "").split(";")):
        ax = Axis.parse(spec)
        settings["grid"][ax.name] = ax
    for spec in filter(None, environ.get(ENV_PREFIX + "FIX", "").split(";")):
        name, val = _split_fix(spec)
        settings["fix"][name] = val
    return settings


def _float(text, what):
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"{what}: {text!r} is not a number") from exc


def _int(text, what):
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"{what}: {text!r} is not an integer") from exc


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"strict: {text!r} is not a boolean")


def _split_fix(spec):
    if "=" not in spec:
        raise ConfigError(f"bad --fix {spec!r}; expected name=value")
    name, val = spec.split("=", 1)
    return name.strip(), _float(val, name)


def _merge(*layers):
    # later layers win; grid and fix merge per key
    out = {"grid": {}, "fix": {}}
    for layer in layers:
        for k, v in layer.items():
            if k in ("grid", "fix"):
                out[k].update(v)
            elif v is not None:
                out[k] = v
    return out


def _cli_layer(args):
    layer = {"grid": {}, "fix": {}}
    for spec in getattr(args, "grid", None) or []:
        ax = Axis.parse(spec)
        layer["grid"][ax.name] = ax
    for spec in args.fix or []:
        name, val = _split_fix(spec)
        layer["fix"][name] = val
    for key in _SCALAR_KEYS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            layer[key] = val
    return layer


def build_config(args, environ=None, default_mode=None):
    """Merge defaults, config file, environment and flags into a ScanConfig."""
    file_layer = parse_config_file(args.config) if getattr(args, "config", None) else {}
    defaults = {"mode": default_mode, "format": "csv", "threads": "1",
                "fd_step": "1e-4", "strict": "false"}
    s = _merge(defaults, file_layer, env_settings(environ), _cli_layer(args))
    if default_mode is not None and args.command != "scan":
        s["mode"] = default_mode
    if s.get("mode") is None:
        raise ConfigError("no scan mode given (use --mode)")
    return ScanConfig(
        mode=s["mode"],
        grid=tuple(s["grid"].values()),
        fixed=dict(s["fix"]),
        output_path=s.get("out"),
        format=s["format"],
        fd_step=_float(s["fd_step"], "fd_step"),
        threads=_int(s["threads"], "threads"),
        strict=_bool(s["strict"]),
    )


def _add_common(p, grid=True):
    if grid:
        p.add_argument("--grid", action="append", metavar="NAME=MIN:MAX:STEPS",
                       help="grid axis (repeatable; the first axis is the derivative axis)")
    p.add_argument("--fix", action="append", metavar="NAME=VALUE",
                   help="fixed parameter (repeatable)")
    p.add_argument("--format", choices=[f.value for f in OutputFormat])
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--threads", metavar="N")
    p.add_argument("--strict", action="store_true", default=None,
                   help="exit with status 3 if any cell is singular")
    p.add_argument("--config", metavar="FILE", help="key = value settings file")


def make_parser():
    parser = argparse.ArgumentParser(prog="nhgeo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="phase map over a parameter grid")
    p.add_argument("--mode", choices=[m.value for m in ScanMode])
    p.add_argument("--fd-step", dest="fd_step", metavar="X")
    _add_common(p)

    p = sub.add_parser("ep-trace", help="exceptional points along delta")
    _add_common(p)

    p = sub.add_parser("adiabatic-bench", help="adiabatic phase error versus T")
    _add_common(p, grid=False)

    p = sub.add_parser("mode-table", help="per-k spectrum of the Ising chain")
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--n-sites", type=int, default=64)
    p.add_argument("--j", type=float, default=1.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--format", choices=[f.value for f in OutputFormat], default="csv")
    p.add_argument("--out", metavar="PATH")
    return parser


def _emit(text, path, stdout):
    if path is None or path == "-":
        stdout.write(text)


def main(argv=None, environ=None, stdout=None):
    stdout = sys.stdout if stdout is None else stdout
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "mode-table":
            table = mode_table(args.h, args.delta, args.n_sites, args.j, args.phi, args.a)
            text = table.dumps(args.format)
            if args.out:
                with open(args.out, "w", newline="") as fh:
                    fh.write(text)
            _emit(text, args.out, stdout)
            return EXIT_OK
        default_mode = {"ep-trace": "EpTrace", "adiabatic-bench": "AdiabaticBench"}.get(args.command)
        config = build_config(args, environ, default_mode)
        result = run_scan(config)
        _emit(result.dumps(config.format), config.output_path, stdout)
    except (ConfigError, DomainError) as exc:
        print(f"nhgeo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NhgeoError, ArithmeticError) as exc:
        print(f"nhgeo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"nhgeo: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if config.strict and isinstance(result, PhaseScanGrid) and FLAG_SINGULAR in result.flags:
        print("nhgeo: singular cells present (--strict)", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
