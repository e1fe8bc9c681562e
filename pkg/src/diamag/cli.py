"""
Command-line front end.

    diamag kernel  --method mehler --b 2 --beta 1 --x 0 0 --y 0 0
    diamag band    --field sine --k-halfwidth 8 --k-points 257
    diamag energy  --method radial --field gaussian --param amplitude=2
    diamag check   theorem2 --config pair.toml
    diamag scan    fact3
    diamag compare --config-a a.toml --config-b b.toml

Every run resolves its configuration (file, then command-line overrides,
then defaults), echoes it in the output header and, with ``--out``, to a
``<out>.config.json`` sidecar that reproduces the run via ``--config``.

Exit codes: 0 pass, 2 check failure, 3 hypothesis not verified,
4 numerical flag, 64 configuration error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, checks, exact
from .bridge_mc import SCHEME_VERSION, mc_kernel
from .fields import ProfileError, field_from_config, potential_from_config
from .iwatsuka import Grid1D, NumericalFlag, band_function, default_band_setup, ground_state_energy, kernel_2d
from .radial import RadialGrid, ground_state_energy_radial

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_PASS = 0
EXIT_FAIL = 2
EXIT_NOT_VERIFIED = 3
EXIT_FLAG = 4
EXIT_CONFIG = 64

STATUS_EXIT = {
    checks.PASS: EXIT_PASS,
    checks.INFORMATIONAL: EXIT_PASS,
    checks.FAIL: EXIT_FAIL,
    checks.NOT_VERIFIED: EXIT_NOT_VERIFIED,
    checks.NUMERICAL_FLAG: EXIT_FLAG,
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would read as a check failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    out: Optional[str] = None
    format: str = "csv"
    seed: int = 0

    def to_dict(self) -> dict:
        return {"command": self.command, "format": self.format, "seed": self.seed, **self.params}

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class Result:
    rows: list
    payload: object = None
    code: int = EXIT_PASS


# -- config loading ----------------------------------------------------------

def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"parameter {item!r} must look like key=value")
        try:
            out[key] = json.loads(val)
        except ValueError:
            out[key] = val
    return out


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        # a new preset replaces the whole profile instead of mixing parameters
        if isinstance(v, dict) and isinstance(out.get(k), dict) and "preset" not in v:
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _overrides(args) -> dict:
    """Command-line values that were actually given."""
    o = {}
    if getattr(args, "field", None) is not None:
        o["field"] = {"preset": args.field, **_parse_params(args.param)}
    elif getattr(args, "b", None) is not None:
        o["field"] = {"preset": "constant", "b": args.b}
    elif getattr(args, "param", None):
        o["field"] = _parse_params(args.param)
    if getattr(args, "potential", None) is not None:
        o["potential"] = {"preset": args.potential, **_parse_params(args.pot_param)}
    elif getattr(args, "omega", None) is not None:
        o["potential"] = {"preset": "oscillator", "omega": args.omega}
    for key in ("method", "beta", "gauge", "k_halfwidth", "k_points", "h", "box", "backend",
                "n_samples", "n_steps", "bhat"):
        v = getattr(args, key, None)
        if v is not None:
            o[key] = v
    for key in ("x", "y"):
        v = getattr(args, key, None)
        if v is not None:
            o[key] = list(v)
    if getattr(args, "seed", None) is not None:
        o["seed"] = args.seed
    return o


# -- defaults ----------------------------------------------------------------

KERNEL_DEFAULTS = {
    "method": "mehler", "field": {"preset": "constant", "b": 0.0}, "potential": {"preset": "zero"},
    "beta": 1.0, "x": [0.0, 0.0], "y": [0.0, 0.0], "points": None, "gauge": None,
    "h": 0.01, "n_samples": 100_000, "n_steps": 256,
}
BAND_DEFAULTS = {
    "field": {"preset": "sine"}, "potential": {"preset": "zero"}, "k_halfwidth": 8.0,
    "k_points": 257, "h": 0.02, "box": None,
}
ENERGY_DEFAULTS = {
    "method": "iwatsuka", "field": {"preset": "constant", "b": 1.0}, "potential": {"preset": "zero"},
    "h": 0.02, "k_points": 257, "r_max": 12.0, "n_r": 1200, "m_window": [-60, 60],
}
CHECK_DEFAULTS = {
    "field": {"preset": "zero"}, "potential": {"preset": "zero"},
    "field_hat": {"preset": "constant", "b": 2.0}, "potential_hat": {"preset": "zero"},
    "backend": "spectral",
    "query": {"x1s": [-1.0, -0.5, 0.0, 0.5, 1.0], "y1s": [-1.0, -0.5, 0.0, 0.5, 1.0],
              "betas": [0.5, 1.0, 2.0], "dx2s": [0.0]},
    "spectral": {"h": 0.01}, "mc": {"n_samples": 20_000, "n_steps": 128},
    "radial": {"r_max": 12.0, "n_points": 1200, "m_window": [-60, 60]},
    "closed_form_rhs": False, "bhat": None, "b": None,
    "pathwise": {"x1": 0.0, "y1": 0.5, "beta": 1.0, "n_paths": 100_000, "n_steps": 128},
}
SCAN_DEFAULTS = {
    "fact3": {"b": 4.0, "beta": 1.0, "x": [2.0, 0.0], "omega_grid": [0.01, 3.0, 300]},
    "fact4": {"b": 1.0, "lambdas": [0.5, 1.0, 2.0], "h": 0.02,
              "query": {"x1s": [0.0], "y1s": [0.0], "betas": [2.0, 4.0], "dx2s": [0.0, 2.0, 4.0, 6.0]}},
    "open_problem": {"field": {"preset": "sine"}, "bhat": 3.0,
                     "query": {"x1s": [-1.0, 0.0, 1.0], "y1s": [-1.0, 0.0, 1.0],
                               "betas": [0.5, 1.0, 2.0], "dx2s": [0.0, 1.0, 2.0]}},
}

CHECK_NAMES = ("theorem1", "theorem2", "sandwich", "lt_bound", "improved_bound", "lower_bound",
               "pathwise")


def resolve(command: str, file_cfg: dict, overrides: dict) -> RunConfig:
    cfg = _merge(file_cfg, overrides)
    cfg.pop("command", None)
    fmt = cfg.pop("format", "csv")
    seed = int(cfg.pop("seed", 0))
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, not {fmt!r}")
    if command == "kernel":
        params = _merge(KERNEL_DEFAULTS, cfg)
    elif command == "band":
        params = _merge(BAND_DEFAULTS, cfg)
    elif command == "energy":
        params = _merge(ENERGY_DEFAULTS, cfg)
    elif command == "check":
        name = cfg.get("check")
        if name not in CHECK_NAMES:
            raise ConfigError(f"check must be one of {CHECK_NAMES}, not {name!r}")
        params = _merge(CHECK_DEFAULTS, cfg)
        if name in ("sandwich", "lt_bound", "improved_bound", "lower_bound") \
                and "field" not in cfg and "field_hat" in cfg:
            params["field"] = params["field_hat"]
    elif command == "scan":
        name = cfg.get("scan")
        if name not in SCAN_DEFAULTS:
            raise ConfigError(f"scan must be one of {sorted(SCAN_DEFAULTS)}, not {name!r}")
        params = _merge(SCAN_DEFAULTS[name], cfg)
    else:
        raise ConfigError(f"unknown command {command!r}")
    return RunConfig(command, params, None, fmt, seed)


# -- commands ----------------------------------------------------------------

def _points(p):
    if p.get("points"):
        pts = []
        for row in p["points"]:
            if len(row) != 5:
                raise ConfigError("each point is [x1, x2, y1, y2, beta]")
            pts.append(tuple(float(v) for v in row))
        return pts
    x, y = p["x"], p["y"]
    if len(x) != 2 or len(y) != 2:
        raise ConfigError("x and y need two coordinates")
    return [(float(x[0]), float(x[1]), float(y[0]), float(y[1]), float(p["beta"]))]


def _kernel_gauge(p):
    if p.get("gauge"):
        return p["gauge"]
    return "poincare" if p["method"] in ("mehler", "free") else "asymmetric"


def run_kernel(p: dict, seed: int) -> Result:
    f, pot = field_from_config(p["field"]), potential_from_config(p["potential"])
    method, gauge = p["method"], _kernel_gauge(p)
    if gauge not in ("poincare", "asymmetric"):
        raise ConfigError("gauge must be poincare or asymmetric")
    rows, code = [], EXIT_PASS
    for x1, x2, y1, y2, beta in _points(p):
        x, y = (x1, x2), (y1, y2)
        err, flags = 0.0, ()
        if method in ("mehler", "free"):
            if not f.is_constant:
                raise ConfigError("mehler needs a constant field")
            omega = 0.0
            if pot.name == "oscillator":
                omega = float(pot.params["omega"])
            elif pot.name != "zero":
                raise ConfigError("mehler needs a zero or oscillator potential")
            if method == "free" and (f.constant_value or omega):
                raise ConfigError("free kernel needs b = 0 and no potential")
            val = complex(exact.mehler_kernel(exact.MehlerParams(f.constant_value, omega, beta), x, y))
            if gauge == "asymmetric":
                val = complex(exact.symmetric_to_asymmetric(val, f.constant_value, x, y))
        elif method == "iwatsuka":
            if gauge != "asymmetric":
                raise ConfigError("iwatsuka kernels are in the asymmetric gauge")
            kv = kernel_2d(f, pot, beta, x, y, h=float(p["h"]))
            val, err, flags = complex(kv.value), kv.error, kv.flags
        elif method == "mc":
            if gauge != "asymmetric":
                raise ConfigError("mc kernels are in the asymmetric gauge")
            est = mc_kernel(f, pot, beta, x, y, n_steps=int(p["n_steps"]),
                            n_samples=int(p["n_samples"]), seed=seed)
            val, err = complex(est.value), est.std_error
        else:
            raise ConfigError(f"unknown kernel method {method!r}")
        if flags:
            code = EXIT_FLAG
        rows.append({"x1": x1, "x2": x2, "y1": y1, "y2": y2, "beta": beta, "re": val.real,
                     "im": val.imag, "abs": abs(val), "error": err, "gauge": gauge,
                     "flags": ";".join(flags)})
    return Result(rows, rows, code)


def run_band(p: dict, seed: int) -> Result:
    f, pot = field_from_config(p["field"]), potential_from_config(p["potential"])
    h = float(p["h"])
    if p.get("box") is not None:
        grid = Grid1D.around([0.0], float(p["box"]), h)
    else:
        grid, _ = default_band_setup(f, pot, h)
    band = band_function(f, pot, float(p["k_halfwidth"]), int(p["k_points"]), grid)
    rows = [{"k": float(k), "e0": float(e)} for k, e in zip(band.k_grid, band.e0_of_k)]
    payload = {"bands": rows, "minimum": list(band.minimum), "flags": band.flags}
    return Result(rows, payload, EXIT_FLAG if band.flags else EXIT_PASS)


def run_energy(p: dict, seed: int) -> Result:
    f, pot = field_from_config(p["field"]), potential_from_config(p["potential"])
    method = p["method"]
    if method == "iwatsuka":
        r = ground_state_energy(f, pot, k_points=int(p["k_points"]), h=float(p["h"]))
        row = {"method": method, "e0": r.value, "argmin": r.argmin, "error": r.error_bound,
               "flags": ";".join(r.flags)}
        flags = r.flags
    elif method == "radial":
        grid = RadialGrid(float(p["r_max"]), int(p["n_r"]))
        r = ground_state_energy_radial(f, pot, tuple(p["m_window"]), grid)
        row = {"method": method, "e0": r.energy, "argmin": r.m, "error": math.nan,
               "flags": ";".join(r.flags)}
        flags = r.flags
    elif method == "closed":
        if not f.is_constant or pot.name not in ("zero", "oscillator"):
            raise ConfigError("closed form needs a constant field and an oscillator or no potential")
        omega = float(pot.params.get("omega", 0.0))
        row = {"method": method, "e0": exact.oscillator_e0(f.constant_value, omega),
               "argmin": math.nan, "error": 0.0, "flags": ""}
        flags = []
    else:
        raise ConfigError(f"unknown energy method {method!r}")
    return Result([row], row, EXIT_FLAG if flags else EXIT_PASS)


def _pair(p):
    return ((field_from_config(p["field"]), potential_from_config(p["potential"])),
            (field_from_config(p["field_hat"]), potential_from_config(p["potential_hat"])))


def run_check(p: dict, seed: int) -> Result:
    name = p["check"]
    query = checks.QueryGrid.from_config(p["query"])
    spectral = checks.SpectralOptions(h=float(p["spectral"]["h"]))
    rad = p["radial"]
    radial = checks.RadialOptions(RadialGrid(float(rad["r_max"]), int(rad["n_points"])),
                                  tuple(rad["m_window"]))
    try:
        if name == "theorem2":
            rep = checks.check_theorem2(_pair(p), query, p["backend"], spectral=spectral,
                                        mc={**p["mc"], "seed": seed})
        elif name == "theorem1":
            rep = checks.check_theorem1(_pair(p), radial, closed_form_rhs=bool(p["closed_form_rhs"]))
        elif name == "pathwise":
            pw = p["pathwise"]
            rep = checks.pathwise_variance_check(_pair(p), float(pw["x1"]), float(pw["y1"]),
                                                 float(pw["beta"]), int(pw["n_paths"]),
                                                 int(pw["n_steps"]), seed)
        elif name == "sandwich":
            rep = checks.check_sandwich(field_from_config(p["field"]), radial=radial)
        elif name == "lower_bound":
            rep = checks.check_lower_bound(field_from_config(p["field"]), query, spectral,
                                           bhat=p["bhat"])
        else:
            fn = checks.check_lt_bound if name == "lt_bound" else checks.check_improved_bound
            rep = fn(field_from_config(p["field"]), query, spectral, b=p["b"])
    except checks.ConfigurationError as exc:
        raise ConfigError(str(exc)) from None
    return Result(rep.csv_rows(), rep.to_dict(), STATUS_EXIT[rep.status])


def run_scan(p: dict, seed: int) -> Result:
    name = p["scan"]
    if name == "fact3":
        og = p["omega_grid"]
        w = checks.scan_fact3(float(p["b"]), float(p["beta"]), p["x"],
                              np.linspace(og[0], og[1], int(og[2])))
        if w is None:
            return Result([], {"witness": None}, EXIT_FAIL)
        row = {"b": w.b, "beta": w.beta, "x1": w.x[0], "x2": w.x[1], "omega_lo": w.interval[0],
               "omega_hi": w.interval[1], "n_increasing": w.n_increasing}
        return Result([row], {"witness": row}, EXIT_PASS)
    if name == "fact4":
        ws = checks.scan_fact4(float(p["b"]), p["lambdas"], checks.QueryGrid.from_config(p["query"]),
                               h=float(p["h"]))
        rows = [{"lambda": w.lam, "beta": w.beta, "x1": w.x[0], "x2": w.x[1], "y1": w.y[0],
                 "y2": w.y[1], "k_hat": w.k_hat, "k_const": w.k_const, "margin": w.margin,
                 "tol": w.spectral_tol} for w in ws]
        return Result(rows, {"witnesses": rows}, EXIT_PASS if rows else EXIT_FAIL)
    rep = checks.scan_open_problem(field_from_config(p["field"]), float(p["bhat"]),
                                   checks.QueryGrid.from_config(p["query"]))
    return Result(rep.csv_rows(), rep.to_dict(), EXIT_PASS)


RUNNERS = {"kernel": run_kernel, "band": run_band, "energy": run_energy, "check": run_check,
           "scan": run_scan}


def run(cfg: RunConfig) -> Result:
    try:
        return RUNNERS[cfg.command](cfg.params, cfg.seed)
    except (ProfileError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None


def compare(cfg_a: RunConfig, cfg_b: RunConfig) -> Result:
    """Kernel values of two configurations on their shared query points."""
    if cfg_a.command != "kernel" or cfg_b.command != "kernel":
        raise ConfigError("compare takes two kernel configurations")
    pa, pb = _points(cfg_a.params), _points(cfg_b.params)
    if pa != pb:
        raise ConfigError("mismatched query grids")
    ra, rb = run(cfg_a).rows, run(cfg_b).rows
    fa = field_from_config(cfg_a.params["field"])
    rows = []
    for a, b in zip(ra, rb):
        va, vb = complex(a["re"], a["im"]), complex(b["re"], b["im"])
        if a["gauge"] != b["gauge"]:
            # bring both to the asymmetric gauge; only constant fields have a known phase
            if not fa.is_constant:
                raise ConfigError("gauges differ and the field is not constant")
            x, y = (a["x1"], a["x2"]), (a["y1"], a["y2"])
            if a["gauge"] == "poincare":
                va = complex(exact.symmetric_to_asymmetric(va, fa.constant_value, x, y))
            else:
                vb = complex(exact.symmetric_to_asymmetric(vb, fa.constant_value, x, y))
        scale = max(abs(va), abs(vb))
        rows.append({k: a[k] for k in ("x1", "x2", "y1", "y2", "beta")} | {
            "re_a": va.real, "im_a": va.imag, "re_b": vb.real, "im_b": vb.imag,
            "abs_a": abs(va), "abs_b": abs(vb),
            "ratio": abs(va) / abs(vb) if abs(vb) else math.inf,
            "abs_diff": abs(va - vb), "rel_diff": abs(va - vb) / scale if scale else 0.0,
            "err_a": a["error"], "err_b": b["error"]})
    return Result(rows, {"rows": rows, "max_rel_diff": max(r["rel_diff"] for r in rows)})


# -- output ------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return v


def render(result: Result, cfg: RunConfig) -> str:
    meta = {"tool": f"diamag {__version__}", "config_hash": cfg.hash(), "seed": cfg.seed,
            "rng_scheme": SCHEME_VERSION, "config": cfg.to_dict()}
    if cfg.format == "json":
        return json.dumps({"meta": meta, "result": _jsonable(result.payload)}, indent=2,
                          sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# {meta['tool']}\n# config_hash {meta['config_hash']}\n# seed {cfg.seed}\n")
    buf.write(f"# rng_scheme {SCHEME_VERSION}\n")
    buf.write("# config " + json.dumps(meta["config"], sort_keys=True) + "\n")
    keys = []
    for r in result.rows:
        keys += [k for k in r if k not in keys]
    if keys:
        wr = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        wr.writeheader()
        for r in result.rows:
            wr.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def emit(result: Result, cfg: RunConfig, out: Optional[str]):
    text = render(result, cfg)
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    Path(out + ".config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")


# -- argument parsing --------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="TOML or JSON configuration file")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int)


def _problem(p, potential=True):
    p.add_argument("--field", help="field preset name")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="field preset parameter")
    p.add_argument("--b", type=float, help="shorthand for a constant field")
    if potential:
        p.add_argument("--potential", help="potential preset name")
        p.add_argument("--pot-param", action="append", metavar="KEY=VALUE")
        p.add_argument("--omega", type=float, help="shorthand for an oscillator potential")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="diamag", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--version", action="version", version=f"diamag {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", help="heat kernel values")
    _common(k)
    _problem(k)
    k.add_argument("--method", choices=("mehler", "free", "iwatsuka", "mc"))
    k.add_argument("--beta", type=float)
    k.add_argument("--x", type=float, nargs=2)
    k.add_argument("--y", type=float, nargs=2)
    k.add_argument("--gauge", choices=("poincare", "asymmetric"))
    k.add_argument("--h", type=float)
    k.add_argument("--n-samples", type=int)
    k.add_argument("--n-steps", type=int)

    b = sub.add_parser("band", help="lowest band function of an x1-dependent field")
    _common(b)
    _problem(b)
    b.add_argument("--k-halfwidth", type=float)
    b.add_argument("--k-points", type=int)
    b.add_argument("--h", type=float)
    b.add_argument("--box", type=float, help="half-width of the x1 box")

    e = sub.add_parser("energy", help="ground-state energy")
    _common(e)
    _problem(e)
    e.add_argument("--method", choices=("iwatsuka", "radial", "closed"))
    e.add_argument("--h", type=float)
    e.add_argument("--k-points", type=int)

    c = sub.add_parser("check", help="run an inequality check")
    c.add_argument("check", nargs="?", choices=CHECK_NAMES)
    _common(c)
    c.add_argument("--backend", choices=("spectral", "mc"))
    c.add_argument("--n-samples", type=int)
    c.add_argument("--n-steps", type=int)

    s = sub.add_parser("scan", help="search for Fact-type witnesses")
    s.add_argument("scan", nargs="?", choices=sorted(SCAN_DEFAULTS))
    _common(s)

    cmp_ = sub.add_parser("compare", help="tabulate two kernel configurations")
    cmp_.add_argument("--config-a", required=True)
    cmp_.add_argument("--config-b", required=True)
    cmp_.add_argument("--out")
    cmp_.add_argument("--format", choices=("csv", "json"))
    return ap


def _config_for(args) -> RunConfig:
    file_cfg = load_config(args.config) if args.config else {}
    if file_cfg.get("command", args.command) != args.command:
        raise ConfigError(f"config is for command {file_cfg['command']!r}")
    over = _overrides(args)
    if args.command == "check":
        if args.check:
            over["check"] = args.check
        mc = {k: over.pop(k) for k in ("n_samples", "n_steps") if k in over}
        if mc:
            over["mc"] = mc
    if args.command == "scan" and args.scan:
        over["scan"] = args.scan
    if args.format:
        over["format"] = args.format
    return resolve(args.command, file_cfg, over)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            ca, cb = (resolve("kernel", load_config(p), {}) for p in (args.config_a, args.config_b))
            res = compare(ca, cb)
            cfg = RunConfig("compare", {"a": ca.to_dict(), "b": cb.to_dict()},
                            format=args.format or "csv")
        else:
            cfg = _config_for(args)
            res = run(cfg)
        emit(res, cfg, args.out)
        return res.code
    except ConfigError as exc:
        print(f"diamag: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFlag as exc:
        print(f"diamag: numerical flag: {exc}", file=sys.stderr)
        return EXIT_FLAG


if __name__ == "__main__":
    sys.exit(main())
