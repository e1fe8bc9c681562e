"""
Numerical evidence for diamagnetic monotonicity statements.

Each ``check_*`` function evaluates one inequality lhs <= rhs over a
parameter grid with a chosen backend and returns a :class:`CheckReport`.
An inequality holds at a point when

    lhs <= rhs + tol_abs + tol_rel |rhs|

with tol_abs = 1e-10 plus the backend's own error estimate (deterministic
backends) or 3 combined standard errors (Monte Carlo), and tol_rel = 1e-6.
Checks whose hypotheses cannot be verified report ``hypothesis-not-verified``
and never count as passed.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import exact
from .exact import KernelValue
from .bridge_mc import mc_kernels, sample_bridges, block_rng, variance_comparison, path_functionals
from .fields import (FieldProfile, constant_field, dominates, potential_below,
                     zero_potential)
from .iwatsuka import (Grid1D, SpectralKernel, auto_k_grid, ground_state_energy, _aligned_h,
                       WALL_EXPONENT)
from .radial import RadialGrid, ground_state_energy_radial, zero_channel_is_ground

TOL_ABS = 1e-10
TOL_REL = 1e-6
MC_SIGMAS = 3.0

PASS = "pass"
FAIL = "fail"
NOT_VERIFIED = "hypothesis-not-verified"
NUMERICAL_FLAG = "numerical-flag"
INFORMATIONAL = "informational"


class ConfigurationError(ValueError):
    """A check was requested for inputs violating its preconditions."""


@dataclass
class PointResult:
    params: dict
    lhs: float
    rhs: float
    margin: float
    tol: float
    ok: bool


@dataclass
class CheckReport:
    """Verdict for one inequality over a sampled grid.

    ``margin`` at a point is rhs - lhs + tol_rel |rhs| + (tol_abs_i -
    tolerance_used), so a point fails exactly when its margin is below
    -tolerance_used.
    """

    check_id: str
    backend: str
    points: list = field(default_factory=list)
    tolerance_used: float = TOL_ABS
    status: str = PASS
    notes: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def points_tested(self) -> int:
        return len(self.points)

    @property
    def failures(self) -> list:
        return [p for p in self.points if not p.ok]

    @property
    def worst(self) -> Optional[PointResult]:
        return min(self.points, key=lambda p: p.margin) if self.points else None

    @property
    def worst_margin(self) -> float:
        w = self.worst
        return math.inf if w is None else w.margin

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        w = self.worst
        return {
            "check_id": self.check_id,
            "status": self.status,
            "backend": self.backend,
            "points_tested": self.points_tested,
            "worst_margin": _num(self.worst_margin),
            "worst_point": None if w is None else w.params,
            "tolerance_used": self.tolerance_used,
            "failures": [{"params": p.params, "lhs": p.lhs, "rhs": p.rhs, "margin": p.margin}
                         for p in self.failures],
            "flags": sorted(set(self.flags)),
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_rows(self) -> list[dict]:
        return [{"check_id": self.check_id, **p.params, "lhs": p.lhs, "rhs": p.rhs,
                 "margin": p.margin, "tol": p.tol, "ok": int(p.ok)} for p in self.points]


def _num(x):
    return x if math.isfinite(x) else None


def reports_to_csv(reports: Sequence[CheckReport]) -> str:
    rows = [r for rep in reports for r in rep.csv_rows()]
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: (format(v, ".17g") if isinstance(v, float) else v)
                     for k, v in r.items()})
    return buf.getvalue()


def _finish(report: CheckReport, entries, tol_rel=TOL_REL):
    """entries: (params, lhs, rhs, tol_abs_i)."""
    if not entries:
        return report
    tol_used = max(e[3] for e in entries)
    report.tolerance_used = tol_used
    for params, lhs, rhs, tol_i in entries:
        margin = rhs - lhs + tol_rel * abs(rhs) + (tol_i - tol_used)
        report.points.append(PointResult(params, float(lhs), float(rhs), float(margin),
                                         float(tol_i + tol_rel * abs(rhs)),
                                         bool(margin >= -tol_used)))
    if report.status == PASS and report.failures:
        report.status = FAIL
    return report


# -- query grids and kernel backends ----------------------------------------

@dataclass(frozen=True)
class QueryGrid:
    """(x, y, beta) points with x = (x1, d/2), y = (y1, -d/2) for d in dx2s."""

    x1s: tuple = (-1.0, -0.5, 0.0, 0.5, 1.0)
    y1s: tuple = (-1.0, -0.5, 0.0, 0.5, 1.0)
    betas: tuple = (0.5, 1.0, 2.0)
    dx2s: tuple = (0.0,)

    def __len__(self):
        return len(self.x1s) * len(self.y1s) * len(self.betas) * len(self.dx2s)

    def points(self):
        for beta, x1, y1, d in itertools.product(self.betas, self.x1s, self.y1s, self.dx2s):
            yield (x1, 0.5 * d), (y1, -0.5 * d), beta

    @classmethod
    def from_config(cls, cfg) -> "QueryGrid":
        return cls(**{k: tuple(float(v) for v in cfg[k]) for k in ("x1s", "y1s", "betas", "dx2s")
                      if k in cfg})


@dataclass
class SpectralOptions:
    """Spectral backend settings.

    With ``richardson`` the kernel is evaluated at spacings h and h/2 and
    reported as (4 K_{h/2} - K_h) / 3; |K_h - K_{h/2}| / 3 estimates the
    error of the fine value and is added to the tolerance, which is
    conservative for the extrapolated one.
    """

    h: float = 0.02
    richardson: bool = True
    n_modes: Optional[int] = None
    workers: Optional[int] = None


class RichardsonKernel:
    def __init__(self, coarse: SpectralKernel, fine: SpectralKernel):
        self.coarse, self.fine = coarse, fine

    def __call__(self, x, y) -> KernelValue:
        c, f = self.coarse(x, y), self.fine(x, y)
        val = (4.0 * f.value - c.value) / 3.0
        err = (4.0 * f.error + c.error) / 3.0 + abs(f.value - c.value) / 3.0
        return KernelValue(val, err, tuple(sorted(set(c.flags) | set(f.flags))), f.meta)


def spectral_kernels(problems, beta, x1s, max_dx2, opts: SpectralOptions):
    """One shared grid at this beta and a kernel evaluator per problem."""
    anchors = sorted(set(float(v) for v in x1s))
    h = opts.h
    if len(anchors) > 1:
        step = min(np.diff(anchors))
        h = _aligned_h(h, 0.0, step)
    margin = math.sqrt(WALL_EXPONENT * beta)
    grid = Grid1D.around(anchors, margin, h)
    out, flags = [], []
    for f, pot in problems:
        kg, fl = auto_k_grid(f, pot, beta, anchors, grid, max_dx2=max_dx2)
        flags += fl
        k = SpectralKernel(f, pot, beta, grid, kg, n_modes=opts.n_modes, workers=opts.workers)
        if opts.richardson:
            fine = SpectralKernel(f, pot, beta, Grid1D.around(anchors, margin, 0.5 * h), kg,
                                  n_modes=opts.n_modes, workers=opts.workers)
            k = RichardsonKernel(k, fine)
        out.append(k)
    return out, flags


def _validate_pair(pair, grid_pts):
    (f, v), (fh, vh) = pair
    dom = dominates(f, fh, grid_pts)
    if not dom:
        raise ConfigurationError(f"|b| <= bhat fails at {dom.where} (margin {dom.margin:.3g})")
    pb = potential_below(v, vh, grid_pts)
    if not pb:
        raise ConfigurationError(f"v <= vhat fails at {pb.where} (margin {pb.margin:.3g})")


def _pair(pair):
    (f, v), (fh, vh) = pair
    return ((f, zero_potential() if v is None else v), (fh, zero_potential() if vh is None else vh))


# -- Theorem 2 ---------------------------------------------------------------

def check_theorem2(pair, query: QueryGrid = QueryGrid(), backend: str = "spectral",
                   spectral: SpectralOptions = SpectralOptions(), mc: Optional[dict] = None,
                   check_id: str = "theorem2") -> CheckReport:
    """|K(bhat,vhat)(x,y)| <= |K(b,v)((x1,0),(y1,0))| exp(-(x2-y2)^2 / (2 beta)).

    ``pair`` is ((b, v), (bhat, vhat)), all independent of x2.
    """
    pair = _pair(pair)
    (f, v), (fh, vh) = pair
    span = max(map(abs, query.x1s + query.y1s)) + 10.0
    _validate_pair(pair, np.linspace(-span, span, 4001))
    report = CheckReport(check_id, backend)
    entries = []
    if backend == "spectral":
        max_dx2 = max(abs(d) for d in query.dx2s)
        for beta in query.betas:
            (k, kh), flags = spectral_kernels([(f, v), (fh, vh)], beta,
                                              query.x1s + query.y1s, max_dx2, spectral)
            report.flags += flags
            for x1, y1, d in itertools.product(query.x1s, query.y1s, query.dx2s):
                x, y = (x1, 0.5 * d), (y1, -0.5 * d)
                lhs_kv = kh(x, y)
                rhs_kv = k((x1, 0.0), (y1, 0.0))
                report.flags += list(lhs_kv.flags) + list(rhs_kv.flags)
                g = math.exp(-d * d / (2.0 * beta))
                entries.append((_params(x, y, beta), abs(lhs_kv.value), abs(rhs_kv.value) * g,
                                TOL_ABS + lhs_kv.error + rhs_kv.error * g))
    elif backend == "mc":
        mc = dict(mc or {})
        mc.setdefault("n_samples", 20_000)
        mc.setdefault("n_steps", 128)
        mc.setdefault("seed", 0)
        report.notes.append(f"mc {mc}")
        for x, y, beta in query.points():
            d = x[1] - y[1]
            est_h, est = mc_kernels([(fh, vh), (f, v, 0.0)], beta, x, y, **mc)
            entries.append((_params(x, y, beta), abs(est_h.value), abs(est.value),
                            MC_SIGMAS * math.hypot(est_h.std_error, est.std_error)))
    else:
        raise ConfigurationError(f"unknown backend {backend!r}")
    if report.flags:
        report.status = NUMERICAL_FLAG
    return _finish(report, entries)


def _params(x, y, beta):
    return {"x1": float(x[0]), "x2": float(x[1]), "y1": float(y[0]), "y2": float(y[1]),
            "beta": float(beta)}


def pathwise_variance_check(pair, x1: float, y1: float, beta: float, n_paths: int = 100_000,
                            n_steps: int = 128, seed: int = 0, slack: float = 1e-12,
                            check_id: str = "theorem2_pathwise") -> CheckReport:
    """sigma^2(a2hat o w) - sigma^2(a2 o w) >= -slack and mu(v o w) <= mu(vhat o w)
    on common random bridges."""
    (f, v), (fh, vh) = _pair(pair)
    w = sample_bridges(x1, y1, beta, n_steps, n_paths, block_rng(seed, 0))
    report = CheckReport(check_id, "bridge", tolerance_used=slack)
    diff = variance_comparison(f, fh, w, slack=np.inf)
    dv = path_functionals(vh, w).mean - path_functionals(v, w).mean
    i, j = int(np.argmin(diff)), int(np.argmin(dv))
    # store only the worst paths; counts go in the notes
    report.notes.append(f"{n_paths} bridges x1={x1} y1={y1} beta={beta} n_steps={n_steps} seed={seed}")
    report.notes.append(f"variance differences below -slack: {int(np.sum(diff < -slack))}")
    report.points.append(PointResult({"quantity": "variance", "path": i}, 0.0, float(diff[i]),
                                     float(diff[i]), slack, bool(diff[i] >= -slack)))
    report.points.append(PointResult({"quantity": "potential_mean", "path": j}, 0.0, float(dv[j]),
                                     float(dv[j]), slack, bool(dv[j] >= -slack)))
    if report.failures:
        report.status = FAIL
    return report


# -- Theorem 1 and energies --------------------------------------------------

@dataclass
class RadialOptions:
    grid: RadialGrid = field(default_factory=RadialGrid)
    m_window: tuple = (-60, 60)


def _radial_energy(f, v, opts: RadialOptions):
    """Ground state on grid and half-spacing grid; returns (fine result, error estimate)."""
    coarse = ground_state_energy_radial(f, v, opts.m_window, opts.grid)
    fine_grid = RadialGrid(opts.grid.r_max, 2 * opts.grid.n_points)
    fine = ground_state_energy_radial(f, v, opts.m_window, fine_grid)
    return fine, abs(coarse.energy - fine.energy) / 3.0


_gate_cache: dict = {}


def radial_consistency_gate(b: float, opts: RadialOptions = RadialOptions(),
                            rtol: float = 1e-4) -> tuple[bool, float, float]:
    """Constant-field ground energies from both spectral backends must agree."""
    key = (float(b), opts.grid, tuple(opts.m_window))
    if key not in _gate_cache:
        e_rad = ground_state_energy_radial(constant_field(b), None, opts.m_window, opts.grid).energy
        e_iwa = ground_state_energy(constant_field(b), None, k_window=4.0, k_points=9,
                                    grid=Grid1D.around([0.0], 10.0, 0.01)).value
        ok = abs(e_rad - e_iwa) <= rtol * max(abs(e_iwa), 1e-12)
        _gate_cache[key] = (ok, e_rad, e_iwa)
    return _gate_cache[key]


def check_theorem1(pair, opts: RadialOptions = RadialOptions(), closed_form_rhs: bool = False,
                   check_id: str = "theorem1") -> CheckReport:
    """e0(b, v) <= e0(bhat, vhat) for centrally symmetric hat problems.

    The hat problem must have its ground state in the m = 0 channel (a
    real ground state in the Poincare gauge); otherwise the report status
    is ``hypothesis-not-verified``.
    """
    (f, v), (fh, vh) = _pair(pair)
    report = CheckReport(check_id, "radial")
    if fh.kind == "x1" or vh.kind == "x1":
        report.status = NOT_VERIFIED
        report.notes.append("hat problem is not centrally symmetric")
        return report
    r = np.linspace(0.0, opts.grid.r_max, 4001)
    _validate_pair(((f, v), (fh, vh)), r)
    for b in {fh.constant_value} if fh.is_constant else set():
        ok, e_rad, e_iwa = radial_consistency_gate(b, opts)
        report.notes.append(f"consistency gate b={b}: radial {e_rad:.10g} vs fibre {e_iwa:.10g}")
        if not ok:
            report.status = NUMERICAL_FLAG
            return report
    hat, err_hat = _radial_energy(fh, vh, opts)
    report.flags += hat.flags
    if not zero_channel_is_ground(hat):
        report.status = NOT_VERIFIED
        report.notes.append(f"hat ground state sits in channel m={hat.m}, not m=0")
        return report
    low, err_low = _radial_energy(f, v, opts)
    report.flags += [fl for fl in low.flags if fl != "box_edge"]
    if "box_edge" in low.flags:
        report.notes.append("lhs ground state reaches the box wall (continuum edge)")
    rhs, err_rhs = hat.energy, err_hat
    if closed_form_rhs:
        if not (fh.is_constant and vh.name in ("oscillator", "zero")):
            raise ConfigurationError("closed-form rhs needs constant bhat and an oscillator")
        omega = float(vh.params.get("omega", 0.0))
        rhs, err_rhs = exact.oscillator_e0(fh.constant_value, omega), 0.0
    if "m_window_edge" in report.flags:
        report.status = NUMERICAL_FLAG
    params = {"lhs_m": low.m, "rhs_m": hat.m}
    return _finish(report, [(params, low.energy, rhs, TOL_ABS + err_low + err_rhs)])


def check_sandwich(f: FieldProfile, h: float = 0.02, radial: RadialOptions = RadialOptions(),
                   check_id: str = "sandwich") -> CheckReport:
    """inf|b|/2 <= e0(b, 0) <= sup|b|/2; the upper bound is skipped when infinite."""
    if f.bounds is None:
        raise ConfigurationError("sandwich check needs known inf|b| and sup|b|")
    lo, hi = f.bounds
    if f.kind == "radial":
        res, err = _radial_energy(f, None, radial)
        report = CheckReport(check_id, "radial")
        e, flags = res.energy, [fl for fl in res.flags if fl != "box_edge"]
        if "box_edge" in res.flags:
            report.notes.append("ground state reaches the box wall (continuum edge)")
    else:
        coarse = ground_state_energy(f, None, h=h)
        fine = ground_state_energy(f, None, h=0.5 * h)
        e, err = fine.value, abs(coarse.value - fine.value) / 3.0 + fine.error_bound
        flags = fine.flags
        report = CheckReport(check_id, "spectral")
        report.notes.append(f"e0 = {e:.12g} at k = {fine.argmin:.6g}")
    report.flags += flags
    if flags:
        report.status = NUMERICAL_FLAG
    entries = [({"bound": "lower"}, 0.5 * lo, e, TOL_ABS + err)]
    if math.isfinite(hi):
        entries.append(({"bound": "upper"}, e, 0.5 * hi, TOL_ABS + err))
    else:
        report.notes.append("sup|b| is infinite: upper bound skipped")
    return _finish(report, entries)


# -- Gaussian bounds for x2-independent fields ------------------------------

def _bound_check(f, query, spectral, check_id, make_entry, zero_dx2=False):
    report = CheckReport(check_id, "spectral")
    entries = []
    dx2s = (0.0,) if zero_dx2 else query.dx2s
    for beta in query.betas:
        (k,), flags = spectral_kernels([(f, zero_potential())], beta, query.x1s + query.y1s,
                                       max(abs(d) for d in dx2s), spectral)
        report.flags += flags
        for x1, y1, d in itertools.product(query.x1s, query.y1s, dx2s):
            x, y = (x1, 0.5 * d), (y1, -0.5 * d)
            kv = k(x, y)
            report.flags += list(kv.flags)
            entries.append(make_entry(x, y, beta, kv))
    if report.flags:
        report.status = NUMERICAL_FLAG
    return report, entries


def check_lt_bound(fhat: FieldProfile, query: QueryGrid = QueryGrid(),
                   spectral: SpectralOptions = SpectralOptions(), b: Optional[float] = None,
                   check_id: str = "lt_bound") -> CheckReport:
    """|K(bhat,0)(x,y)| <= b/(4 pi sinh(beta b/2)) exp(-|x-y|^2/(2 beta)), b = inf bhat."""
    b = _inf_field(fhat) if b is None else b

    def entry(x, y, beta, kv):
        return (_params(x, y, beta), abs(kv.value), float(exact.gaussian_upper_rhs(b, beta, x, y)),
                TOL_ABS + kv.error)

    report, entries = _bound_check(fhat, query, spectral, check_id, entry)
    report.notes.append(f"constant b = {b}")
    return _finish(report, entries)


def check_improved_bound(fhat: FieldProfile, query: QueryGrid = QueryGrid(),
                         spectral: SpectralOptions = SpectralOptions(), b: Optional[float] = None,
                         check_id: str = "improved_bound") -> CheckReport:
    """|K(bhat,0)(x,y)| <= constant-field decay along x1 times free decay along x2."""
    b = _inf_field(fhat) if b is None else b

    def entry(x, y, beta, kv):
        return (_params(x, y, beta), abs(kv.value),
                float(exact.improved_bound_rhs(b, beta, x, y)), TOL_ABS + kv.error)

    report, entries = _bound_check(fhat, query, spectral, check_id, entry)
    report.notes.append(f"constant b = {b}")
    return _finish(report, entries)


def check_lower_bound(f: FieldProfile, query: QueryGrid = QueryGrid(),
                      spectral: SpectralOptions = SpectralOptions(), bhat: Optional[float] = None,
                      check_id: str = "lower_bound") -> CheckReport:
    """bhat/(4 pi sinh(beta bhat/2)) exp(-(bhat/4)(x1-y1)^2/tanh(beta bhat/2))
    <= |K(b,0)((x1,0),(y1,0))| with bhat = sup|b|.

    For unbounded |b| the optimal constant is infinite and the lower bound
    degenerates to 0.
    """
    if bhat is None:
        if f.bounds is None:
            raise ConfigurationError("lower-bound check needs sup|b|")
        bhat = f.bounds[1]

    def entry(x, y, beta, kv):
        lhs = 0.0 if math.isinf(bhat) else float(exact.lower_bound_lhs(bhat, beta, x[0], y[0]))
        return (_params(x, y, beta), lhs, abs(kv.value), TOL_ABS + kv.error)

    report, entries = _bound_check(f, query, spectral, check_id, entry, zero_dx2=True)
    report.notes.append(f"constant bhat = {bhat}")
    if math.isinf(bhat):
        report.notes.append("sup|b| is infinite: the lower bound degenerates to 0")
    return _finish(report, entries)


def _inf_field(f):
    if f.bounds is None or not f.bounds[0] > 0:
        raise ConfigurationError("bound needs inf bhat > 0")
    return f.bounds[0]


# -- constant field plus oscillator: Fact 3 ----------------------------------

@dataclass
class Fact3Witness:
    b: float
    beta: float
    x: tuple
    omega_grid: tuple  # (start, stop, n)
    interval: tuple    # (omega_lo, omega_hi)
    n_increasing: int

    def omegas(self) -> np.ndarray:
        return np.linspace(*self.omega_grid[:2], int(self.omega_grid[2]))


def offdiag_modulus(b: float, beta: float, x, omegas) -> np.ndarray:
    """omega -> |<x|exp(-beta H(b, v_osc))|-x>|."""
    x = np.asarray(x, dtype=float)
    return np.array([abs(exact.mehler_kernel(exact.MehlerParams(b, w, beta), x, -x))
                     for w in omegas])


def scan_fact3(b: float, beta: float, x, omega_grid) -> Optional[Fact3Witness]:
    """Longest run of strictly increasing |K(x,-x)| over the omega grid."""
    x = tuple(float(c) for c in x)
    if x == (0.0, 0.0):
        raise ValueError("x must be non-zero")
    om = np.asarray(omega_grid, dtype=float)
    vals = offdiag_modulus(b, beta, x, om)
    inc = np.diff(vals) > 0
    best, start = (0, 0), None
    for i, up in enumerate(np.append(inc, False)):
        if up and start is None:
            start = i
        elif not up and start is not None:
            best = max(best, (i - start, start), key=lambda t: t[0])
            start = None
    run, s = best
    if run == 0:
        return None
    return Fact3Witness(b, beta, x, (float(om[0]), float(om[-1]), int(om.size)),
                        (float(om[s]), float(om[s + run])), run + 1)


def search_fact3(b_values=np.linspace(0.5, 5.0, 10), beta_values=np.linspace(0.5, 5.0, 10),
                 radii=np.linspace(0.25, 3.0, 12), omega_grid=np.linspace(0.01, 3.0, 300)):
    """Witnesses in the box b, beta in (0, 5], |x| in (0, 3], omega in (0, 3]."""
    found = []
    for b, beta, r in itertools.product(b_values, beta_values, radii):
        w = scan_fact3(float(b), float(beta), (float(r), 0.0), omega_grid)
        if w is not None:
            found.append(w)
    return found


# -- Fact 4 -----------------------------------------------------------------

@dataclass
class Fact4Witness:
    b: float
    lam: float
    x: tuple
    y: tuple
    beta: float
    k_hat: float
    k_const: float
    spectral_tol: float

    @property
    def margin(self) -> float:
        return self.k_hat - self.k_const


def fact4_modulus(b: float, lam: float, beta: float, x, y, h: float = 0.02,
                  workers: Optional[int] = None) -> tuple[float, float]:
    """|K(bhat,0)(x,y)| for bhat = b (1 + x1^2 / lam^2) and its spectral tolerance."""
    from .fields import fact4_field
    (k,), _ = spectral_kernels([(fact4_field(b, lam), zero_potential())], beta, [x[0], y[0]],
                               abs(x[1] - y[1]), SpectralOptions(h=h, workers=workers))
    kv = k(x, y)
    return abs(kv.value), TOL_ABS + kv.error


def scan_fact4(b: float, lambdas, query: QueryGrid, h: float = 0.04) -> list[Fact4Witness]:
    """Points where the larger field bhat gives the larger kernel modulus."""
    from .fields import fact4_field
    out = []
    for lam in lambdas:
        fh = fact4_field(b, lam)
        for beta in query.betas:
            (k,), _ = spectral_kernels([(fh, zero_potential())], beta, query.x1s + query.y1s,
                                       max(abs(d) for d in query.dx2s), SpectralOptions(h=h))
            for x1, y1, d in itertools.product(query.x1s, query.y1s, query.dx2s):
                x, y = (x1, 0.5 * d), (y1, -0.5 * d)
                kv = k(x, y)
                kh, tol = abs(kv.value), TOL_ABS + kv.error
                kc = float(abs(exact.mehler_kernel(exact.MehlerParams(b, 0.0, beta), x, y)))
                if kh > kc + tol:
                    out.append(Fact4Witness(b, float(lam), x, y, float(beta), kh, kc, tol))
    return out


# -- open problem and zero temperature ---------------------------------------

def scan_open_problem(f: FieldProfile, bhat: float, query: QueryGrid = QueryGrid(),
                      spectral: SpectralOptions = SpectralOptions(),
                      check_id: str = "open_problem") -> CheckReport:
    """|K(bhat,0)(x,y)| vs |K(b,0)(x,y)| for constant bhat >= sup|b|; report only."""
    report = CheckReport(check_id, "spectral+mehler")
    entries = []
    for beta in query.betas:
        (k,), _ = spectral_kernels([(f, zero_potential())], beta, query.x1s + query.y1s,
                                   max(abs(d) for d in query.dx2s), spectral)
        for x, y, _b in ((x, y, beta) for x, y, bb in query.points() if bb == beta):
            kv = k(x, y)
            lhs = float(abs(exact.mehler_kernel(exact.MehlerParams(bhat, 0.0, beta), x, y)))
            entries.append((_params(x, y, beta), lhs, abs(kv.value), TOL_ABS + kv.error))
    _finish(report, entries)
    report.notes.append(f"{len(report.failures)} of {report.points_tested} points violate the assertion")
    report.status = INFORMATIONAL
    return report


def zero_temperature_trend(pair, x1: float = 0.0, betas=(2.0, 4.0, 8.0),
                           spectral: SpectralOptions = SpectralOptions(h=0.04)):
    """-(1/beta) log(diag_hat / diag) at each beta, and e0(hat) - e0 from the band minima."""
    (f, v), (fh, vh) = _pair(pair)
    rates = []
    for beta in betas:
        (k, kh), _ = spectral_kernels([(f, v), (fh, vh)], beta, [x1], 0.0, spectral)
        d, dh = k((x1, 0.0), (x1, 0.0)).value.real, kh((x1, 0.0), (x1, 0.0)).value.real
        rates.append(-math.log(dh / d) / beta)
    gap = ground_state_energy(fh, vh).value - ground_state_energy(f, v).value
    return np.array(rates), gap


def report_summary(reports: Sequence[CheckReport]) -> list[str]:
    lines = []
    for r in reports:
        lines.append(f"{r.check_id:32s} {r.status:24s} points={r.points_tested:4d} "
                     f"worst_margin={r.worst_margin:.3e}")
    return lines



def cross_backend_agreement(pair, query: QueryGrid, mc: Optional[dict] = None,
                            spectral: SpectralOptions = SpectralOptions()):
    """Theorem-2 margins from both backends at each query point.

    Returns (spectral report, mc report, rows) where each row is
    (params, spectral margin, mc margin, combined standard error, agree).
    The combined error is the sum of the two MC standard errors, which
    bounds the error of the difference for correlated estimates.
    """
    rs = check_theorem2(pair, query, "spectral", spectral=spectral)
    rm = check_theorem2(pair, query, "mc", mc=mc)
    rows = []
    for ps, pm in zip(rs.points, rm.points):
        ms, mm = ps.rhs - ps.lhs, pm.rhs - pm.lhs
        se = (pm.tol - TOL_REL * abs(pm.rhs)) / MC_SIGMAS * math.sqrt(2.0)
        rows.append((ps.params, ms, mm, se, abs(ms - mm) < MC_SIGMAS * se and ps.ok == pm.ok))
    return rs, rm, rows


# -- committed witnesses -----------------------------------------------------

def load_fixture(name: str) -> dict:
    from importlib.resources import files
    return json.loads(files("diamag").joinpath("fixtures", name).read_text())


def verify_fact3_fixture(data: Optional[dict] = None) -> tuple[bool, np.ndarray]:
    """Strict increase of |K(x,-x)| across the committed omega grid."""
    d = load_fixture("fact3_witness.json") if data is None else data
    om = np.linspace(d["omega_grid"][0], d["omega_grid"][1], int(d["omega_grid"][2]))
    vals = offdiag_modulus(d["b"], d["beta"], d["x"], om)
    return bool(np.all(np.diff(vals) > 0)), vals


def verify_fact4_fixture(data: Optional[dict] = None, workers: Optional[int] = None
                         ) -> tuple[Fact4Witness, float]:
    """Recompute the committed witness; returns it and the improved-bound rhs there."""
    d = load_fixture("fact4_witness.json") if data is None else data
    x, y = tuple(d["x"]), tuple(d["y"])
    kh, tol = fact4_modulus(d["b"], d["lambda"], d["beta"], x, y, h=d.get("h", 0.02),
                            workers=workers)
    kc = float(abs(exact.mehler_kernel(exact.MehlerParams(d["b"], 0.0, d["beta"]), x, y)))
    w = Fact4Witness(d["b"], d["lambda"], x, y, d["beta"], kh, kc, tol)
    return w, float(exact.improved_bound_rhs(d["b"], d["beta"], x, y))
