"""
Magnetic fields and scalar potentials for planar Schrodinger operators.

Fields are either constant, depend on x1 only (``"x1"``), or are centrally
symmetric (``"radial"``).  Two gauges are supported:

* asymmetric gauge  a = (0, a2(x1)),  a2(x1) = int_0^x1 b
* Poincare gauge    a(x) = (-x2, x1) int_0^1 xi b(xi x) dxi,
  which for radial fields has azimuthal component flux(r) / r with
  flux(r) = int_0^r s b(s) ds.

Profiles are immutable; every evaluation is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np
from scipy import integrate, special

FIELD_KINDS = ("constant", "x1", "radial")
POTENTIAL_KINDS = ("zero", "x1", "radial")

DEFAULT_QUAD_TOL = 1e-10


class ProfileError(ValueError):
    """Invalid profile construction or evaluation outside the domain."""


@dataclass(frozen=True, eq=False)
class FieldProfile:
    """A magnetic field b of constant direction.

    ``b`` maps the profile coordinate (x1 for ``"x1"``, r for ``"radial"``)
    to the field value and must accept numpy arrays.  ``antiderivative`` and
    ``flux`` are optional closed forms of int_0^x b and int_0^r s b(s) ds.
    ``bounds`` holds (inf |b|, sup |b|) over the whole plane when known.
    """

    kind: str
    b: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    params: Mapping[str, object] = field(default_factory=dict)
    antiderivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    flux: Optional[Callable[[np.ndarray], np.ndarray]] = None
    bounds: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ProfileError(f"unknown field kind {self.kind!r}")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "radial" and np.any(s < 0):
            raise ProfileError("radial field evaluated at negative radius")
        return np.asarray(self.b(s), dtype=float) * np.ones_like(s)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def constant_value(self) -> float:
        if not self.is_constant:
            raise ProfileError(f"{self.name} is not a constant field")
        return float(self.params["b"])

    def scaled(self, c: float) -> "FieldProfile":
        """Return the field c * b with all closed forms scaled alongside."""
        anti = self.antiderivative
        flux = self.flux
        params = dict(self.params)
        if self.is_constant:
            params["b"] = c * float(params["b"])
        bounds = None
        if self.bounds is not None:
            lo, hi = self.bounds
            bounds = (abs(c) * lo, abs(c) * hi)
        return replace(
            self,
            b=lambda s, f=self.b: c * f(s),
            name=f"{c:g}*{self.name}",
            params=params,
            antiderivative=None if anti is None else (lambda x, g=anti: c * g(x)),
            flux=None if flux is None else (lambda r, g=flux: c * g(r)),
            bounds=bounds,
        )

    def envelope(self) -> "FieldProfile":
        """|b| as a field profile of the same kind (no closed forms kept)."""
        bounds = self.bounds
        if self.is_constant:
            return constant_field(abs(self.constant_value))
        return FieldProfile(self.kind, lambda s, f=self.b: np.abs(f(s)),
                            name=f"|{self.name}|", bounds=bounds)


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """A scalar potential bounded below by ``lower_bound``."""

    kind: str
    v: Callable[[np.ndarray], np.ndarray]
    lower_bound: float
    name: str = "custom"
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ProfileError(f"unknown potential kind {self.kind!r}")
        probe = np.linspace(-50.0, 50.0, 2001)
        if self.kind == "radial":
            probe = np.abs(probe)
        vals = np.asarray(self.v(probe), dtype=float) * np.ones_like(probe)
        if not np.all(np.isfinite(vals)):
            raise ProfileError(f"potential {self.name} not finite on probe grid")
        if vals.min() < self.lower_bound - 1e-12 * max(1.0, abs(self.lower_bound)):
            raise ProfileError(
                f"potential {self.name} violates declared lower bound "
                f"{self.lower_bound} (min sampled {vals.min()})")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "radial" and np.any(s < 0):
            raise ProfileError("radial potential evaluated at negative radius")
        return np.asarray(self.v(s), dtype=float) * np.ones_like(s)


# -- field presets -----------------------------------------------------------

def constant_field(b: float) -> FieldProfile:
    b = float(b)
    return FieldProfile(
        "constant", lambda s: np.full_like(np.asarray(s, dtype=float), b),
        name="constant", params={"b": b},
        antiderivative=lambda x: b * np.asarray(x, dtype=float),
        flux=lambda r: 0.5 * b * np.asarray(r, dtype=float) ** 2,
        bounds=(abs(b), abs(b)))


def fact4_field(b: float, lam: float) -> FieldProfile:
    """b (1 + x1^2 / lam^2): bounded below by b, unbounded above."""
    b, lam = float(b), float(lam)
    if lam <= 0:
        raise ProfileError("lambda must be positive")
    return FieldProfile(
        "x1", lambda x: b * (1.0 + x ** 2 / lam ** 2),
        name="fact4", params={"b": b, "lambda": lam},
        antiderivative=lambda x: b * (x + x ** 3 / (3.0 * lam ** 2)),
        bounds=(abs(b), math.inf) if b != 0 else (0.0, 0.0))


def sine_field(offset: float = 2.0, amplitude: float = 1.0,
               wavenumber: float = 1.0) -> FieldProfile:
    c, a, q = float(offset), float(amplitude), float(wavenumber)
    if q == 0:
        raise ProfileError("wavenumber must be non-zero")
    lo = max(0.0, abs(c) - abs(a))
    return FieldProfile(
        "x1", lambda x: c + a * np.sin(q * x),
        name="sine", params={"offset": c, "amplitude": a, "wavenumber": q},
        antiderivative=lambda x: c * x + a * (1.0 - np.cos(q * x)) / q,
        bounds=(lo, abs(c) + abs(a)))


def gaussian_field(amplitude: float, width: float = 1.0, base: float = 0.0,
                   geometry: str = "radial") -> FieldProfile:
    """base + amplitude * exp(-s^2 / width^2), s = r or x1."""
    A, w, c = float(amplitude), float(width), float(base)
    if w <= 0:
        raise ProfileError("width must be positive")
    if geometry not in ("radial", "x1"):
        raise ProfileError("gaussian geometry must be 'radial' or 'x1'")
    vals = (c, c + A)
    if min(vals) <= 0 <= max(vals):
        lo = 0.0
    else:
        lo = min(abs(c), abs(c + A))
    bounds = (lo, max(abs(c), abs(c + A)))
    params = {"amplitude": A, "width": w, "base": c, "geometry": geometry}
    if geometry == "radial":
        return FieldProfile(
            "radial", lambda r: c + A * np.exp(-(r / w) ** 2),
            name="gaussian", params=params,
            flux=lambda r: 0.5 * c * r ** 2 + 0.5 * A * w ** 2 * -np.expm1(-(r / w) ** 2),
            bounds=bounds)
    return FieldProfile(
        "x1", lambda x: c + A * np.exp(-(x / w) ** 2),
        name="gaussian", params=params,
        antiderivative=lambda x: c * x + 0.5 * A * w * math.sqrt(math.pi) * special.erf(x / w),
        bounds=bounds)


def exponential_field(amplitude: float = 1.0, length: float = 1.0) -> FieldProfile:
    """Radial amplitude * exp(-r / length)."""
    A, ell = float(amplitude), float(length)
    if ell <= 0:
        raise ProfileError("length must be positive")
    return FieldProfile(
        "radial", lambda r: A * np.exp(-r / ell),
        name="exponential", params={"amplitude": A, "length": ell},
        flux=lambda r: A * ell ** 2 * (1.0 - np.exp(-r / ell) * (1.0 + r / ell)),
        bounds=(0.0, abs(A)))


def piecewise_linear_field(knots, values, geometry: str = "x1") -> FieldProfile:
    """Linear interpolation through (knots, values), constant beyond the ends.

    Kinks make these fields only Lipschitz; results on them are empirical.
    """
    xs = np.asarray(knots, dtype=float)
    ys = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise ProfileError("knots must be strictly increasing and match values")
    if geometry not in ("x1", "radial"):
        raise ProfileError("piecewise_linear geometry must be 'x1' or 'radial'")

    def b(s):
        return np.interp(s, xs, ys)

    gauss_t, gauss_w = np.polynomial.legendre.leggauss(3)

    def _integral(order, s):
        # int_0^s t^order b(t) dt; 3-point Gauss is exact between knots
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        out = np.empty_like(flat)
        for i, si in enumerate(flat):
            lo, hi = min(0.0, si), max(0.0, si)
            nodes = np.concatenate(([lo], xs[(xs > lo) & (xs < hi)], [hi]))
            mid = 0.5 * (nodes[1:] + nodes[:-1])
            half = 0.5 * (nodes[1:] - nodes[:-1])
            t = mid[:, None] + half[:, None] * gauss_t[None, :]
            total = float(np.sum(half[:, None] * gauss_w * t ** order * b(t)))
            out[i] = total if si >= 0 else -total
        return out.reshape(s.shape)

    lo = 0.0 if ys.min() <= 0 <= ys.max() else float(np.min(np.abs(ys)))
    params = {"knots": xs.tolist(), "values": ys.tolist(), "geometry": geometry}
    bounds = (lo, float(np.max(np.abs(ys))))
    if geometry == "radial":
        if xs[0] < 0:
            raise ProfileError("radial knots must be non-negative")
        return FieldProfile("radial", b, name="piecewise_linear", params=params,
                            flux=lambda r: _integral(1, r), bounds=bounds)
    return FieldProfile("x1", b, name="piecewise_linear", params=params,
                        antiderivative=lambda x: _integral(0, x), bounds=bounds)


# -- potential presets -------------------------------------------------------

def zero_potential() -> PotentialProfile:
    return PotentialProfile("zero", lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                            0.0, name="zero")


def oscillator_potential(omega: float, geometry: str = "radial") -> PotentialProfile:
    """omega^2 s^2 / 2 with s = |x| (radial) or x1."""
    w = float(omega)
    if w < 0:
        raise ProfileError("omega must be non-negative")
    if geometry not in ("radial", "x1"):
        raise ProfileError("oscillator geometry must be 'radial' or 'x1'")
    return PotentialProfile(geometry, lambda s: 0.5 * w ** 2 * np.asarray(s, dtype=float) ** 2,
                            0.0, name="oscillator",
                            params={"omega": w, "geometry": geometry})


def coulomb_potential(g: float, lam: float) -> PotentialProfile:
    """-g / sqrt(r^2 + lam^2), bounded below by -g / lam."""
    g, lam = float(g), float(lam)
    if g <= 0 or lam <= 0:
        raise ProfileError("coulomb g and lambda must be positive")
    return PotentialProfile("radial", lambda r: -g / np.sqrt(np.asarray(r, dtype=float) ** 2 + lam ** 2),
                            -g / lam, name="coulomb", params={"g": g, "lambda": lam})


def _pop_lambda(kw):
    # "lambda" is a keyword in Python, so presets receive it through **kw
    lam = kw.pop("lambda")
    if kw:
        raise TypeError(f"unexpected keys {sorted(kw)}")
    return lam


FIELD_PRESETS: dict[str, Callable[..., FieldProfile]] = {
    "zero": lambda: constant_field(0.0),
    "constant": lambda b: constant_field(b),
    "fact4": lambda b, **kw: fact4_field(b, _pop_lambda(kw)),
    "sine": sine_field,
    "gaussian": gaussian_field,
    "exponential": exponential_field,
    "piecewise_linear": piecewise_linear_field,
}

POTENTIAL_PRESETS: dict[str, Callable[..., PotentialProfile]] = {
    "zero": zero_potential,
    "oscillator": oscillator_potential,
    "coulomb": lambda g, **kw: coulomb_potential(g, _pop_lambda(kw)),
}


def field_from_config(cfg: Mapping[str, object]) -> FieldProfile:
    """Build a field from ``{preset = "...", <params>}``."""
    return _from_config(cfg, FIELD_PRESETS, "field")


def potential_from_config(cfg: Optional[Mapping[str, object]]) -> PotentialProfile:
    if cfg is None:
        return zero_potential()
    return _from_config(cfg, POTENTIAL_PRESETS, "potential")


def _from_config(cfg, table, what):
    cfg = dict(cfg)
    try:
        preset = cfg.pop("preset")
    except KeyError:
        raise ProfileError(f"{what} config needs a 'preset' key") from None
    if preset not in table:
        raise ProfileError(f"unknown {what} preset {preset!r}; known: {sorted(table)}")
    try:
        return table[preset](**cfg)
    except (TypeError, KeyError) as exc:
        raise ProfileError(f"bad parameters for {what} preset {preset!r}: {exc}") from None


# -- evaluation and gauges ---------------------------------------------------

def eval_field(f: FieldProfile, p) -> float:
    """Field value at ``p``.

    ``p`` is a point (x1, x2) or a bare profile coordinate (x1, or r for
    radial fields).
    """
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        return float(f(p))
    if p.shape[-1] != 2:
        raise ProfileError("points must have two coordinates")
    if f.kind == "radial":
        return f(np.hypot(p[..., 0], p[..., 1]))[()]
    return f(p[..., 0])[()]


def gauge_a2(f: FieldProfile, x1, tol: float = DEFAULT_QUAD_TOL):
    """Asymmetric-gauge component a2(x1) = int_0^x1 b."""
    if f.kind == "radial":
        raise ProfileError("asymmetric gauge needs a field independent of x2")
    x = np.asarray(x1, dtype=float)
    if f.antiderivative is not None:
        return np.asarray(f.antiderivative(x), dtype=float) * np.ones_like(x)
    return _cumulative_quad(lambda t: float(f(t)), x, tol)


def poincare_flux(f: FieldProfile, r, tol: float = DEFAULT_QUAD_TOL):
    """Flux function int_0^r s b(s) ds of a radial (or constant) field."""
    if f.kind == "x1":
        raise ProfileError("flux function needs a centrally symmetric field")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ProfileError("flux evaluated at negative radius")
    if f.flux is not None:
        return np.asarray(f.flux(r), dtype=float) * np.ones_like(r)
    return _cumulative_quad(lambda s: s * float(f(s)), r, tol)


def poincare_vector_potential(f: FieldProfile, x, tol: float = DEFAULT_QUAD_TOL) -> np.ndarray:
    """(-x2, x1) int_0^1 xi b(xi x) dxi for any profile kind."""
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    r = np.hypot(x1, x2)
    if f.kind in ("constant", "radial"):
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.where(r > 0, poincare_flux(f, r, tol) / np.where(r > 0, r, 1.0) ** 2,
                         0.5 * f(np.zeros_like(r)))
    else:
        # b(xi x) = b(xi x1): int_0^1 xi b(xi x1) dxi
        flat = np.atleast_1d(x1).ravel()
        g = np.array([integrate.quad(lambda xi, s=s: xi * float(f(xi * s)), 0.0, 1.0,
                                     epsabs=tol, epsrel=tol)[0] for s in flat])
        g = g.reshape(np.shape(x1))
    return np.stack([-x2 * g, x1 * g], axis=-1)


def _cumulative_quad(fun, x, tol):
    """int_0^x fun for every entry of x, additive over sorted nodes."""
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    for sign in (1.0, -1.0):
        mask = sign * flat >= 0
        if not mask.any():
            continue
        pts = np.unique(np.abs(flat[mask]))
        acc, prev, vals = 0.0, 0.0, {}
        for p in pts:
            if p > prev:
                acc += integrate.quad(lambda t: fun(sign * t), prev, p,
                                      epsabs=tol, epsrel=0.0, limit=200)[0]
            vals[p] = acc
            prev = p
        out[mask] = [sign * vals[abs(v)] for v in flat[mask]]
    return out.reshape(np.shape(x)) if np.ndim(x) else out[0]


# -- hypotheses --------------------------------------------------------------

@dataclass(frozen=True)
class Domination:
    holds: bool
    margin: float
    where: float

    def __bool__(self):
        return self.holds


def _compatible(f: FieldProfile, g) -> bool:
    kinds = {f.kind, g.kind} - {"constant", "zero"}
    return len(kinds) <= 1


def dominates(f: FieldProfile, fhat: FieldProfile, grid) -> Domination:
    """Test |b| <= bhat on the sample grid; report min(bhat - |b|)."""
    if not _compatible(f, fhat):
        raise ProfileError(f"cannot compare {f.kind} field with {fhat.kind} field")
    s = np.asarray(grid, dtype=float)
    if "radial" in (f.kind, fhat.kind):
        s = s[s >= 0]
    gap = fhat(s) - np.abs(f(s))
    i = int(np.argmin(gap))
    return Domination(bool(gap[i] >= 0.0), float(gap[i]), float(s[i]))


def potential_below(v: PotentialProfile, vhat: PotentialProfile, grid) -> Domination:
    """Test v <= vhat on the sample grid; report min(vhat - v)."""
    if not _compatible(v, vhat):
        raise ProfileError(f"cannot compare {v.kind} potential with {vhat.kind} potential")
    s = np.asarray(grid, dtype=float)
    if "radial" in (v.kind, vhat.kind):
        s = s[s >= 0]
    gap = vhat(s) - v(s)
    i = int(np.argmin(gap))
    return Domination(bool(gap[i] >= 0.0), float(gap[i]), float(s[i]))
