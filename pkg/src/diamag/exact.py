"""
Closed-form density matrices and Gaussian bounds.

All kernels here are for H = (P - a(Q))^2 / 2 + v(Q) in the plane with
unit mass, charge and hbar.  Constant-field kernels are given in the
Poincare (symmetric) gauge a = b (-x2, x1) / 2 unless stated otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SMALL = 1e-6


@dataclass(frozen=True)
class MehlerParams:
    b: float
    omega: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")

    @property
    def Omega(self) -> float:
        return oscillator_e0(self.b, self.omega)


@dataclass(frozen=True)
class KernelValue:
    """A complex kernel value with uncertainty and diagnostic flags.

    ``error`` is a deterministic error estimate (or the Monte Carlo
    standard error for stochastic backends).
    """

    value: complex
    error: float = 0.0
    flags: tuple = ()
    meta: dict | None = None

    def __abs__(self):
        return abs(self.value)


def _check_beta(beta):
    if not np.all(np.asarray(beta) > 0):
        raise ValueError("beta must be positive")


def _t_over_sinh(t):
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SMALL
    safe = np.where(small, 1.0, t)
    with np.errstate(over="ignore"):
        out = np.where(small, 1.0 - t * t / 6.0, safe / np.sinh(safe))
    return out


def _t_over_tanh(t):
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SMALL
    safe = np.where(small, 1.0, t)
    return np.where(small, 1.0 + t * t / 3.0, safe / np.tanh(safe))


def _log_cosh(t):
    a = np.abs(np.asarray(t, dtype=float))
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def _log_sinh_over_t(t):
    # log(sinh(t) / t) for t >= 0
    a = np.abs(np.asarray(t, dtype=float))
    small = a < _SMALL
    big = a > 20.0
    mid = ~(small | big)
    out = np.empty_like(a)
    out[small] = a[small] ** 2 / 6.0
    out[mid] = np.log(np.sinh(a[mid]) / a[mid])
    out[big] = a[big] - math.log(2.0) - np.log(a[big]) + np.log1p(-np.exp(-2.0 * a[big]))
    return out


def _points(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError("points must have two coordinates")
    return x[..., 0], x[..., 1]


def oscillator_e0(b: float, omega: float) -> float:
    """Ground-state energy sqrt((b/2)^2 + omega^2) of constant b plus oscillator."""
    return math.hypot(0.5 * b, omega)


def mehler_kernel(p: MehlerParams, x, y):
    """<x|exp(-beta H(b, v_osc))|y> in the Poincare gauge.

    v_osc = omega^2 |x|^2 / 2.  Vectorised over leading axes of ``x`` and
    ``y``; the b = omega = 0 limit reduces to the free kernel.
    """
    beta, b = float(p.beta), float(p.b)
    Om = p.Omega
    t = beta * Om
    x1, x2 = _points(x)
    y1, y2 = _points(y)
    xy = x1 * y1 + x2 * y2
    cross = x2 * y1 - x1 * y2
    # Om / tanh(beta Om) = (1/beta) * t / tanh t, and Om / sinh = (1/beta) * t / sinh t
    coth_fac = _t_over_tanh(t) / beta
    log_pref = -math.log(2.0 * math.pi * beta) - float(_log_sinh_over_t(t))
    ratio = float(np.exp(_log_cosh(0.5 * beta * b) - _log_cosh(t)))
    # x^2 + y^2 - 2 x.y ratio, written to stay accurate as ratio -> 1
    quad = (x1 - y1) ** 2 + (x2 - y2) ** 2 + 2.0 * xy * (1.0 - ratio)
    modulus = np.exp(log_pref - 0.5 * coth_fac * quad)
    # Om sinh(beta b/2) / sinh(beta Om)
    if t > 20.0:
        sgn = math.copysign(1.0, b)
        phase_fac = sgn * Om * math.exp(0.5 * beta * abs(b) - t) \
            * (-math.expm1(-beta * abs(b))) / (-math.expm1(-2.0 * t)) if b else 0.0
    else:
        phase_fac = float(_t_over_sinh(t)) / beta * math.sinh(0.5 * beta * b)
    return modulus * np.exp(1j * phase_fac * cross)


def free_kernel(beta, x, y):
    """(2 pi beta)^-1 exp(-|x - y|^2 / (2 beta))."""
    _check_beta(beta)
    x1, x2 = _points(x)
    y1, y2 = _points(y)
    d2 = (x1 - y1) ** 2 + (x2 - y2) ** 2
    return np.exp(-d2 / (2.0 * beta)) / (2.0 * math.pi * beta)


def landau_diagonal(b: float, beta: float) -> float:
    """|b| / (4 pi sinh(beta |b| / 2)), equal to 1/(2 pi beta) at b = 0."""
    _check_beta(beta)
    return float(_t_over_sinh(0.5 * beta * abs(b))) / (2.0 * math.pi * beta)


def gaussian_upper_rhs(b: float, beta: float, x, y):
    """Landau diagonal times the free Gaussian: an upper bound for fields >= b."""
    _check_beta(beta)
    if b < 0:
        raise ValueError("b must be non-negative")
    x1, x2 = _points(x)
    y1, y2 = _points(y)
    d2 = (x1 - y1) ** 2 + (x2 - y2) ** 2
    return landau_diagonal(b, beta) * np.exp(-d2 / (2.0 * beta))


def improved_bound_rhs(b: float, beta: float, x, y):
    """Bound with constant-field decay along x1 and free decay along x2."""
    _check_beta(beta)
    if b < 0:
        raise ValueError("b must be non-negative")
    x1, x2 = _points(x)
    y1, y2 = _points(y)
    # (b/4) / tanh(beta b/2) = (1/(2 beta)) * t / tanh t with t = beta b / 2
    along_x1 = float(_t_over_tanh(0.5 * beta * b)) / (2.0 * beta)
    return landau_diagonal(b, beta) * np.exp(
        -along_x1 * (x1 - y1) ** 2 - (x2 - y2) ** 2 / (2.0 * beta))


def lower_bound_lhs(bhat: float, beta: float, x1, y1):
    """Constant-field modulus along x1: a lower bound for |K(b)((x1,0),(y1,0))|."""
    _check_beta(beta)
    if not bhat > 0:
        raise ValueError("bhat must be positive")
    along_x1 = float(_t_over_tanh(0.5 * beta * bhat)) / (2.0 * beta)
    d = np.asarray(x1, dtype=float) - np.asarray(y1, dtype=float)
    return landau_diagonal(bhat, beta) * np.exp(-along_x1 * d ** 2)


def constant_field_energy_bound(bhat_const: float, e0_zero_field: float) -> float:
    """|bhat| / 2 + e0(0, vhat)."""
    return 0.5 * abs(bhat_const) + e0_zero_field


def symmetric_to_asymmetric(value, b: float, x, y):
    """Gauge-transform a constant-field kernel to a = (0, b x1).

    The gauges differ by grad(b x1 x2 / 2), so the kernel picks up
    exp(i b (x1 x2 - y1 y2) / 2).
    """
    x1, x2 = _points(x)
    y1, y2 = _points(y)
    return value * np.exp(0.5j * b * (x1 * x2 - y1 * y2))
