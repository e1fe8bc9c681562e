"""
Feynman-Kac evaluation of x2-independent kernels with Brownian bridges.

For b and v independent of x2, in the gauge a = (0, a2(x1)),

    <x|exp(-beta H)|y> = (2 pi beta)^-1 exp(-|x - y|^2 / (2 beta))
        * E[ exp(i (x2 - y2) mu(a2 o w) - beta/2 sigma^2(a2 o w) - beta mu(v o w)) ]

where w is a Brownian bridge from x1 (time 0) to y1 (time beta) and mu,
sigma^2 are the time mean and variance along the path.

Random-number contract (scheme ``SCHEME_VERSION``): samples are cut into
blocks of ``block_size`` consecutive indices; block j draws from
``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=(j,))))``.
Block sums are accumulated in ascending block order, so estimates are
identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .fields import FieldProfile, PotentialProfile, ProfileError, dominates, gauge_a2, zero_potential
from .iwatsuka import default_workers

SCHEME_VERSION = "pcg64-block-seedsequence-v1"
DEFAULT_BLOCK = 4096
CLIP_TOL = 1e-14


@dataclass(frozen=True)
class BridgePath:
    """Bridge values on the uniform time grid; ``values`` may hold many paths
    along the leading axis."""

    times: np.ndarray
    values: np.ndarray

    @property
    def beta(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class PathFunctionals:
    mean: np.ndarray
    variance: np.ndarray


@dataclass(frozen=True)
class MCEstimate:
    value: complex
    std_error: float
    n_samples: int
    seed: int
    scheme: str = "trapezoid"
    rng_scheme: str = SCHEME_VERSION
    std_error_re: float = 0.0
    std_error_im: float = 0.0

    def __abs__(self):
        return abs(self.value)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def sample_bridges(x1: float, y1: float, beta: float, n_steps: int, n_paths: int,
                   rng: np.random.Generator) -> BridgePath:
    """Bridges by sequential conditioned increments.

    Given w(t_j), the next value is Gaussian with mean
    w + (y1 - w) dt / (beta - t_j) and variance dt (beta - t_{j+1}) / (beta - t_j).
    """
    if n_steps < 2:
        raise ValueError("n_steps must be at least 2")
    if not beta > 0:
        raise ValueError("beta must be positive")
    dt = beta / n_steps
    times = np.linspace(0.0, beta, n_steps + 1)
    z = rng.standard_normal((n_steps - 1, n_paths))
    w = np.empty((n_steps + 1, n_paths))
    w[0] = x1
    for j in range(n_steps - 1):
        rem = beta - times[j]
        w[j + 1] = w[j] + (y1 - w[j]) * (dt / rem) + math.sqrt(dt * (rem - dt) / rem) * z[j]
    w[-1] = y1
    return BridgePath(times, w.T)


def sample_bridge(x1: float, y1: float, beta: float, n_steps: int,
                  rng: np.random.Generator) -> BridgePath:
    p = sample_bridges(x1, y1, beta, n_steps, 1, rng)
    return BridgePath(p.times, p.values[0])


def _trap_weights(n_nodes: int) -> np.ndarray:
    w = np.full(n_nodes, 1.0 / (n_nodes - 1))
    w[0] = w[-1] = 0.5 / (n_nodes - 1)
    return w


def _functionals(vals: np.ndarray, stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    v = vals[..., ::stride]
    wt = _trap_weights(v.shape[-1])
    mean = v @ wt
    var = (v - mean[..., None]) ** 2 @ wt
    return mean, var


def path_functionals(f: Callable, w: BridgePath) -> PathFunctionals:
    """Trapezoidal time mean and variance of f along the path(s)."""
    mean, var = _functionals(np.asarray(f(w.values), dtype=float))
    return PathFunctionals(mean, var)


def path_mean(f: Callable, w: BridgePath):
    return path_functionals(f, w).mean[()]


def path_variance(f: Callable, w: BridgePath):
    """Time variance mu(f^2) - mu(f)^2, clipped at 0 for rounding noise."""
    fv = np.asarray(f(w.values), dtype=float)
    wt = _trap_weights(fv.shape[-1])
    mean = fv @ wt
    var = fv ** 2 @ wt - mean ** 2
    if np.any(var < -CLIP_TOL * np.maximum(1.0, mean ** 2)):
        raise ArithmeticError(f"path variance {var.min()} below the clipping tolerance")
    return np.maximum(var, 0.0)[()]


def _log_integrand(a2v, vv, beta, dx2, stride=1):
    am, avar = _functionals(a2v, stride)
    vm, _ = _functionals(vv, stride)
    return am, -0.5 * beta * avar - beta * vm


def path_integrands(f: FieldProfile, pot: PotentialProfile, beta: float, dx2: float,
                    w: BridgePath, scheme: str = "trapezoid") -> np.ndarray:
    """Per-path complex integrands of the kernel expectation.

    ``scheme="trapezoid"`` uses all time nodes; ``"richardson"`` returns
    2 F(all nodes) - F(even nodes), cancelling the O(dt) bias of the time
    quadrature.
    """
    if f.kind == "radial" or pot.kind == "radial":
        raise ProfileError("path integral needs field and potential independent of x2")
    a2v = gauge_a2(f, w.values)
    vv = pot(w.values)
    am, logmod = _log_integrand(a2v, vv, beta, dx2)
    fine = np.exp(logmod + 1j * dx2 * am)
    if scheme == "trapezoid":
        out = fine
    elif scheme == "richardson":
        if (w.values.shape[-1] - 1) % 2:
            raise ValueError("richardson scheme needs an even number of steps")
        am2, logmod2 = _log_integrand(a2v, vv, beta, dx2, stride=2)
        out = 2.0 * fine - np.exp(logmod2 + 1j * dx2 * am2)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite path integrand")
    return out


def _block_sums(problems, beta, x, y, n_steps, n_samples, seed, scheme, block_size, workers):
    x1, y1 = float(x[0]), float(y[0])
    dx2 = float(x[1]) - float(y[1])
    n_blocks = -(-n_samples // block_size)

    def run(j):
        n = min(block_size, n_samples - j * block_size)
        w = sample_bridges(x1, y1, beta, n_steps, n, block_rng(seed, j))
        out = []
        for f, pot, d in problems:
            z = path_integrands(f, pot, beta, dx2 if d is None else d, w, scheme)
            out.append((z.sum(), (z.real ** 2).sum(), (z.imag ** 2).sum()))
        return out

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            blocks = list(ex.map(run, range(n_blocks)))
    else:
        blocks = [run(j) for j in range(n_blocks)]
    return blocks


def mc_kernels(problems: Sequence[tuple], beta: float,
               x, y, n_steps: int = 256, n_samples: int = 100_000, seed: int = 0,
               scheme: str = "trapezoid", block_size: int = DEFAULT_BLOCK,
               workers: Optional[int] = None) -> list[MCEstimate]:
    """Kernel estimates for several problems on common random bridges.

    Each problem is (field, potential) or (field, potential, dx2); the
    optional dx2 replaces x2 - y2 in the phase only, so the estimate is
    K((x1, 0), (y1, 0)) exp(-(x2 - y2)^2 / (2 beta)) when dx2 = 0.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    problems = [(q[0], zero_potential() if q[1] is None else q[1], q[2] if len(q) > 2 else None)
                for q in problems]
    workers = default_workers() if workers is None else workers
    blocks = _block_sums(problems, beta, x, y, n_steps, n_samples, seed, scheme,
                         block_size, workers)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pref = math.exp(-float(np.sum((x - y) ** 2)) / (2.0 * beta)) / (2.0 * math.pi * beta)
    n = n_samples
    out = []
    for i in range(len(problems)):
        s = sum((b[i][0] for b in blocks), 0j)
        s2r = math.fsum(b[i][1] for b in blocks)
        s2i = math.fsum(b[i][2] for b in blocks)
        mean = s / n
        var_r = max(s2r / n - mean.real ** 2, 0.0) * n / (n - 1)
        var_i = max(s2i / n - mean.imag ** 2, 0.0) * n / (n - 1)
        se_r = pref * math.sqrt(var_r / n)
        se_i = pref * math.sqrt(var_i / n)
        out.append(MCEstimate(pref * mean, max(se_r, se_i), n, seed, scheme,
                              SCHEME_VERSION, se_r, se_i))
    return out


def mc_kernel(f: FieldProfile, pot: Optional[PotentialProfile], beta: float, x, y,
              n_steps: int = 256, n_samples: int = 100_000, seed: int = 0,
              scheme: str = "trapezoid", block_size: int = DEFAULT_BLOCK,
              workers: Optional[int] = None) -> MCEstimate:
    """Prefactor times the sample mean of the path integrand."""
    return mc_kernels([(f, pot)], beta, x, y, n_steps, n_samples, seed, scheme,
                      block_size, workers)[0]


def variance_comparison(f: FieldProfile, fhat: FieldProfile, w: BridgePath,
                        slack: float = 1e-12) -> np.ndarray:
    """sigma^2(a2_hat o w) - sigma^2(a2 o w) per path.

    Requires |b| <= bhat on the range visited by the paths; the returned
    differences are non-negative up to ``slack``.
    """
    lo, hi = float(np.min(w.values)), float(np.max(w.values))
    dom = dominates(f, fhat, np.linspace(lo, hi, 2001))
    if not dom:
        raise ProfileError(f"|b| <= bhat fails at x1={dom.where} (margin {dom.margin})")
    _, var = _functionals(gauge_a2(f, w.values))
    _, var_hat = _functionals(gauge_a2(fhat, w.values))
    diff = var_hat - var
    if np.any(diff < -slack):
        raise ArithmeticError(f"pathwise variance ordering violated: {diff.min()}")
    return diff[()]
