"""
Spectral heat kernels for fields and potentials independent of x2.

In the gauge a = (0, a2(x1)) the operator splits by Fourier transform in x2
into fibre operators

    H1(k) = P1^2 / 2 + (k - a2(Q1))^2 / 2 + v(Q1),

and the planar kernel is  int dk/2pi <x1|exp(-beta H1(k))|y1> exp(i (x2 - y2) k).
Each fibre is discretised by second-order central differences on a uniform
Dirichlet grid and eigen-expanded; the k integral is a trapezoid rule.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exact import KernelValue
from .fields import FieldProfile, PotentialProfile, ProfileError, gauge_a2, zero_potential

# exp(-40) ~ 4e-18: Brownian-bridge hitting weight of the Dirichlet walls
WALL_EXPONENT = 40.0
MODE_CUTOFF = 1e-14
K_EDGE_TOL = 1e-12
MAX_GRID_POINTS = 8192


class NumericalFlag(RuntimeError):
    """A truncation parameter (box, window, modes) is demonstrably too small."""


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("DIAMAG_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError("grid needs at least 3 points")
        if not self.x_max > self.x_min:
            raise ValueError("grid must be strictly increasing")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n_points)

    def snap(self, x: float) -> tuple[int, float]:
        """Nearest node index and the snap distance."""
        i = int(round((x - self.x_min) / self.h))
        if not 0 <= i < self.n_points:
            raise ValueError(f"point {x} lies outside the grid [{self.x_min}, {self.x_max}]")
        return i, abs(self.x_min + i * self.h - x)

    def enlarged(self, factor: float) -> "Grid1D":
        """Same spacing and node alignment, width scaled by ``factor``."""
        extra = int(math.ceil(0.5 * (factor - 1.0) * (self.n_points - 1)))
        return Grid1D(self.x_min - extra * self.h, self.x_max + extra * self.h,
                      self.n_points + 2 * extra)

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, factor * (self.n_points - 1) + 1)

    @classmethod
    def around(cls, anchors: Sequence[float], margin: float, h: float) -> "Grid1D":
        """Grid through ``anchors[0]`` covering all anchors plus ``margin``."""
        anchors = [float(a) for a in anchors]
        o = anchors[0]
        left = int(math.ceil((o - min(anchors) + margin) / h))
        right = int(math.ceil((max(anchors) - o + margin) / h))
        return cls(o - left * h, o + right * h, left + right + 1)


@dataclass(frozen=True)
class FiberOperator:
    k: float
    diagonal: np.ndarray
    off_diagonal: float
    grid: Grid1D


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray
    modes: np.ndarray  # shape (n_points, n_modes), sum(phi^2) h = 1
    grid: Grid1D


@dataclass
class BandFunction:
    k_grid: np.ndarray
    e0_of_k: np.ndarray
    flags: list = field(default_factory=list)

    @property
    def minimum(self) -> tuple[float, float]:
        i = int(np.argmin(self.e0_of_k))
        return float(self.e0_of_k[i]), float(self.k_grid[i])


@dataclass
class EnergyResult:
    value: float
    argmin: float
    error_bound: float
    flags: list = field(default_factory=list)


def _check_x1_only(f: FieldProfile, pot: PotentialProfile):
    if f.kind == "radial":
        raise ProfileError("fibre decomposition needs a field independent of x2")
    if pot.kind == "radial":
        raise ProfileError("fibre decomposition needs a potential independent of x2")


def build_fiber(f: FieldProfile, pot: PotentialProfile, k: float, grid: Grid1D,
                a2: Optional[np.ndarray] = None, vx: Optional[np.ndarray] = None
                ) -> FiberOperator:
    """Central-difference H1(k) with hard walls just outside the grid."""
    _check_x1_only(f, pot)
    x = grid.points
    if a2 is None:
        a2 = gauge_a2(f, x)
    if vx is None:
        vx = pot(x)
    h2 = grid.h ** 2
    diag = 0.5 * (k - a2) ** 2 + vx + 1.0 / h2
    return FiberOperator(float(k), diag, -0.5 / h2, grid)


def solve_fiber(op: FiberOperator, beta: Optional[float] = None,
                n_modes: Optional[int] = None, cutoff: float = MODE_CUTOFF) -> EigenSystem:
    """Lowest eigenpairs of a fibre.

    With ``n_modes`` the lowest n_modes pairs are returned; otherwise all
    modes with exp(-beta (E - E0)) > cutoff.  With neither, the full
    spectrum.
    """
    n = op.diagonal.size
    off = np.full(n - 1, op.off_diagonal)
    if n_modes is not None:
        if n_modes > n:
            raise ValueError(f"n_modes={n_modes} exceeds the {n} grid eigenpairs")
        w, v = eigh_tridiagonal(op.diagonal, off, select="i", select_range=(0, n_modes - 1))
    elif beta is not None:
        e0 = eigh_tridiagonal(op.diagonal, off, eigvals_only=True,
                              select="i", select_range=(0, 0))[0]
        top = e0 - math.log(cutoff) / beta
        lo = e0 - 1e-8 * (1.0 + abs(e0))
        w, v = eigh_tridiagonal(op.diagonal, off, select="v", select_range=(lo, top))
    else:
        w, v = eigh_tridiagonal(op.diagonal, off)
    return EigenSystem(w, v / math.sqrt(op.grid.h), op.grid)


def heat_kernel_fiber(es: EigenSystem, beta: float, x1: float, y1: float,
                      n_modes: Optional[int] = None) -> tuple[float, float]:
    """<x1|exp(-beta H1(k))|y1> from the eigen-expansion.

    Returns (value, truncation bound).  The bound is
    exp(-beta E_n / 2) sqrt(K_{beta/2}(x,x) K_{beta/2}(y,y)), with the
    half-temperature diagonals taken from the retained modes.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    m = es.energies.size if n_modes is None else n_modes
    if m > es.energies.size:
        raise ValueError(f"n_modes={m} exceeds the {es.energies.size} available eigenpairs")
    i, _ = es.grid.snap(x1)
    j, _ = es.grid.snap(y1)
    E = es.energies[:m]
    shift = E[0]
    wts = np.exp(-beta * (E - shift))
    val = float(np.sum(wts * es.modes[i, :m] * es.modes[j, :m])) * math.exp(-beta * shift)
    if m < es.modes.shape[0]:
        half = np.exp(-0.5 * beta * (E - shift))
        kx = np.sum(half * es.modes[i, :m] ** 2)
        ky = np.sum(half * es.modes[j, :m] ** 2)
        # the next (unretained) level is above E[m-1]
        bound = math.exp(-0.5 * beta * (E[-1] - shift)) * math.sqrt(kx * ky) * math.exp(-beta * shift)
    else:
        bound = 0.0
    return val, bound


class SpectralKernel:
    """Fibre eigensystems on a fixed (grid, k-grid), reusable for many points.

    Fibres at distinct k are solved independently (optionally on a thread
    pool) and always reduced in ascending-k order.
    """

    def __init__(self, f: FieldProfile, pot: PotentialProfile, beta: float,
                 grid: Grid1D, k_grid: np.ndarray, n_modes: Optional[int] = None,
                 workers: Optional[int] = None):
        _check_x1_only(f, pot)
        if not beta > 0:
            raise ValueError("beta must be positive")
        if grid.n_points > MAX_GRID_POINTS:
            raise ValueError(f"grid has {grid.n_points} points; limit is {MAX_GRID_POINTS}")
        self.field, self.pot, self.beta = f, pot, float(beta)
        self.grid = grid
        self.k_grid = np.asarray(k_grid, dtype=float)
        if self.k_grid.size < 2 or np.any(np.diff(self.k_grid) <= 0):
            raise ValueError("k grid must be strictly increasing")
        self.n_modes = n_modes
        x = grid.points
        a2 = gauge_a2(f, x)
        vx = pot(x)
        workers = default_workers() if workers is None else workers

        def solve(k):
            es = solve_fiber(build_fiber(f, pot, k, grid, a2, vx), beta=self.beta,
                             n_modes=n_modes)
            return es.energies, es.modes

        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                results = list(ex.map(solve, self.k_grid))
        else:
            results = [solve(k) for k in self.k_grid]
        self._energies = [r[0] for r in results]
        self._modes = [r[1] for r in results]
        self._weights = _trapezoid_weights(self.k_grid)

    def fiber_values(self, x1: float, y1: float) -> tuple[np.ndarray, np.ndarray]:
        """Fibre kernels over the k-grid and their truncation bounds."""
        i, _ = self.grid.snap(x1)
        j, _ = self.grid.snap(y1)
        vals = np.empty(self.k_grid.size)
        bounds = np.empty(self.k_grid.size)
        for n, (E, phi) in enumerate(zip(self._energies, self._modes)):
            es = EigenSystem(E, phi, self.grid)
            vals[n], bounds[n] = _fiber_at(es, self.beta, i, j)
        return vals, bounds

    def __call__(self, x, y) -> KernelValue:
        x1, x2 = float(x[0]), float(x[1])
        y1, y2 = float(y[0]), float(y[1])
        _, sx = self.grid.snap(x1)
        _, sy = self.grid.snap(y1)
        vals, bounds = self.fiber_values(x1, y1)
        phase = np.exp(1j * (x2 - y2) * self.k_grid)
        value = complex(np.sum(self._weights * vals * phase)) / (2.0 * math.pi)
        err = float(np.sum(self._weights * bounds)) / (2.0 * math.pi)
        flags = []
        edge = max(abs(vals[0]), abs(vals[-1]))
        if edge > K_EDGE_TOL:
            flags.append("k_window_edge")
        meta = {"snap_x": sx, "snap_y": sy, "k_edge": edge, "h": self.grid.h,
                "n_points": self.grid.n_points, "k_points": int(self.k_grid.size)}
        return KernelValue(value, err, tuple(flags), meta)


def _fiber_at(es, beta, i, j):
    E = es.energies
    shift = E[0]
    wts = np.exp(-beta * (E - shift))
    val = float(np.dot(wts, es.modes[i] * es.modes[j])) * math.exp(-beta * shift)
    half = np.exp(-0.5 * beta * (E - shift))
    kx = float(np.dot(half, es.modes[i] ** 2))
    ky = float(np.dot(half, es.modes[j] ** 2))
    bound = math.exp(-0.5 * beta * (E[-1] - shift)) * math.sqrt(kx * ky) * math.exp(-beta * shift)
    return val, bound


def _trapezoid_weights(k):
    w = np.empty_like(k)
    d = np.diff(k)
    w[0], w[-1] = 0.5 * d[0], 0.5 * d[-1]
    w[1:-1] = 0.5 * (d[:-1] + d[1:])
    return w


# -- automatic truncation ----------------------------------------------------

def auto_grid(beta: float, anchors: Sequence[float], h: float = 0.02) -> Grid1D:
    """Dirichlet box around the query points.

    Walls sit a distance sqrt(40 beta) beyond the outermost query points;
    a Brownian bridge of duration beta between the queries reaches them
    with probability below about exp(-40), so the walls are invisible to
    the kernel there.
    """
    margin = math.sqrt(WALL_EXPONENT * beta)
    return Grid1D.around(anchors, margin, h)


def auto_k_grid(f: FieldProfile, pot: PotentialProfile, beta: float, x1s: Sequence[float],
                grid: Grid1D, max_dx2: float = 0.0, tol: float = K_EDGE_TOL,
                max_expand: int = 30) -> tuple[np.ndarray, list]:
    """Symmetric k-window and trapezoid spacing for the given queries.

    The half-width grows until the fibre diagonals at +-K drop below ``tol``
    at every query x1.  The spacing keeps Poisson-summation images of the
    x2 profile (which decays like the free Gaussian) below exp(-40), and
    also satisfies dk <= pi / (4 |x2 - y2|).
    """
    x1s = [float(v) for v in x1s]
    spread = 3.0 * math.sqrt(beta)
    hull = np.linspace(min(x1s) - spread, max(x1s) + spread, 64)
    reach = float(np.max(np.abs(gauge_a2(f, hull))))
    K = reach + math.sqrt(2.0 * math.log(1.0 / tol) / beta)
    a2 = gauge_a2(f, grid.points)
    vx = pot(grid.points)
    flags = []

    def edge_value(K):
        worst = 0.0
        for k in (-K, K):
            es = solve_fiber(build_fiber(f, pot, k, grid, a2, vx), beta=beta)
            for x in x1s:
                worst = max(worst, _fiber_at(es, beta, grid.snap(x)[0], grid.snap(x)[0])[0])
        return worst

    for _ in range(max_expand):
        if edge_value(K) < tol:
            break
        K *= 1.25
    else:
        flags.append("k_window_edge")
    dk = 2.0 * math.pi / (abs(max_dx2) + math.sqrt(2.0 * WALL_EXPONENT * beta))
    if max_dx2:
        dk = min(dk, math.pi / (4.0 * abs(max_dx2)))
    n = 2 * int(math.ceil(K / dk)) + 1
    return np.linspace(-K, K, n), flags


def kernel_2d(f: FieldProfile, pot: Optional[PotentialProfile], beta: float, x, y,
              k_window: Optional[float] = None, k_points: Optional[int] = None,
              grid: Optional[Grid1D] = None, n_modes: Optional[int] = None,
              h: float = 0.01, workers: Optional[int] = None) -> KernelValue:
    """Planar kernel <x|exp(-beta H(b, v))|y> in the gauge a = (0, a2(x1)).

    ``k_window`` is the half-width of the symmetric k interval.  Truncation
    parameters left as None are chosen automatically.
    """
    pot = zero_potential() if pot is None else pot
    if not beta > 0:
        raise ValueError("beta must be positive")
    x1, y1 = float(x[0]), float(y[0])
    dx2 = float(x[1]) - float(y[1])
    if grid is None:
        grid = auto_grid(beta, [x1, y1], h=_aligned_h(h, x1, y1))
    flags = []
    if k_window is None:
        kg, flags = auto_k_grid(f, pot, beta, [x1, y1], grid, max_dx2=abs(dx2))
        if k_points is not None:
            kg = np.linspace(kg[0], kg[-1], k_points)
    else:
        kg = np.linspace(-k_window, k_window, k_points or 257)
    sk = SpectralKernel(f, pot, beta, grid, kg, n_modes=n_modes, workers=workers)
    kv = sk(x, y)
    if flags:
        kv = KernelValue(kv.value, kv.error, tuple(sorted(set(kv.flags) | set(flags))), kv.meta)
    return kv


def _aligned_h(h, x1, y1):
    """Largest spacing <= h putting both x1 and y1 on grid nodes."""
    d = abs(x1 - y1)
    if d == 0:
        return h
    return d / math.ceil(d / h - 1e-9)


# -- bands and ground-state energies ----------------------------------------

def band_function(f: FieldProfile, pot: Optional[PotentialProfile], k_window,
                  k_points: int, grid: Grid1D, workers: Optional[int] = None) -> BandFunction:
    """Lowest fibre eigenvalue on a k-grid.

    ``k_window`` is a half-width or a (k_min, k_max) pair.
    """
    pot = zero_potential() if pot is None else pot
    _check_x1_only(f, pot)
    if np.ndim(k_window) == 0:
        kg = np.linspace(-float(k_window), float(k_window), k_points)
    else:
        kg = np.linspace(float(k_window[0]), float(k_window[1]), k_points)
    x = grid.points
    a2, vx = gauge_a2(f, x), pot(x)

    def lowest(k):
        op = build_fiber(f, pot, k, grid, a2, vx)
        w, v = eigh_tridiagonal(op.diagonal, np.full(x.size - 1, op.off_diagonal),
                                select="i", select_range=(0, 0))
        u = v[:, 0] ** 2
        tail = max(u[: max(1, x.size // 20)].sum(), u[-max(1, x.size // 20):].sum())
        return w[0], tail

    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            res = list(ex.map(lowest, kg))
    else:
        res = [lowest(k) for k in kg]
    e0 = np.array([r[0] for r in res])
    tails = np.array([r[1] for r in res])
    flags = []
    i = int(np.argmin(e0))
    interior = e0[1:-1].min() if e0.size > 2 else e0.min()
    scale = 1e-9 * max(1.0, abs(interior))
    if i in (0, e0.size - 1) and e0[i] < interior - scale:
        flags.append("k_window_edge")
    if tails[i] > 1e-10:
        flags.append("box_edge")
    return BandFunction(kg, e0, flags)


def ground_state_energy(f: FieldProfile, pot: Optional[PotentialProfile] = None,
                        k_window=None, k_points: int = 257, grid: Optional[Grid1D] = None,
                        h: float = 0.02, robustness: float = 1.25,
                        workers: Optional[int] = None) -> EnergyResult:
    """inf over k of the band function, with a box-robustness error bound.

    The box is enlarged by ``robustness`` and the change in the minimum is
    reported as ``error_bound`` (scaled as for an L^-2 box artifact); a
    change above 1e-8 relative raises the ``box_sensitive`` flag.
    """
    pot = zero_potential() if pot is None else pot
    if grid is None or k_window is None:
        g0, kw = default_band_setup(f, pot, h)
        grid = grid or g0
        k_window = kw if k_window is None else k_window
    band = band_function(f, pot, k_window, k_points, grid, workers)
    e, k = band.minimum
    flags = list(band.flags)
    big = band_function(f, pot, k_window, k_points, grid.enlarged(robustness), workers)
    e_big = big.minimum[0]
    shift = abs(e - e_big)
    # an L^-2 artifact shrinks by robustness^-2 under enlargement
    err = shift / (1.0 - robustness ** -2)
    if shift > 1e-8 * max(1.0, abs(e)):
        flags.append("box_sensitive")
    return EnergyResult(float(e), float(k), float(err), sorted(set(flags)))


def default_band_setup(f: FieldProfile, pot: PotentialProfile, h: float = 0.02):
    """A box and k-window suited to the lowest band.

    For fields with inf|b| > 0 the window spans two periods of a periodic
    field (or +-8 otherwise) and the box holds every guiding centre
    a2(x) = k plus ten magnetic lengths; without a field the box is [-20, 20].
    """
    lo = f.bounds[0] if f.bounds is not None else float(np.min(np.abs(f(np.linspace(-20, 20, 401)))))
    if lo <= 0:
        return Grid1D.around([0.0], 20.0, h), 8.0
    K = 8.0
    if f.name == "sine":
        q = abs(float(f.params["wavenumber"]))
        K = max(K, abs(float(f.params["offset"])) * 2.0 * math.pi / q)
    xs = np.linspace(-60.0, 60.0, 24001)
    a2 = gauge_a2(f, xs)
    inside = xs[np.abs(a2) <= K]
    margin = 10.0 / math.sqrt(lo)
    return Grid1D.around([0.0, inside.min(), inside.max()], margin, h), K
