"""Rate-exponent regions over the cost-constrained input simplex.

Regions are reported through their Pareto-maximal boundary points; the full
region is the downward closure of what is returned here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import directed_hausdorff

from . import _accel
from .core import (
    ChannelProblem,
    CostSpec,
    DiscreteChannel,
    DomainError,
    FiniteDistribution,
    convolve_star,
    d_b,
    h_b,
    lattice_size,
    mutual_information_batch,
    row_kl,
    simplex_lattice,
)
from .tilt import DEFAULT_S_POINTS, chernoff_batch, exponents_from_mu, mu_table

DEFAULT_PX_RESOLUTION = {1: 1, 2: 100, 3: 30, 4: 16, 5: 10, 6: 8}
MAX_LATTICE = 2_000_000
COST_TOL = 1e-12


@dataclass(frozen=True)
class RegionPoint:
    rate: float
    e0: float
    e1: float
    px: FiniteDistribution
    s: float


@dataclass(frozen=True)
class ParetoSurface:
    """Columnar store of boundary points; ``points`` materialises them."""

    rate: NDArray
    e0: NDArray
    e1: NDArray
    s: NDArray
    px: NDArray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.rate.size

    @property
    def points(self) -> list[RegionPoint]:
        return [RegionPoint(float(r), float(a), float(b), FiniteDistribution(p), float(t))
                for r, a, b, p, t in zip(self.rate, self.e0, self.e1, self.px, self.s)]

    def as_array(self) -> NDArray:
        return np.column_stack([self.rate, self.e0, self.e1])


@dataclass(frozen=True)
class RateExponentCurve:
    """Pareto frontier of a two-objective region ``(rate, exponent)``.

    ``s`` holds the Chernoff minimiser for the minimax curve and is ``None``
    for the Neyman-Pearson curve.
    """

    rate: NDArray
    exponent: NDArray
    px: NDArray
    s: Optional[NDArray] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.rate.size

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return [(float(r), float(e)) for r, e in zip(self.rate, self.exponent)]


class Membership(NamedTuple):
    member: bool
    px: Optional[FiniteDistribution]
    s: Optional[float]


def default_px_resolution(in_size: int) -> int:
    try:
        return DEFAULT_PX_RESOLUTION[in_size]
    except KeyError:
        raise DomainError(f"no default simplex grid for {in_size} inputs; pass a resolution")


def feasible_px_grid(problem: ChannelProblem, resolution: Optional[int] = None) -> NDArray:
    """All lattice input laws ``k/N`` meeting the cost budget."""
    k = problem.in_size
    n = default_px_resolution(k) if resolution is None else int(resolution)
    if n < 1:
        raise DomainError("px grid resolution must be positive")
    if lattice_size(k, n) > MAX_LATTICE:
        raise DomainError(f"simplex lattice with k={k}, N={n} exceeds {MAX_LATTICE} points")
    px = simplex_lattice(k, n) / n
    cost = px @ problem.cost.costs
    px = px[cost <= problem.cost.budget + COST_TOL]
    if px.shape[0] == 0:
        raise DomainError(
            f"no input law satisfies the budget B={problem.cost.budget} "
            f"(min cost {problem.cost.costs.min()})")
    return px


def s_grid(points: int = DEFAULT_S_POINTS) -> NDArray:
    if points < 2:
        raise DomainError("s grid needs at least 2 points")
    return np.linspace(0.0, 1.0, points)


def _grid_exponents(problem: ChannelProblem, px: NDArray, s: NDArray):
    mu, mu1, _ = mu_table(problem.w.matrix, problem.v.matrix, s)
    # (m, S)
    return exponents_from_mu(s[None, :], px @ mu.T, px @ mu1.T)


def _pareto(cols: Sequence[NDArray]) -> NDArray:
    return _accel.pareto_indices(np.column_stack(cols))


def _surface(rate, e0, e1, s, px, meta) -> ParetoSurface:
    idx = _pareto([rate, e0, e1])
    return ParetoSurface(rate[idx], e0[idx], e1[idx], s[idx], px[idx], meta)


def rate_exponent_surface(problem: ChannelProblem, px_grid_resolution: Optional[int] = None,
                          s_grid_resolution: int = DEFAULT_S_POINTS) -> ParetoSurface:
    px = feasible_px_grid(problem, px_grid_resolution)
    s = s_grid(s_grid_resolution)
    rate = mutual_information_batch(px, problem.comm.matrix)
    e0, e1 = _grid_exponents(problem, px, s)
    m, n_s = e0.shape
    meta = {
        "px_grid_resolution": px_grid_resolution or default_px_resolution(problem.in_size),
        "s_grid_resolution": s_grid_resolution,
    }
    return _surface(np.repeat(rate, n_s), e0.ravel(), e1.ravel(), np.tile(s, m),
                    np.repeat(px, n_s, axis=0), meta)


def membership(problem: ChannelProblem, r: float, e0: float, e1: float,
               px_grid_resolution: Optional[int] = None,
               s_grid_resolution: int = DEFAULT_S_POINTS) -> Membership:
    """Grid-certified membership of ``(r, e0, e1)`` in the region.

    ``True`` comes with a witness ``(px, s)``.  ``False`` only means no grid
    point certifies the query; boundary points finer than the grid can be
    missed.
    """
    if min(r, e0, e1) < 0:
        raise DomainError("query must be non-negative")
    px = feasible_px_grid(problem, px_grid_resolution)
    s = s_grid(s_grid_resolution)
    rate = mutual_information_batch(px, problem.comm.matrix)
    a, b = _grid_exponents(problem, px, s)
    hit = (rate[:, None] >= r) & (a >= e0) & (b >= e1)
    if not hit.any():
        return Membership(False, None, None)
    i, j = np.argwhere(hit)[0]
    return Membership(True, FiniteDistribution(px[i]), float(s[j]))


def _curve(rate, value, px, s, meta) -> RateExponentCurve:
    idx = _pareto([rate, value])
    return RateExponentCurve(rate[idx], value[idx], px[idx],
                             None if s is None else s[idx], meta)


def minimax_frontier(problem: ChannelProblem,
                     px_grid_resolution: Optional[int] = None) -> RateExponentCurve:
    """Boundary of ``{(R, E): R <= I(P), E <= C(W||V|P)}``."""
    px = feasible_px_grid(problem, px_grid_resolution)
    rate = mutual_information_batch(px, problem.comm.matrix)
    value, s_star = chernoff_batch(problem.w.matrix, problem.v.matrix, px)
    return _curve(rate, value, px, s_star,
                  {"px_grid_resolution": px_grid_resolution or default_px_resolution(problem.in_size)})


def np_frontier(problem: ChannelProblem,
                px_grid_resolution: Optional[int] = None) -> RateExponentCurve:
    """Boundary of ``{(R, E): R <= I(P), E <= D(W||V|P)}``; the same for every alpha."""
    px = feasible_px_grid(problem, px_grid_resolution)
    rate = mutual_information_batch(px, problem.comm.matrix)
    value = np.maximum(px @ row_kl(problem.w.matrix, problem.v.matrix), 0.0)
    return _curve(rate, value, px, None,
                  {"px_grid_resolution": px_grid_resolution or default_px_resolution(problem.in_size),
                   "alpha_independent": True})


# ---------------------------------------------------------------- examples

def example1_problem(p: float, q: float, budget: float) -> ChannelProblem:
    """Binary on-off sensing: ``W`` ignores the input, ``V`` is a BSC(q)."""
    return ChannelProblem(
        comm=DiscreteChannel.bsc(p),
        w=DiscreteChannel(np.array([[1 - q, q], [1 - q, q]])),
        v=DiscreteChannel.bsc(q),
        cost=CostSpec(np.array([0.0, 1.0]), budget),
    )


def example2_problem(p: float, q: float, budget: float) -> ChannelProblem:
    """``W`` = BSC(p) (same as the message channel), ``V`` = BSC(q)."""
    return ChannelProblem(
        comm=DiscreteChannel.bsc(p),
        w=DiscreteChannel.bsc(p),
        v=DiscreteChannel.bsc(q),
        cost=CostSpec(np.array([0.0, 1.0]), budget),
    )


def _check_open_unit(**kw):
    for name, val in kw.items():
        if not 0.0 < val < 1.0:
            raise DomainError(f"{name}={val!r} must lie in (0, 1)")


def binary_tilt(a: float, b: float, s: float) -> float:
    """Tilt of Bern(a) towards Bern(b): ``a^(1-s) b^s`` normalised."""
    num = a ** (1 - s) * b ** s
    return num / (num + (1 - a) ** (1 - s) * (1 - b) ** s)


def example1_closed_form(p: float, q: float, budget: float,
                         rho_grid: Sequence[float], s_grid: Sequence[float]) -> ParetoSurface:
    _check_open_unit(p=p, q=q)
    if not 0.0 <= budget <= 1.0:
        raise DomainError("budget must lie in [0, 1]")
    # W_s(0|1): tilt of (1-q, q) towards (q, 1-q) on the symbol-0 mass
    per_s = [(d_b(q_hat, 1 - q), d_b(q_hat, q))
             for q_hat in (binary_tilt(1 - q, q, s) for s in s_grid)]
    rows = []
    for rho in rho_grid:
        if rho > budget + COST_TOL or rho < 0 or rho > 1:
            continue
        rate = max(h_b(convolve_star(rho, p)) - h_b(p), 0.0)
        rows.extend((rate, rho * a, rho * b, s, rho) for (a, b), s in zip(per_s, s_grid))
    return _closed_surface(rows, {"example": 1, "p": p, "q": q, "budget": budget})


def example2_closed_form(p: float, q: float, budget: float,
                         s_grid: Sequence[float]) -> ParetoSurface:
    _check_open_unit(p=p, q=q)
    if budget < 0:
        raise DomainError("budget must be non-negative")
    rho = min(0.5, budget)
    rate = max(h_b(convolve_star(rho, p)) - h_b(p), 0.0)
    rows = []
    for s in s_grid:
        q_hat = 1.0 - binary_tilt(1 - p, 1 - q, s)
        rows.append((rate, d_b(q_hat, p), d_b(q_hat, q), s, rho))
    return _closed_surface(rows, {"example": 2, "p": p, "q": q, "budget": budget})


def _closed_surface(rows, meta) -> ParetoSurface:
    if not rows:
        raise DomainError("no feasible (rho, s) pairs")
    a = np.array(rows, dtype=np.float64)
    px = np.column_stack([1.0 - a[:, 4], a[:, 4]])
    return _surface(a[:, 0], a[:, 1], a[:, 2], a[:, 3], px, meta)


def hausdorff(a: NDArray, b: NDArray) -> float:
    """Symmetric Hausdorff distance between two point clouds (rows are points)."""
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def max_rate(problem: ChannelProblem, px_grid_resolution: Optional[int] = None) -> float:
    px = feasible_px_grid(problem, px_grid_resolution)
    return float(mutual_information_batch(px, problem.comm.matrix).max())


def log_alphabet_bound(problem: ChannelProblem) -> float:
    return math.log(min(problem.comm.in_size, problem.comm.out_size))
