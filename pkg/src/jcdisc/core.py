"""Finite-alphabet distributions, channels and the information primitives.

Everything is in nats.  Arrays held by the frozen dataclasses are made
read-only on construction, so instances can be shared freely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

INGEST_TOL = 1e-9


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ShapeError(ValueError):
    """Alphabet sizes of the arguments do not line up."""


class BudgetError(RuntimeError):
    """Requested enumeration exceeds the configured resource budget."""


def _frozen(a: NDArray) -> NDArray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _normalize_rows(m: NDArray, what: str) -> NDArray:
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{what}: non-finite entries")
    if np.any(m < 0):
        raise DomainError(f"{what}: negative probability")
    sums = m.sum(axis=-1, keepdims=True)
    bad = np.abs(sums - 1.0) > INGEST_TOL
    if np.any(bad):
        raise DomainError(f"{what}: entries sum to {sums[bad].ravel()[0]!r}, expected 1")
    return m / sums


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability vector over the index set ``0..k-1``."""

    probs: NDArray
    labels: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ShapeError("distribution must be a non-empty vector")
        object.__setattr__(self, "probs", _frozen(_normalize_rows(p, "distribution")))
        if self.labels is not None and len(self.labels) != p.size:
            raise ShapeError("labels do not match alphabet size")

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, k: int) -> "FiniteDistribution":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def bernoulli(cls, rho: float) -> "FiniteDistribution":
        return cls(np.array([1.0 - rho, rho]))

    @classmethod
    def point_mass(cls, k: int, x: int) -> "FiniteDistribution":
        p = np.zeros(k)
        p[x] = 1.0
        return cls(p)


@dataclass(frozen=True)
class DiscreteChannel:
    """Row-stochastic matrix; row ``x`` is the output law given input ``x``."""

    matrix: NDArray
    in_labels: Optional[tuple] = field(default=None, compare=False)
    out_labels: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
            raise ShapeError("channel must be a non-empty 2-d matrix")
        object.__setattr__(self, "matrix", _frozen(_normalize_rows(m, "channel row")))

    @property
    def in_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def out_size(self) -> int:
        return self.matrix.shape[1]

    @property
    def rows(self) -> list[FiniteDistribution]:
        return [FiniteDistribution(r) for r in self.matrix]

    @classmethod
    def bsc(cls, p: float) -> "DiscreteChannel":
        return cls(np.array([[1.0 - p, p], [p, 1.0 - p]]))

    @classmethod
    def identity(cls, k: int) -> "DiscreteChannel":
        return cls(np.eye(k))


@dataclass(frozen=True)
class CostSpec:
    """Per-symbol input cost ``b`` and the average-cost budget ``B``."""

    costs: NDArray
    budget: float

    def __post_init__(self):
        c = np.asarray(self.costs, dtype=np.float64)
        if c.ndim != 1:
            raise ShapeError("costs must be a vector")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise DomainError("costs must be finite and non-negative")
        if not math.isfinite(self.budget) or self.budget < 0:
            raise DomainError("budget must be finite and non-negative")
        object.__setattr__(self, "costs", _frozen(c))
        object.__setattr__(self, "budget", float(self.budget))

    @classmethod
    def free(cls, in_size: int) -> "CostSpec":
        return cls(np.zeros(in_size), 0.0)


@dataclass(frozen=True)
class ChannelProblem:
    """One instance of the joint setting.

    ``comm`` carries the message, ``w`` and ``v`` are the two hypotheses the
    sensor must tell apart.
    """

    comm: DiscreteChannel
    w: DiscreteChannel
    v: DiscreteChannel
    cost: CostSpec

    def __post_init__(self):
        k = self.comm.in_size
        if self.w.in_size != k or self.v.in_size != k:
            raise ShapeError("comm, w and v must share the input alphabet")
        if self.w.out_size != self.v.out_size:
            raise ShapeError("w and v must share the output alphabet")
        if self.cost.costs.size != k:
            raise ShapeError("cost vector length must equal the input alphabet size")
        if np.any(self.w.matrix * self.v.matrix == 0):
            raise DomainError("w(y|x) * v(y|x) must be non-zero for every (x, y)")

    @property
    def in_size(self) -> int:
        return self.comm.in_size

    @property
    def out_size(self) -> int:
        return self.w.out_size

    @property
    def log_ratio(self) -> NDArray:
        """Per-symbol log-likelihood ratio ``ln(V(y|x) / W(y|x))``."""
        return np.log(self.v.matrix) - np.log(self.w.matrix)


DistLike = Union[FiniteDistribution, ArrayLike]
ChannelLike = Union[DiscreteChannel, ArrayLike]


def as_probs(px: DistLike) -> NDArray:
    if isinstance(px, FiniteDistribution):
        return px.probs
    return FiniteDistribution(px).probs


def as_matrix(ch: ChannelLike) -> NDArray:
    if isinstance(ch, DiscreteChannel):
        return ch.matrix
    return DiscreteChannel(ch).matrix


def _xlogy_ratio(p: NDArray, q: NDArray) -> NDArray:
    # p * ln(p / q) with 0 ln(0/q) = 0
    out = np.zeros(np.broadcast(p, q).shape)
    mask = np.broadcast_to(p > 0, out.shape)
    pb = np.broadcast_to(p, out.shape)
    qb = np.broadcast_to(q, out.shape)
    out[mask] = pb[mask] * (np.log(pb[mask]) - np.log(qb[mask]))
    return out


def row_kl(p: NDArray, q: NDArray) -> NDArray:
    """Row-wise divergence ``D(p[x] || q[x])``, broadcasting over leading axes."""
    return _xlogy_ratio(p, q).sum(axis=-1)


def conditional_kl(p: ChannelLike, q: ChannelLike, px: DistLike) -> float:
    pm, qm, w = as_matrix(p), as_matrix(q), as_probs(px)
    if pm.shape != qm.shape:
        raise ShapeError(f"channel shapes differ: {pm.shape} vs {qm.shape}")
    if w.size != pm.shape[0]:
        raise ShapeError("input distribution does not match channel input size")
    support = w > 0
    if np.any((pm[support] > 0) & (qm[support] == 0)):
        raise DomainError("p is not absolutely continuous w.r.t. q on the support of px")
    per_row = row_kl(pm[support], qm[support])
    return max(float(w[support] @ per_row), 0.0)


def output_marginal(px: NDArray, ch: NDArray) -> NDArray:
    return px @ ch


def mutual_information_batch(px: NDArray, ch: NDArray) -> NDArray:
    """``I(px[i], ch)`` for every row of a 2-d array of input distributions."""
    px = np.atleast_2d(px)
    q = px @ ch
    # I = sum_x px(x) D(ch[x] || q)
    terms = np.zeros((px.shape[0], ch.shape[0]))
    pos = ch > 0
    for x in range(ch.shape[0]):
        row = ch[x, pos[x]]
        qq = q[:, pos[x]]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = row * (np.log(row) - np.log(qq))
        terms[:, x] = np.where(px[:, x:x + 1] > 0, t, 0.0).sum(axis=1)
    return np.maximum((px * terms).sum(axis=1), 0.0)


def mutual_information(px: DistLike, ch: ChannelLike) -> float:
    p, m = as_probs(px), as_matrix(ch)
    if p.size != m.shape[0]:
        raise ShapeError("input distribution does not match channel input size")
    return float(mutual_information_batch(p[None, :], m)[0])


def expected_cost(px: DistLike, cost: CostSpec) -> float:
    p = as_probs(px)
    if p.size != cost.costs.size:
        raise ShapeError("input distribution does not match cost vector")
    return float(p @ cost.costs)


# binary helpers

def _check_unit(name: str, v: float) -> None:
    if not (0.0 <= v <= 1.0):
        raise DomainError(f"{name}={v!r} outside [0, 1]")


def h_b(p: float) -> float:
    """Binary entropy in nats."""
    _check_unit("p", p)
    return -sum(t * math.log(t) for t in (p, 1.0 - p) if t > 0)


def d_b(a: float, b: float) -> float:
    """Binary divergence ``d(a || b)`` in nats."""
    _check_unit("a", a)
    _check_unit("b", b)
    total = 0.0
    for x, y in ((a, b), (1.0 - a, 1.0 - b)):
        if x > 0:
            if y == 0:
                raise DomainError(f"d_b({a}, {b}) is infinite")
            total += x * math.log(x / y)
    return max(total, 0.0)


def convolve_star(p: float, q: float) -> float:
    """Binary convolution ``(1-q) p + q (1-p)``."""
    _check_unit("p", p)
    _check_unit("q", q)
    return (1.0 - q) * p + q * (1.0 - p)


def simplex_lattice(k: int, n: int) -> NDArray[np.int64]:
    """All vectors of ``k`` non-negative integers summing to ``n``.

    Rows come out in reverse-lexicographic order of the leading entry.
    """
    if k < 1 or n < 0:
        raise DomainError("simplex_lattice needs k >= 1 and n >= 0")
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    if k == 2:
        first = np.arange(n, -1, -1, dtype=np.int64)
        return np.column_stack([first, n - first])
    blocks = []
    for first in range(n, -1, -1):
        rest = simplex_lattice(k - 1, n - first)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def lattice_size(k: int, n: int) -> int:
    return math.comb(n + k - 1, k - 1)
