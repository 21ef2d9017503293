"""Constant-composition codewords and the LLR threshold test, exactly and by simulation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from . import _accel
from .core import (
    BudgetError,
    ChannelProblem,
    DistLike,
    DomainError,
    ShapeError,
    as_probs,
    conditional_kl,
    lattice_size,
    simplex_lattice,
)
from .tilt import exponent_pair, mu_p

ENUM_BUDGET = 10**7
MC_BLOCK = 8192
Z95 = 1.96


@dataclass(frozen=True)
class TypeComposition:
    counts: tuple

    def __post_init__(self):
        c = tuple(int(v) for v in self.counts)
        if not c or any(v < 0 for v in c) or sum(c) == 0:
            raise DomainError("composition needs non-negative counts with positive total")
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def probs(self) -> NDArray:
        return np.asarray(self.counts, dtype=np.float64) / self.n

    @classmethod
    def of_sequence(cls, x_seq: Sequence[int], in_size: int) -> "TypeComposition":
        x = np.asarray(x_seq, dtype=np.int64)
        if x.size and (x.min() < 0 or x.max() >= in_size):
            raise DomainError("input symbol out of range")
        return cls(tuple(np.bincount(x, minlength=in_size)))


@dataclass(frozen=True)
class LlrtSpec:
    """Decide ``W`` when the LLR is at most ``threshold`` (ties go to ``W``)."""

    s: float
    threshold: float

    @classmethod
    def for_composition(cls, problem: ChannelProblem, comp: TypeComposition,
                        s: float) -> "LlrtSpec":
        return cls(float(s), comp.n * mu_p(problem, comp.probs, s).mu_prime)


@dataclass(frozen=True)
class ErrorPair:
    eps0: float
    eps1: float
    method: str
    n: int
    ci_halfwidth: tuple = (0.0, 0.0)
    seed: Optional[int] = None
    trials: Optional[int] = None
    extra: dict = field(default_factory=dict, compare=False)


def quantize_type(px: DistLike, n: int) -> TypeComposition:
    """Largest-remainder rounding of ``n * px`` (ties go to the lower index)."""
    if n < 1:
        raise DomainError("blocklength must be positive")
    p = as_probs(px)
    scaled = n * p
    counts = np.floor(scaled).astype(np.int64)
    short = n - int(counts.sum())
    if short > 0:
        frac = scaled - counts
        order = np.lexsort((np.arange(p.size), -frac))
        counts[order[:short]] += 1
    return TypeComposition(tuple(counts))


def make_codeword(comp: TypeComposition, seed: int) -> NDArray:
    base = np.repeat(np.arange(len(comp.counts)), comp.counts)
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.permutation(base)


def _check_comp(problem: ChannelProblem, comp: TypeComposition) -> None:
    if len(comp.counts) != problem.in_size:
        raise ShapeError("composition length must equal the input alphabet size")


def llr_statistic(problem: ChannelProblem, x_seq: Sequence[int], y_seq: Sequence[int]) -> float:
    x = np.asarray(x_seq, dtype=np.int64)
    y = np.asarray(y_seq, dtype=np.int64)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError("x and y sequences must be 1-d and of equal length")
    if x.size and (x.min() < 0 or x.max() >= problem.in_size
                   or y.min() < 0 or y.max() >= problem.out_size):
        raise DomainError("symbol out of range")
    return math.fsum(problem.log_ratio[x, y])


def enumeration_size(problem: ChannelProblem, comp: TypeComposition) -> int:
    return math.prod(lattice_size(problem.out_size, c) for c in comp.counts if c > 0)


def _class_tables(problem: ChannelProblem, comp: TypeComposition):
    """Per input class: every output-count pattern with its LLR and log-probabilities."""
    size = enumeration_size(problem, comp)
    if size > ENUM_BUDGET:
        raise BudgetError(f"exact enumeration needs {size} patterns (budget {ENUM_BUDGET})")
    lw, lv = np.log(problem.w.matrix), np.log(problem.v.matrix)
    llr_tab = lv - lw
    llr, logw, logv, offsets = [], [], [], [0]
    for x, c in enumerate(comp.counts):
        if c == 0:
            continue
        k = simplex_lattice(problem.out_size, c)
        log_coef = gammaln(c + 1) - gammaln(k + 1).sum(axis=1)
        llr.append(k @ llr_tab[x])
        logw.append(log_coef + k @ lw[x])
        logv.append(log_coef + k @ lv[x])
        offsets.append(offsets[-1] + k.shape[0])
    return (np.concatenate(llr), np.concatenate(logw), np.concatenate(logv),
            np.asarray(offsets, dtype=np.int64))


def exact_error_pair(problem: ChannelProblem, comp: TypeComposition, spec: LlrtSpec) -> ErrorPair:
    """Exact type-I / type-II error of the threshold test for a codeword of type ``comp``.

    The LLR only depends on the joint (input, output) counts, so the outputs of
    each input class follow a multinomial law and the classes are independent.
    """
    _check_comp(problem, comp)
    expected = comp.n * mu_p(problem, comp.probs, spec.s).mu_prime
    if abs(spec.threshold - expected) > 1e-9 * max(1.0, abs(expected)):
        raise DomainError("threshold does not match n * mu_P'(s) for this composition")
    llr, logw, logv, offsets = _class_tables(problem, comp)
    eps0, eps1 = _accel.product_error_sums(llr, logw, logv, offsets, spec.threshold)
    return ErrorPair(min(max(eps0, 0.0), 1.0), min(max(eps1, 0.0), 1.0), "exact", comp.n)


def _stream(seed: int, hypothesis: int, block: int) -> np.random.Generator:
    # counter-based: one independent Philox key per (seed, hypothesis, block)
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, hypothesis, block])
    return np.random.Generator(np.random.Philox(ss))


def _count_errors(problem, x_seq, threshold, trials, seed, hypothesis):
    ch = problem.w.matrix if hypothesis == 0 else problem.v.matrix
    cdf = np.cumsum(ch, axis=1)
    cdf[:, -1] = 1.0
    llr_tab = np.ascontiguousarray(problem.log_ratio)
    errors = 0
    for b, start in enumerate(range(0, trials, MC_BLOCK)):
        m = min(MC_BLOCK, trials - start)
        u = _stream(seed, hypothesis, b).random((m, x_seq.size))
        stat = _accel.mc_llr(u, x_seq, cdf, llr_tab)
        accept_w = stat <= threshold + _accel.TIE_TOL
        errors += int(np.count_nonzero(~accept_w if hypothesis == 0 else accept_w))
    return errors


def monte_carlo_error_pair(problem: ChannelProblem, comp: TypeComposition, spec: LlrtSpec,
                           trials: int, seed: int) -> ErrorPair:
    """Empirical error pair with 95% normal-approximation half-widths.

    Trials are cut into fixed blocks, each with its own Philox stream keyed by
    ``(seed, hypothesis, block)``, so results never depend on execution order.
    """
    _check_comp(problem, comp)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    x_seq = np.repeat(np.arange(problem.in_size), comp.counts).astype(np.int64)
    e0 = _count_errors(problem, x_seq, spec.threshold, trials, seed, 0) / trials
    e1 = _count_errors(problem, x_seq, spec.threshold, trials, seed, 1) / trials
    ci = tuple(Z95 * math.sqrt(p * (1 - p) / trials) for p in (e0, e1))
    return ErrorPair(e0, e1, "monte-carlo", comp.n, ci, seed=seed, trials=trials)


def achievability_bounds(problem: ChannelProblem, comp: TypeComposition,
                         s: float) -> tuple[float, float]:
    """Finite-n upper bounds ``exp(n(mu - s mu'))`` and ``exp(n(mu + (1-s) mu'))``."""
    m = mu_p(problem, comp.probs, s)
    n = comp.n
    return (math.exp(n * (m.mu - s * m.mu_prime)),
            math.exp(n * (m.mu + (1 - s) * m.mu_prime)))


@dataclass(frozen=True)
class ExponentEstimate:
    e0: float
    e1: float
    slope0: float
    slope1: float
    theory_e0: float
    theory_e1: float
    n: tuple
    eps: tuple


def _neg_log_rate(eps: float, n: int) -> float:
    return math.inf if eps <= 0.0 else -math.log(eps) / n


def _ls_slope(n: NDArray, y: NDArray) -> float:
    ok = np.isfinite(y)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(n[ok], y[ok], 1)[0])


def exponent_estimate(problem: ChannelProblem, px: DistLike, s: float, n_list: Sequence[int],
                      per_n_method: str = "exact", trials: int = 100_000,
                      seed: int = 0) -> ExponentEstimate:
    """Finite-n exponents ``-(1/n) ln eps`` at the largest ``n`` plus least-squares slopes.

    A zero error probability maps to ``inf``.
    """
    ns = [int(n) for n in n_list]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError("n_list must be non-empty and strictly increasing")
    if per_n_method not in ("exact", "monte-carlo"):
        raise DomainError(f"unknown method {per_n_method!r}")
    pairs = []
    for n in ns:
        comp = quantize_type(px, n)
        spec = LlrtSpec.for_composition(problem, comp, s)
        if per_n_method == "exact":
            pairs.append(exact_error_pair(problem, comp, spec))
        else:
            pairs.append(monte_carlo_error_pair(problem, comp, spec, trials, seed))
    narr = np.asarray(ns, dtype=np.float64)
    with np.errstate(divide="ignore"):
        y0 = -np.log([p.eps0 for p in pairs])
        y1 = -np.log([p.eps1 for p in pairs])
    theory = exponent_pair(problem, px, s)
    return ExponentEstimate(
        e0=_neg_log_rate(pairs[-1].eps0, ns[-1]),
        e1=_neg_log_rate(pairs[-1].eps1, ns[-1]),
        slope0=_ls_slope(narr, y0),
        slope1=_ls_slope(narr, y1),
        theory_e0=theory.e0,
        theory_e1=theory.e1,
        n=tuple(ns),
        eps=tuple((p.eps0, p.eps1) for p in pairs),
    )


def llr_distribution(problem: ChannelProblem, comp: TypeComposition):
    """Distinct LLR values (merged within the tie tolerance) with their W and V masses."""
    llr, logw, logv, offsets = _class_tables(problem, comp)
    stat, pw, pv = np.zeros(1), np.zeros(1), np.zeros(1)
    for c in range(len(offsets) - 1):
        a, b = offsets[c], offsets[c + 1]
        stat = (stat[:, None] + llr[None, a:b]).ravel()
        pw = (pw[:, None] + logw[None, a:b]).ravel()
        pv = (pv[:, None] + logv[None, a:b]).ravel()
    order = np.argsort(stat, kind="stable")
    stat, pw, pv = stat[order], np.exp(pw[order]), np.exp(pv[order])
    new_group = np.concatenate([[True], np.diff(stat) > _accel.TIE_TOL])
    gid = np.cumsum(new_group) - 1
    values = stat[new_group]
    mass_w = np.bincount(gid, weights=pw)
    mass_v = np.bincount(gid, weights=pv)
    return values, mass_w, mass_v


def np_threshold_search(problem: ChannelProblem, comp: TypeComposition,
                        alpha: float) -> tuple[float, ErrorPair]:
    """Best deterministic threshold test with type-I error at most ``alpha``.

    Scans the finite set of achievable LLR values; no randomisation at the
    boundary, so the type-I constraint is generally met with slack.
    """
    _check_comp(problem, comp)
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    values, mass_w, mass_v = llr_distribution(problem, comp)
    # accept W for llr <= values[j]
    tail_w = np.concatenate([np.cumsum(mass_w[::-1])[::-1][1:], [0.0]])
    head_v = np.cumsum(mass_v)
    ok = np.flatnonzero(tail_w <= alpha + 1e-15)
    j = int(ok[0])
    eps0 = min(max(float(tail_w[j]), 0.0), 1.0)
    eps1 = min(max(float(head_v[j]), 0.0), 1.0)
    return float(values[j]), ErrorPair(eps0, eps1, "exact", comp.n, extra={"alpha": alpha})


def np_theory_exponent(problem: ChannelProblem, comp: TypeComposition) -> float:
    return conditional_kl(problem.w, problem.v, comp.probs)
