"""Tilted channels, the log-normaliser family and the exponent trade-off.

For each input ``x`` the tilt between the two hypotheses is

    W_s(y|x) = W(y|x)^(1-s) V(y|x)^s / exp(mu_x(s)),

with ``mu_x(s) = ln sum_y W^(1-s) V^s``.  Its first two derivatives are the
mean and variance of ``ln V/W`` under ``W_s(.|x)``.  Averaging over an
input law ``P`` gives ``mu_P`` and the exponent pair

    E0(s) = D(W_s || W | P) = s mu_P'(s) - mu_P(s)
    E1(s) = D(W_s || V | P) = (s - 1) mu_P'(s) - mu_P(s).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from .core import (
    ChannelProblem,
    DiscreteChannel,
    DistLike,
    DomainError,
    ShapeError,
    as_probs,
    conditional_kl,
    simplex_lattice,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_S_POINTS = 201


class MuTriple(NamedTuple):
    mu: float
    mu_prime: float
    mu_double_prime: float


@dataclass(frozen=True)
class ExponentPoint:
    e0: float
    e1: float
    s: float


def _check_s(s) -> None:
    s = np.asarray(s)
    if np.any(~np.isfinite(s)) or np.any(s < 0.0) or np.any(s > 1.0):
        raise DomainError("tilt parameter s must lie in [0, 1]")


def _check_px(problem: ChannelProblem, px: DistLike) -> NDArray:
    p = as_probs(px)
    if p.size != problem.in_size:
        raise ShapeError(f"px has {p.size} entries, problem has {problem.in_size} inputs")
    return p


def mu_table(w: NDArray, v: NDArray, s: NDArray) -> tuple[NDArray, NDArray, NDArray]:
    """``mu_x``, ``mu_x'`` and ``mu_x''`` on a grid of ``s``; each of shape ``(len(s), in_size)``."""
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    lw, lv = np.log(w), np.log(v)
    llr = lv - lw
    expo = lw[None] + s[:, None, None] * llr[None]          # (S, X, Y)
    mu = logsumexp(expo, axis=2)
    tilt = np.exp(expo - mu[:, :, None])
    mean = np.einsum("sxy,xy->sx", tilt, llr)
    var = np.einsum("sxy,sxy->sx", tilt, (llr[None] - mean[:, :, None]) ** 2)
    # exact endpoints: rows are normalised
    mu[s == 0.0] = 0.0
    mu[s == 1.0] = 0.0
    return mu, mean, np.maximum(var, 0.0)


def mu_x(problem: ChannelProblem, x: int, s: float) -> MuTriple:
    _check_s(s)
    if not 0 <= x < problem.in_size:
        raise DomainError(f"input symbol {x} out of range")
    m, m1, m2 = mu_table(problem.w.matrix[x:x + 1], problem.v.matrix[x:x + 1], [s])
    return MuTriple(float(m[0, 0]), float(m1[0, 0]), float(m2[0, 0]))


def mu_p(problem: ChannelProblem, px: DistLike, s: float) -> MuTriple:
    _check_s(s)
    p = _check_px(problem, px)
    m, m1, m2 = mu_table(problem.w.matrix, problem.v.matrix, [s])
    return MuTriple(float(m[0] @ p), float(m1[0] @ p), float(m2[0] @ p))


def tilted_channel(problem: ChannelProblem, s: float) -> DiscreteChannel:
    _check_s(s)
    if s == 0.0:
        return problem.w
    if s == 1.0:
        return problem.v
    lw, lv = np.log(problem.w.matrix), np.log(problem.v.matrix)
    expo = (1.0 - s) * lw + s * lv
    expo -= logsumexp(expo, axis=1, keepdims=True)
    return DiscreteChannel(np.exp(expo))


def exponents_from_mu(s: NDArray, mu: NDArray, mu1: NDArray) -> tuple[NDArray, NDArray]:
    e0 = s * mu1 - mu
    e1 = (s - 1.0) * mu1 - mu
    return np.maximum(e0, 0.0), np.maximum(e1, 0.0)


def exponent_pair(problem: ChannelProblem, px: DistLike, s: float) -> ExponentPoint:
    m = mu_p(problem, px, s)
    e0, e1 = exponents_from_mu(s, m.mu, m.mu_prime)
    return ExponentPoint(float(e0), float(e1), float(s))


def exponent_frontier(problem: ChannelProblem, px: DistLike,
                      s_grid: Sequence[float]) -> list[ExponentPoint]:
    s = np.asarray(s_grid, dtype=np.float64)
    if s.size == 0:
        raise DomainError("empty s grid")
    _check_s(s)
    if np.any(np.diff(s) < 0):
        raise DomainError("s grid must be sorted")
    p = _check_px(problem, px)
    mu, mu1, _ = mu_table(problem.w.matrix, problem.v.matrix, s)
    e0, e1 = exponents_from_mu(s, mu @ p, mu1 @ p)
    return [ExponentPoint(float(a), float(b), float(t)) for a, b, t in zip(e0, e1, s)]


def divergence_bounds(problem: ChannelProblem, px: DistLike) -> tuple[float, float]:
    """``(D(W||V|P), D(V||W|P))`` - the two frontier endpoints."""
    p = _check_px(problem, px)
    return (conditional_kl(problem.w, problem.v, p),
            conditional_kl(problem.v, problem.w, p))


def _rows_equal_on_support(w: NDArray, v: NDArray, p: NDArray) -> bool:
    # mu_P'' == 0 iff V rows equal W rows on the support of P
    sup = p > 0
    return bool(np.allclose(w[sup], v[sup], rtol=0, atol=1e-15))


def e_of_r(problem: ChannelProblem, px: DistLike, r: float) -> float:
    """Smallest ``D(T||V|P)`` over channels ``T`` with ``D(T||W|P) <= r``.

    The minimiser lies on the tilted family; ``s`` is located by bisection on
    the increasing map ``s -> D(W_s||W|P)``.
    """
    p = _check_px(problem, px)
    d_wv, d_vw = divergence_bounds(problem, p)
    if not (0.0 <= r <= d_vw + 1e-12):
        raise DomainError(f"r={r!r} outside [0, D(V||W|P)={d_vw!r}]")
    if _rows_equal_on_support(problem.w.matrix, problem.v.matrix, p) or r == 0.0:
        return d_wv
    if r >= d_vw:
        return 0.0
    w, v = problem.w.matrix, problem.v.matrix

    def pair(s):
        mu, mu1, _ = mu_table(w, v, [s])
        e0, e1 = exponents_from_mu(s, mu[0] @ p, mu1[0] @ p)
        return float(e0), float(e1)

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pair(mid)[0] < r:
            lo = mid
        else:
            hi = mid
    return pair(0.5 * (lo + hi))[1]


def e_of_r_oracle(problem: ChannelProblem, px: DistLike, r,
                  grid_resolution: int = 200):
    """Grid upper bound on ``E(r, P)`` that never touches the tilted family.

    Every row of ``T`` ranges over the lattice ``{k/N}`` of the output simplex.
    Per row we keep only the lower-left staircase of ``(D(T||W), D(T||V))``;
    the rows are then combined exactly, so the returned value is the true
    minimum over the product grid.  ``r`` may be a scalar or an array.
    """
    if grid_resolution < 1:
        raise DomainError("grid_resolution must be positive")
    p = _check_px(problem, px)
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr < 0):
        raise DomainError("r must be non-negative")
    lattice, neg_ent = _lattice_tables(problem.out_size, int(grid_resolution))
    lw, lv = np.log(problem.w.matrix), np.log(problem.v.matrix)
    stairs = [_staircase(p[x] * (neg_ent - lattice @ lw[x]), p[x] * (neg_ent - lattice @ lv[x]))
              for x in np.flatnonzero(p > 0)]
    acc = stairs[0]
    for st in stairs[1:-1]:
        acc = _merge_staircases(acc, st)
    budget = r_arr.reshape(-1) + 1e-12
    if len(stairs) == 1:
        idx = np.searchsorted(acc[0], budget, side="right") - 1
        out = np.where(idx >= 0, acc[1][np.maximum(idx, 0)], np.inf)
    else:
        last_g, last_f = stairs[-1]
        idx = np.searchsorted(last_g, budget[:, None] - acc[0][None, :], side="right") - 1
        tot = np.where(idx >= 0, acc[1][None, :] + last_f[np.maximum(idx, 0)], np.inf)
        out = tot.min(axis=1)
    out = np.maximum(out, 0.0)
    return float(out[0]) if r_arr.ndim == 0 else out.reshape(r_arr.shape)


@lru_cache(maxsize=4)
def _lattice_tables(k: int, n: int) -> tuple[NDArray, NDArray]:
    """Lattice points of the k-simplex with step 1/n and their negative entropies."""
    lattice = simplex_lattice(k, n) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        neg_ent = np.where(lattice > 0, lattice * np.log(lattice), 0.0).sum(axis=1)
    lattice.flags.writeable = False
    neg_ent.flags.writeable = False
    return lattice, neg_ent


def _staircase(g: NDArray, f: NDArray) -> tuple[NDArray, NDArray]:
    # sort by g, keep points that improve on every f seen so far; among equal
    # g the later survivor has the smaller f, which is what searchsorted(right) finds
    order = np.argsort(g, kind="stable")
    g, f = g[order], f[order]
    prev_min = np.minimum.accumulate(np.concatenate([[np.inf], f[:-1]]))
    keep = f < prev_min
    return g[keep], f[keep]


def _merge_staircases(a, b, chunk=4096):
    gs, fs = [], []
    for i in range(0, a[0].size, chunk):
        g = (a[0][i:i + chunk, None] + b[0][None, :]).ravel()
        f = (a[1][i:i + chunk, None] + b[1][None, :]).ravel()
        g, f = _staircase(g, f)
        gs.append(g)
        fs.append(f)
    return _staircase(np.concatenate(gs), np.concatenate(fs))


def chernoff_batch(w: NDArray, v: NDArray, px: NDArray) -> tuple[NDArray, NDArray]:
    """Chernoff information and its minimiser for every row of ``px``.

    Vectorised golden-section search on ``mu_P`` followed by a few Newton steps
    on ``mu_P'`` (kept inside the golden bracket) to pin ``s*`` to round-off.
    """
    px = np.atleast_2d(px)
    m = px.shape[0]
    lo, hi = np.zeros(m), np.ones(m)

    def mu_p_rows(s):
        return np.einsum("ix,ix->i", mu_table(w, v, s)[0], px)

    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = mu_p_rows(x1), mu_p_rows(x2)
    for _ in range(80):
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        nx1 = np.where(left, hi - INV_PHI * (hi - lo), x2)
        nx2 = np.where(left, x1, lo + INV_PHI * (hi - lo))
        nf1 = np.where(left, np.nan, f2)
        nf2 = np.where(left, f1, np.nan)
        x1, x2 = nx1, nx2
        fresh = mu_p_rows(np.where(left, x1, x2))
        f1 = np.where(left, fresh, nf1)
        f2 = np.where(left, nf2, fresh)
    s = 0.5 * (lo + hi)
    lo = np.maximum(lo - 1e-6, 0.0)
    hi = np.minimum(hi + 1e-6, 1.0)
    for _ in range(6):
        _, mu1, mu2 = mu_table(w, v, s)
        d1 = np.einsum("ix,ix->i", mu1, px)
        d2 = np.einsum("ix,ix->i", mu2, px)
        step = np.where(d2 > 0, d1 / np.where(d2 > 0, d2, 1.0), 0.0)
        s = np.clip(s - step, lo, hi)
    value = -mu_p_rows(s)
    degenerate = np.array([_rows_equal_on_support(w, v, row) for row in px])
    s = np.where(degenerate, 0.5, s)
    value = np.where(degenerate, 0.0, np.maximum(value, 0.0))
    return value, s


def chernoff_info(problem: ChannelProblem, px: DistLike) -> tuple[float, float]:
    """``(C, s*)`` with ``C = -min_s mu_P(s)``."""
    p = _check_px(problem, px)
    value, s = chernoff_batch(problem.w.matrix, problem.v.matrix, p[None, :])
    return float(value[0]), float(s[0])
