import math

import numpy as np
import pytest

from oracles import db, hb
from jcdisc.core import (
    ChannelProblem,
    CostSpec,
    DiscreteChannel,
    DomainError,
    expected_cost,
    mutual_information,
)
from jcdisc.region import (
    example1_closed_form,
    example1_problem,
    example2_closed_form,
    example2_problem,
    feasible_px_grid,
    hausdorff,
    log_alphabet_bound,
    max_rate,
    membership,
    minimax_frontier,
    np_frontier,
    rate_exponent_surface,
)
from jcdisc.tilt import exponent_frontier, exponent_pair

MI_BSC_01 = 0.36806420716849714
DB_05_01 = 0.5108256237659907
Q_HAT = 0.17912878474779198


def same_hypotheses(budget=1.0):
    return ChannelProblem(DiscreteChannel.bsc(0.1), DiscreteChannel.bsc(0.2),
                          DiscreteChannel.bsc(0.2), CostSpec(np.array([0.0, 1.0]), budget))


def dominated(pts, tol=1e-9):
    """Indices strictly dominated by some other point (brute force)."""
    out = []
    for i, p in enumerate(pts):
        ge = np.all(pts >= p - tol, axis=1) & np.any(pts > p + tol, axis=1)
        if ge.any():
            out.append(i)
    return out


class TestGrid:
    def test_budget_filter(self):
        px = feasible_px_grid(example1_problem(0.1, 0.1, 0.3), 10)
        assert px[:, 1].max() == pytest.approx(0.3)
        assert len(px) == 4

    def test_infeasible(self):
        pr = ChannelProblem(DiscreteChannel.bsc(0.1), DiscreteChannel.bsc(0.1),
                            DiscreteChannel.bsc(0.3), CostSpec(np.array([1.0, 2.0]), 0.5))
        with pytest.raises(DomainError):
            feasible_px_grid(pr)


class TestSurface:
    def test_points_satisfy_invariants(self):
        pr = example1_problem(0.1, 0.2, 0.6)
        surf = rate_exponent_surface(pr, 20, 21)
        for pt in surf.points:
            assert pt.rate == pytest.approx(mutual_information(pt.px, pr.comm), abs=1e-9)
            ref = exponent_pair(pr, pt.px, pt.s)
            assert (pt.e0, pt.e1) == pytest.approx((ref.e0, ref.e1), abs=1e-9)
            assert expected_cost(pt.px, pr.cost) <= 0.6 + 1e-9

    def test_no_dominated_points(self):
        rng = np.random.default_rng(3)
        w = rng.dirichlet(np.ones(3), size=3) * 0.8 + 0.2 / 3
        v = rng.dirichlet(np.ones(3), size=3) * 0.8 + 0.2 / 3
        pr = ChannelProblem(DiscreteChannel(rng.dirichlet(np.ones(2), size=3)), DiscreteChannel(w),
                            DiscreteChannel(v), CostSpec(np.array([0.0, 1.0, 2.0]), 1.0))
        surf = rate_exponent_surface(pr, 12, 21)
        assert len(surf) > 1
        assert dominated(surf.as_array()) == []

    def test_same_hypotheses_collapse(self):
        surf = rate_exponent_surface(same_hypotheses())
        assert len(surf) == 1
        assert surf.rate[0] == pytest.approx(MI_BSC_01, abs=1e-12)
        assert (surf.e0[0], surf.e1[0]) == (0.0, 0.0)

    def test_noiseless_max_rate(self):
        pr = ChannelProblem(DiscreteChannel.identity(2), DiscreteChannel.bsc(0.1),
                            DiscreteChannel.bsc(0.3), CostSpec(np.array([0.0, 1.0]), 1.0))
        surf = rate_exponent_surface(pr)
        i = int(np.argmax(surf.rate))
        assert surf.rate[i] == pytest.approx(math.log(2), abs=1e-12)
        assert surf.px[i] == pytest.approx([0.5, 0.5])

    def test_example1_same_grid_matches_closed_form(self):
        rho = np.linspace(0, 1, 101)
        s = np.linspace(0, 1, 201)
        surf = rate_exponent_surface(example1_problem(0.1, 0.1, 0.8))
        ref = example1_closed_form(0.1, 0.1, 0.8, rho, s)
        assert hausdorff(surf.as_array(), ref.as_array()) <= 1e-12

    def test_monotone_in_budget(self):
        small = rate_exponent_surface(example1_problem(0.1, 0.1, 0.3), 50, 51).as_array()
        large = rate_exponent_surface(example1_problem(0.1, 0.1, 0.8), 50, 51).as_array()
        # every point of the smaller region is dominated by a point of the larger one
        for p in small:
            assert np.any(np.all(large >= p - 1e-12, axis=1))


class TestClosedForms:
    def test_example1_points(self):
        surf = example1_closed_form(0.1, 0.1, 1.0, [0.0, 0.5], [0.5])
        top = surf.as_array()[np.argmax(surf.rate)]
        assert top[0] == pytest.approx(MI_BSC_01, abs=1e-14)
        assert top[1] == pytest.approx(0.5 * DB_05_01, abs=1e-14)
        assert top[2] == pytest.approx(0.5 * DB_05_01, abs=1e-14)

    def test_example1_zero_rho(self):
        surf = example1_closed_form(0.1, 0.1, 1.0, [0.0], [0.0, 0.5, 1.0])
        assert np.all(surf.as_array() == 0.0)

    def test_example2_points(self):
        surf = example2_closed_form(0.1, 0.3, 1.0, [0.0, 0.5, 1.0])
        arr = surf.as_array()
        assert np.allclose(arr[:, 0], MI_BSC_01, atol=1e-14)
        pairs = {(round(a, 12), round(b, 12)) for a, b in arr[:, 1:]}
        assert (0.0, round(db(0.1, 0.3), 12)) in pairs
        assert (round(db(Q_HAT, 0.1), 12), round(db(Q_HAT, 0.3), 12)) in pairs

    def test_example2_equal_crossovers(self):
        surf = example2_closed_form(0.2, 0.2, 1.0, np.linspace(0, 1, 5))
        assert np.all(surf.e0 == 0) and np.all(surf.e1 == 0)

    def test_validation(self):
        with pytest.raises(DomainError):
            example1_closed_form(0.0, 0.1, 0.5, [0.1], [0.5])
        with pytest.raises(DomainError):
            example2_closed_form(0.1, 0.3, -1.0, [0.5])


class TestMembership:
    def test_origin(self):
        res = membership(example1_problem(0.1, 0.1, 0.5), 0.0, 0.0, 0.0)
        assert res.member and res.px is not None and res.s is not None

    def test_above_alphabet_bound(self):
        pr = example2_problem(0.1, 0.3, 1.0)
        assert membership(pr, log_alphabet_bound(pr) + 0.01, 0.0, 0.0).member is False

    def test_example2_rectangle_query(self):
        pr = example2_problem(0.1, 0.3, 1.0)
        r = 0.9 * (math.log(2) - hb(0.1))
        res = membership(pr, r, 0.9 * db(Q_HAT, 0.1), 0.9 * db(Q_HAT, 0.3))
        assert res.member
        assert mutual_information(res.px, pr.comm) >= r
        pt = exponent_pair(pr, res.px, res.s)
        assert pt.e0 >= 0.9 * db(Q_HAT, 0.1) and pt.e1 >= 0.9 * db(Q_HAT, 0.3)

    def test_negative_query(self):
        with pytest.raises(DomainError):
            membership(example2_problem(0.1, 0.3, 1.0), -0.1, 0.0, 0.0)


class TestMinimax:
    def test_example1(self):
        cur = minimax_frontier(example1_problem(0.1, 0.1, 0.8))
        rho = cur.px[:, 1]
        assert np.allclose(cur.exponent, rho * DB_05_01, atol=1e-12)
        assert np.allclose(cur.s, 0.5, atol=1e-9)
        assert rho.max() == pytest.approx(0.8)

    def test_example2_rectangle(self):
        cur = minimax_frontier(example2_problem(0.1, 0.3, 1.0))
        assert len(cur) == 1
        c_ref = max(min(p.e0, p.e1) for p in
                    exponent_frontier(example2_problem(0.1, 0.3, 1.0), [0.5, 0.5], np.linspace(0, 1, 100_001)))
        assert cur.rate[0] == pytest.approx(MI_BSC_01, abs=1e-12)
        assert cur.exponent[0] == pytest.approx(c_ref, abs=1e-6)

    def test_same_hypotheses(self):
        cur = minimax_frontier(same_hypotheses())
        assert cur.pairs == [pytest.approx((MI_BSC_01, 0.0), abs=1e-12)]

    def test_chernoff_equals_sweep_on_every_grid_point(self):
        pr = example2_problem(0.15, 0.35, 0.4)
        cur = minimax_frontier(pr, 20)
        grid = np.linspace(0, 1, 100_001)
        for px, e in zip(cur.px, cur.exponent):
            best = max(min(p.e0, p.e1) for p in exponent_frontier(pr, px, grid))
            assert e == pytest.approx(best, abs=1e-6)


class TestNeymanPearson:
    def test_example1(self):
        cur = np_frontier(example1_problem(0.1, 0.1, 0.8))
        assert np.allclose(cur.exponent, cur.px[:, 1] * db(0.1, 0.9), atol=1e-12)
        assert cur.meta["alpha_independent"] is True

    def test_example2_cap(self):
        cur = np_frontier(example2_problem(0.1, 0.3, 1.0))
        assert cur.pairs == [pytest.approx((MI_BSC_01, db(0.1, 0.3)), abs=1e-12)]

    def test_same_hypotheses(self):
        assert np_frontier(same_hypotheses()).pairs == [pytest.approx((MI_BSC_01, 0.0), abs=1e-12)]

    def test_small_s_limit(self):
        pr = example1_problem(0.1, 0.2, 0.7)
        cur = np_frontier(pr, 20)
        for px, e in zip(cur.px, cur.exponent):
            assert e == pytest.approx(exponent_pair(pr, px, 1e-9).e1, abs=1e-8)


def test_rate_helpers():
    pr = example2_problem(0.1, 0.3, 0.2)
    # rho = B = 0.2: H(rho * p) - H(p)
    assert max_rate(pr) == pytest.approx(hb(0.2 * 0.9 + 0.8 * 0.1) - hb(0.1), abs=1e-12)
    assert log_alphabet_bound(pr) == pytest.approx(math.log(2))
