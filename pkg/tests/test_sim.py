import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble import random_problem
from oracles import brute_error_pair, brute_llr_masses, bsc_llrt_binomial
from jcdisc.core import BudgetError, ChannelProblem, CostSpec, DiscreteChannel, DomainError, ShapeError
from jcdisc.sim import (
    ENUM_BUDGET,
    LlrtSpec,
    TypeComposition,
    achievability_bounds,
    enumeration_size,
    exact_error_pair,
    exponent_estimate,
    llr_statistic,
    make_codeword,
    monte_carlo_error_pair,
    np_theory_exponent,
    np_threshold_search,
    quantize_type,
)

BSC = ChannelProblem(DiscreteChannel.bsc(0.1), DiscreteChannel.bsc(0.1),
                     DiscreteChannel.bsc(0.3), CostSpec.free(2))
BLIND = ChannelProblem(DiscreteChannel.bsc(0.1), DiscreteChannel.bsc(0.2),
                       DiscreteChannel.bsc(0.2), CostSpec.free(2))

# binomial-tail oracle, decide W iff at most one flip
N10_PAIR = (0.2639010709, 0.1493083459)


def test_frozen_binomial_values():
    assert bsc_llrt_binomial(0.1, 0.3, 10, 1) == pytest.approx(N10_PAIR, abs=1e-15)


class TestTypes:
    @pytest.mark.parametrize("px,n,want", [((0.5, 0.5), 10, (5, 5)), ((1.0, 0.0), 7, (7, 0)),
                                           ((0.3, 0.7), 7, (2, 5)), ((0.2, 0.3, 0.5), 3, (1, 1, 1))])
    def test_quantize(self, px, n, want):
        assert quantize_type(px, n).counts == want

    @given(k=st.integers(1, 5), n=st.integers(1, 60), seed=st.integers(0, 2**32 - 1))
    def test_quantize_sums(self, k, n, seed):
        px = np.random.default_rng(seed).dirichlet(np.ones(k))
        comp = quantize_type(px, n)
        assert comp.n == n and np.all(np.abs(np.array(comp.counts) - n * px) < 1)

    def test_bad_composition(self):
        with pytest.raises(DomainError):
            TypeComposition((-1, 3))
        with pytest.raises(DomainError):
            quantize_type((0.5, 0.5), 0)

    def test_codeword(self):
        assert np.array_equal(make_codeword(TypeComposition((4, 0)), 1), np.zeros(4))
        a, b = make_codeword(TypeComposition((2, 2)), 9), make_codeword(TypeComposition((2, 2)), 9)
        assert np.array_equal(a, b)

    @given(counts=st.lists(st.integers(0, 6), min_size=1, max_size=4).filter(lambda c: sum(c) > 0),
           seed=st.integers(0, 2**63 - 1))
    def test_codeword_has_its_type(self, counts, seed):
        comp = TypeComposition(tuple(counts))
        assert TypeComposition.of_sequence(make_codeword(comp, seed), len(counts)) == comp

    def test_spec_threshold(self):
        comp = TypeComposition((3, 5))
        spec = LlrtSpec.for_composition(BSC, comp, 0.5)
        assert spec.threshold == pytest.approx(8 * -0.00950369597525244, abs=1e-12)


class TestLlr:
    def test_single_symbol(self):
        assert llr_statistic(BSC, [0], [1]) == pytest.approx(math.log(3), abs=1e-15)

    def test_blind(self):
        assert llr_statistic(BLIND, [0, 1, 1], [1, 0, 1]) == 0.0

    @given(x=st.lists(st.integers(0, 1), min_size=1, max_size=8), data=st.data())
    def test_additive(self, x, data):
        y = data.draw(st.lists(st.integers(0, 1), min_size=len(x), max_size=len(x)))
        k = data.draw(st.integers(0, len(x)))
        whole = llr_statistic(BSC, x, y)
        assert whole == pytest.approx(llr_statistic(BSC, x[:k], y[:k]) + llr_statistic(BSC, x[k:], y[k:]),
                                      abs=1e-12)

    def test_validation(self):
        with pytest.raises(ShapeError):
            llr_statistic(BSC, [0, 1], [0])
        with pytest.raises(DomainError):
            llr_statistic(BSC, [2], [0])


class TestExact:
    def test_single_symbol(self):
        comp = TypeComposition((1, 0))
        ep = exact_error_pair(BSC, comp, LlrtSpec.for_composition(BSC, comp, 0.5))
        assert (ep.eps0, ep.eps1) == pytest.approx((0.1, 0.7), abs=1e-15)

    @pytest.mark.parametrize("comp", [(10, 0), (5, 5), (0, 10), (3, 7)])
    def test_n10_binomial(self, comp):
        c = TypeComposition(comp)
        ep = exact_error_pair(BSC, c, LlrtSpec.for_composition(BSC, c, 0.5))
        assert (ep.eps0, ep.eps1) == pytest.approx(N10_PAIR, abs=1e-12)
        assert ep.method == "exact" and ep.ci_halfwidth == (0.0, 0.0)

    def test_blind(self):
        comp = TypeComposition((3, 4))
        ep = exact_error_pair(BLIND, comp, LlrtSpec.for_composition(BLIND, comp, 0.5))
        assert (ep.eps0, ep.eps1) == (0.0, 1.0)

    def test_threshold_must_match_type(self):
        comp = TypeComposition((3, 4))
        with pytest.raises(DomainError):
            exact_error_pair(BSC, comp, LlrtSpec(0.5, 0.7))

    def test_budget(self):
        pr = random_problem(np.random.default_rng(0), in_size=2, out_size=4)
        comp = TypeComposition((300, 300))
        assert enumeration_size(pr, comp) > ENUM_BUDGET
        with pytest.raises(BudgetError):
            exact_error_pair(pr, comp, LlrtSpec.for_composition(pr, comp, 0.5))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8), s=st.floats(0, 1))
    def test_matches_brute_force(self, seed, n, s):
        rng = np.random.default_rng(seed)
        pr = random_problem(rng, in_size=int(rng.integers(1, 4)), out_size=int(rng.integers(2, 4)))
        comp = TypeComposition(tuple(int(c) for c in rng.multinomial(n, np.ones(pr.in_size) / pr.in_size)))
        spec = LlrtSpec.for_composition(pr, comp, s)
        ep = exact_error_pair(pr, comp, spec)
        ref = brute_error_pair(pr.w.matrix, pr.v.matrix, make_codeword(comp, seed), spec.threshold)
        assert (ep.eps0, ep.eps1) == pytest.approx(ref, abs=1e-12)
        b0, b1 = achievability_bounds(pr, comp, s)
        assert ep.eps0 <= b0 * (1 + 1e-12) and ep.eps1 <= b1 * (1 + 1e-12)


class TestMonteCarlo:
    def test_deterministic(self):
        comp = TypeComposition((6, 4))
        spec = LlrtSpec.for_composition(BSC, comp, 0.5)
        a = monte_carlo_error_pair(BSC, comp, spec, 20_000, seed=4)
        b = monte_carlo_error_pair(BSC, comp, spec, 20_000, seed=4)
        assert a == b
        assert a != monte_carlo_error_pair(BSC, comp, spec, 20_000, seed=5)

    def test_blind(self):
        comp = TypeComposition((5, 5))
        ep = monte_carlo_error_pair(BLIND, comp, LlrtSpec.for_composition(BLIND, comp, 0.3), 5000, 1)
        assert (ep.eps0, ep.eps1) == (0.0, 1.0)

    def test_close_to_exact(self):
        comp = TypeComposition((10, 0))
        spec = LlrtSpec.for_composition(BSC, comp, 0.5)
        ep = monte_carlo_error_pair(BSC, comp, spec, 100_000, seed=0)
        assert abs(ep.eps0 - N10_PAIR[0]) <= 4 * ep.ci_halfwidth[0]
        assert abs(ep.eps1 - N10_PAIR[1]) <= 4 * ep.ci_halfwidth[1]
        assert ep.ci_halfwidth[0] == pytest.approx(1.96 * math.sqrt(ep.eps0 * (1 - ep.eps0) / 1e5))

    def test_stream_keys(self):
        # every (seed, hypothesis, block) names its own stream, independent of run length
        from jcdisc.sim import _stream
        a = _stream(2, 0, 1).random(5)
        assert np.array_equal(a, _stream(2, 0, 1).random(5))
        assert not np.array_equal(a, _stream(2, 1, 1).random(5))
        assert not np.array_equal(a, _stream(2, 0, 0).random(5))

    def test_trials_validated(self):
        comp = TypeComposition((1, 1))
        with pytest.raises(DomainError):
            monte_carlo_error_pair(BSC, comp, LlrtSpec.for_composition(BSC, comp, 0.5), 0, 1)


class TestExponentEstimate:
    def test_bsc_path(self):
        est = exponent_estimate(BSC, [0.5, 0.5], 0.5, range(4, 15))
        assert est.n == tuple(range(4, 15))
        assert (est.theory_e0, est.theory_e1) == pytest.approx((0.028876836702811534, 0.038380532678063975))
        assert est.e0 == pytest.approx(-math.log(est.eps[-1][0]) / 14)
        # -ln eps grows linearly in n; the slope is a second exponent estimate
        assert est.slope0 > 0 and est.slope1 > 0

    def test_blind(self):
        est = exponent_estimate(BLIND, [0.5, 0.5], 0.5, [2, 4])
        assert est.e0 == math.inf and est.e1 == 0.0

    def test_validation(self):
        with pytest.raises(DomainError):
            exponent_estimate(BSC, [0.5, 0.5], 0.5, [4, 4])
        with pytest.raises(DomainError):
            exponent_estimate(BSC, [0.5, 0.5], 0.5, [4], per_n_method="magic")

    def test_doubling_slack(self):
        # doubling n cannot lower -(1/n) ln eps0 by more than the type-counting slack
        for n in (3, 5, 7):
            a = exponent_estimate(BSC, [0.5, 0.5], 0.5, [n, 2 * n])
            e_n = -math.log(a.eps[0][0]) / n
            e_2n = -math.log(a.eps[1][0]) / (2 * n)
            assert e_2n >= e_n - math.log(n + 1) * 2 / n


class TestNeymanPearson:
    def test_n10_alpha_030(self):
        thr, ep = np_threshold_search(BSC, TypeComposition((10, 0)), 0.3)
        assert (ep.eps0, ep.eps1) == pytest.approx(N10_PAIR, abs=1e-12)
        # one flip: ln 3 + 9 ln(7/9)
        assert thr == pytest.approx(math.log(3) + 9 * math.log(7 / 9), abs=1e-12)

    def test_large_alpha_accepts_more(self):
        comp = TypeComposition((4, 4))
        values, pw, pv = brute_llr_masses(BSC.w.matrix, BSC.v.matrix, make_codeword(comp, 0))
        _, ep = np_threshold_search(BSC, comp, 0.999)
        # the smallest-statistic outcome set is all that stays on the W side
        first = values <= values[0] + 1e-9
        assert ep.eps1 == pytest.approx(math.fsum(pv[first]), abs=1e-15)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.01, 0.99))
    def test_against_brute_scan(self, seed, alpha):
        rng = np.random.default_rng(seed)
        pr = random_problem(rng, in_size=2, out_size=int(rng.integers(2, 4)))
        comp = TypeComposition(tuple(int(c) for c in rng.multinomial(6, [0.5, 0.5])))
        values, pw, pv = brute_llr_masses(pr.w.matrix, pr.v.matrix, make_codeword(comp, seed))
        best = 1.0
        for t in values:
            acc = values <= t + 1e-9
            if math.fsum(pw[~acc]) <= alpha:
                best = min(best, math.fsum(pv[acc]))
        _, ep = np_threshold_search(pr, comp, alpha)
        assert ep.eps0 <= alpha + 1e-15
        assert ep.eps1 == pytest.approx(best, abs=1e-12)

    def test_monotone_in_alpha(self):
        comp = TypeComposition((5, 6))
        eps1 = [np_threshold_search(BSC, comp, a)[1].eps1 for a in np.linspace(0.01, 0.99, 30)]
        assert np.all(np.diff(eps1) <= 0)

    def test_blind_deterministic_only(self):
        for a in (0.1, 0.5, 0.9):
            _, ep = np_threshold_search(BLIND, TypeComposition((3, 3)), a)
            assert ep.eps0 == 0.0 and ep.eps1 == pytest.approx(1.0, abs=1e-15)

    def test_alpha_domain(self):
        with pytest.raises(DomainError):
            np_threshold_search(BSC, TypeComposition((2, 2)), 1.0)

    def test_theory(self):
        assert np_theory_exponent(BSC, TypeComposition((7, 7))) == pytest.approx(0.1163217565860046)
