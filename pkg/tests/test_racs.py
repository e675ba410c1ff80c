import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernshap import (
    BernoulliGame,
    CommonDenominatorOverflow,
    RationalizedGame,
    RegimeLabel,
    classify_regime,
    common_denominator,
    correct_situation2,
    correct_situation3,
    error_bound_thm,
    error_decomposition,
    meanfield_racs,
    perturbation_bound,
    pick_delta,
    racs_corrected,
    rationalize,
    shapley_exact_symmetric,
    shapley_racs,
)
from conftest import bruteforce_shapley, random_rational_game


class TestCommonDenominator:
    def test_worked_example(self):
        assert common_denominator([Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]) == 6

    def test_reduction_first(self):
        fractions = [Fraction(3, 6), Fraction(2, 6), Fraction(1, 6)]
        assert [f.denominator for f in fractions] == [2, 3, 6]  # Fraction reduces
        assert common_denominator(fractions) == 6

    def test_single(self):
        assert common_denominator([Fraction(1, 2)]) == 2

    def test_overflow_reported(self):
        primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43]
        fracs = [Fraction(1, p**5) for p in primes]
        with pytest.raises(CommonDenominatorOverflow):
            common_denominator(fracs)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            common_denominator([Fraction(0)])


class TestRationalize:
    def test_worked_example(self, worked_example):
        rg = rationalize(worked_example)
        assert rg.counts == (3, 2, 1)
        assert rg.l == 6
        assert rg.m == 6
        assert rg.rounding_delta == 0

    def test_seven_player(self, seven_player_game):
        rg = rationalize(seven_player_game)
        assert rg.counts == (2, 5, 7, 3, 1, 9, 4)
        assert rg.l == 10

    def test_delta_mode_decimal_grid(self):
        # a rational close to 1/pi with an awkward denominator
        g = BernoulliGame.from_probs([Fraction(318309886, 10**9)])
        rg = rationalize(g, delta=0.005)
        # strict 1/(2P) < delta picks P = 1000; round(0.318309886 * 1000) = 318
        assert rg.counts == (159,)
        assert rg.l == 500
        assert rg.rounding_delta <= Fraction(5, 1000)

    def test_delta_mode_clamps_tiny_probabilities(self):
        g = BernoulliGame.from_probs([Fraction(1, 10**6), Fraction(1, 2)])
        rg = rationalize(g, delta=0.01)
        assert rg.clamped == (0,)
        assert rg.counts[0] == 1

    def test_delta_must_be_positive(self, worked_example):
        with pytest.raises(ValueError):
            rationalize(worked_example, delta=0.0)


class TestShapleyRacs:
    def test_worked_example(self, worked_example):
        est = shapley_racs(rationalize(worked_example))
        assert list(est.values) == pytest.approx([0.332551, 0.221701, 0.110850], abs=5e-7)
        # published rounding: 0.3326 / 0.2217 / 0.1108
        assert list(est.values) == pytest.approx([0.3326, 0.2217, 0.1108], abs=5e-4)

    def test_unit_counts_exact(self):
        g = BernoulliGame.from_probs([Fraction(1, 2)] * 6)
        est = shapley_racs(rationalize(g), exact=True)
        assert est.values == (Fraction(21, 128),) * 6

    def test_seven_player_factor(self, seven_player_game):
        est = shapley_racs(rationalize(seven_player_game))
        assert est.meta["factor"] == pytest.approx(0.961848, abs=5e-7)
        assert est.values[0] == pytest.approx(0.062055, abs=5e-7)

    def test_all_zero_flagged(self):
        rg = RationalizedGame((0, 0), 4)
        est = shapley_racs(rg)
        assert est.values == (0.0, 0.0)
        assert est.meta["all_zero"]

    def test_proportionality(self):
        rng = random.Random(3)
        for _ in range(20):
            g = random_rational_game(rng, rng.randint(2, 10))
            rg = rationalize(g)
            if rg.m == 0:
                continue
            est = shapley_racs(rg)
            factor = est.total()
            for i in range(rg.n):
                assert est.values[i] * rg.m == pytest.approx(
                    int(rg.counts[i]) * factor, rel=1e-12, abs=1e-15
                )

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(
            st.fractions(min_value=0, max_value=1, max_denominator=24),
            min_size=1,
            max_size=12,
        ).map(BernoulliGame.from_probs)
    )
    def test_total_mass_identity(self, game):
        rg = rationalize(game)
        est = shapley_racs(rg)
        if rg.m == 0:
            assert est.total() == 0.0
        else:
            want = -math.expm1(rg.m * math.log1p(-1.0 / rg.l)) if rg.l > 1 else 1.0
            assert est.total() == pytest.approx(want, abs=1e-12)


class TestRegime:
    def test_sparse(self):
        assert classify_regime(RationalizedGame((5,), 100)).label is RegimeLabel.SPARSE

    def test_critical(self):
        rg = RationalizedGame((10, 10), 20)
        assert classify_regime(rg).label is RegimeLabel.CRITICAL
        assert classify_regime(rg).r == 1.0

    def test_dense(self, seven_player_game):
        regime = classify_regime(rationalize(seven_player_game))
        assert regime.label is RegimeLabel.DENSE
        assert regime.r == pytest.approx(3.1)


class TestSituation2:
    def test_zero(self):
        assert correct_situation2(0.0) == 0.0

    def test_rounded_input_trace(self):
        # 0.198576.. at full precision; published tables carry 0.198577 from
        # rounding 1 - e^-1 to five digits mid-formula
        assert correct_situation2(0.192454) == pytest.approx(0.198577, abs=2e-5)

    def test_critical_game_trace(self):
        g = BernoulliGame.from_probs(["0.3", "0.2", "0.25", "0.25"])
        est = shapley_racs(rationalize(g))
        assert est.values[0] == pytest.approx(0.192454, abs=5e-7)
        corrected = correct_situation2(est.values[0])
        assert corrected == pytest.approx(0.198576, abs=1e-6)
        truth = float(bruteforce_shapley(g.probs, 0))
        assert truth == pytest.approx(0.210313, abs=5e-7)
        assert abs(corrected - truth) < abs(est.values[0] - truth)

    def test_fixed_point_region(self):
        x = (1 - math.exp(-1)) * (1 - 2 / math.e)
        assert correct_situation2(x) == pytest.approx(
            (1 - 2 / math.e) * (0.5 + 0.5 * (1 - 2 / math.e)), abs=1e-12
        )


class TestSituation3:
    def test_table_six_normalization(self, bimodal_game):
        est = correct_situation3(bimodal_game, target="one")
        assert list(est.values) == pytest.approx([0.0164, 0.4918, 0.4918], abs=5e-4)
        assert est.total() == pytest.approx(1.0, abs=1e-12)

    def test_te_target(self, bimodal_game):
        est = correct_situation3(bimodal_game, target="te")
        # raw scores (1/60, 1/2, 1/2) scaled by T(E)/(61/60) with T(E) = 7981/8000
        want = [float(Fraction(1, 60) * Fraction(7981, 8000) * Fraction(60, 61))]
        want += [float(Fraction(1, 2) * Fraction(7981, 8000) * Fraction(60, 61))] * 2
        assert list(est.values) == pytest.approx(want, abs=1e-12)
        assert est.total() == pytest.approx(float(Fraction(7981, 8000)), abs=1e-12)

    def test_all_high_uniform(self):
        g = BernoulliGame.from_probs(["0.9"] * 4)
        est = correct_situation3(g, target="te")
        want = g.total_capacity() / 4
        assert list(est.values) == pytest.approx([want] * 4, abs=1e-12)

    def test_dense_without_high_players_falls_back(self):
        g = BernoulliGame.from_probs(["0.5"] * 7)  # r = 3.5, no p >= 0.8
        est = correct_situation3(g)
        base = shapley_racs(rationalize(g))
        assert est.values == base.values
        assert "warning" in est.meta


class TestMeanfield:
    def test_worked_example(self, worked_example):
        est = meanfield_racs(rationalize(worked_example))
        assert est.values[0] == pytest.approx(0.5 * (1 - math.exp(-1)), abs=1e-12)
        assert est.values[0] == pytest.approx(0.316060, abs=5e-7)

    def test_small_single_player(self):
        g = BernoulliGame.from_probs([Fraction(1, 1000)])
        est = meanfield_racs(rationalize(g))
        assert est.values[0] == pytest.approx(0.0009995, abs=5e-8)

    def test_total_identity(self, seven_player_game):
        rg = rationalize(seven_player_game)
        est = meanfield_racs(rg)
        assert est.total() == pytest.approx(-math.expm1(-rg.m / rg.l), abs=1e-12)

    def test_validity_range(self):
        rg = RationalizedGame((2, 2), 2)  # m = 4 > l^2 = 4? no: equal is allowed
        meanfield_racs(rg)
        bad = RationalizedGame((2, 2, 1), 2)  # m = 5 > 4
        with pytest.raises(ValueError, match="l\\^2"):
            meanfield_racs(bad)


class TestErrorReports:
    def test_thm_bound_seven_player(self, seven_player_game):
        report = error_bound_thm(rationalize(seven_player_game), 0)
        assert report.thm_bound == pytest.approx(0.31, abs=1e-12)
        assert report.weight_discrepancy == 0.0
        assert report.residual == pytest.approx(2 * 31**2 / 1000, abs=1e-12)

    def test_thm_bound_small(self):
        rg = RationalizedGame((1,) * 6, 2)
        assert error_bound_thm(rg, 0).thm_bound == pytest.approx(0.75, abs=1e-12)

    def test_e1_examples(self):
        assert error_decomposition(RationalizedGame((1,), 2), 0).e1 == pytest.approx(
            0.0, abs=1e-15
        )
        assert error_decomposition(RationalizedGame((3,), 5), 0).e1 == pytest.approx(
            0.112, abs=1e-12
        )

    def test_e2_worked_example(self, worked_example):
        report = error_decomposition(rationalize(worked_example), 0)
        assert report.e2 == pytest.approx(0.092968, abs=5e-7)

    def test_single_player_uses_zero_mean(self):
        report = error_decomposition(RationalizedGame((1,), 4), 0)
        assert math.isfinite(report.e2)


class TestPerturbation:
    def test_values(self):
        assert perturbation_bound(0.01, 7) == pytest.approx(0.04)
        assert perturbation_bound(0.0, 11) == 0.0
        assert pick_delta(0.02, 9) == pytest.approx(0.004)

    def test_empirical_bound(self):
        rng = random.Random(12)
        for _ in range(30):
            n = rng.randint(1, 10)
            g = random_rational_game(rng, n)
            for delta in (0.01, 0.001):
                bound = perturbation_bound(delta, n)
                grid = Fraction(repr(delta))
                shifted = []
                for p in g.probs:
                    eps = Fraction(rng.randint(-1000, 1000), 1000) * grid
                    shifted.append(min(max(p + eps, Fraction(0)), Fraction(1)))
                gq = BernoulliGame.from_probs(shifted)
                for i in range(n):
                    diff = abs(
                        shapley_exact_symmetric(g, i) - shapley_exact_symmetric(gq, i)
                    )
                    assert diff <= bound + 1e-12


class TestSparseAccuracy:
    def test_relative_error_small_when_sum_small(self):
        rng = random.Random(31)
        for _ in range(40):
            n = rng.randint(1, 12)
            l = rng.randint(200, 1000)
            cap = max(1, int(0.1 * l) // n)
            counts = [rng.randint(1, cap) for _ in range(n)]
            g = BernoulliGame.from_probs([Fraction(c, l) for c in counts])
            est = shapley_racs(RationalizedGame(tuple(counts), l, source=g))
            for i in range(n):
                truth = shapley_exact_symmetric(g, i)
                assert abs(est.values[i] - truth) / truth <= 0.06


class TestRacsCorrected:
    def test_sparse_passthrough(self):
        g = BernoulliGame.from_probs([Fraction(1, 100)] * 3)
        corrected = racs_corrected(g)
        base = shapley_racs(rationalize(g))
        assert corrected.values == base.values
        assert corrected.meta["regime"] == "sparse"

    def test_critical_applies_situation2(self):
        g = BernoulliGame.from_probs(["0.3", "0.2", "0.25", "0.25"])
        corrected = racs_corrected(g)
        assert corrected.meta["regime"] == "critical"
        assert corrected.values[0] == pytest.approx(0.198576, abs=1e-6)

    def test_bimodal_three_player_is_critical_band(self, bimodal_game):
        # sum p = 1.95 sits just inside the critical band (threshold 2.0)
        corrected = racs_corrected(bimodal_game)
        assert corrected.meta["regime"] == "critical"

    def test_dense_applies_situation3(self):
        g = BernoulliGame.from_probs(["0.05", "0.95", "0.95", "0.95"])  # r = 2.9
        corrected = racs_corrected(g, target="one")
        assert corrected.meta["regime"] == "dense"
        assert corrected.meta["n_high"] == 3
        assert corrected.total() == pytest.approx(1.0, abs=1e-12)
