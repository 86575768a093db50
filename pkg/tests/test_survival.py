import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eocalib import (
    Cohort,
    HorizonError,
    ValidationError,
    classify_subjects,
    empirical_cdf_known,
    greenwood_variance,
    kaplan_meier,
)

from conftest import draw_cohort, km_oracle


def cohort(pairs, t0):
    z = np.array([p[0] for p in pairs], dtype=np.float64)
    d = np.array([p[1] for p in pairs], dtype=np.int8)
    return Cohort(z, d, t0)


# A reusable hypothesis strategy: small cohorts with arbitrary censoring.
pair_lists = st.lists(
    st.tuples(
        st.floats(0.25, 20.0, allow_nan=False, allow_infinity=False),
        st.integers(0, 1),
    ),
    min_size=1,
    max_size=25,
)


class TestClassify:
    def test_all_known(self):
        part = classify_subjects(cohort([(2, 1), (12, 0), (12, 1)], 10.0))
        assert part.n_ks == 3 and part.n_uks == 0

    def test_censored_before_horizon_is_unknown(self):
        part = classify_subjects(cohort([(4, 0), (11, 0)], 10.0))
        assert part.n_uks == 1
        assert list(part.unknown) == [0]

    def test_no_dropout_cohort_has_no_unknowns(self, worked_cohort):
        part = classify_subjects(worked_cohort)
        assert part.n_uks == 0
        assert part.n_ks == worked_cohort.n == 10_000

    def test_boundaries_closed_both_sides(self):
        # An event exactly at the horizon is a case; a censoring exactly
        # at the horizon is a known non-case.
        part = classify_subjects(cohort([(10, 1), (10, 0)], 10.0))
        assert part.n_uks == 0

    @given(pair_lists)
    @settings(max_examples=150, deadline=None)
    def test_partition_exhaustive_and_exclusive(self, pairs):
        c = cohort(pairs, max(p[0] for p in pairs) / 2 or 0.1)
        part = classify_subjects(c)
        merged = np.sort(np.concatenate([part.known, part.unknown]))
        assert np.array_equal(merged, np.arange(c.n))
        assert part.n_ks + part.n_uks == c.n
        for i in part.unknown:
            assert c.delta[i] == 0 and c.z[i] < c.t0
        for i in part.known:
            assert (c.delta[i] == 1 and c.z[i] <= c.t0) or c.z[i] >= c.t0


class TestKaplanMeier:
    def test_no_censoring_before_horizon_is_event_fraction(self):
        km = kaplan_meier(cohort([(2, 1), (5, 1), (12, 0), (12, 0)], 10.0))
        assert km.incidence == pytest.approx(0.5, abs=1e-15)

    def test_hand_product(self):
        km = kaplan_meier(cohort([(1, 1), (2, 0), (3, 1), (4, 0), (5, 1)], 4.0))
        assert km.incidence == pytest.approx(7 / 15, abs=1e-12)
        assert km.incidence + km.survival == 1.0

    def test_consistency_on_large_uniform_draw(self):
        rng = np.random.default_rng(2024)
        c = draw_cohort(rng, 20_000, 100.0, 95.0, 10.0)
        km = kaplan_meier(c)
        assert abs(km.incidence - 0.1) < 0.01

    def test_events_precede_censorings_at_ties(self):
        km = kaplan_meier(cohort([(5, 0), (5, 1)], 5.0))
        assert km.incidence == pytest.approx(0.5)

    def test_horizon_beyond_follow_up_rejected(self):
        c = cohort([(1, 1), (2, 0)], 2.0)
        with pytest.raises(HorizonError):
            kaplan_meier(c, 3.0)
        with pytest.raises(HorizonError):
            kaplan_meier(c, 0.0)

    def test_degenerate_when_survival_hits_zero(self):
        km = kaplan_meier(cohort([(1, 1)], 1.0))
        assert km.degenerate
        assert km.incidence == 1.0
        assert math.isnan(km.greenwood_var)

    @given(pair_lists, st.floats(0.05, 1.0))
    @settings(max_examples=150, deadline=None)
    def test_matches_brute_force_oracle(self, pairs, frac):
        t0 = max(p[0] for p in pairs) * frac
        if t0 <= 0:
            t0 = min(p[0] for p in pairs)
        c = cohort(pairs, t0)
        km = kaplan_meier(c)
        surv, var = km_oracle(c.z, c.delta, c.t0)
        assert km.survival == pytest.approx(surv, abs=1e-12)
        if math.isnan(var):
            assert km.degenerate
        else:
            assert km.greenwood_var == pytest.approx(var, abs=1e-12)

    @given(pair_lists, st.randoms(use_true_random=False))
    @settings(max_examples=100, deadline=None)
    def test_permutation_invariance(self, pairs, rand):
        t0 = max(p[0] for p in pairs)
        km_a = kaplan_meier(cohort(pairs, t0))
        shuffled = list(pairs)
        rand.shuffle(shuffled)
        km_b = kaplan_meier(cohort(shuffled, t0))
        assert km_a.survival == km_b.survival
        assert km_a.greenwood_var == km_b.greenwood_var or (
            math.isnan(km_a.greenwood_var) and math.isnan(km_b.greenwood_var)
        )


class TestGreenwood:
    def test_empty_sum_when_no_events(self):
        km = kaplan_meier(cohort([(1, 0), (2, 0), (3, 0)], 2.5))
        assert km.greenwood_var == 0.0

    def test_hand_value(self):
        km = kaplan_meier(cohort([(1, 1), (2, 0), (3, 1), (4, 0), (5, 1)], 4.0))
        assert km.greenwood_var == pytest.approx((64 / 225) * (13 / 60), abs=1e-15)

    def test_binomial_reduction_without_censoring(self):
        rng = np.random.default_rng(7)
        c = draw_cohort(rng, 20_000, 100.0, None, 10.0)
        km = kaplan_meier(c)
        binom = km.survival * (1.0 - km.survival) / c.n
        assert km.greenwood_var == pytest.approx(binom, abs=1e-12)

    def test_path_reevaluation_at_earlier_horizon(self):
        c = cohort([(1, 1), (2, 0), (3, 1), (4, 0), (5, 1)], 5.0)
        km = kaplan_meier(c)
        assert greenwood_variance(km.path, 4.0) == pytest.approx(
            (64 / 225) * (13 / 60), abs=1e-15
        )
        assert greenwood_variance(km.path, 0.5) == 0.0


class TestEmpiricalCdf:
    def test_equals_km_without_censoring(self):
        c = cohort([(1, 1), (4, 1), (8, 0), (9, 1), (12, 0)], 8.0)
        # the z=8 censoring reaches the horizon, so status is known for all
        part = classify_subjects(c)
        km = kaplan_meier(c)
        assert empirical_cdf_known(part, c) == pytest.approx(km.incidence, abs=1e-15)

    def test_direct_count(self):
        c = cohort([(2, 1), (12, 0), (12, 0)], 10.0)
        part = classify_subjects(c)
        assert empirical_cdf_known(part, c) == pytest.approx(1 / 3)

    def test_horizon_at_last_follow_up_sees_only_cases(self):
        # with the latest record being a case, every known-status
        # subject is a case, so the known-status proportion saturates
        c = cohort([(1, 1), (2, 1), (3, 0), (4, 0), (5, 1)], 5.0)
        part = classify_subjects(c)
        assert part.n_ks == 3  # the three cases; censored subjects are unknown
        assert empirical_cdf_known(part, c) == 1.0

    @given(pair_lists)
    @settings(max_examples=100, deadline=None)
    def test_no_censoring_degeneracy(self, pairs):
        # force every record to satisfy the known-status rules
        t0 = min(p[0] for p in pairs)
        c = cohort(pairs, t0)
        part = classify_subjects(c)
        if part.n_uks == 0:
            expected = sum(1 for p in pairs if p[1] == 1 and p[0] <= t0) / len(pairs)
            assert empirical_cdf_known(part, c) == pytest.approx(expected, abs=1e-15)
            assert kaplan_meier(c).incidence == pytest.approx(expected, abs=1e-12)


class TestCohortValidation:
    def test_rejects_empty_and_bad_values(self):
        with pytest.raises(ValidationError):
            Cohort(np.array([]), np.array([], dtype=np.int8), 1.0)
        with pytest.raises(ValidationError):
            Cohort(np.array([0.0, 1.0]), np.array([1, 1], dtype=np.int8), 1.0)
        with pytest.raises(ValidationError):
            Cohort(np.array([1.0, 2.0]), np.array([1, 2], dtype=np.int8), 1.0)

    def test_rejects_horizon_beyond_max_follow_up(self):
        with pytest.raises(HorizonError):
            Cohort(np.array([1.0, 2.0]), np.array([1, 0], dtype=np.int8), 5.0)

    def test_from_subjects(self):
        from eocalib import Subject

        c = Cohort.from_subjects([Subject(1.0, 1), Subject(2.0, 0)], 2.0)
        assert c.n == 2 and c.covariates is None
