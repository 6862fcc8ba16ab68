import math
import random

import pytest
from scipy import stats as scipy_stats

from covacast import welch_t_test
from covacast.errors import SampleTooSmall
from covacast.stats import regularized_incomplete_beta, student_t_two_sided_p

# verified against scipy.stats.ttest_ind(equal_var=False)
FIXTURE_P = 0.2878641347266908


def test_fixture_a123_b234():
    res = welch_t_test([1, 2, 3], [2, 3, 4])
    assert res.t == pytest.approx(-1.2247, abs=1e-3)
    assert res.df == pytest.approx(4.0, abs=1e-9)
    assert res.p_two_sided == pytest.approx(FIXTURE_P, abs=1e-3)


def test_fixture_matches_scipy_oracle():
    ref = scipy_stats.ttest_ind([1, 2, 3], [2, 3, 4], equal_var=False)
    res = welch_t_test([1, 2, 3], [2, 3, 4])
    assert res.t == pytest.approx(ref.statistic, rel=1e-12)
    assert res.p_two_sided == pytest.approx(ref.pvalue, rel=1e-10)


def test_identical_samples():
    res = welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert res.t == 0.0
    assert res.p_two_sided == 1.0


def test_degenerate_constant_samples():
    equal = welch_t_test([2.0, 2.0], [2.0, 2.0])
    assert equal.degenerate and equal.p_two_sided == 1.0
    different = welch_t_test([2.0, 2.0], [3.0, 3.0])
    assert different.degenerate and different.p_two_sided == 0.0
    assert different.t == -math.inf


def test_one_constant_sample_is_not_degenerate():
    res = welch_t_test([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
    assert not res.degenerate
    assert 0.0 <= res.p_two_sided <= 1.0


def test_sample_too_small():
    with pytest.raises(SampleTooSmall):
        welch_t_test([1.0], [1.0, 2.0])


def test_symmetry_and_range_on_random_pairs():
    rng = random.Random(424)
    for _ in range(10_000):
        na, nb = rng.randint(2, 12), rng.randint(2, 12)
        a = [rng.gauss(rng.uniform(-5, 5), rng.uniform(0.1, 3)) for _ in range(na)]
        b = [rng.gauss(rng.uniform(-5, 5), rng.uniform(0.1, 3)) for _ in range(nb)]
        ab = welch_t_test(a, b)
        ba = welch_t_test(b, a)
        assert ab.t == pytest.approx(-ba.t, rel=1e-12, abs=1e-12)
        assert ab.df == pytest.approx(ba.df, rel=1e-12)
        assert ab.p_two_sided == pytest.approx(ba.p_two_sided, rel=1e-9, abs=1e-12)
        assert 0.0 <= ab.p_two_sided <= 1.0


def test_p_against_scipy_on_random_pairs():
    rng = random.Random(99)
    for _ in range(200):
        a = [rng.gauss(0, 1) for _ in range(rng.randint(2, 30))]
        b = [rng.gauss(0.5, 2) for _ in range(rng.randint(2, 30))]
        res = welch_t_test(a, b)
        ref = scipy_stats.ttest_ind(a, b, equal_var=False)
        assert res.t == pytest.approx(ref.statistic, rel=1e-10)
        assert res.p_two_sided == pytest.approx(ref.pvalue, rel=1e-8, abs=1e-14)


def test_p_monotone_decreasing_in_abs_t():
    for df in (1.5, 4.0, 10.0, 60.0):
        previous = 1.0
        for t in [0.1 * i for i in range(1, 80)]:
            p = student_t_two_sided_p(t, df)
            assert p <= previous + 1e-12
            previous = p


def test_incomplete_beta_against_scipy():
    from scipy.special import betainc

    rng = random.Random(5)
    for _ in range(500):
        a = rng.uniform(0.2, 20)
        b = rng.uniform(0.2, 20)
        x = rng.random()
        assert regularized_incomplete_beta(a, b, x) == pytest.approx(
            float(betainc(a, b, x)), rel=1e-9, abs=1e-12
        )
