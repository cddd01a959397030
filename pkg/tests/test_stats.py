import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps

from regenset import stats
from regenset.errors import ValidationError


def test_ecdf_right_continuous():
    d = stats.ecdf([3.0, 1.0, 2.0, 2.0])
    assert d(0.5) == 0.0
    assert d(1.0) == 0.25
    assert d(2.0) == 0.75
    assert d(10) == 1.0
    assert d.survival(2.0) == pytest.approx(0.25)


@pytest.mark.parametrize("bad", [[], [1.0, float("nan")]])
def test_ecdf_rejects(bad):
    with pytest.raises(ValidationError):
        stats.ecdf(bad)


def test_ks_one_sample_matches_scipy():
    x = np.random.default_rng(0).normal(size=3000)
    ours = stats.ks_one_sample(x, sps.norm.cdf)
    assert ours == pytest.approx(sps.kstest(x, sps.norm.cdf).statistic, abs=1e-14)


@given(st.integers(5, 200), st.integers(5, 200), st.integers(0, 10_000))
def test_ks_two_sample_matches_scipy(m, n, seed):
    rng = np.random.default_rng(seed)
    a = rng.exponential(size=m)
    b = rng.exponential(size=n) * 1.1
    ref = sps.ks_2samp(a, b, method="asymp").statistic
    assert stats.ks_two_sample(a, b) == pytest.approx(ref, abs=1e-12)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_ks_two_sample_self_is_zero(xs):
    assert stats.ks_two_sample(xs, list(reversed(xs))) == 0.0


def test_ks_rejects_invalid_cdf():
    with pytest.raises(ValidationError):
        stats.ks_one_sample([0.1, 0.2], lambda x: 2.0 * np.ones_like(x))


def test_ks_critical_asymptotic():
    assert stats.ks_critical(10_000, level=0.01) == pytest.approx(1.6276236 / 100, rel=1e-6)
    assert stats.ks_critical(100, 100, level=0.05) == pytest.approx(1.3581015 * math.sqrt(2 / 100), rel=1e-6)
    for lvl, c in stats.KS_C.items():
        assert sps.kstwobign.sf(c) == pytest.approx(lvl, rel=1e-4)


def test_wilson_covers_and_orders():
    lo, hi = stats.wilson_interval(30, 1000)
    assert lo < 0.03 < hi
    assert stats.wilson_interval(0, 50)[0] == 0.0
    assert stats.wilson_interval(50, 50)[1] == pytest.approx(1.0)


def test_tail_ratio_pareto():
    x = np.random.default_rng(3).pareto(1.5, 200_000) + 1.0
    tr = stats.tail_ratio(x, 1.5, 10.0)
    assert tr.ci_low <= 1.0 <= tr.ci_high
