import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from regenset import renewalkit
from regenset.errors import ValidationError
from regenset.randkit import RngStream, sample_return_time
from regenset.renewalkit import RenewalLaw


def naive_u(p, n):
    u = np.zeros(n + 1)
    u[0] = 1.0
    for m in range(1, n + 1):
        u[m] = sum(p[k] * u[m - k] for k in range(1, m + 1))
    return u


@given(st.floats(0.05, 0.95))
def test_masses_sum_to_one_minus_tail(beta):
    law = RenewalLaw(beta)
    p = law.masses(500)
    assert p[0] == 0 and p[1] == 0
    assert np.all(p[2:] > 0)
    assert p.sum() == pytest.approx(1 - 500**-beta, abs=1e-13)


@pytest.mark.parametrize("beta", [0.3, 0.6, 0.8])
def test_renewal_recursion_vs_naive(beta):
    law = RenewalLaw(beta)
    u = renewalkit.renewal_mass_function(law, 300)
    assert np.allclose(u, naive_u(law.masses(300), 300), rtol=0, atol=1e-14)


def test_renewal_mass_vs_simulation():
    beta, n = 0.7, 60
    u = renewalkit.renewal_mass_function(RenewalLaw(beta), n)
    hits = np.zeros(n + 1)
    reps = 20_000
    y = sample_return_time(RngStream(5), beta, reps * 40).reshape(reps, 40)
    s = np.cumsum(y, axis=1)
    for row in s:
        row = row[row <= n]
        hits[row] += 1
    hits[0] = reps
    assert np.max(np.abs(hits / reps - u)) < 4 * math.sqrt(0.25 / reps)


def test_intersection_renewal_conservation():
    u1 = renewalkit.renewal_mass_function(RenewalLaw(0.8), 5000)
    u2 = renewalkit.renewal_mass_function(RenewalLaw(0.7), 5000)
    u_star, p_star, F_bar = renewalkit.intersection_renewal([u1, u2])
    assert np.allclose(u_star, u1 * u2)
    assert np.all(p_star >= -1e-15)
    assert np.max(np.abs(np.cumsum(p_star) + F_bar - 1)) <= 1e-14
    # the renewal recursion run on p_star recovers u_star
    back = renewalkit._renewal_recursion(p_star, 5000)
    assert np.allclose(back, u_star, atol=1e-13)


def test_intersection_renewal_rejects():
    with pytest.raises(ValidationError):
        renewalkit.intersection_renewal([])
    with pytest.raises(ValidationError):
        renewalkit.intersection_renewal([np.ones(5), np.ones(6)])


@pytest.mark.parametrize("b1,b2,offset", [(0.75, 0.75, 0), (0.75, 0.75, 7), (0.8, 0.6, 3), (0.6, 0.9, 12)])
def test_first_common_vs_brute_force(b1, b2, offset):
    l1, l2 = RenewalLaw(b1), RenewalLaw(b2)
    H = 120
    F = renewalkit.first_simultaneous_renewal_cdf(l1, l2, offset, H)
    joint, first = renewalkit.brute_force_first_common(l1, l2, offset, H)
    assert np.allclose(np.cumsum(first), F, atol=1e-13)
    # the joint masses are u1(t + offset) u2(t)
    u1 = renewalkit.renewal_mass_function(l1, H + offset)
    u2 = renewalkit.renewal_mass_function(l2, H)
    assert np.allclose(joint, u1[offset:] * u2, atol=1e-13)


def test_first_common_vs_simulation():
    l = RenewalLaw(0.75)
    offset, H, reps = 10, 100, 20_000
    F = renewalkit.first_simultaneous_renewal_cdf(l, l, offset, H)
    gen = RngStream(6)
    first = np.full(reps, H + 1)
    for r in range(reps):
        s = gen.spawn(r)
        a = set((np.cumsum(sample_return_time(s, 0.75, 60)) - offset).tolist()) | {-offset}
        b = np.concatenate([[0], np.cumsum(sample_return_time(s, 0.75, 60))])
        for t in b:
            if t > H:
                break
            if t in a:
                first[r] = t
                break
    emp = np.array([np.mean(first <= t) for t in range(H + 1)])
    assert np.max(np.abs(emp - F)) < 4 * math.sqrt(0.25 / reps)


def test_first_common_convergence_trend():
    # the discrete law approaches the continuum one slowly as n grows
    from regenset.intersectlaw import intersection_cdf

    l = RenewalLaw(0.75)
    target = intersection_cdf(0.5, 0.3, 0.75, 0.75)
    gaps = []
    for n in (200, 2000, 20_000):
        F = renewalkit.first_simultaneous_renewal_cdf(l, l, int(0.3 * n), n // 2)
        gaps.append(target - F[n // 2])
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_doney_ratio_tail():
    r = renewalkit.doney_ratio(0.7, 100_000)
    assert r[0] == 0.0
    assert r[1] == pytest.approx(2 * (2**0.7 - 1))
    assert np.max(r[99:]) <= 1.01 * 0.7
    assert r[-1] == pytest.approx(0.7, abs=1e-4)


@pytest.mark.parametrize("beta", [0.3, 0.6])
def test_karamata_ratio_close(beta):
    u = renewalkit.renewal_mass_function(RenewalLaw(beta), 20_000)
    assert renewalkit.karamata_ratio(beta, u, 20_000) == pytest.approx(1.0, abs=0.01)


def test_karamata_ratio_slow_for_large_beta():
    # the relative error at beta = 0.8 shrinks by roughly 10**0.2 per decade
    u = renewalkit.renewal_mass_function(RenewalLaw(0.8), 100_000)
    e = [renewalkit.karamata_ratio(0.8, u, n) - 1 for n in (1000, 10_000, 100_000)]
    assert e[0] > e[1] > e[2] > 0
    assert 1.4 < e[0] / e[1] < 1.9 and 1.4 < e[1] / e[2] < 1.9


def test_tail_constant():
    assert renewalkit.intersection_tail_constant([0.75, 0.75]) == pytest.approx(
        (math.gamma(0.75) * math.gamma(0.25)) ** 2 / (math.gamma(0.5) ** 2))
    with pytest.raises(ValidationError):
        renewalkit.intersection_tail_constant([0.4, 0.5])
