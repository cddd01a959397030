import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from regenset import idprocess, stats
from regenset.errors import ValidationError
from regenset.idprocess import LawSpec
from regenset.randkit import RngStream


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.9])
def test_wandering_weight_small_n(beta):
    assert idprocess.wandering_weight(0, beta) == 1.0
    assert idprocess.wandering_weight(1, beta) == 2.0
    n = 5000
    ref = 2.0 + math.fsum((k - 1.0) ** -beta for k in range(2, n + 1))
    assert idprocess.wandering_weight(n, beta) == pytest.approx(ref, rel=1e-15)


def test_wandering_weight_growth():
    r = idprocess.wandering_weight(10**6, 0.5) * 0.5 / 10**3
    assert r == pytest.approx(1.0, abs=0.02)


def test_table_read_only():
    t = idprocess.wandering_table(0.7, 10)
    with pytest.raises(ValueError):
        t[0] = 3.0


@given(st.floats(0.5, 3.0), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_G_transform(alpha, a, z0):
    spec = LawSpec(alpha, 0.7, a, z0)
    x = np.array([0.5, 1.0, 2.0]) * spec.cutoff
    g = idprocess.G_transform(x, spec)
    assert g[0] == pytest.approx(a ** (1 / alpha) * x[0] ** (-1 / alpha))
    assert g[1] == 0.0 and g[2] == 0.0
    # at the cutoff the weight equals z0
    assert idprocess.G_transform(0.999999999 * spec.cutoff, spec) == pytest.approx(z0, rel=1e-8)


def test_lawspec_validation():
    with pytest.raises(ValidationError):
        LawSpec(1.0, 1.2)
    with pytest.raises(ValidationError):
        LawSpec(1.0, 0.5, a=-1.0)


def test_first_entrance_exact_lattice_law():
    n, beta = 50, 0.7
    table = idprocess.wandering_table(beta, n)
    sigma = idprocess.sample_first_entrance(RngStream(2), n, beta, 100_000)
    assert sigma.min() >= 0 and sigma.max() <= n
    emp = np.array([np.mean(sigma <= k) for k in range(n + 1)])
    exact = table / table[n]
    assert np.max(np.abs(emp - exact)) < 4 * math.sqrt(0.25 / len(sigma))


def test_first_entrance_kernel_matches_searchsorted():
    table = idprocess.wandering_table(0.6, 200)
    for u in np.linspace(0, 0.999, 50):
        assert idprocess._first_entrance(table, 200, u) == np.searchsorted(table, u * table[200], side="right")


def test_visit_set_in_range():
    s = idprocess.sample_visit_set(RngStream(1), 300, 0.7)
    assert s.points[0] >= 0 and s.points[-1] <= 300 and np.all(np.diff(s.points) > 0)


@pytest.fixture(scope="module")
def path():
    return idprocess.simulate_process(RngStream(4), 400, LawSpec(1.0, 0.7), ell_trunc=32)


def test_path_recompute(path):
    assert np.allclose(path.recompute(), path.values, atol=1e-14)
    assert set(np.unique(path.epsilons)) <= {-1.0, 1.0}
    assert np.all(np.diff(path.gammas) > 0)


def test_sup_measure(path):
    assert idprocess.sup_measure_Mn(path, (0.0, 1.0)) == path.values[1:400].max()
    assert idprocess.sup_measure_Mn(path, (0.5, 1.0)) == path.values[201:400].max()
    with pytest.raises(ValidationError):
        idprocess.sup_measure_Mn(path, (0.5, 0.501))


def test_batch_matches_single_path():
    spec = LawSpec(1.0, 0.7)
    out = idprocess.process_batch(spec, 400, 2, 4, ell_trunc=32, key=(3,), chunk=2)
    s = RngStream(4, (3, 0))
    for r in range(2):
        p = idprocess.simulate_process(s, 400, spec, 32)
        assert out["sups"][r, 0, 0] == pytest.approx(idprocess.sup_measure_Mn(p, (0.0, 1.0)), rel=1e-13)
        assert out["x0"][r] == pytest.approx(p.values[0], abs=1e-13)


def test_scale_coupling_exact():
    assert idprocess.scale_coupling_check(LawSpec(1.5, 0.7, 1.0, 0.5), 300, 200, 3) <= 1e-12


@pytest.mark.parametrize("spec", [LawSpec(1.0, 0.7), LawSpec(1.5, 0.6, 2.0, 0.5)])
def test_marginal_law_compound_poisson(spec):
    # X_0 is a compound Poisson sum: Poisson(2 a z0**-alpha) signed Pareto(alpha, z0) jumps
    out = idprocess.marginal_tail(spec, 20.0, 40_000, 1)
    rng = np.random.default_rng(0)
    m = 40_000
    counts = rng.poisson(2 * spec.cutoff, m)
    jumps = spec.z0 * rng.random(counts.sum()) ** (-1 / spec.alpha) * rng.choice([-1.0, 1.0], counts.sum())
    ref = np.bincount(np.repeat(np.arange(m), counts), weights=jumps, minlength=m)
    assert stats.ks_two_sample(out["x0"], ref) < stats.ks_critical(m, m, level=0.001)


def test_marginal_tail_ratio():
    out = idprocess.marginal_tail(LawSpec(1.0, 0.7), 20.0, 100_000, 1)
    assert out["estimate"] == pytest.approx(1.0, abs=0.05)


def test_truncation_guard():
    with pytest.raises(ValidationError):
        idprocess.simulate_process(RngStream(0), 100, LawSpec(1.0, 0.8), ell_trunc=4)


def test_limit_experiment_small():
    rows = idprocess.limit_experiment(LawSpec(1.0, 0.7), [100, 1000], ((0.0, 1.0),), 1000, 3,
                                      resolution=1000)
    assert [r["n"] for r in rows] == [100, 1000]
    for r in rows:
        assert 0 <= r["ks"] <= 1 and abs(r["ks"] - r["ks_doubled"]) < 0.02


def test_first_visit_experiment():
    out = idprocess.first_visit_experiment(1000, 0.7, 20_000, 5)
    assert out["p_sigma0_exact"] == pytest.approx(1 / idprocess.wandering_weight(1000, 0.7))
    assert abs(out["p_sigma0"] - out["p_sigma0_exact"]) < 4 * math.sqrt(out["p_sigma0_exact"] / 20_000)
    # the lattice atom at 0 alone puts the KS distance near P(sigma = 0)
    assert out["ks"] >= 0.9 * out["p_sigma0_exact"]


def test_simultaneous_visit_runs():
    out = idprocess.simultaneous_visit_experiment(500, 0.8, 200, 2)
    assert out["accepted"] == 200 and out["attempted"] >= 200
