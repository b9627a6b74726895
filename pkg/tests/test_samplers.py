import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcasampler import exact as E
from pcasampler import model as M
from pcasampler.errors import InvalidArgumentError, InvalidStateError
from pcasampler.samplers import (
    RngPolicy,
    coupled_pca_step,
    estimate_coalescence,
    gibbs_step,
    max_threads,
    one_step_contraction,
    pca_flip_probability,
    pca_single_site_probability,
    pca_step,
    reflected_pca_step,
    run_chain,
)
from pcasampler.samplers import core


def q_of(delta):
    return M.InertiaParameter.from_delta(delta).q


def spins(n, seed):
    return np.random.default_rng(seed).choice(np.array([-1, 1], dtype=np.int8), size=n)


# -- single-site kernel ------------------------------------------------------------------


def test_single_site_zero_couplings():
    zero = M.from_edges(3, [])
    d = 0.2
    assert pca_flip_probability(zero, [1, 1, -1], 0, q_of(d)) == pytest.approx(d / (1 + d))
    assert pca_single_site_probability(zero, [1, 1, -1], 2, 0.0) == pytest.approx(0.5)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10**6), st.floats(0.0, 4.0), st.integers(0, 7))
def test_single_site_forms_agree(n, seed, q, i):
    i = i % n
    m = M.random_model(n, 0.8, seed=seed)
    s = spins(n, seed)
    h = M.local_field(m, s, i)
    direct = math.exp(-h + q * s[i]) / (2 * math.cosh(h - q * s[i]))
    d = math.exp(-2 * q)
    ph = M.phi(m, s, i)
    flip = d * ph / (1 + d * ph)
    p_up = pca_single_site_probability(m, s, i, q)
    assert p_up == pytest.approx(direct, abs=1e-12)
    assert pca_flip_probability(m, s, i, q) == pytest.approx(flip, abs=1e-12)
    assert (1 - p_up if s[i] > 0 else p_up) == pytest.approx(flip, abs=1e-12)


# -- PCA step --------------------------------------------------------------------------------


def test_pca_step_matches_threshold_rule_on_old_state():
    m = M.random_model(9, 0.7, seed=3)
    q = 0.4
    s = spins(9, 3)
    rng = RngPolicy(11)
    u = rng.uniforms(5, 9)[0]
    p_minus = np.array([1 - pca_single_site_probability(m, s, i, q) for i in range(9)])
    expected = np.where(u <= p_minus, -1, 1)
    res = pca_step(m, q, s, rng, 5)
    assert np.array_equal(res.config, expected)
    assert res.flips == int(np.count_nonzero(expected != s))
    # pure in its inputs
    assert np.array_equal(pca_step(m, q, s, rng, 5).config, res.config)


def test_pca_step_tiny_delta_freezes():
    m = M.random_model(30, 0.5, seed=1)
    s = spins(30, 1)
    q = q_of(1e-12)
    for t in range(50):
        assert np.array_equal(pca_step(m, q, s, RngPolicy(t), t).config, s)


def test_flip_count_identity_at_fixed_state():
    m = M.random_model(12, 0.6, seed=2)
    s = spins(12, 2)
    q = q_of(0.3)
    expect = sum(pca_flip_probability(m, s, i, q) for i in range(12))
    flips = np.array([pca_step(m, q, s, RngPolicy(4), t).flips for t in range(20000)])
    se = flips.std() / math.sqrt(flips.size)
    assert abs(flips.mean() - expect) < 4 * se


def test_transition_frequencies_match_matrix_row():
    m = M.random_model(4, 0.6, seed=6)
    q = 0.3
    s = M.index_to_config(5, 4)
    P = E.pca_transition_matrix(m, q)
    counts = np.zeros(16)
    rng = RngPolicy(8)
    for t in range(40000):
        counts[M.config_to_index(pca_step(m, q, s, rng, t).config)] += 1
    expected = P[5] * counts.sum()
    chi2 = ((counts - expected) ** 2 / expected).sum()
    # 15 degrees of freedom; 99.9% quantile is about 37.7
    assert chi2 < 37.7


# -- Gibbs ---------------------------------------------------------------------------------------


def test_gibbs_zero_couplings_is_fair():
    zero = M.from_edges(5, [])
    s = M.all_up(5)
    ups = 0
    for t in range(20000):
        res = gibbs_step(zero, s, RngPolicy(3), t)
        assert np.count_nonzero(res.config != s) <= 1
        ups += int(res.config.sum() == 5)
    assert abs(ups / 20000 - 0.5) < 4 * math.sqrt(0.25 / 20000)


def test_gibbs_single_site_is_coin():
    one = M.from_edges(1, [])
    stats = run_chain(one, "gibbs", math.inf, 40000, 0, RngPolicy(2), record_energy=False)
    p = (stats.magnetization > 0).mean()
    assert abs(p - 0.5) < 4 * math.sqrt(0.25 / 40000)


@pytest.mark.parametrize("sampler", ["pca", "gibbs"])
def test_stationary_law_small_lattice(sampler):
    m = M.lattice2d(2, 0.3)
    q = q_of(0.2)
    target = E.enumerate_pca(m, q) if sampler == "pca" else E.enumerate_gibbs(m)
    stats = run_chain(m, sampler, q, 1_000_000, 1000, RngPolicy(17), histogram=True,
                      record_energy=False)
    assert E.tv_distance(stats.empirical_distribution(), target) < 0.01


# -- reflected -----------------------------------------------------------------------------------


def test_reflected_step_rules():
    m = M.random_model(6, 0.4, seed=4)
    q = 0.2
    rng = RngPolicy(21)
    s = M.all_up(6)
    seen_zero = seen_reflected = False
    for t in range(400):
        cand = pca_step(m, q, s, rng, t).config
        out = reflected_pca_step(m, q, s, rng, t).config
        assert out.sum() >= 0
        if cand.sum() >= 0:
            assert np.array_equal(out, cand)
            seen_zero |= cand.sum() == 0
        else:
            assert np.array_equal(out, -cand)
            seen_reflected = True
        s = out
    assert seen_zero and seen_reflected
    with pytest.raises(InvalidStateError):
        reflected_pca_step(m, q, M.all_down(6), rng, 0)


# -- coupling -------------------------------------------------------------------------------------


def test_coupled_identical_inputs_stay_identical():
    m = M.random_model(10, 0.5, seed=1)
    s = spins(10, 1)
    for t in range(20):
        res = coupled_pca_step(m, 0.3, s, s, RngPolicy(1), t)
        assert np.array_equal(res.upper, res.lower) and res.n_diff == 0
        s = res.upper


def test_coupled_marginals_are_pca_steps():
    m = M.random_model(10, 0.5, seed=2)
    up, lo = M.all_up(10), M.all_down(10)
    res = coupled_pca_step(m, 0.3, up, lo, RngPolicy(4), 9)
    assert np.array_equal(res.upper, pca_step(m, 0.3, up, RngPolicy(4), 9).config)
    assert np.array_equal(res.lower, pca_step(m, 0.3, lo, RngPolicy(4), 9).config)


def test_coupled_order_precondition():
    m = M.random_model(4, 0.5, seed=2)
    with pytest.raises(InvalidArgumentError):
        coupled_pca_step(m, 0.3, [1, -1, 1, 1], [-1, 1, 1, 1], RngPolicy(0), 0)


def test_zero_coupling_contraction():
    d = 0.1
    zero = M.from_edges(2000, [])
    ratios = one_step_contraction(zero, q_of(d), 200, RngPolicy(5))
    se = ratios.std() / math.sqrt(ratios.size)
    assert abs(ratios.mean() - (1 - d) / (1 + d)) < 4 * se + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10**6), st.floats(0.0, 3.0))
def test_monotone_coupling_preserves_order(n, seed, q):
    m = M.random_model(n, 0.5, density=0.5, ferromagnetic=True, seed=seed)
    rng = np.random.default_rng(seed)
    lo = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    up = np.where(rng.random(n) < 0.5, 1, lo).astype(np.int8)
    for t in range(25):
        res = coupled_pca_step(m, q, up, lo, RngPolicy(seed), t)
        assert np.all(res.upper >= res.lower)
        up, lo = res.upper, res.lower


def test_coalescence_single_site_is_geometric():
    d = 0.3
    rep = estimate_coalescence(M.from_edges(1, []), q_of(d), 10_000, 4000, RngPolicy(3))
    p = 2 * d / (1 + d)
    assert rep.censored == 0
    assert rep.taus.min() >= 1
    se = math.sqrt((1 - p) / p**2 / rep.taus.size)
    assert abs(rep.taus.mean() - 1 / p) < 4 * se


def test_coalescence_already_coalesced():
    m = M.lattice2d(3, 0.1)
    s = M.all_up(9)
    rep = estimate_coalescence(m, 0.5, 100, 3, RngPolicy(0), upper=s, lower=s)
    assert np.all(rep.taus == 0)


def test_coalescence_reports():
    m = M.random_model(8, 0.1, seed=1)
    rep = estimate_coalescence(m, q_of(0.2), 5000, 10, RngPolicy(0))
    assert not rep.ferromagnetic
    assert rep.warnings
    ferro = M.lattice2d(3, 0.05, periodic=True)
    rep = estimate_coalescence(ferro, q_of(0.05), 50_000, 500, RngPolicy(0))
    assert rep.warnings == []
    # twice the largest row sum
    assert rep.bound_J == pytest.approx(0.4)
    ts, surv = rep.survival()
    assert surv[0] == 1.0 and np.all(np.diff(surv) <= 0)
    # compare only where the bound is resolvable with 500 trials
    bound = rep.tail_bound(ts)
    ok = bound > 10 / 500
    assert np.all(surv[ok] <= bound[ok])
    censored = estimate_coalescence(ferro, q_of(0.001), 3, 5, RngPolicy(0))
    assert censored.censored == 5 and math.isinf(censored.median)


# -- chains ------------------------------------------------------------------------------------


def test_run_chain_empty_and_burn_in():
    m = M.lattice2d(3, 0.1)
    init = spins(9, 4)
    empty = run_chain(m, "pca", 0.5, 0, 0, RngPolicy(0), initial=init)
    assert len(empty) == 0 and np.array_equal(empty.final, init)
    stats = run_chain(m, "pca", 0.5, 100, 40, RngPolicy(0))
    assert len(stats) == 60 and stats.step[0] == 40
    assert np.all((stats.flips >= 0) & (stats.flips <= 9))
    assert np.all(np.abs(stats.magnetization) <= 1)
    with pytest.raises(InvalidArgumentError):
        run_chain(m, "pca", 0.5, 10, 20, RngPolicy(0))
    with pytest.raises(InvalidArgumentError):
        run_chain(m, "metropolis", 0.5, 10, 0, RngPolicy(0))


def test_run_chain_is_a_sequence_of_steps():
    m = M.random_model(7, 0.5, seed=5)
    q = 0.4
    rng = RngPolicy(13)
    s = M.all_up(7)
    stats = run_chain(m, "pca", q, 30, 0, rng)
    for t in range(30):
        res = pca_step(m, q, s, rng, t)
        s = res.config
        assert stats.flips[t] == res.flips
        assert stats.magnetization[t] == pytest.approx(M.magnetization(s))
        assert stats.energy[t] == pytest.approx(M.hamiltonian(m, s))
    assert np.array_equal(stats.final, s)


def test_run_chain_gibbs_is_a_sequence_of_steps():
    m = M.random_model(6, 0.5, seed=5)
    rng = RngPolicy(3)
    s = M.all_up(6)
    stats = run_chain(m, "gibbs", math.inf, 50, 0, rng)
    for t in range(50):
        s = gibbs_step(m, s, rng, t).config
    assert np.array_equal(stats.final, s)


def test_chunking_does_not_change_results(monkeypatch):
    m = M.lattice2d(4, 0.2)
    a = run_chain(m, "pca", 0.5, 500, 37, RngPolicy(9))
    monkeypatch.setattr(core, "_CHUNK_UNIFORMS", 16 * 7)
    b = run_chain(m, "pca", 0.5, 500, 37, RngPolicy(9))
    assert np.array_equal(a.flips, b.flips)
    assert np.array_equal(a.energy, b.energy)
    assert np.array_equal(a.final, b.final)


def test_same_seed_same_stats():
    m = M.lattice2d(4, 0.2)
    a = run_chain(m, "reflected-pca", 0.5, 300, 0, RngPolicy(9))
    b = run_chain(m, "reflected-pca", 0.5, 300, 0, RngPolicy(9))
    assert np.array_equal(a.magnetization, b.magnetization)
    assert np.all(a.magnetization >= 0)


def test_flip_rate_zero_couplings():
    d = 0.1
    stats = run_chain(M.from_edges(500, []), "pca", q_of(d), 2000, 0, RngPolicy(1),
                      record_energy=False)
    se = math.sqrt(d / (1 + d) * (1 - d / (1 + d)) / (500 * 2000))
    assert abs(stats.flip_rate - d / (1 + d)) < 4 * se


def test_observers_see_every_kept_step():
    seen = []
    run_chain(M.lattice2d(3, 0.1), "pca", 0.5, 50, 10, RngPolicy(0),
              observers=[lambda part: seen.extend(part.step.tolist())])
    assert seen == list(range(10, 50))


def test_parallel_kernel_is_bit_identical(monkeypatch):
    if max_threads() < 2:
        pytest.skip("needs at least two numba threads")
    monkeypatch.setattr(core, "PARALLEL_MIN_SITES", 0)
    m = M.lattice2d(12, 0.3, periodic=True)
    a = run_chain(m, "pca", 0.4, 200, 0, RngPolicy(4), threads=1)
    b = run_chain(m, "pca", 0.4, 200, 0, RngPolicy(4), threads=2)
    assert np.array_equal(a.flips, b.flips)
    assert np.array_equal(a.energy, b.energy)
    assert np.array_equal(a.final, b.final)
    ra = estimate_coalescence(m, 0.4, 10_000, 3, RngPolicy(1), threads=1)
    rb = estimate_coalescence(m, 0.4, 10_000, 3, RngPolicy(1), threads=2)
    assert np.array_equal(ra.taus, rb.taus)


def test_thread_bounds():
    with pytest.raises(InvalidArgumentError):
        run_chain(M.lattice2d(2, 0.1), "pca", 0.5, 1, 0, RngPolicy(0), threads=max_threads() + 1)
