import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcasampler import model as M
from pcasampler.errors import InvalidArgumentError, ParseError


def pair_model(J=0.5):
    return M.from_edges(2, [(0, 1, J)])


def random_spins(n, seed):
    rng = np.random.default_rng(seed)
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=n)


# -- generators --------------------------------------------------------------------


def test_lattice_open_two_by_two():
    m = M.lattice2d(2, 0.1, periodic=False)
    assert m.n == 4
    assert len(m.edges()) == 4
    assert m.sup_norm == pytest.approx(0.2)


def test_lattice_torus_has_constant_row_sums():
    for L in (2, 3, 4, 7):
        m = M.lattice2d(L, 0.1, periodic=True)
        assert np.allclose(m.row_abs_sums(), 0.4)


def test_lattice_torus_side_two_accumulates_wrap_bond():
    m = M.lattice2d(2, 0.1, periodic=True)
    assert m.coupling(0, 1) == pytest.approx(0.2)
    assert m.coupling(0, 3) == 0.0


def test_lattice_rectangular():
    m = M.lattice2d(4, 0.1, Ly=2)
    assert m.n == 8
    assert len(m.edges()) == 3 * 2 + 4
    # site (x, y) has index y * L + x
    assert m.coupling(0, 4) == pytest.approx(0.1)
    assert m.coupling(3, 4) == 0.0


def test_power_law():
    m = M.power_law_1d(3, 1.0)
    assert m.coupling(0, 2) == pytest.approx(0.25)
    assert m.coupling(0, 1) == pytest.approx(1.0)


def test_curie_weiss_conventions():
    half = M.curie_weiss(4, 1.0, "half")
    full = M.curie_weiss(4, 1.0, "full")
    off = ~np.eye(4, dtype=bool)
    assert np.allclose(half.dense()[off], 0.125)
    assert np.allclose(full.dense()[off], 0.25)
    assert np.all(np.diag(half.dense()) == 0)
    with pytest.raises(InvalidArgumentError):
        M.curie_weiss(4, 1.0, "third")


def test_build_model_dispatch():
    m = M.build_model("lattice2d", L=3, J0=0.2, periodic=True)
    assert m.n == 9
    m = M.build_model("power-law-1d", n=5, J1=0.3)
    assert m.coupling(1, 3) == pytest.approx(0.3 / 4)
    with pytest.raises(InvalidArgumentError):
        M.build_model("nope")
    with pytest.raises(InvalidArgumentError):
        M.build_model("lattice2d", L=3, J0=-1.0)


def test_from_edges_rejects_bad_input():
    with pytest.raises(InvalidArgumentError):
        M.from_edges(3, [(0, 0, 1.0)])
    with pytest.raises(InvalidArgumentError):
        M.from_edges(3, [(0, 5, 1.0)])
    with pytest.raises(InvalidArgumentError):
        M.from_edges(3, [(0, 1, 1.0), (1, 0, 2.0)])


# -- edge lists --------------------------------------------------------------------


def test_edge_list_roundtrip(tmp_path):
    m = M.random_model(7, 0.3, density=0.6, seed=3)
    path = tmp_path / "m.txt"
    M.save_edge_list(m, path)
    back = M.load_edge_list(path)
    assert back.n == 7
    assert np.array_equal(back.dense(), m.dense())


def test_edge_list_mirrors_and_reads_header(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("# n = 5\n# a comment\n0 1 0.5\n3 2 -0.25  # trailing\n")
    m = M.load_edge_list(path)
    assert m.n == 5
    assert m.coupling(1, 0) == 0.5
    assert m.coupling(2, 3) == -0.25


@pytest.mark.parametrize(
    "body, line",
    [
        ("0 1 0.5\n1 1 0.2\n", 2),
        ("0 1 0.5\n0 1\n", 2),
        ("0 1 0.5\n1 0 0.7\n", 2),
        ("# n = 2\n0 1 0.5\n1 2 nan\n", 3),
        ("0 x 1\n", 1),
    ],
)
def test_edge_list_errors_carry_line_numbers(tmp_path, body, line):
    path = tmp_path / "bad.txt"
    path.write_text(body)
    with pytest.raises(ParseError) as info:
        M.load_edge_list(path)
    assert info.value.line == line
    assert f":{line}:" in str(info.value)


# -- pointwise quantities -------------------------------------------------------------


def test_phi_examples():
    m = pair_model()
    assert M.phi(m, [1, 1], 0) == pytest.approx(math.exp(-1))
    assert M.phi(m, [1, -1], 0) == pytest.approx(math.exp(1))
    zero = M.from_edges(3, [])
    assert all(M.phi(zero, [1, -1, 1], i) == 1.0 for i in range(3))


def test_f_factor_examples():
    m = pair_model()
    assert M.f_factor(m, [1, 1], 0.1) == pytest.approx(2 * math.log(1 + 0.1 * math.exp(-1)))
    assert M.f_factor(m, [1, -1], 0.0) == 0.0
    zero = M.from_edges(4, [])
    assert M.f_factor(zero, [1, 1, -1, 1], 0.3) == pytest.approx(4 * math.log(1.3))


def test_pair_hamiltonian_examples():
    zero = M.from_edges(3, [])
    s = np.array([1, -1, 1])
    assert M.pair_hamiltonian(zero, s, s, 0.7) == 0.0
    assert M.pair_hamiltonian(zero, s, -s, 0.7) == pytest.approx(2 * 0.7 * 3)
    with pytest.raises(InvalidArgumentError):
        M.pair_hamiltonian(zero, s, s[:2], 0.7)


def test_magnetization_examples():
    assert M.magnetization(M.all_up(5)) == 1.0
    assert M.magnetization(M.all_down(5)) == -1.0
    assert M.magnetization([1, -1, -1, 1]) == 0.0


def test_hamiltonian_by_hand():
    m = pair_model(0.5)
    # both orderings of the pair are counted
    assert M.hamiltonian(m, [1, 1]) == pytest.approx(-1.0)
    assert M.hamiltonian(m, [1, -1]) == pytest.approx(1.0)


def test_configuration_validation():
    with pytest.raises(InvalidArgumentError):
        M.as_configuration([1, 0, -1])
    with pytest.raises(InvalidArgumentError):
        M.as_configuration([[1, -1]])
    with pytest.raises(InvalidArgumentError):
        M.local_fields(pair_model(), [1, 1, 1])


def test_inertia_parameter():
    assert M.InertiaParameter(1.0).delta == pytest.approx(math.exp(-2))
    assert M.InertiaParameter.from_delta(0.05).q == pytest.approx(-0.5 * math.log(0.05))
    assert math.isinf(M.InertiaParameter.from_delta(0.0).q)
    with pytest.raises(InvalidArgumentError):
        M.InertiaParameter(-0.1)
    with pytest.raises(InvalidArgumentError):
        M.InertiaParameter.from_delta(1.5)


def test_index_roundtrip():
    for idx in range(32):
        assert M.config_to_index(M.index_to_config(idx, 5)) == idx
    assert M.config_to_index([1, -1, 1]) == 0b101


def test_mean_field_matches_dense_fields():
    cw = M.curie_weiss(9, 0.8, "full")
    dense = M.from_dense(cw.dense())
    s = random_spins(9, 1)
    assert np.allclose(M.local_fields(cw, s), M.local_fields(dense, s))
    assert M.local_field(cw, s, 4) == pytest.approx(M.local_fields(dense, s)[4])


# -- properties ------------------------------------------------------------------------

models = st.builds(
    lambda n, scale, seed: M.random_model(n, scale, density=0.7, seed=seed),
    st.integers(2, 9),
    st.floats(0.01, 1.0),
    st.integers(0, 10_000),
)


@settings(max_examples=60, deadline=None)
@given(models, st.integers(0, 10_000))
def test_phi_inverts_under_own_flip(m, seed):
    s = random_spins(m.n, seed)
    for i in range(m.n):
        t = s.copy()
        t[i] = -t[i]
        assert M.phi(m, t, i) == pytest.approx(1.0 / M.phi(m, s, i), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(models, st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_f_factor_range(m, seed, delta):
    s = random_spins(m.n, seed)
    J = m.sup_norm
    lo = m.n * math.log1p(delta * math.exp(-2 * J))
    hi = m.n * math.log1p(delta * math.exp(2 * J))
    lf = M.f_factor(m, s, delta)
    assert lo - 1e-12 <= lf <= hi + 1e-12


@settings(max_examples=60, deadline=None)
@given(models, st.integers(0, 10_000))
def test_hamiltonian_global_flip_invariance(m, seed):
    s = random_spins(m.n, seed)
    assert M.hamiltonian(m, s) == pytest.approx(M.hamiltonian(m, -s), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(models, st.integers(0, 10_000), st.floats(0.0, 5.0))
def test_pair_hamiltonian_symmetry(m, seed, q):
    s = random_spins(m.n, seed)
    t = random_spins(m.n, seed + 1)
    assert M.pair_hamiltonian(m, s, t, q) == pytest.approx(M.pair_hamiltonian(m, t, s, q), abs=1e-12)


def test_pair_hamiltonian_symmetry_exhaustive():
    m = M.random_model(5, 0.4, seed=11)
    confs = [M.index_to_config(k, 5) for k in range(32)]
    for s in confs:
        for t in confs:
            assert M.pair_hamiltonian(m, s, t, 0.9) == pytest.approx(
                M.pair_hamiltonian(m, t, s, 0.9), abs=1e-12)


def test_model_arrays_are_read_only():
    m = M.lattice2d(3, 0.1)
    with pytest.raises(ValueError):
        m.data[0] = 1.0
