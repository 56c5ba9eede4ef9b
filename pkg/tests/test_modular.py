"""Finite-dimensional modular theory: norms, conjugation, passivity."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeilab import modular as M


def _sf(n: int, seed: int) -> M.StandardForm:
    rng = np.random.default_rng(seed)
    return M.StandardForm(M.random_density(n, rng))


# ---------------------------------------------------------------------------
# standard form basics
# ---------------------------------------------------------------------------

def test_standard_form_rejects_bad_densities():
    with pytest.raises(ValueError):
        M.StandardForm(np.array([[1.0, 0.5], [0.0, 0.0]]))  # not Hermitian
    with pytest.raises(ValueError):
        M.StandardForm(np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        M.StandardForm(np.diag([1.0, 0.0]).astype(complex))  # not faithful


def test_omega_is_unit_vector():
    sf = _sf(4, 0)
    assert abs(sf.norm(sf.omega) - 1.0) < 1e-12


def test_modular_conjugation_is_antilinear_involution():
    sf = _sf(3, 1)
    rng = np.random.default_rng(2)
    x = M.random_matrix(3, rng)
    assert np.allclose(sf.j(sf.j(x)), x)
    assert np.allclose(sf.j(1j * x), -1j * sf.j(x))


def test_tomita_operator_maps_a_omega_to_adjoint_omega():
    # S A Omega = A^* Omega for algebra elements acting on the left.
    sf = _sf(4, 3)
    rng = np.random.default_rng(4)
    a = M.random_matrix(4, rng)
    lhs = sf.s_op(a @ sf.omega)
    rhs = a.conj().T @ sf.omega
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_delta_fixes_omega_and_is_group_like():
    sf = _sf(4, 5)
    assert np.allclose(sf.delta_power(0.37, sf.omega), sf.omega, atol=1e-12)
    rng = np.random.default_rng(6)
    x = M.random_matrix(4, rng)
    two_step = sf.delta_power(0.2, sf.delta_power(0.3, x))
    assert np.allclose(two_step, sf.delta_power(0.5, x), atol=1e-10)


def test_gibbs_state_matches_boltzmann_weights():
    sf = M.gibbs_state(2.0, [0.0, 1.0, 3.0])
    w = np.exp(-2.0 * np.array([0.0, 1.0, 3.0]))
    assert np.allclose(np.diag(sf.rho).real, w / w.sum(), atol=1e-14)


# ---------------------------------------------------------------------------
# L^p norms
# ---------------------------------------------------------------------------

def test_lp_norm_rejects_unsupported_exponent():
    sf = _sf(2, 7)
    with pytest.raises(ValueError):
        M.lp_norm(sf, np.eye(2), 3)


def test_identity_has_unit_norms():
    sf = _sf(5, 8)
    for p in (2, 4, np.inf):
        assert abs(M.lp_norm(sf, np.eye(5), p) - 1.0) < 1e-12


def test_norm_chain_and_triangle_random_draws():
    rng = np.random.default_rng(9)
    for n in (2, 3, 4, 6):
        sf = _sf(n, 10 + n)
        for _ in range(50):
            a = M.random_matrix(n, rng)
            b = M.random_matrix(n, rng)
            n2 = M.lp_norm(sf, a, 2)
            n4 = M.lp_norm(sf, a, 4)
            ninf = M.lp_norm(sf, a, np.inf)
            assert n2 <= n4 + 1e-12
            assert n4 <= ninf + 1e-12
            for p in (2, 4, np.inf):
                slack = M.lp_norm(sf, a, p) + M.lp_norm(sf, b, p) - M.lp_norm(sf, a + b, p)
                assert slack >= -1e-10


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=5),
    seed=st.integers(min_value=0, max_value=10_000),
    scale=st.floats(min_value=1e-3, max_value=1e3),
)
def test_lp_norm_absolute_homogeneity(n, seed, scale):
    rng = np.random.default_rng(seed)
    sf = M.StandardForm(M.random_density(n, rng))
    a = M.random_matrix(n, rng)
    c = scale * np.exp(1j * rng.uniform(0, 2 * np.pi))
    for p in (2, 4, np.inf):
        assert M.lp_norm(sf, c * a, p) == pytest.approx(
            abs(c) * M.lp_norm(sf, a, p), rel=1e-9
        )


def test_positive_cone_route_reproduces_l4():
    rng = np.random.default_rng(11)
    for n in (2, 3, 4, 6):
        sf = _sf(n, 12 + n)
        for _ in range(20):
            a = M.random_matrix(n, rng)
            assert M.l4_via_positive_cone(sf, a) == pytest.approx(
                M.lp_norm(sf, a, 4), abs=1e-10
            )


def test_variational_l4_matches_closed_form():
    rng = np.random.default_rng(13)
    for n in (2, 3):
        sf = _sf(n, 14 + n)
        for _ in range(4):
            a = M.random_matrix(n, rng)
            val, details = M.araki_masuda_l4(sf, a, return_details=True)
            assert val == pytest.approx(details["closed_form"], rel=1e-5, abs=1e-7)


def test_commutant_bound_holds_and_is_saturable():
    rng = np.random.default_rng(15)
    sf = _sf(4, 16)
    for _ in range(40):
        a = M.random_matrix(4, rng)
        tp = M.random_matrix(4, rng)
        lhs, rhs, c_factor = M.commutant_l4_bound(sf, a, tp)
        assert lhs <= rhs + 1e-10
        assert c_factor >= 0.0
    # T' proportional to the identity saturates with c_factor = |c|.
    lhs, rhs, c_factor = M.commutant_l4_bound(sf, np.eye(4), 2.0 * np.eye(4))
    assert c_factor == pytest.approx(2.0, abs=1e-10)
    assert lhs == pytest.approx(rhs, rel=1e-10)


# ---------------------------------------------------------------------------
# modular Hamiltonian and passivity
# ---------------------------------------------------------------------------

def test_modular_hamiltonian_annihilates_omega():
    sf = _sf(4, 17)
    mh = M.ModularHamiltonian(sf, beta=1.7)
    assert np.linalg.norm(mh.apply(sf.omega)) < 1e-10


def test_modular_hamiltonian_eigenvalues_on_gibbs_matrix_units():
    # On a Gibbs state of a diagonal H, |i><j| is a K-eigenvector with
    # eigenvalue E_i - E_j.
    beta = 0.8
    energies = np.array([0.0, 0.4, 1.3])
    sf = M.gibbs_state(beta, energies)
    mh = M.ModularHamiltonian(sf, beta=beta)
    for i in range(3):
        for j in range(3):
            unit = np.zeros((3, 3), dtype=complex)
            unit[i, j] = 1.0
            assert np.allclose(
                mh.apply(unit), (energies[i] - energies[j]) * unit, atol=1e-12
            )


def test_passivity_hermitian_and_general_gap():
    rng = np.random.default_rng(18)
    for n in (2, 4):
        sf = _sf(n, 19 + n)
        for _ in range(50):
            h = M.random_matrix(n, rng, hermitian=True)
            form, _ = M.passivity_gap(sf, h, beta=1.3)
            assert form >= -1e-10
            a = M.random_matrix(n, rng)
            _, gap = M.passivity_gap(sf, a, beta=1.3)
            assert gap >= -1e-10


def test_property_suite_small_run_all_pass():
    rows = M.property_suite(ns=(2, 3), n_draws=40, lemma_draws=20, araki_draws=4)
    assert rows
    for row in rows:
        assert row["passed"], f"{row['check']} n={row['n']}: worst={row['worst']:.3g}"
