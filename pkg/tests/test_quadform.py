"""Quadratic boson forms: ground energies, assembly, Fock-space oracle."""
import numpy as np
import pytest

from qeilab.packets import PacketSpec
from qeilab.quadform import (
    ModeGrid,
    QuadraticBosonForm,
    assemble,
    commutator_bracket,
    exact_diag_oracle,
    ground_energy,
    purification_crosscheck,
)
from qeilab.quadrature import gauss_segment
from qeilab.thermal import ThermalParams


def _single_mode(eps: float, mu: float) -> QuadraticBosonForm:
    grid = ModeGrid(np.zeros((3, 1)), np.ones(1))
    return QuadraticBosonForm(
        grid=grid,
        number_block=np.array([[eps]], dtype=complex),
        pair_block=np.array([[mu]], dtype=complex),
    )


def _symmetric_grid(n: int, species: str = "doubled") -> ModeGrid:
    # a 1D momentum line closed under k -> -k, embedded in 3D
    x, w = gauss_segment(-2.0, 2.0, n)
    momenta = np.zeros((3, n))
    momenta[0] = x
    return ModeGrid(momenta, w, species=species)


# ---------------------------------------------------------------------------
# Bogoliubov ground energy
# ---------------------------------------------------------------------------

def test_single_mode_closed_form():
    # eps a*a + (mu/2)(a*a* + aa) has ground energy (sqrt(eps^2-mu^2) - eps)/2
    res = ground_energy(_single_mode(1.0, 0.6))
    assert res.stable
    assert res.energy == pytest.approx(-0.1, abs=1e-12)
    assert res.symplectic_spectrum[0] == pytest.approx(0.8, abs=1e-12)


def test_single_mode_grid_of_couplings():
    rng = np.random.default_rng(3)
    for _ in range(20):
        eps = rng.uniform(0.5, 3.0)
        mu = rng.uniform(0.0, 0.95) * eps
        res = ground_energy(_single_mode(eps, mu))
        assert res.energy == pytest.approx(
            0.5 * (np.sqrt(eps**2 - mu**2) - eps), abs=1e-12
        )


def test_unstable_form_reports_minus_infinity():
    res = ground_energy(_single_mode(1.0, 1.4))
    assert not res.stable
    assert res.energy == -np.inf


def test_positive_number_block_has_zero_ground_energy():
    grid = ModeGrid(np.zeros((3, 2)), np.ones(2))
    num = np.array([[2.0, 0.3], [0.3, 1.0]], dtype=complex)
    form = QuadraticBosonForm(grid=grid, number_block=num, pair_block=np.zeros((2, 2)))
    assert ground_energy(form).energy == pytest.approx(0.0, abs=1e-12)


def test_block_shape_and_symmetry_validation():
    grid = ModeGrid(np.zeros((3, 2)), np.ones(2))
    with pytest.raises(ValueError):
        QuadraticBosonForm(grid=grid, number_block=np.eye(3), pair_block=np.zeros((3, 3)))
    with pytest.raises(ValueError):
        QuadraticBosonForm(
            grid=grid,
            number_block=np.array([[0.0, 1.0], [0.0, 0.0]]),
            pair_block=np.zeros((2, 2)),
        )


# ---------------------------------------------------------------------------
# exact-diagonalisation oracle
# ---------------------------------------------------------------------------

def test_fock_oracle_matches_closed_form_single_mode():
    form = _single_mode(1.0, 0.6)
    assert exact_diag_oracle(form, nmax=40) == pytest.approx(-0.1, abs=1e-8)


def test_fock_oracle_matches_bogoliubov_two_modes():
    grid = ModeGrid(np.zeros((3, 2)), np.ones(2))
    num = np.array([[1.3, 0.2], [0.2, 0.9]], dtype=complex)
    pair = np.array([[0.25, 0.1], [0.1, 0.15]], dtype=complex)
    form = QuadraticBosonForm(grid=grid, number_block=num, pair_block=pair)
    res = ground_energy(form)
    assert res.stable
    assert exact_diag_oracle(form, nmax=14) == pytest.approx(res.energy, abs=1e-6)


# ---------------------------------------------------------------------------
# density assembly
# ---------------------------------------------------------------------------

PARAMS = ThermalParams(beta=1.0, mass=1.0)


def test_formal_liouvillian_is_diagonal_with_frequency_weights():
    grid = _symmetric_grid(8)
    ell = assemble("thermal-ell", grid, PARAMS, smearing=None)
    w = PARAMS.omega(grid.momenta)
    n = grid.n_nodes
    expect = np.diag(np.concatenate([-w, w]))  # holes carry -w, particles +w
    assert np.max(np.abs(ell.number_block - expect)) < 1e-10
    assert np.max(np.abs(ell.pair_block)) < 1e-10


def test_species_requirements():
    with pytest.raises(ValueError):
        assemble("thermal-h", _symmetric_grid(4, species="single"), PARAMS)
    with pytest.raises(ValueError):
        assemble("vacuum-h", _symmetric_grid(4, species="doubled"), PARAMS)
    with pytest.raises(ValueError):
        assemble("no-such-density", _symmetric_grid(4), PARAMS)


def test_smeared_thermal_h_is_hermitian_and_couples_species():
    f = PacketSpec(kind="gaussian", widths=(1.0,) * 4)
    grid = _symmetric_grid(6)
    form = assemble("thermal-h", grid, PARAMS, smearing=f)
    assert np.allclose(form.number_block, form.number_block.conj().T)
    assert np.allclose(form.pair_block, form.pair_block.T)
    n = grid.n_nodes
    # the thermal density mixes hole and particle species
    assert np.max(np.abs(form.pair_block[:n, n:])) > 1e-6


def test_bath_copy_swaps_the_species_blocks():
    f = PacketSpec(kind="gaussian", widths=(1.0,) * 4)
    grid = _symmetric_grid(6)
    h = assemble("thermal-h", grid, PARAMS, smearing=f)
    bath = assemble("thermal-bath", grid, PARAMS, smearing=f)
    n = grid.n_nodes
    assert np.allclose(
        bath.number_block[n:, n:], h.number_block[:n, :n].conj(), atol=1e-12
    )
    assert np.allclose(
        bath.number_block[:n, :n], h.number_block[n:, n:].conj(), atol=1e-12
    )


def test_commutator_bracket_detects_commutation():
    grid = ModeGrid(np.zeros((3, 2)), np.ones(2))
    d1 = QuadraticBosonForm(
        grid=grid, number_block=np.diag([1.0, 2.0]).astype(complex),
        pair_block=np.zeros((2, 2)),
    )
    d2 = QuadraticBosonForm(
        grid=grid, number_block=np.diag([0.5, 0.3]).astype(complex),
        pair_block=np.zeros((2, 2)),
    )
    assert commutator_bracket(d1, d2) == pytest.approx(0.0, abs=1e-12)
    mix = QuadraticBosonForm(
        grid=grid, number_block=np.array([[0, 1], [1, 0]], dtype=complex),
        pair_block=np.zeros((2, 2)),
    )
    assert commutator_bracket(d1, mix) > 1e-6


def test_restrict_splits_a_doubled_form():
    f = PacketSpec(kind="gaussian", widths=(1.0,) * 4)
    grid = _symmetric_grid(4)
    h = assemble("thermal-h", grid, PARAMS, smearing=f)
    sub = h.restrict("b")
    n = grid.n_nodes
    assert np.allclose(sub.number_block, h.number_block[n:, n:])


# ---------------------------------------------------------------------------
# purified thermal oscillator
# ---------------------------------------------------------------------------

def test_purification_crosscheck_defects():
    out = purification_crosscheck(beta=1.0, omega=1.0, levels=40)
    assert out["occupation_defect"] < 1e-10
    assert out["kms_defect"] < 1e-10
    assert out["quasiparticle_defect"] < 1e-10
    assert out["delta_spectrum_defect"] < 1e-10
    assert out["j_defect"] < 1e-12
    assert out["bridge_defect"] < 1e-12
    assert out["truncation_tail"] < 1e-10
    assert out["occupation_target"] == pytest.approx(1.0 / np.expm1(1.0), rel=1e-14)


def test_purification_requires_enough_levels():
    with pytest.raises(ValueError):
        purification_crosscheck(1.0, 1.0, levels=2)
