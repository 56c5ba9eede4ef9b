"""Thermal field engine: weight identities, norms, densities, scans."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qeilab.packets import PacketSpec
from qeilab.quadrature import QuadratureSpec
from qeilab import thermal as T

PARAMS = T.ThermalParams(beta=1.0, mass=1.0)
SPEC = QuadratureSpec(scheme="tensor-gauss", points=16, cutoff=400.0)
CHI = PacketSpec(kind="gaussian", widths=(1.0,) * 4)


def test_params_validation():
    with pytest.raises(ValueError):
        T.ThermalParams(beta=0.0, mass=1.0)
    with pytest.raises(ValueError):
        T.ThermalParams(beta=1.0, mass=-1.0)
    assert T.ThermalParams(1.0, 2.0).omega(np.zeros((3, 1)))[0] == 2.0


# ---------------------------------------------------------------------------
# thermal weight functions
# ---------------------------------------------------------------------------

def test_weight_identities_on_grid():
    omega = np.linspace(0.05, 80.0, 400)
    for beta in (0.2, 1.0, 5.0):
        bp = T.thermal_factor(+1, omega, beta)
        bm = T.thermal_factor(-1, omega, beta)
        assert np.max(np.abs(bp**2 - bm**2 - 1.0)) < 1e-12
        assert np.all(bm <= bp)
        mass_gap = omega[0]
        cap = 1.0 / np.sqrt(-np.expm1(-beta * mass_gap))
        assert np.all(bp <= cap + 1e-12)


def test_weight_functions_are_overflow_safe():
    big = np.array([1e4, 1e6])
    assert np.allclose(T.thermal_factor(+1, big, 1.0), 1.0)
    assert np.allclose(T.thermal_factor(-1, big, 1.0), 0.0)
    assert np.allclose(T.occupation(big, 1.0), 0.0)


def test_occupation_is_the_squared_minus_weight():
    omega = np.linspace(0.1, 30.0, 100)
    bm = T.thermal_factor(-1, omega, 1.3)
    assert np.allclose(T.occupation(omega, 1.3), bm**2, atol=1e-14)


def test_inverse_minus_factor_inverts_on_mask():
    omega = np.linspace(0.5, 20.0, 50)
    mask = omega < 10.0
    inv = T.inverse_minus_factor(omega, 1.0, mask)
    bm = T.thermal_factor(-1, omega, 1.0)
    assert np.allclose((inv * bm)[mask], 1.0, atol=1e-12)
    assert np.all(inv[~mask] == 0.0)
    with pytest.raises(OverflowError):
        T.inverse_minus_factor(np.array([2001.0]), 1.0, np.array([True]))


@settings(max_examples=50, deadline=None)
@given(
    omega=st.floats(min_value=1e-3, max_value=1e3),
    beta=st.floats(min_value=1e-2, max_value=1e2),
)
def test_weight_identity_holds_pointwise(omega, beta):
    bp = float(T.thermal_factor(+1, omega, beta))
    bm = float(T.thermal_factor(-1, omega, beta))
    assert bp**2 - bm**2 == pytest.approx(1.0, abs=1e-10)
    assert bm >= 0.0 and bp >= 1.0


# ---------------------------------------------------------------------------
# kernel cancellations of the formal Liouvillian
# ---------------------------------------------------------------------------

def test_liouville_cancellations_are_exact():
    out = T.liouville_cancellation_check(PARAMS, n_samples=200, seed=3)
    assert out["pair_channel"] < 1e-12
    assert out["mixed_channel"] < 1e-12
    assert out["diagonal"] < 1e-12


# ---------------------------------------------------------------------------
# states and norms
# ---------------------------------------------------------------------------

def test_particle_and_hole_amplitudes():
    state = T.one_particle_state(CHI, PARAMS)
    k = np.array([[0.3], [0.0], [-0.2]])
    w = PARAMS.omega(k)
    khat = np.concatenate([w[None], k])
    bp = T.thermal_factor(+1, w, PARAMS.beta)
    bm = T.thermal_factor(-1, w, PARAMS.beta)
    assert state.particle(k)[0] == pytest.approx(
        bp[0] * CHI.fourier(khat)[0] / np.sqrt(2 * w[0]), rel=1e-12
    )
    assert state.hole(k)[0] == pytest.approx(
        bm[0] * CHI.fourier(-khat)[0] / np.sqrt(2 * w[0]), rel=1e-12
    )


def test_hole_enhanced_window_state_cancels_the_minus_weight():
    win = PacketSpec(
        kind="momentum-window", widths=(1.0, 1.5, 1.5, 1.5), window=(-2.4, -1.2)
    )
    state = T.one_particle_state(win, PARAMS, hole_enhanced=True)
    k = np.array([[1.5], [0.3], [0.0]])
    w = PARAMS.omega(k)
    khat = np.concatenate([w[None], k])
    # hole amplitude reduces to the bare window value over sqrt(2 w)
    expect = win.fourier(-khat)[0] / np.sqrt(2 * w[0])
    assert state.hole(k)[0] == pytest.approx(expect, rel=1e-12)


def test_state_norm_matches_radial_oracle():
    # for a centred unit-width gaussian the on-shell density is isotropic:
    # n2 = (2 pi)^4/(2 pi)^3 int r^2 (1 + 2 n(w)) e^{-w^2 - r^2} / (2 w) dr
    state = T.one_particle_state(CHI, PARAMS)
    n2, err = T.state_norm(state, SPEC)

    def radial(r):
        w = np.sqrt(r * r + 1.0)
        occ = 1.0 / np.expm1(w)
        return r * r * (1.0 + 2.0 * occ) * np.exp(-w * w - r * r) / (2.0 * w)

    # (2 pi)^4 / (2 pi)^3 = 2 pi; the angular integral gives 4 pi
    oracle = 2.0 * np.pi * 4.0 * np.pi * quad(radial, 0.0, 12.0, limit=200)[0]
    assert n2 == pytest.approx(oracle, rel=1e-3)
    # and converges to the oracle when the grid is refined
    fine_spec = QuadratureSpec(scheme="tensor-gauss", points=64, cutoff=400.0)
    n2_fine, err_fine = T.state_norm(state, fine_spec)
    assert n2_fine == pytest.approx(oracle, rel=1e-8)
    assert err_fine < 1e-6 * abs(n2_fine)


def test_exact_l4_respects_the_norm_chain():
    state = T.one_particle_state(CHI, PARAMS)
    out = T.l4_proxy(state, SPEC, exact=True)
    # ||psi||_2^2 <= ||psi||_4^2 <= sqrt(6) ||psi||^2
    assert out["exact"] >= out["norm_sq"] - 1e-8
    assert out["exact"] <= out["proxy"] + 1e-8


def test_massless_norm_limit_approaches_closed_form():
    # closed form pi^2 for the centred unit gaussian; tensor quadrature
    # resolves the 1/(2|k|) cusp slowly, so the tolerance is loose
    limit, _ = T.massless_norm_limit(CHI, SPEC)
    assert limit == pytest.approx(np.pi**2, rel=0.15)


def test_thermal_core_radius_tracks_beta():
    r1 = T.thermal_core_radius(T.ThermalParams(1.0, 1.0))
    r2 = T.thermal_core_radius(T.ThermalParams(2.0, 1.0))
    assert r2 < r1
    occ = T.occupation(r1, 1.0)
    assert occ < 1e-4  # occupation is negligible beyond the core


# ---------------------------------------------------------------------------
# smeared densities
# ---------------------------------------------------------------------------

def test_energy_density_terms_are_positive_and_consistent():
    f = PacketSpec(kind="bump-product", widths=(2.0,) * 4)
    state = T.one_particle_state(CHI, PARAMS)
    parts = T.ell_expectation(state, f, SPEC)
    (h, _) = T.h_expectation(state, f, SPEC)
    (b, _) = T.bath_h_expectation(state, f, SPEC)
    assert h > 0 and b > 0
    assert parts["h"] == pytest.approx(h, rel=1e-12)
    assert parts["bath"] == pytest.approx(b, rel=1e-12)
    assert parts["ell"] == pytest.approx(h - b, rel=1e-9)


def test_scan_validation():
    f = PacketSpec(kind="bump-product", widths=(2.0,) * 4)
    with pytest.raises(ValueError):
        T.scan_l2_violation(CHI, f, [1, 2], PARAMS, SPEC)  # not a window
    pos_win = PacketSpec(
        kind="momentum-window", widths=(1.0, 1.5, 1.5, 1.5), window=(1.2, 2.4)
    )
    with pytest.raises(ValueError):
        T.scan_l2_violation(pos_win, f, [1, 2], PARAMS, SPEC)  # positive window
    win = PacketSpec(
        kind="momentum-window", widths=(1.0, 1.5, 1.5, 1.5), window=(-2.4, -1.2)
    )
    with pytest.raises(ValueError):
        T.scan_l4_violation(win, f, [1, 2], PARAMS, SPEC)  # window as state packet


def test_window_state_bath_dominates_system_term():
    # negative-frequency hole-enhanced states put their energy in the bath copy
    win = PacketSpec(
        kind="momentum-window", widths=(1.0, 1.5, 1.5, 1.5), window=(-2.4, -1.2)
    )
    f = PacketSpec(kind="bump-product", widths=(2.0,) * 4)
    spec = QuadratureSpec(scheme="tensor-gauss", points=10, cutoff=400.0)
    state = T.one_particle_state(win, PARAMS, hole_enhanced=True)
    parts = T.ell_expectation(state, f, spec)
    assert parts["bath"] > 0
    assert parts["ell"] < 0
    assert parts["h"] < parts["bath"]
    n2, _ = T.state_norm(state, spec)
    star, _ = T.hole_dominance(state, spec)
    assert star > n2 > 0
