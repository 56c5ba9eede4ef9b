"""Wedge boost densities: kernel routes, boost routes, scaling families."""
import numpy as np
import pytest
from scipy.integrate import quad

from qeilab.packets import PacketSpec
from qeilab.quadrature import QuadratureSpec
from qeilab import rindler as R

MASS = 1.0
G = PacketSpec(kind="gaussian", center=(0, 3, 0, 0), widths=(1.0, 1.0, 1.5, 1.5))
F_BUMP = PacketSpec(kind="bump-product", center=(0, 3, 0, 0), widths=(1.0, 1.0, 1.5, 1.5))
FAST = QuadratureSpec(scheme="tensor-gauss", points=10, cutoff=12.0)


def test_wedge_margin_and_reflection():
    assert R.wedge_margin(F_BUMP) == pytest.approx(3.0 - 1.0 - 1.0)
    outside = PacketSpec(kind="bump-product", center=(0, 0.5, 0, 0), widths=(1.0,) * 4)
    assert R.wedge_margin(outside) < 0
    refl = R.reflect_packet(F_BUMP)
    assert refl.center == (0.0, -3.0, 0.0, 0.0)
    assert R.wedge_margin(refl) < 0  # the reflected packet sits in the left wedge


def test_one_particle_norm_matches_radial_oracle():
    # |ghat|^2 is isotropic for unit widths: the centre offset only adds a phase
    g = PacketSpec(kind="gaussian", center=(0, 3, 0, 0), widths=(1.0,) * 4)
    spec = QuadratureSpec(scheme="tensor-gauss", points=40, cutoff=12.0)
    n2, err = R.one_particle_norm_sq(g, MASS, spec)

    def radial(r):
        w = np.sqrt(r * r + MASS**2)
        return r * r * np.exp(-w * w - r * r) / (2.0 * w)

    oracle = 2.0 * np.pi * 4.0 * np.pi * quad(radial, 0.0, 12.0, limit=200)[0]
    assert n2 == pytest.approx(oracle, rel=1e-8)


def test_overlap_is_hermitian_and_diagonal_matches_norm():
    g2 = PacketSpec(kind="gaussian", center=(0, 3.5, 0, 0), widths=(1.2, 1.0, 1.5, 1.5))
    ov12 = R.one_particle_overlap(G, g2, MASS, FAST)
    ov21 = R.one_particle_overlap(g2, G, MASS, FAST)
    assert ov12 == pytest.approx(np.conj(ov21), rel=1e-10)
    n2, _ = R.one_particle_norm_sq(G, MASS, FAST)
    diag = R.one_particle_overlap(G, G, MASS, FAST)
    assert diag.real == pytest.approx(n2, rel=1e-10)
    assert abs(diag.imag) < 1e-12 * abs(diag.real)


def test_cartesian_and_channel_kernels_agree():
    # reduced-dimension identity: both variants integrate the same two-point
    # structure, so they agree on a shared grid to near machine precision
    g = PacketSpec(kind="gaussian", center=(0, 3, 0, 0), widths=(1.0,) * 4)
    f = g.squared()
    cart, _ = R.kappa_expectation(g, f, MASS, FAST, "cartesian")
    chan, _ = R.kappa_expectation(g, f, MASS, FAST, "channel")
    assert chan == pytest.approx(cart, rel=1e-10)


def test_kappa_bilinear_is_conjugate_symmetric():
    g2 = PacketSpec(kind="gaussian", center=(0, 3.2, 0, 0), widths=(1.1, 1.0, 1.5, 1.5))
    f = G.squared()
    v12, _ = R.kappa_bilinear(G, g2, f, MASS, FAST)
    v21, _ = R.kappa_bilinear(g2, G, f, MASS, FAST)
    assert v12 == pytest.approx(np.conj(v21), rel=1e-9)


def test_qmc_route_agrees_with_tensor_route():
    g = PacketSpec(kind="gaussian", center=(0, 3, 0, 0), widths=(1.0,) * 4)
    f = g.squared()
    spec = QuadratureSpec(scheme="tensor-gauss", points=14, cutoff=12.0, seed=11)
    tensor, _ = R.kappa_expectation(g, f, MASS, spec, "channel")
    qmc, qerr = R.kappa_qmc(g, g, f, MASS, spec, "channel")
    assert abs(np.real(qmc) - tensor) < max(3 * qerr, 0.01 * abs(tensor))


def test_boost_first_order_form_matches_flow_derivative():
    g = PacketSpec(kind="gaussian", center=(0, 3, 0, 0), widths=(1.0, 0.9, 1.2, 1.1))
    spec = QuadratureSpec(scheme="tensor-gauss", points=20, cutoff=12.0)
    direct, err, imag = R.boost_expectation(g, MASS, spec)
    flow = R.boost_expectation_flow(g, MASS, spec)
    assert direct == pytest.approx(flow, rel=1e-3)
    assert imag < 1e-8 * max(abs(direct), 1.0)


def test_wedge_scaling_family_geometry():
    fam = R.wedge_scaling_family(PacketSpec(kind="gaussian", widths=(1.0,) * 4), 4.0, 3.0)
    assert fam.center == (0.0, 3.0, 0.0, 0.0)
    assert np.allclose(fam.widths, 0.25)
    assert fam.amplitude == pytest.approx(64.0)


def test_scans_require_wedge_localised_smearing():
    bad_f = PacketSpec(kind="bump-product", center=(0, 0.5, 0, 0), widths=(1.0,) * 4)
    chi = PacketSpec(kind="gaussian", widths=(1.0,) * 4)
    with pytest.raises(ValueError):
        R.scan_boost_l4_violation(chi, bad_f, [1, 2], MASS, FAST)
    with pytest.raises(ValueError):
        R.scan_wedge_l2_violation(chi, bad_f, [1, 2], MASS, FAST)


def test_reflected_kappa_is_the_negative_of_the_right_wedge_value():
    g = PacketSpec(kind="gaussian", center=(0, 3, 0, 0), widths=(1.0,) * 4)
    f = g.squared()
    right, _ = R.kappa_expectation(g, f, MASS, FAST)
    left, _ = R.kappa_expectation(
        R.reflect_packet(g), R.reflect_packet(f), MASS, FAST
    )
    assert left == pytest.approx(-right, rel=1e-9)
    assert right > 0  # wedge-localised positive-weight channels


def test_qei_lower_probe_respects_a_supplied_bound():
    basis = [
        PacketSpec(kind="gaussian", center=(0, 3, 0, 0), widths=(1.0, 0.8, 1.0, 1.0)),
        PacketSpec(kind="gaussian", center=(0, 3, 0, 0), widths=(1.0, 1.2, 1.0, 1.0)),
    ]
    f = F_BUMP
    spec = QuadratureSpec(scheme="tensor-gauss", points=8, cutoff=6.0)
    out = R.qei_lower_probe(basis, f, MASS, spec, bogoliubov_bound=-1.0)
    assert out["gram_min_eig"] > 0
    assert out["one_particle_min"] <= out["one_particle_max"]
    assert out["bound_respected"]
