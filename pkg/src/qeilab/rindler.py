"""Wedge-localised boost densities for the massive vacuum field.

The boost density ``kappa(x)`` generates the wedge modular flow of the
right Rindler wedge ``x^1 > |x^0|``; its smeared one-particle matrix
elements are evaluated here through a Cartesian momentum kernel and,
independently, channel by channel through the lightcone-square
decomposition.  Scaling families of wedge-localised packets then exhibit
the growth of ``<kappa(f)>`` against the bounded fourth-moment proxy
(noncommutative L4 obstruction) and, after wedge reflection, its unbounded
negative counterpart on the commutant side.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .packets import PacketSpec
from .quadrature import QuadratureSpec, tensor_grid
from .thermal import TWO_PI_CUBED, _box_tol, _packet_grid, _smearing_qbox, _transfer_nodes


# ---------------------------------------------------------------------------
# wedge geometry
# ---------------------------------------------------------------------------

def wedge_margin(packet: PacketSpec, nsig: float = 8.0) -> float:
    """Distance of the packet's essential support from the wedge boundary.

    Positive values certify localisation in the right wedge; the support
    box is the centre plus ``nsig`` widths (exact widths for bump packets).
    """
    w = np.asarray(packet.widths, dtype=float)
    if packet.kind == "bump-product":
        half = w
    elif packet.kind == "gaussian":
        half = nsig * w
    else:
        raise ValueError("wedge localisation applies to position-space packets")
    c = np.asarray(packet.center, dtype=float)
    t_max = abs(c[0]) + half[0]
    x1_min = c[1] - half[1]
    return float(x1_min - t_max)


def reflect_packet(packet: PacketSpec) -> PacketSpec:
    """The wedge-reflected packet ``g(jx)``, ``j(x) = (-x^0, -x^1, x^2, x^3)``."""
    return packet.reflect_wedge()


# ---------------------------------------------------------------------------
# one-particle kernels
# ---------------------------------------------------------------------------

def _onshell(k: np.ndarray, mass: float) -> tuple[np.ndarray, np.ndarray]:
    omega = np.sqrt(k[0] ** 2 + k[1] ** 2 + k[2] ** 2 + mass**2)
    return omega, np.concatenate([omega[None], k])


def _momentum_box(
    packet: PacketSpec, mass: float, spec: QuadratureSpec, tol: float | None = None
) -> np.ndarray:
    """Per-axis half-extents of the packet momentum grid.

    Each axis extends to the packet's spatial transform tail, capped by the
    on-shell reach of the time-axis tail (``ghat`` is evaluated at
    ``(omega_k, k)``) and by the quadrature cutoff.
    """
    tol = _box_tol(packet, tol)
    freq_reach = packet.momentum_tail_reach(0, tol)
    kmax = np.sqrt(max(freq_reach**2 - mass**2, 0.0))
    box = np.array([packet.momentum_tail_reach(a, tol) for a in (1, 2, 3)])
    return np.clip(np.minimum(box, max(kmax, 1e-3)), 1e-3, spec.cutoff)


def _pair_box(
    g1: PacketSpec, g2: PacketSpec, mass: float, spec: QuadratureSpec
) -> np.ndarray:
    """Momentum box covering both packets; symmetric in the arguments so
    bilinears sample the same grid in either order."""
    if g1 is g2 or g1 == g2:
        return _momentum_box(g1, mass, spec)
    return np.maximum(
        _momentum_box(g1, mass, spec), _momentum_box(g2, mass, spec)
    )


def _transfer_shift(g1: PacketSpec, g2: PacketSpec, f: PacketSpec) -> np.ndarray:
    """Spatial offset between the smearing centre and the state packets.

    The leg phases combine to ``exp(i q . (a - c_f))`` on the transfer grid,
    so only the relative offset oscillates; identical centres cancel exactly.
    """
    cf = np.asarray(f.center, dtype=float)[1:]
    s1 = np.abs(np.asarray(g1.center, dtype=float)[1:] - cf)
    s2 = np.abs(np.asarray(g2.center, dtype=float)[1:] - cf)
    return np.maximum(s1, s2)


def _kernel_value(
    g1: PacketSpec,
    g2: PacketSpec,
    f: PacketSpec,
    mass: float,
    spec: QuadratureSpec,
    nk: int,
    nq: int,
    variant: str = "cartesian",
) -> complex:
    """Tensor-product evaluation of the one-particle boost kernel.

    ``variant='cartesian'`` uses the two-moment Cartesian form; ``'channel'``
    sums the five lightcone-square channels.  Both integrate over the packet
    momentum ``k`` and the transfer ``q = khat - phat`` with ``p = k - q``.
    """
    kbox = _pair_box(g1, g2, mass, spec)
    knodes, kw = _packet_grid(g1, kbox, nk)
    qnodes, qw = tensor_grid(_smearing_qbox(f, kbox), nq)
    # trim transfer nodes where both the plain and the x1-moment spatial
    # envelopes of the smearing are negligible
    env = np.maximum(
        np.abs(f.spatial_fourier(qnodes)), np.abs(f.spatial_fourier_moment(qnodes, 1))
    )
    keep = env >= 1e-7 * np.max(env)
    qnodes, qw = qnodes[:, keep], qw[keep]
    wk, k4 = _onshell(knodes, mass)
    total = 0.0 + 0.0j
    chunk = max(1, 250_000 // qnodes.shape[1])
    for start in range(0, knodes.shape[1], chunk):
        sl = slice(start, min(start + chunk, knodes.shape[1]))
        k = knodes[:, sl]
        p = k[:, :, None] - qnodes[:, None, :]
        wp = np.sqrt(p[0] ** 2 + p[1] ** 2 + p[2] ** 2 + mass**2)
        qspat = np.broadcast_to(
            qnodes[:, None, :], (3,) + wp.shape
        )
        q4 = np.concatenate([(wk[sl, None] - wp)[None], qspat])
        gk = np.conj(g1.fourier(k4[:, sl]))[:, None]
        p4 = np.concatenate([wp[None], p])
        gp = g2.fourier(p4.reshape(4, -1)).reshape(wp.shape)
        m0 = f.fourier_moment(q4.reshape(4, -1), 0).reshape(wp.shape)
        m1 = f.fourier_moment(q4.reshape(4, -1), 1).reshape(wp.shape)
        if variant == "cartesian":
            kern = (
                (wk[sl, None] * wp + np.einsum("ai,aij->ij", k, p) + mass**2) * m1
                + (wk[sl, None] * p[0] + k[0][:, None] * wp) * m0
            )
        elif variant == "channel":
            dk = {
                "d2": 1j * k[1][:, None] * np.ones_like(wp),
                "d3": 1j * k[2][:, None] * np.ones_like(wp),
                "m": mass * np.ones_like(wp) + 0.0j,
                "v": 1j * (wk[sl, None] + k[0][:, None]) * np.ones_like(wp),
                "u": 1j * (wk[sl, None] - k[0][:, None]) * np.ones_like(wp),
            }
            dp = {
                "d2": 1j * p[1],
                "d3": 1j * p[2],
                "m": mass * np.ones_like(wp) + 0.0j,
                "v": 1j * (wp + p[0]),
                "u": 1j * (wp - p[0]),
            }
            wts = {
                "d2": 0.5 * m1,
                "d3": 0.5 * m1,
                "m": 0.5 * m1,
                "v": 0.25 * (m0 + m1),
                "u": 0.25 * (m1 - m0),
            }
            kern = np.zeros_like(wp, dtype=complex)
            for name in dk:
                kern = kern + 2.0 * np.conj(dk[name]) * dp[name] * wts[name]
        else:
            raise ValueError(variant)
        integ = gk * gp * kern / (4.0 * wk[sl, None] * wp)
        total += np.sum(integ * kw[sl, None] * qw[None, :])
    return total / TWO_PI_CUBED**2


def _paired_kernel(
    g1: PacketSpec,
    g2: PacketSpec,
    f: PacketSpec,
    mass: float,
    k: np.ndarray,
    q: np.ndarray,
    variant: str,
) -> np.ndarray:
    """Kernel integrand on paired samples ``(k_i, q_i)`` with ``p = k - q``."""
    wk = np.sqrt(k[0] ** 2 + k[1] ** 2 + k[2] ** 2 + mass**2)
    p = k - q
    wp = np.sqrt(p[0] ** 2 + p[1] ** 2 + p[2] ** 2 + mass**2)
    k4 = np.concatenate([wk[None], k])
    p4 = np.concatenate([wp[None], p])
    q4 = np.concatenate([(wk - wp)[None], q])
    gk = np.conj(g1.fourier(k4))
    gp = g2.fourier(p4)
    m0 = f.fourier_moment(q4, 0)
    m1 = f.fourier_moment(q4, 1)
    if variant == "cartesian":
        kern = (wk * wp + np.sum(k * p, axis=0) + mass**2) * m1 + (
            wk * p[0] + k[0] * wp
        ) * m0
    elif variant == "channel":
        dk = {
            "d2": 1j * k[1],
            "d3": 1j * k[2],
            "m": mass * np.ones_like(wk) + 0.0j,
            "v": 1j * (wk + k[0]),
            "u": 1j * (wk - k[0]),
        }
        dp = {
            "d2": 1j * p[1],
            "d3": 1j * p[2],
            "m": mass * np.ones_like(wp) + 0.0j,
            "v": 1j * (wp + p[0]),
            "u": 1j * (wp - p[0]),
        }
        wts = {
            "d2": 0.5 * m1,
            "d3": 0.5 * m1,
            "m": 0.5 * m1,
            "v": 0.25 * (m0 + m1),
            "u": 0.25 * (m1 - m0),
        }
        kern = np.zeros_like(wk, dtype=complex)
        for name in dk:
            kern = kern + 2.0 * np.conj(dk[name]) * dp[name] * wts[name]
    else:
        raise ValueError(variant)
    return gk * gp * kern / (4.0 * wk * wp)


def kappa_qmc(
    g1: PacketSpec,
    g2: PacketSpec,
    f: PacketSpec,
    mass: float,
    spec: QuadratureSpec,
    variant: str = "channel",
) -> tuple[complex, float]:
    """Sobol estimate of the boost kernel matrix element.

    Gaussian packets are importance-sampled with normal proposals matched to
    their transform envelopes; other kinds fall back to uniform sampling of
    the tail-based boxes.  Error is ``3 std / sqrt(replicates)`` over
    scrambled replicates.
    """
    from scipy.special import ndtri
    from scipy.stats import qmc as scipy_qmc

    kbox = _pair_box(g1, g2, mass, spec)
    qbox = _smearing_qbox(f, kbox)
    k_gauss = g1.kind == "gaussian" and g2.kind == "gaussian"
    f_gauss = f.kind == "gaussian"
    n = 1 << max(10, int(spec.points))
    estimates = []
    for rep in range(spec.replicates):
        sob = scipy_qmc.Sobol(d=6, scramble=True, seed=spec.seed + rep)
        u = np.clip(sob.random(n), 1e-12, 1.0 - 1e-12)
        k = np.empty((3, n))
        q = np.empty((3, n))
        dens = np.ones(n)
        for a in range(3):
            if k_gauss:
                # |g1hat g2hat| envelope exp(-(w1^2 + w2^2) k^2 / 2)
                sig = 1.0 / np.sqrt(
                    float(g1.widths[a + 1]) ** 2 + float(g2.widths[a + 1]) ** 2
                )
                k[a] = ndtri(u[:, a]) * sig
                dens *= np.exp(-0.5 * (k[a] / sig) ** 2) / (sig * np.sqrt(2 * np.pi))
            else:
                k[a] = (2.0 * u[:, a] - 1.0) * kbox[a]
                dens /= 2.0 * kbox[a]
            if f_gauss:
                sig = 1.0 / float(f.widths[a + 1])
                q[a] = ndtri(u[:, 3 + a]) * sig
                dens *= np.exp(-0.5 * (q[a] / sig) ** 2) / (sig * np.sqrt(2 * np.pi))
            else:
                q[a] = (2.0 * u[:, 3 + a] - 1.0) * qbox[a]
                dens /= 2.0 * qbox[a]
        vals = _paired_kernel(g1, g2, f, mass, k, q, variant) / dens
        estimates.append(np.mean(vals) / TWO_PI_CUBED**2)
    est = complex(np.mean(estimates))
    err = 3.0 * float(np.std(estimates)) / np.sqrt(spec.replicates)
    return est, err


def kappa_bilinear(
    g1: PacketSpec,
    g2: PacketSpec,
    f: PacketSpec,
    mass: float,
    spec: QuadratureSpec,
    variant: str = "cartesian",
) -> tuple[complex, float]:
    """Matrix element of the smeared boost density between one-particle
    states made from ``g1`` and ``g2``, with a coarse-grid error estimate.

    The transfer grid is sized to the smearing oscillation and held fixed;
    the coarse companion varies only the packet momentum grid.
    """
    nk = spec.points
    qbox = _smearing_qbox(f, _pair_box(g1, g2, mass, spec))
    nq = _transfer_nodes(
        f, qbox, floor=max(10, (2 * nk) // 3), shift=_transfer_shift(g1, g2, f),
        cap=56,
    )
    fine = _kernel_value(g1, g2, f, mass, spec, nk, nq, variant)
    coarse = _kernel_value(g1, g2, f, mass, spec, max(6, (3 * nk) // 4), nq, variant)
    return fine, abs(fine - coarse)


def kappa_expectation(
    g: PacketSpec,
    f: PacketSpec,
    mass: float,
    spec: QuadratureSpec,
    variant: str = "cartesian",
) -> tuple[float, float]:
    """Expectation of ``kappa(f)`` in the one-particle state of ``g``."""
    val, err = kappa_bilinear(g, g, f, mass, spec, variant)
    if abs(val.imag) > 1e-6 * max(1.0, abs(val.real)) + 10 * err:
        raise ArithmeticError(f"expectation has spurious imaginary part {val.imag:.3e}")
    return float(val.real), err


def one_particle_norm_sq(g: PacketSpec, mass: float, spec: QuadratureSpec):
    """``||phi(g) Omega||^2`` for the vacuum one-particle vector."""

    def density(nk: int) -> float:
        nodes, w = _packet_grid(g, _momentum_box(g, mass, spec), nk)
        omega, k4 = _onshell(nodes, mass)
        vals = np.abs(g.fourier(k4)) ** 2 / (2.0 * omega)
        return float(np.sum(vals * w)) / TWO_PI_CUBED

    fine = density(spec.points)
    coarse = density(max(6, (2 * spec.points) // 3))
    return fine, abs(fine - coarse)


def one_particle_overlap(
    g1: PacketSpec, g2: PacketSpec, mass: float, spec: QuadratureSpec
) -> complex:
    nodes, w = _packet_grid(g1, _pair_box(g1, g2, mass, spec), spec.points)
    omega, k4 = _onshell(nodes, mass)
    vals = np.conj(g1.fourier(k4)) * g2.fourier(k4) / (2.0 * omega)
    return complex(np.sum(vals * w) / TWO_PI_CUBED)


# ---------------------------------------------------------------------------
# boost generator
# ---------------------------------------------------------------------------

def _amplitude(g: PacketSpec, k: np.ndarray, mass: float) -> np.ndarray:
    omega, k4 = _onshell(k, mass)
    return g.fourier(k4) / np.sqrt(2.0 * omega)

def _amplitude_k1_derivative(g: PacketSpec, k: np.ndarray, mass: float) -> np.ndarray:
    """Analytic d/dk1 of the on-shell amplitude ghat(khat)/sqrt(2 omega)."""
    omega, k4 = _onshell(k, mass)
    ghat = g.fourier(k4)
    # d ghat(q)/dq0 = i * (x0 moment), d/dq_a = -i * (x_a moment)
    m0 = g.fourier_moment(k4, 0)
    m1 = g.fourier_moment(k4, 1)
    dghat = (k[0] / omega) * (1j * m0) + (-1j) * m1
    root = np.sqrt(2.0 * omega)
    return dghat / root - ghat * k[0] / (2.0 * root * omega**2)


def boost_expectation(g: PacketSpec, mass: float, spec: QuadratureSpec):
    """``(psi, K psi)`` for the one-particle vector, via the momentum-space
    first-order form ``i int [ (k1 / 2 omega) |A|^2 + omega conj(dA/dk1) A ]``."""

    def value(nk: int) -> complex:
        nodes, w = _packet_grid(g, _momentum_box(g, mass, spec), nk)
        omega, _ = _onshell(nodes, mass)
        a = _amplitude(g, nodes, mass)
        da = _amplitude_k1_derivative(g, nodes, mass)
        integ = (nodes[0] / (2.0 * omega)) * np.abs(a) ** 2 + omega * np.conj(da) * a
        return -1j * np.sum(integ * w) / TWO_PI_CUBED

    fine = value(spec.points)
    coarse = value(max(6, (2 * spec.points) // 3))
    err = abs(fine - coarse)
    return float(fine.real), err, abs(fine.imag)


def boost_expectation_flow(
    g: PacketSpec, mass: float, spec: QuadratureSpec, dt: float = 1e-4
):
    """Finite-difference oracle: ``-i d/dt (psi, U_t psi)`` at ``t = 0`` for
    the one-parameter boost flow ``U_t`` acting on on-shell amplitudes."""

    def overlap(t: float) -> complex:
        nodes, w = _packet_grid(g, _momentum_box(g, mass, spec), spec.points)
        omega, _ = _onshell(nodes, mass)
        a = _amplitude(g, nodes, mass)
        kb = nodes.copy()
        kb[0] = np.cosh(t) * nodes[0] - np.sinh(t) * omega
        wb = np.sqrt(kb[0] ** 2 + kb[1] ** 2 + kb[2] ** 2 + mass**2)
        ab = _amplitude(g, kb, mass) * np.sqrt(wb / omega)
        return complex(np.sum(np.conj(a) * ab * w) / TWO_PI_CUBED)

    deriv = (overlap(dt) - overlap(-dt)) / (2.0 * dt)
    return float((-1j * deriv).real)


# ---------------------------------------------------------------------------
# scaling families
# ---------------------------------------------------------------------------

def wedge_scaling_family(chi: PacketSpec, lam: float, apex_distance: float):
    """``lam^3 chi(lam (x - a e1))``: unit-integral concentration at the
    wedge point ``(0, a, 0, 0)``."""
    shift = np.array([0.0, apex_distance, 0.0, 0.0])
    return chi.scale_translate(lam, shift)


def scan_boost_l4_violation(
    chi: PacketSpec,
    f: PacketSpec,
    lambdas: Sequence[float],
    mass: float,
    spec: QuadratureSpec,
    apex_distance: float = 1.0,
) -> list[dict]:
    """Scaling scan of ``<kappa(f)>`` against the fourth-moment proxy.

    The packets concentrate at a wedge point; the smeared boost density
    grows linearly in the scale while the quasi-free proxy ``sqrt(6) N^2``
    for the L4 norm stays bounded, so the ratio certifies the failure of
    the quartic inequality on the wedge algebra.
    """
    if wedge_margin(f) <= 0:
        raise ValueError("the smearing function must be wedge-localised")
    rows = []
    for lam in lambdas:
        g = wedge_scaling_family(chi, lam, apex_distance)
        norm_sq, nerr = one_particle_norm_sq(g, mass, spec)
        kappa, kerr = kappa_expectation(g, f, mass, spec)
        proxy = np.sqrt(6.0) * norm_sq
        rows.append(
            {
                "lam": float(lam),
                "norm_sq": norm_sq,
                "l4_proxy": float(proxy),
                "kappa": kappa,
                "ratio": kappa / proxy,
                "err": kerr + np.sqrt(6.0) * nerr,
            }
        )
    return rows


def scan_wedge_l2_violation(
    chi: PacketSpec,
    f: PacketSpec,
    lambdas: Sequence[float],
    mass: float,
    spec: QuadratureSpec,
    apex_distance: float = 1.0,
) -> list[dict]:
    """Reflected-family scan: the same densities on wedge-reflected states.

    With ``J kappa(x) J = -kappa(jx)``, the reflected states drive the
    commutant-smeared density ``kappa(j_* f)`` to ``-infinity`` while their
    one-particle norm stays bounded; these vectors do not lie in the image
    of the wedge algebra applied to the vacuum, so the quadratic bound for
    that cone is escaped rather than contradicted.
    """
    if wedge_margin(f) <= 0:
        raise ValueError("the smearing function must be wedge-localised")
    f_left = reflect_packet(f)
    rows = []
    for lam in lambdas:
        g = wedge_scaling_family(chi, lam, apex_distance)
        g_left = reflect_packet(g)
        norm_sq, nerr = one_particle_norm_sq(g_left, mass, spec)
        kappa_right, kerr = kappa_expectation(g, f, mass, spec)
        kappa_left, klerr = kappa_expectation(g_left, f_left, mass, spec)
        rows.append(
            {
                "lam": float(lam),
                "norm_sq": norm_sq,
                "kappa_left": kappa_left,
                "kappa_right": kappa_right,
                "reflection_defect": abs(kappa_left + kappa_right),
                "ratio": kappa_left / norm_sq,
                "err": kerr + klerr + nerr,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# quadratic-form lower bound probe
# ---------------------------------------------------------------------------

def qei_lower_probe(
    basis: Sequence[PacketSpec],
    f: PacketSpec,
    mass: float,
    spec: QuadratureSpec,
    bogoliubov_bound: float | None = None,
) -> dict:
    """Minimum of ``<kappa(f)>`` over the one-particle span of ``basis``.

    Solves the generalised eigenproblem of the kappa bilinear form against
    the one-particle Gram matrix.  When a Bogoliubov ground energy for the
    same smearing is supplied, the one-particle minimum must dominate it.
    """
    n = len(basis)
    bmat = np.zeros((n, n), dtype=complex)
    gram = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            val, _ = kappa_bilinear(basis[i], basis[j], f, mass, spec)
            bmat[i, j] = val
            bmat[j, i] = np.conj(val)
            ov = one_particle_overlap(basis[i], basis[j], mass, spec)
            gram[i, j] = ov
            gram[j, i] = np.conj(ov)
    evals = sla.eigvalsh(bmat, gram)
    out = {
        "one_particle_min": float(evals[0]),
        "one_particle_max": float(evals[-1]),
        "gram_min_eig": float(np.linalg.eigvalsh(gram)[0]),
    }
    if bogoliubov_bound is not None:
        out["bogoliubov_bound"] = float(bogoliubov_bound)
        out["bound_respected"] = bool(evals[0] >= bogoliubov_bound - 1e-8)
    return out
