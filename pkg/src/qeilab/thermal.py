"""Thermal scalar field: one-particle/one-hole states and density expectations.

The doubled (particle/hole) field at inverse temperature ``beta`` has the
momentum kernel

    phi(x) = int d3k/(2pi)^3 (2 w_k)^{-1/2} [ B-(w_k) a_k e^{i k.x}
             + B-(w_k) a*_k e^{-i k.x} + B+(w_k) b_k e^{-i k.x}
             + B+(w_k) b*_k e^{i k.x} ],

with on-shell ``k = (w_k, k)`` and thermal weights

    B+(w) = (1 - e^{-beta w})^{-1/2},   B-(w) = (e^{beta w} - 1)^{-1/2}.

``b`` quanta are particles, ``a`` quanta are holes.  The bath copy of an
observable is its conjugation by the modular involution ``J``, which swaps
the two species and complex-conjugates the kernel.

All expectation values on ``phi(g) Omega`` states reduce to double momentum
integrals; this module evaluates them on deterministic tensor-Gauss grids
(with a quasi-Monte-Carlo option used for cross-checks).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .packets import PacketSpec
from .quadrature import (
    QuadratureSpec,
    gauss_segment,
    spherical_shell_grid,
    tensor_grid,
    tensor_grid_split,
)

TWO_PI_CUBED = (2.0 * np.pi) ** 3
_EXP_CAP = 500.0  # caps thermal enhancement exponents; beyond this the window must vanish


@dataclass(frozen=True)
class ThermalParams:
    beta: float
    mass: float

    def __post_init__(self) -> None:
        if self.beta <= 0 or self.mass <= 0:
            raise ValueError("beta and mass must be positive")

    def omega(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return np.sqrt(np.sum(k * k, axis=0) + self.mass**2)


def thermal_factor(sign: int, omega, beta: float) -> np.ndarray:
    """``B+`` (sign=+1) or ``B-`` (sign=-1), overflow-safe for large arguments."""
    x = beta * np.asarray(omega, dtype=float)
    if np.any(x <= 0):
        raise ValueError("thermal factors need positive beta*omega")
    if sign == +1:
        return 1.0 / np.sqrt(-np.expm1(-x))
    if sign == -1:
        # e^{-x/2} (1 - e^{-x})^{-1/2}, stable for all x > 0
        return np.exp(-0.5 * x) / np.sqrt(-np.expm1(-x))
    raise ValueError("sign must be +1 or -1")


def occupation(omega, beta: float) -> np.ndarray:
    """Bose occupation ``n(w) = (e^{beta w} - 1)^{-1} = B-(w)^2``, overflow-safe."""
    x = beta * np.asarray(omega, dtype=float)
    e = np.exp(-x)
    return e / (1.0 - e)


def inverse_minus_factor(omega, beta: float, mask) -> np.ndarray:
    """``B-(w)^{-1}`` on the masked entries, zero elsewhere (overflow-safe)."""
    x = beta * np.asarray(omega, dtype=float)
    out = np.zeros_like(x)
    m = np.asarray(mask) & (0.5 * x < _EXP_CAP)
    out[m] = np.exp(0.5 * x[m]) * np.sqrt(-np.expm1(-x[m]))
    clipped = np.asarray(mask) & ~m
    if np.any(clipped):
        raise OverflowError("hole enhancement exponent exceeds the floating range")
    return out


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

@dataclass
class OneParticleThermalState:
    """The vector ``phi(g) Omega`` described by its momentum amplitudes.

    ``gfun`` evaluates the (possibly weight-modified) transform at off- and
    on-shell four-momenta of shape (4, N).  The particle (b) and hole (a)
    amplitudes are ``B+(w) g(k)/sqrt(2w)`` and ``B-(w) g(-k)/sqrt(2w)``.
    """

    gfun: object
    params: ThermalParams
    packet: PacketSpec | None = None
    hole_enhanced: bool = False

    def onshell(self, k: np.ndarray, sign: int) -> np.ndarray:
        """``gfun`` at ``sign * (w_k, k)``."""
        w = self.params.omega(k)
        return self.gfun(np.concatenate([sign * w[None, :], sign * k]))

    def particle(self, k: np.ndarray) -> np.ndarray:
        w = self.params.omega(k)
        return thermal_factor(+1, w, self.params.beta) * self.onshell(k, +1) / np.sqrt(2 * w)

    def hole(self, k: np.ndarray) -> np.ndarray:
        w = self.params.omega(k)
        return thermal_factor(-1, w, self.params.beta) * self.onshell(k, -1) / np.sqrt(2 * w)


def one_particle_state(
    packet: PacketSpec, params: ThermalParams, hole_enhanced: bool = False
) -> OneParticleThermalState:
    """Build ``phi(g) Omega`` from a packet.

    With ``hole_enhanced`` the momentum function is multiplied by
    ``B-(w_q)^{-1}`` (evaluated at the on-shell energy of the spatial part),
    the weighting used to make the hole channel dominate.  The packet must
    then vanish wherever the enhancement would overflow (negative-frequency
    windows do).
    """

    def gfun(q4: np.ndarray) -> np.ndarray:
        vals = np.asarray(packet.fourier(q4), dtype=complex)
        if hole_enhanced:
            w = np.sqrt(np.sum(np.asarray(q4)[1:] ** 2, axis=0) + params.mass**2)
            mask = vals != 0
            vals = vals * inverse_minus_factor(w, params.beta, mask)
        return vals

    return OneParticleThermalState(
        gfun=gfun, params=params, packet=packet, hole_enhanced=hole_enhanced
    )


def _box_tol(packet: PacketSpec, tol: float | None) -> float:
    """Tail level at which momentum boxes are cut.

    Bump transforms decay like ``exp(-c sqrt(|k|))``: a deep tail cut puts
    the box edge tens of core widths out, which quadrature node counts
    cannot cover.  Their boxes are cut at a level sized for squared
    integrands (the neglected tail then contributes below ``1e-5``
    relative); fast gaussian decay affords a deep cut.
    """
    if tol is not None:
        return tol
    return 3e-3 if packet.kind == "bump-product" else 1e-5


def momentum_box(
    packet: PacketSpec, params: ThermalParams, tol: float | None = None
) -> np.ndarray:
    """Spatial momentum half-widths containing the on-shell support of ``g``.

    Per-axis reach where the transform drops below ``tol`` times its peak;
    the on-shell frequency factor gives an additional radial cut
    ``|k| <= sqrt(reach_0^2 - m^2)``.
    """
    if packet.kind == "momentum-window":
        hw = packet.momentum_halfwidths(8.0)
        freq_reach = np.sqrt(max(hw[0] ** 2 - params.mass**2, 0.0))
        box = np.minimum(hw[1:], freq_reach) if freq_reach > 0 else hw[1:] * 0 + 1e-3
        return np.maximum(box, 1e-3)
    tol = _box_tol(packet, tol)
    reach = np.array([packet.momentum_tail_reach(a, tol) for a in range(4)])
    freq_reach = np.sqrt(max(reach[0] ** 2 - params.mass**2, 0.0))
    box = np.minimum(reach[1:], max(freq_reach, 1e-3))
    return np.maximum(box, 1e-3)


def _resolve_kbox(state: OneParticleThermalState, spec: QuadratureSpec) -> np.ndarray:
    if state.packet is not None:
        box = momentum_box(state.packet, state.params)
        # never exceed a user-provided cutoff by default semantics: the spec
        # cutoff is an upper bound for the box
        cap = spec.box(3)
        return np.minimum(box, cap) if np.all(np.isfinite(cap)) else box
    return spec.box(3)


def _packet_grid(
    packet: PacketSpec | None, box: np.ndarray, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Momentum grid adapted to the packet transform.

    Bump transforms peak in a core of a few inverse widths but decay only
    like ``exp(-c sqrt(|k|))``, so their grids split each axis at the origin
    to cluster nodes in the core; gaussian and plateau-free integrands use a
    plain tensor grid.
    """
    if packet is not None and packet.kind == "bump-product":
        return tensor_grid_split(box, max(6, (3 * n) // 4))
    return tensor_grid(box, n)


# ---------------------------------------------------------------------------
# quadratic expectation engine
# ---------------------------------------------------------------------------

# term descriptors: (sk, sp); weights are selected by name
_TERMS = ((+1, +1), (-1, -1), (-1, +1), (+1, -1))

# nodes whose packet/smearing factor lies below this relative level are dropped
_TRIM = 1e-7


def thermal_core_radius(params: ThermalParams, tol: float = 3e-5) -> float:
    """Momentum radius beyond which all thermal weight corrections are below
    ``tol`` relative to their peak.

    The slowest-decaying correction factor is ``B+ B- <= e^{-beta w / 2}``,
    so the cut solves ``e^{-beta (w - m) / 2} = tol``.
    """
    w_cut = params.mass + 2.0 * np.log(1.0 / tol) / params.beta
    return float(np.sqrt(w_cut**2 - params.mass**2))


def _full_channel_weights(occ_k, occ_p, sk: int, sp: int, names):
    """Unsplit thermal weights (``B+^2 = 1 + n``, ``B-^2 = n``) per channel."""
    out = []
    for name in names:
        if name == "h":
            wk2 = 1.0 + occ_k if sk == +1 else occ_k
            wp2 = 1.0 + occ_p if sp == +1 else occ_p
            out.append(wk2 * wp2)
        elif name == "bath":
            out.append(np.sqrt(occ_k * (1.0 + occ_k) * occ_p * (1.0 + occ_p)))
        else:
            raise ValueError(f"unknown channel {name!r}")
    return out


def _pass_channel_weight(pass_kind, name, occ_k, occ_p, sk: int, sp: int):
    """Weight component routed to a given pass, or ``None`` when absent.

    The four-term weights split into a smooth vacuum part (the constant in
    ``B+^2 = 1 + n``), corrections carrying a factor ``n(w_k)`` (localized in
    the gridded ``k``), and the remaining pure ``n(w_p)`` pieces (localized
    in ``p``, integrated on a ``p``-parametrized grid).
    """
    if pass_kind == "full":
        return _full_channel_weights(occ_k, occ_p, sk, sp, [name])[0]
    if pass_kind == "big":
        if name == "h" and (sk, sp) == (+1, +1):
            return 1.0
        return None
    if pass_kind == "ksmall":
        if name == "h":
            return occ_k * (1.0 + occ_p) if sp == +1 else occ_k * occ_p
        return np.sqrt(occ_k * (1.0 + occ_k) * occ_p * (1.0 + occ_p))
    if pass_kind == "psmall":
        if name == "h" and sk == +1:
            return occ_p
        return None
    raise ValueError(f"unknown pass kind {pass_kind!r}")


def _engine_pass(
    state: OneParticleThermalState,
    f: PacketSpec,
    names,
    pass_kind: str,
    terms,
    main_grid,
    qgrid,
    chunk: int = 300_000,
) -> list[complex]:
    """One quadrature pass of the four-term double momentum integrals.

    ``main_grid`` holds the gridded momentum (``k`` for most passes, ``p``
    for the ``psmall`` pass); the other momentum is derived from it and the
    momentum transfer ``q``.  The smearing transform factorises into the
    precomputed spatial product on the ``q`` grid (``qgrid``) times a
    per-element time factor.  All requested channels accumulate in one sweep.
    """
    params = state.params
    mnodes, mwts = main_grid
    qn, fsw = qgrid
    grid_is_p = pass_kind == "psmall"

    amp = {s: state.onshell(mnodes, s) for s in (+1, -1)}
    mag = np.maximum(np.abs(amp[+1]), np.abs(amp[-1]))
    if pass_kind in ("ksmall", "psmall"):
        # every weight routed here carries at least e^{-beta w / 2} on the
        # gridded leg, so mask on the amplitude-weight product
        occ_main = occupation(params.omega(mnodes), params.beta)
        score = mag * np.sqrt(occ_main * (1.0 + occ_main))
        keep = score >= 3e-6 * np.max(score)
    else:
        keep = mag >= _TRIM * np.max(mag)
    mnodes, mwts = mnodes[:, keep], mwts[keep]
    amp = {s: amp[s][keep] for s in (+1, -1)}
    wom_main_all = params.omega(mnodes)
    occ_main_all = occupation(wom_main_all, params.beta)
    # a sign whose amplitude vanishes on the grid (one-sided frequency
    # windows) contributes to neither leg
    active = {s: bool(np.any(amp[s])) for s in (+1, -1)}

    totals = [0.0 + 0.0j for _ in names]
    mchunk = max(1, chunk // max(qn.shape[1], 1))
    for lo in range(0, mnodes.shape[1], mchunk):
        hi = min(lo + mchunk, mnodes.shape[1])
        m = mnodes[:, lo:hi]
        wom_m = wom_main_all[lo:hi][:, None]
        occ_m = occ_main_all[lo:hi][:, None]
        for sk, sp in terms:
            if not (active[sk] and active[sp]):
                continue
            if grid_is_p:
                # grid holds p; k = sk q + sk sp p from q = sk k - sp p
                other = sk * qn[:, None, :] + (sk * sp) * m[:, :, None]
                wom_o = np.sqrt(np.sum(other * other, axis=0) + params.mass**2)
                k4 = np.concatenate([sk * wom_o[None], sk * other])
                gk = np.conj(state.gfun(k4.reshape(4, -1)).reshape(wom_o.shape))
                gp = amp[sp][lo:hi][:, None]
                womk, womp = wom_o, wom_m
                occ_k, occ_p = occupation(wom_o, params.beta), occ_m
                dot = np.einsum("ai,aij->ij", m, other)
                freq = sk * wom_o - sp * wom_m
            else:
                other = (sk * sp) * m[:, :, None] - sp * qn[:, None, :]
                wom_o = np.sqrt(np.sum(other * other, axis=0) + params.mass**2)
                k4 = np.concatenate([sp * wom_o[None], sp * other])
                gp = state.gfun(k4.reshape(4, -1)).reshape(wom_o.shape)
                gk = np.conj(amp[sk][lo:hi])[:, None]
                womk, womp = wom_m, wom_o
                occ_k, occ_p = occ_m, occupation(wom_o, params.beta)
                dot = np.einsum("ai,aij->ij", m, other)
                freq = sk * wom_m - sp * wom_o
            eps = (sk * sp) * (womk * womp + dot) + params.mass**2
            base = (
                mwts[lo:hi][:, None]
                * gk
                * gp
                * eps
                * f.time_fourier(freq)
                * fsw[None, :]
                / (4.0 * womk * womp)
            )
            for i, name in enumerate(names):
                wgt = _pass_channel_weight(pass_kind, name, occ_k, occ_p, sk, sp)
                if wgt is not None:
                    totals[i] = totals[i] + np.sum(base * wgt)
    return [t / TWO_PI_CUBED**2 for t in totals]


def _window_shell_grid(state: OneParticleThermalState, n: int):
    """Spherical shell grid over the on-shell support of a momentum window.

    The radial rule is dense toward the shell edges, resolving both the
    window profile and any exponential (thermal or hole-enhancement) radial
    weight at scale ``1/beta``.
    """
    lo, hi = state.packet.window
    m = state.params.mass
    w_lo, w_hi = min(abs(lo), abs(hi)), max(abs(lo), abs(hi))
    r_lo = float(np.sqrt(max(w_lo**2 - m**2, 0.0)))
    r_hi = float(np.sqrt(max(w_hi**2 - m**2, 0.0)))
    if r_hi <= r_lo + 1e-12:
        r_hi = r_lo + 1e-3
    n_ang = max(10, (3 * n) // 4)
    return spherical_shell_grid(
        r_lo, r_hi, n_r=max(48, 3 * n), n_theta=n_ang, n_phi=2 * n_ang
    )


def _engine_tensor(
    state: OneParticleThermalState,
    f: PacketSpec,
    names,
    kbox: np.ndarray,
    qbox: np.ndarray,
    nk: int,
    nq: int,
) -> list[complex]:
    """Tensor evaluation combining the vacuum/thermal two-scale passes.

    Momentum-window states (whose radial structure is exponential at scale
    ``1/beta``) integrate in one pass over a dense spherical shell grid;
    smooth position packets use the split: a packet-scale vacuum pass plus
    small dense grids for the thermally localized corrections.
    """
    params = state.params
    qnodes, qwts = tensor_grid(qbox, nq)
    fsw = f.spatial_fourier(qnodes) * qwts
    keep_q = np.abs(fsw) >= _TRIM * np.max(np.abs(fsw))
    qgrid = (qnodes[:, keep_q], fsw[keep_q])

    packet = state.packet
    windowed = packet is not None and packet.kind == "momentum-window"
    if windowed:
        main = _window_shell_grid(state, nk)
        return _engine_pass(state, f, names, "full", _TERMS, main, qgrid)
    if packet is None or state.hole_enhanced:
        main = _packet_grid(packet, kbox, nk)
        return _engine_pass(state, f, names, "full", _TERMS, main, qgrid)

    totals = _engine_pass(
        state, f, names, "big", ((+1, +1),), _packet_grid(packet, kbox, nk), qgrid
    )
    sbox = np.minimum(kbox, thermal_core_radius(params))
    small = tensor_grid_split(sbox, max(5, (3 * nk) // 8 + 2))
    for i, v in enumerate(_engine_pass(state, f, names, "ksmall", _TERMS, small, qgrid)):
        totals[i] += v
    for i, v in enumerate(
        _engine_pass(state, f, names, "psmall", ((+1, +1), (+1, -1)), small, qgrid)
    ):
        totals[i] += v
    return totals


def _engine_qmc(
    state: OneParticleThermalState,
    f: PacketSpec,
    names,
    kbox: np.ndarray,
    qbox: np.ndarray,
    spec: QuadratureSpec,
) -> list[tuple[complex, float]]:
    params = state.params
    vol = float(np.prod(2 * kbox) * np.prod(2 * qbox))
    n_samples = 1 << max(10, int(spec.points))
    box6 = np.concatenate([kbox, qbox])
    estimates = [[] for _ in names]
    for rep in range(spec.replicates):
        sampler = qmc.Sobol(d=6, scramble=True, seed=spec.seed + rep)
        u = sampler.random(n_samples).T
        nodes = (2.0 * u - 1.0) * box6[:, None]
        k, q = nodes[:3], nodes[3:]
        womk = params.omega(k)
        fspat = f.spatial_fourier(q)
        acc = [np.zeros(n_samples, dtype=complex) for _ in names]
        for sk, sp in _TERMS:
            p = (sk * sp) * k - sp * q
            womp = params.omega(p)
            gk = np.conj(state.onshell(k, sk))
            gp = state.gfun(np.concatenate([sp * womp[None], sp * p]))
            eps = (sk * sp) * (womk * womp + np.sum(k * p, axis=0)) + params.mass**2
            fhat = f.time_fourier(sk * womk - sp * womp) * fspat
            base = gk * gp * eps * fhat / (4.0 * womk * womp)
            occ_k, occ_p = occupation(womk, params.beta), occupation(womp, params.beta)
            for i, wgt in enumerate(
                _full_channel_weights(occ_k, occ_p, sk, sp, names)
            ):
                acc[i] += base * wgt
        for i in range(len(names)):
            estimates[i].append(vol * np.mean(acc[i]) / TWO_PI_CUBED**2)
    out = []
    for est in estimates:
        est = np.array(est)
        err = float(np.std(est.real) + np.std(est.imag)) / np.sqrt(len(est))
        out.append((complex(np.mean(est)), 3.0 * err))
    return out


def _smearing_qbox(f: PacketSpec, kbox: np.ndarray, tol: float = 3e-4) -> np.ndarray:
    """Spatial box for the momentum-transfer grid.

    Bounded by the smearing tail reach and by ``2 kbox`` (the transfer of two
    on-shell momenta inside the packet support).
    """
    reach = np.array([f.momentum_tail_reach(a, tol) for a in (1, 2, 3)])
    return np.maximum(np.minimum(reach, 2.05 * np.asarray(kbox)), 1e-3)


def _transfer_nodes(
    f: PacketSpec,
    qbox: np.ndarray,
    floor: int,
    shift: np.ndarray | None = None,
    cap: int = 40,
) -> int:
    """Node count resolving the oscillation of the smearing transform.

    Bump transforms oscillate with zero spacing ``pi`` in ``w*q``; Gaussian
    transforms are monotone and need only the envelope resolved.  ``shift``
    adds the phase oscillation from a spatial offset between the smearing
    centre and the state packets (zero spacing ``2 pi / shift`` in ``q``).
    """
    count = 0.0
    for a in (1, 2, 3):
        w = float(f.widths[a])
        if f.kind == "bump-product":
            osc = 2.0 * w * float(qbox[a - 1]) / np.pi
        else:
            # gaussian: nodes must resolve the transform envelope, whose
            # product with the packet leg is narrower than the box suggests
            osc = w * float(qbox[a - 1])
        if shift is not None:
            osc += abs(float(shift[a - 1])) * float(qbox[a - 1]) / np.pi
        count = max(count, osc)
    return int(np.clip(np.ceil(10 + 2.0 * count), floor, cap))


def _quadratic_expectation_multi(state, f, names, spec: QuadratureSpec):
    if not np.isrealobj(np.asarray(f.amplitude)):
        raise ValueError("smearing function must be real")
    kbox = _resolve_kbox(state, spec)
    qbox = _smearing_qbox(f, kbox)
    results = []
    if spec.scheme == "qmc":
        for val, err in _engine_qmc(state, f, names, kbox, qbox, spec):
            results.append((val, err))
    else:
        nk = spec.points
        nq = _transfer_nodes(f, qbox, floor=max(10, (2 * spec.points) // 3))
        fine = _engine_tensor(state, f, names, kbox, qbox, nk, nq)
        # the coarse companion varies only the momentum grids: the transfer
        # grid is sized from the oscillation count of the smearing transform
        coarse = _engine_tensor(state, f, names, kbox, qbox, max(4, (3 * nk) // 4), nq)
        results = [(v, abs(v - c)) for v, c in zip(fine, coarse)]
    out = []
    for val, err in results:
        if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)) + 10 * err:
            raise ArithmeticError(f"expectation has a large imaginary part: {val!r}")
        out.append((float(val.real), float(err)))
    return out


def h_expectation(state: OneParticleThermalState, f: PacketSpec, spec: QuadratureSpec):
    """``(psi, h(f) psi)`` for the energy density ``h`` smeared with real ``f``."""
    return _quadratic_expectation_multi(state, f, ["h"], spec)[0]


def bath_h_expectation(state: OneParticleThermalState, f: PacketSpec, spec: QuadratureSpec):
    """``(psi, J h(f) J psi)``: the bath copy of the energy density."""
    return _quadratic_expectation_multi(state, f, ["bath"], spec)[0]


def ell_expectation(state: OneParticleThermalState, f: PacketSpec, spec: QuadratureSpec):
    """Liouvillian density expectation: returns dict with h, bath and ell = h - bath."""
    (h, errh), (b, errb) = _quadratic_expectation_multi(state, f, ["h", "bath"], spec)
    return {"h": h, "bath": b, "ell": h - b, "err": errh + errb}


# ---------------------------------------------------------------------------
# norms and Wick four-point values
# ---------------------------------------------------------------------------

def _norm_points(spec: QuadratureSpec) -> int:
    """Node count for the cheap single momentum integrals (norms)."""
    return max(24, int(spec.points))


def _single_momentum_integral(
    state: OneParticleThermalState, spec: QuadratureSpec, full_fn, vac_fn, n: int
):
    """``int d3k/(2pi)^3`` of a thermally weighted density.

    Position packets integrate the vacuum part (no occupation factors) on
    the packet-scale grid plus the thermally localized remainder on a small
    origin-split grid; momentum windows use a dense spherical shell grid.
    """
    params = state.params
    packet = state.packet
    kbox = _resolve_kbox(state, spec)
    if packet is not None and packet.kind == "momentum-window":
        nodes, wts = _window_shell_grid(state, n)
        return np.sum(wts * full_fn(nodes)) / TWO_PI_CUBED
    if packet is None or state.hole_enhanced:
        nodes, wts = _packet_grid(packet, kbox, n)
        return np.sum(wts * full_fn(nodes)) / TWO_PI_CUBED
    big_nodes, big_wts = _packet_grid(packet, kbox, n)
    total = np.sum(big_wts * vac_fn(big_nodes))
    sbox = np.minimum(kbox, thermal_core_radius(params))
    s_nodes, s_wts = tensor_grid_split(sbox, max(6, (3 * n) // 4))
    total = total + np.sum(s_wts * (full_fn(s_nodes) - vac_fn(s_nodes)))
    return total / TWO_PI_CUBED


def _norm_pair(state, spec, full_fn, vac_fn):
    n = _norm_points(spec)
    fine = _single_momentum_integral(state, spec, full_fn, vac_fn, n)
    coarse = _single_momentum_integral(state, spec, full_fn, vac_fn, max(4, (3 * n) // 4))
    return float(np.real(fine)), abs(fine - coarse)


def state_norm(state: OneParticleThermalState, spec: QuadratureSpec):
    """``||phi(g) Omega||^2`` = particle + hole amplitude mass."""
    params = state.params

    def full(k):
        w = params.omega(k)
        occ = occupation(w, params.beta)
        gp, gm = state.onshell(k, +1), state.onshell(k, -1)
        return ((1.0 + occ) * np.abs(gp) ** 2 + occ * np.abs(gm) ** 2) / (2 * w)

    def vac(k):
        w = params.omega(k)
        return np.abs(state.onshell(k, +1)) ** 2 / (2 * w)

    return _norm_pair(state, spec, full, vac)


def hole_dominance(state: OneParticleThermalState, spec: QuadratureSpec):
    """``||phi(g)* Omega||^2``: the norm with particle/hole weights swapped."""
    params = state.params

    def full(k):
        w = params.omega(k)
        occ = occupation(w, params.beta)
        gp, gm = state.onshell(k, +1), state.onshell(k, -1)
        return (occ * np.abs(gp) ** 2 + (1.0 + occ) * np.abs(gm) ** 2) / (2 * w)

    def vac(k):
        w = params.omega(k)
        return np.abs(state.onshell(k, -1)) ** 2 / (2 * w)

    return _norm_pair(state, spec, full, vac)


def _field_coeff_pairs(gfun, params: ThermalParams, tilde: bool, vacuum: bool = False):
    """Annihilation/creation coefficient callables (per species) of phi(g).

    Coefficients are reported without the common ``1/sqrt(2w)`` factor, which
    the two-point routine applies once per field.  With ``vacuum`` the
    thermal factors are replaced by their zero-temperature limits
    ``B+ -> 1, B- -> 0``.
    """

    def coeffs(k: np.ndarray):
        w = params.omega(k)
        if vacuum:
            bp, bm = np.ones_like(w), np.zeros_like(w)
        else:
            bp = thermal_factor(+1, w, params.beta)
            bm = thermal_factor(-1, w, params.beta)
        gp = gfun(np.concatenate([w[None], k]))
        gm = gfun(np.concatenate([-w[None], -k]))
        if not tilde:
            return {
                "a": (bm * gp, bm * gm),  # (annihilation, creation) coefficients
                "b": (bp * gm, bp * gp),
            }
        return {
            "a": (bp * gp, bp * gm),
            "b": (bm * gm, bm * gp),
        }

    return coeffs


def smeared_two_point(op1, op2, state: OneParticleThermalState, spec, n: int) -> complex:
    """``(Omega, F1 F2 Omega)`` for smeared fields given as (full, vacuum)
    coefficient callable pairs."""
    params = state.params

    def make(c1, c2):
        def fn(k):
            w = params.omega(k)
            d1, d2 = c1(k), c2(k)
            return sum(d1[s][0] * d2[s][1] for s in ("a", "b")) / (2 * w)

        return fn

    return _single_momentum_integral(
        state, spec, make(op1[0], op2[0]), make(op1[1], op2[1]), n
    )


def exact_l4_sq(state: OneParticleThermalState, spec: QuadratureSpec):
    """Exact ``||phi(g) Omega||_4^2 = ||phi(g) J phi(g) J Omega||`` via Wick.

    The squared value is the quasi-free four-point function
    ``(Omega, O1 O2 O3 O4 Omega)`` with ``O = (Jphi(g)J, phi(gbar),
    phi(g), Jphi(gbar)J)``, summed over the three pairings of thermal
    two-point functions.  Works for complex packets.
    """
    params = state.params

    gfun = state.gfun

    def gbar(q4):
        return np.conj(gfun(-np.asarray(q4)))

    ops = [
        (
            _field_coeff_pairs(g, params, tilde=t),
            _field_coeff_pairs(g, params, tilde=t, vacuum=True),
        )
        for g, t in ((gfun, True), (gbar, False), (gfun, False), (gbar, True))
    ]

    def w2(i, j, n):
        return smeared_two_point(ops[i], ops[j], state, spec, n)

    def four_point(n):
        return (
            w2(0, 1, n) * w2(2, 3, n)
            + w2(0, 2, n) * w2(1, 3, n)
            + w2(0, 3, n) * w2(1, 2, n)
        )

    fine = four_point(_norm_points(spec))
    coarse = four_point(max(4, (3 * _norm_points(spec)) // 4))
    if abs(fine.imag) > 1e-8 * max(1.0, abs(fine.real)):
        raise ArithmeticError("four-point value has a large imaginary part")
    val = fine.real
    if val < 0:
        raise ArithmeticError("four-point value must be nonnegative")
    return float(np.sqrt(val)), abs(np.sqrt(max(coarse.real, 0.0)) - np.sqrt(val))


def l4_proxy(state: OneParticleThermalState, spec: QuadratureSpec, exact: bool = False):
    """``sqrt(6) ||psi||^2`` upper bound for ``||psi||_4^2`` (optionally exact)."""
    n2, err = state_norm(state, spec)
    proxy = np.sqrt(6.0) * n2
    out = {"norm_sq": n2, "proxy": proxy, "err": np.sqrt(6.0) * err}
    if exact:
        val, err4 = exact_l4_sq(state, spec)
        if val > proxy + 10 * (err4 + out["err"]):
            raise ArithmeticError("exact L4 value exceeds its proxy bound")
        out["exact"] = val
        out["exact_err"] = err4
    return out


def massless_norm_limit(chi: PacketSpec, spec: QuadratureSpec):
    """Scaling limit of the rescaled norms: ``int |chi_hat(|k|, k)|^2 / (2|k|)``."""
    if chi.kind == "momentum-window":
        raise ValueError("the massless limit applies to position-space packets")
    tol = _box_tol(chi, None)
    reach = np.array([chi.momentum_tail_reach(a, tol) for a in range(4)])
    box = np.maximum(np.minimum(reach[1:], max(reach[0], 1e-3)), 1e-3)
    cap = spec.box(3)
    box = np.minimum(box, cap)

    def density(k):
        r = np.sqrt(np.sum(k * k, axis=0))
        r = np.maximum(r, 1e-12)
        vals = chi.fourier(np.concatenate([r[None], k]))
        return np.abs(vals) ** 2 / (2 * r)

    n = _norm_points(spec)
    nodes, wts = _packet_grid(chi, box, n)
    fine = np.sum(wts * density(nodes))
    cnodes, cwts = _packet_grid(chi, box, max(4, (3 * n) // 4))
    coarse = np.sum(cwts * density(cnodes))
    return float(fine) / TWO_PI_CUBED, abs(fine - coarse) / TWO_PI_CUBED


# ---------------------------------------------------------------------------
# kernel identities of the formal Liouvillian
# ---------------------------------------------------------------------------

def liouville_cancellation_check(params: ThermalParams, n_samples: int = 64, seed: int = 5):
    """Max residuals of the three kernel cancellations of the formal ell density.

    (i)  the pair-channel polynomial ``-w_k w_p - k.p + m^2`` at ``p = -k``;
    (ii) the mixed-species weight ``B-(w_k) B+(w_p) - B+(w_k) B-(w_p)`` at ``p = k``;
    (iii) the diagonal weight ``w_k (B+^2 - B-^2) - w_k``.
    """
    rng = np.random.default_rng(seed)
    k = rng.normal(scale=3.0, size=(3, n_samples))
    w = params.omega(k)
    res_pair = np.abs(-w * w - np.sum(k * (-k), axis=0) + params.mass**2)
    bp = thermal_factor(+1, w, params.beta)
    bm = thermal_factor(-1, w, params.beta)
    res_mixed = np.abs(bm * bp - bp * bm)
    res_diag = np.abs(w * (bp**2 - bm**2) - w)
    return {
        "pair_channel": float(res_pair.max() / np.max(w * w)),
        "mixed_channel": float(res_mixed.max()),
        "diagonal": float(res_diag.max() / np.max(w)),
    }


# ---------------------------------------------------------------------------
# scaling scans
# ---------------------------------------------------------------------------

def _center_f_at_origin(f: PacketSpec) -> PacketSpec:
    if f.kind == "momentum-window":
        raise ValueError("smearing functions must be position-space packets")
    if any(abs(c) > 0 for c in f.center):
        f = PacketSpec(
            kind=f.kind,
            center=(0.0, 0.0, 0.0, 0.0),
            widths=f.widths,
            amplitude=f.amplitude,
            power=f.power,
        )
    return f


def scan_l4_violation(
    chi: PacketSpec,
    f: PacketSpec,
    lambdas,
    params: ThermalParams,
    spec: QuadratureSpec,
    exact_l4: bool = False,
) -> list[dict]:
    """Scaling scan for the L4 lower-bound violation.

    For ``g_lam(x) = lam^3 chi(lam x)`` the L4 proxy ``sqrt(6)||psi||^2``
    approaches a finite limit while the smeared energy density grows, so the
    ratio ``h / proxy`` increases without bound.
    """
    f = _center_f_at_origin(f)
    if abs(f((0.0, 0.0, 0.0, 0.0))) <= 0:
        raise ValueError("smearing function must be positive at the origin")
    limit, limit_err = massless_norm_limit(chi, spec)
    rows = []
    for lam in lambdas:
        g = chi.scale_translate(float(lam))
        state = one_particle_state(g, params)
        norms = l4_proxy(state, spec, exact=exact_l4)
        parts = ell_expectation(state, f, spec)
        rows.append(
            {
                "lam": float(lam),
                "norm_sq": norms["norm_sq"],
                "l4_proxy": norms["proxy"],
                "l4_exact": norms.get("exact", float("nan")),
                "h_term": parts["h"],
                "bath_term": parts["bath"],
                "ell": parts["ell"],
                "ratio": parts["h"] / norms["proxy"],
                "norm_limit": limit,
                "err": parts["err"] + norms["err"],
            }
        )
    return rows


def scan_l2_violation(
    window: PacketSpec,
    f: PacketSpec,
    lambdas,
    params: ThermalParams,
    spec: QuadratureSpec,
) -> list[dict]:
    """Scaling scan for the L2 lower-bound violation.

    The packet is a negative-frequency momentum window with hole enhancement
    ``B-(w)^{-1}``: the state norm stays bounded, the system energy term
    decays, the bath term grows without bound, and the swapped-weight norm
    (hole dominance) diverges.
    """
    if window.kind != "momentum-window":
        raise ValueError("the L2 scan needs a momentum-window packet")
    lo, hi = window.window
    if hi >= 0:
        raise ValueError("the window must be supported at negative frequencies")
    f = _center_f_at_origin(f)
    rows = []
    for lam in lambdas:
        g = window.scale_translate(float(lam))
        state = one_particle_state(g, params, hole_enhanced=True)
        n2, nerr = state_norm(state, spec)
        star, serr = hole_dominance(state, spec)
        l4sq, l4err = exact_l4_sq(state, spec)
        parts = ell_expectation(state, f, spec)
        rows.append(
            {
                "lam": float(lam),
                "norm_sq": n2,
                "adjoint_norm_sq": star,
                "l4_exact": l4sq,
                "h_term": parts["h"],
                "bath_term": parts["bath"],
                "ell": parts["ell"],
                "ratio": parts["ell"] / n2,
                "err": parts["err"] + nerr + serr + l4err,
            }
        )
    return rows
