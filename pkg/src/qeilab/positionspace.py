"""Position-space evaluation of smeared quadratic densities via the FFT.

These pipelines are deliberately independent of the momentum-space kernel
engine: densities are assembled pointwise on a spatial lattice from the
position profiles of the state and integrated against the smearing function
with Gauss nodes in time and the trapezoid lattice sum in space.  They serve
as structural cross-checks (the integrands are manifestly sign-definite
channel by channel) and as an equivalence oracle for the kernel route.

All transforms use centred cubic grids: ``x_j = (j - n/2) dx`` and the dual
``k_m = (m - n/2) dk`` with ``dk = 2 pi / (n dx)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .packets import PacketSpec
from .quadrature import gauss_segment
from .thermal import (
    OneParticleThermalState,
    ThermalParams,
    thermal_factor,
)

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# centred discrete Fourier sums
# ---------------------------------------------------------------------------

def centered_axis(step: float, n: int) -> np.ndarray:
    return (np.arange(n) - n // 2) * step


def dual_step(step: float, n: int) -> float:
    return TWO_PI / (n * step)


def centered_dft3(values: np.ndarray, step: float, sign: int) -> np.ndarray:
    """``step^3 * sum_j values_j exp(i sign k_m . x_j)`` on the dual grid.

    ``values`` lives on the centred cubic grid with spacing ``step``; the
    output lives on the centred dual grid with spacing ``dual_step``.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    n = values.shape[0]
    if values.shape != (n, n, n):
        raise ValueError("values must be a cubic array")
    j = np.arange(n)
    flip = (-1.0) ** j
    pre = values * flip[:, None, None] * flip[None, :, None] * flip[None, None, :]
    if sign == -1:
        raw = np.fft.fftn(pre)
    else:
        raw = np.fft.ifftn(pre) * n**3
    out = raw * flip[:, None, None] * flip[None, :, None] * flip[None, None, :]
    phase = np.exp(1j * sign * np.pi * n / 2.0) ** 3
    return out * (step**3) * phase


def direct_dft3(values: np.ndarray, step: float, sign: int) -> np.ndarray:
    """Reference triple sum for :func:`centered_dft3` (small grids only)."""
    n = values.shape[0]
    x = centered_axis(step, n)
    k = centered_axis(dual_step(step, n), n)
    ph = np.exp(1j * sign * np.outer(k, x))
    return step**3 * np.einsum("ma,nb,pc,abc->mnp", ph, ph, ph, values)


# ---------------------------------------------------------------------------
# lattice geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSpec:
    """Cubic momentum lattice (side ``2 kmax``, ``n`` nodes per axis)."""

    kmax: float
    n: int = 48
    n_time: int = 12

    def __post_init__(self) -> None:
        if self.kmax <= 0 or self.n < 4 or self.n_time < 2:
            raise ValueError("invalid lattice parameters")

    @property
    def kstep(self) -> float:
        return 2.0 * self.kmax / self.n

    @property
    def xstep(self) -> float:
        return dual_step(self.kstep, self.n)

    def momentum_mesh(self) -> np.ndarray:
        ax = centered_axis(self.kstep, self.n)
        return np.stack(np.meshgrid(ax, ax, ax, indexing="ij"))

    def position_mesh(self) -> np.ndarray:
        ax = centered_axis(self.xstep, self.n)
        return np.stack(np.meshgrid(ax, ax, ax, indexing="ij"))


def position_halfwidth(packet: PacketSpec, nsig: float = 8.0) -> np.ndarray:
    """Half-extent of the packet's essential support around its centre."""
    w = np.asarray(packet.widths, dtype=float)
    if packet.kind == "bump-product":
        return w
    if packet.kind == "gaussian":
        return nsig * w
    raise ValueError("position support is defined for position-space packets")


def _time_nodes(f: PacketSpec, n_time: int):
    half = position_halfwidth(f)[0]
    c0 = float(f.center[0])
    return gauss_segment(c0 - half, c0 + half, n_time)


def _smearing_values(f: PacketSpec, t: float, xmesh: np.ndarray) -> np.ndarray:
    pts = np.concatenate([np.full((1,) + xmesh.shape[1:], t), xmesh])
    return np.real(f(pts))


# ---------------------------------------------------------------------------
# thermal densities
# ---------------------------------------------------------------------------

def _thermal_weight(kind: str, sign: int, omega: np.ndarray, beta: float):
    if kind == "h":
        return thermal_factor(sign, omega, beta) ** 2
    if kind == "bath":
        return thermal_factor(+1, omega, beta) * thermal_factor(-1, omega, beta)
    raise ValueError(kind)


def thermal_position_expectation(
    state: OneParticleThermalState,
    f: PacketSpec,
    lattice: LatticeSpec,
    kind: str = "h",
) -> float:
    """Expectation of the smeared thermal density via the position pipeline.

    ``kind`` is ``"h"`` (energy density), ``"bath"`` (its modular conjugate)
    or ``"ell"`` (their difference).  The integrand is assembled per time
    slice as ``sum_mu |G_mu|^2 + m^2 |G|^2`` from the weighted on-shell
    position profiles of the state, which makes the ``h`` and ``bath``
    contributions manifestly nonnegative for a nonnegative smearing.
    """
    if kind == "ell":
        h = thermal_position_expectation(state, f, lattice, "h")
        b = thermal_position_expectation(state, f, lattice, "bath")
        return h - b
    params = state.params
    kmesh = lattice.momentum_mesh()
    omega = params.omega(kmesh.reshape(3, -1)).reshape(kmesh.shape[1:])
    xmesh = lattice.position_mesh()
    nodes, wts = _time_nodes(f, lattice.n_time)

    # frequency-sign components of the weighted amplitude
    comps = {}
    for s in (+1, -1):
        k4 = np.concatenate([(s * omega)[None], s * kmesh]).reshape(4, -1)
        amp = state.gfun(k4).reshape(omega.shape)
        amp = amp * _thermal_weight(kind, s, omega, params.beta) / (2.0 * omega)
        comps[s] = amp

    total = 0.0
    mass2 = params.mass**2
    dv = lattice.xstep**3
    for t, gw in zip(nodes, wts):
        channels = [np.zeros((lattice.n,) * 3, dtype=complex) for _ in range(5)]
        for s in (+1, -1):
            phase_t = np.exp(-1j * s * omega * t)
            base = comps[s] * phase_t
            # e^{-i s khat.x} has spatial phase e^{+i s k.x}
            channels[0] += centered_dft3(base * (s * omega), lattice.kstep, s)
            for a in range(3):
                channels[1 + a] += centered_dft3(
                    base * (s * kmesh[a]), lattice.kstep, s
                )
            channels[4] += centered_dft3(base, lattice.kstep, s)
        for ch in channels:
            ch /= TWO_PI**3
        dens = sum(np.abs(ch) ** 2 for ch in channels[:4])
        dens = dens + mass2 * np.abs(channels[4]) ** 2
        fval = _smearing_values(f, t, xmesh)
        total += gw * dv * float(np.sum(fval * dens))
    return total


# ---------------------------------------------------------------------------
# vacuum wedge densities
# ---------------------------------------------------------------------------

def _vacuum_profiles(g: PacketSpec, mass: float, lattice: LatticeSpec, t: float):
    """On-shell profile factors (amp, omega, kmesh) at time t for the packet."""
    kmesh = lattice.momentum_mesh()
    flat = kmesh.reshape(3, -1)
    omega = np.sqrt(flat[0] ** 2 + flat[1] ** 2 + flat[2] ** 2 + mass**2).reshape(
        kmesh.shape[1:]
    )
    k4 = np.concatenate([omega[None], kmesh]).reshape(4, -1)
    amp = g.fourier(k4).reshape(omega.shape) / (2.0 * omega)
    return amp * np.exp(-1j * omega * t), omega, kmesh


def kappa_position_expectation(
    g: PacketSpec,
    f: PacketSpec,
    mass: float,
    lattice: LatticeSpec,
) -> dict:
    """Wedge boost density expectation via the lightcone-channel pipeline.

    Returns the per-channel integrals ``2 int f w_c |G_c|^2`` (keys
    ``d2, d3, m, v, u``) and their sum (key ``total``).  On test functions
    supported in the right wedge every channel weight is nonnegative.
    """
    xmesh = lattice.position_mesh()
    nodes, wts = _time_nodes(f, lattice.n_time)
    dv = lattice.xstep**3
    names = ("d2", "d3", "m", "v", "u")
    totals = dict.fromkeys(names, 0.0)
    for t, gw in zip(nodes, wts):
        amp, omega, kmesh = _vacuum_profiles(g, mass, lattice, t)
        # annihilation phase e^{-i khat.x}: spatial sign +1
        derivs = {
            "d2": 1j * kmesh[1],
            "d3": 1j * kmesh[2],
            "m": mass * np.ones_like(omega) * (1.0 + 0.0j),
            "v": -1j * (omega + kmesh[0]),
            "u": -1j * (omega - kmesh[0]),
        }
        fval = _smearing_values(f, t, xmesh)
        weights = {
            "d2": 0.5 * xmesh[0],
            "d3": 0.5 * xmesh[0],
            "m": 0.5 * xmesh[0],
            "v": 0.25 * (t + xmesh[0]),
            "u": 0.25 * (xmesh[0] - t),
        }
        for name in names:
            prof = centered_dft3(amp * derivs[name], lattice.kstep, +1) / TWO_PI**3
            totals[name] += gw * dv * 2.0 * float(
                np.sum(fval * weights[name] * np.abs(prof) ** 2)
            )
    out = dict(totals)
    out["total"] = float(sum(totals.values()))
    return out


def boost_moment_expectation(g: PacketSpec, mass: float, lattice: LatticeSpec) -> float:
    """Boost generator matrix element via the first-moment of the energy
    density on the time-zero slice: ``int x1 <:T00:(0, x)> d^3x``."""
    amp, omega, kmesh = _vacuum_profiles(g, mass, lattice, 0.0)
    xmesh = lattice.position_mesh()
    dens = np.zeros((lattice.n,) * 3)
    factors = [-1j * omega, 1j * kmesh[0], 1j * kmesh[1], 1j * kmesh[2]]
    for fac in factors:
        prof = centered_dft3(amp * fac, lattice.kstep, +1) / TWO_PI**3
        dens += np.abs(prof) ** 2
    prof = centered_dft3(amp, lattice.kstep, +1) / TWO_PI**3
    dens += mass**2 * np.abs(prof) ** 2
    return float(np.sum(xmesh[0] * dens) * lattice.xstep**3)


def lattice_for_packet(
    g: PacketSpec, f: PacketSpec, n: int = 48, n_time: int = 12, nsig: float = 8.0
) -> LatticeSpec:
    """Lattice sized so the dual box covers the support of both packets.

    The momentum reach must resolve the packet transform; the position box
    (fixed by the uncertainty tradeoff of the grid) must cover the smearing
    support, which bounds the usable node count from below.
    """
    khw = g.momentum_halfwidths(nsig=nsig)
    kmax = float(np.max(khw[1:]))
    lat = LatticeSpec(kmax=kmax, n=n, n_time=n_time)
    xneed = position_halfwidth(f, nsig=nsig)[1:] + np.abs(
        np.asarray(f.center[1:], dtype=float)
    )
    xneed = float(np.max(xneed)) + float(
        np.max(np.abs(np.asarray(g.center[1:], dtype=float)))
    )
    have = lat.xstep * n / 2.0
    if have < xneed:
        grow = int(np.ceil(n * xneed / have / 2.0)) * 2
        lat = LatticeSpec(kmax=kmax, n=grow, n_time=n_time)
    return lat
