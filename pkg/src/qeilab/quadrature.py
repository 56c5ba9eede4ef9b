"""Deterministic quadrature over rectangular momentum boxes.

All schemes are reproducible: Gauss-Legendre nodes are a pure function of the
requested order, and the quasi-Monte-Carlo scheme uses seeded scrambled Sobol
points.  Accumulation relies on numpy's pairwise summation, which is
deterministic for a fixed evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import qmc

SCHEMES = ("tensor-gauss", "adaptive", "qmc")


class ToleranceNotMet(RuntimeError):
    """Raised when the adaptive scheme cannot reach the requested tolerance."""

    def __init__(self, message: str, best: float, err_estimate: float):
        super().__init__(message)
        self.best = best
        self.err_estimate = err_estimate


@dataclass(frozen=True)
class QuadratureSpec:
    """How to integrate over the box ``prod_a [-cutoff_a, cutoff_a]``."""

    scheme: str = "tensor-gauss"
    points: int = 24
    cutoff: float | tuple[float, ...] = 10.0
    target_rel_tol: float = 1e-8
    max_refinements: int = 6
    seed: int = 2024
    replicates: int = 8

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.points < 2:
            raise ValueError("need at least two points per axis")

    def box(self, dim: int) -> np.ndarray:
        c = self.cutoff
        if np.isscalar(c):
            return np.full(dim, float(c))
        c = np.asarray(c, dtype=float)
        if c.size != dim:
            raise ValueError(f"cutoff has {c.size} entries, expected {dim}")
        return c

    def with_cutoff(self, cutoff) -> "QuadratureSpec":
        if not np.isscalar(cutoff):
            cutoff = tuple(float(v) for v in np.asarray(cutoff).ravel())
        return replace(self, cutoff=cutoff)


@lru_cache(maxsize=256)
def gauss_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    return x, w


def gauss_segment(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = gauss_rule(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def tensor_grid(box: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss grid on ``prod [-box_a, box_a]``: nodes (dim, N), weights (N,)."""
    axes, wts = [], []
    for c in box:
        x, w = gauss_segment(-c, c, n)
        axes.append(x)
        wts.append(w)
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids])
    weight = np.ones(nodes.shape[1])
    wgrids = np.meshgrid(*wts, indexing="ij")
    for wg in wgrids:
        weight = weight * wg.ravel()
    return nodes, weight


def tensor_grid_split(box: np.ndarray, n_half: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss grid with each axis split at zero (2 * n_half nodes per axis).

    Splitting clusters nodes around the origin, resolving integrands with a
    sharp feature there (thermal occupation factors) on a wide box.
    """
    axes, wts = [], []
    for c in box:
        xl, wl = gauss_segment(-c, 0.0, n_half)
        xr, wr = gauss_segment(0.0, c, n_half)
        axes.append(np.concatenate([xl, xr]))
        wts.append(np.concatenate([wl, wr]))
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids])
    weight = np.ones(nodes.shape[1])
    for wg in np.meshgrid(*wts, indexing="ij"):
        weight = weight * wg.ravel()
    return nodes, weight


def spherical_shell_grid(
    r_lo: float, r_hi: float, n_r: int, n_theta: int, n_phi: int
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature for ``int d3k`` over the shell ``r_lo <= |k| <= r_hi``.

    Gauss radial nodes (dense toward both shell edges), Gauss nodes in
    ``cos(theta)`` and a uniform periodic rule in ``phi``.  Returns nodes of
    shape (3, N) and weights including the ``r^2`` Jacobian.
    """
    if not 0.0 <= r_lo < r_hi:
        raise ValueError("need 0 <= r_lo < r_hi")
    r, wr = gauss_segment(r_lo, r_hi, n_r)
    ct, wt = gauss_segment(-1.0, 1.0, n_theta)
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    wphi = 2.0 * np.pi / n_phi
    st = np.sqrt(1.0 - ct**2)
    rg, cg, pg = np.meshgrid(r, ct, phi, indexing="ij")
    sg = np.sqrt(1.0 - cg**2)
    nodes = np.stack(
        [
            (rg * sg * np.cos(pg)).ravel(),
            (rg * sg * np.sin(pg)).ravel(),
            (rg * cg).ravel(),
        ]
    )
    weight = (rg**2).ravel()
    wgrid = np.meshgrid(wr, wt, np.full(n_phi, wphi), indexing="ij")
    for wg in wgrid:
        weight = weight * wg.ravel()
    return nodes, weight


def _eval_sum(kernel, nodes: np.ndarray, weights: np.ndarray, chunk: int = 2_000_000):
    total = 0.0 + 0.0j
    n = nodes.shape[1]
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        vals = np.asarray(kernel(nodes[:, lo:hi]))
        total = total + np.sum(weights[lo:hi] * vals)
    return total


def integrate(kernel, spec: QuadratureSpec, dim: int = 3):
    """Integrate ``kernel(nodes)`` over the spec's box.

    ``kernel`` receives nodes of shape (dim, N) and must return N values.
    Returns ``(value, err_estimate)``; values may be complex.
    """
    box = spec.box(dim)
    if spec.scheme == "tensor-gauss":
        coarse = max(2, (2 * spec.points) // 3)
        v_fine = _eval_sum(kernel, *tensor_grid(box, spec.points))
        v_coarse = _eval_sum(kernel, *tensor_grid(box, coarse))
        return _maybe_real(v_fine), abs(v_fine - v_coarse)
    if spec.scheme == "adaptive":
        n = spec.points
        prev = _eval_sum(kernel, *tensor_grid(box, n))
        for _ in range(spec.max_refinements):
            n = int(np.ceil(1.5 * n))
            cur = _eval_sum(kernel, *tensor_grid(box, n))
            err = abs(cur - prev)
            scale = max(abs(cur), 1e-300)
            if err <= spec.target_rel_tol * scale:
                return _maybe_real(cur), err
            prev = cur
        raise ToleranceNotMet(
            f"adaptive quadrature stalled at rel err {err / scale:.3e} "
            f"(target {spec.target_rel_tol:.3e})",
            best=_maybe_real(cur),
            err_estimate=err,
        )
    # seeded, scrambled Sobol with replicate-based error estimate
    vol = float(np.prod(2.0 * box))
    n_samples = 1 << max(8, int(spec.points))
    estimates = []
    for rep in range(spec.replicates):
        sampler = qmc.Sobol(d=dim, scramble=True, seed=spec.seed + rep)
        u = sampler.random(n_samples).T
        nodes = (2.0 * u - 1.0) * box[:, None]
        vals = np.asarray(kernel(nodes))
        estimates.append(vol * np.mean(vals))
    estimates = np.array(estimates)
    value = np.mean(estimates)
    err = float(np.std(estimates.real) + np.std(estimates.imag)) / np.sqrt(
        len(estimates)
    )
    return _maybe_real(value), 3.0 * err


def _maybe_real(v):
    if np.iscomplexobj(v) and abs(np.imag(v)) < 1e-12 * max(1.0, abs(np.real(v))):
        return float(np.real(v))
    return v
