"""Smooth spacetime test packets and their four-dimensional Fourier transforms.

Conventions used throughout the package:

* metric signature (+, -, -, -), so the Minkowski pairing of a momentum
  ``q = (q0, q1, q2, q3)`` with an event ``x`` is ``q.x = q0 x0 - q.x``;
* the Fourier transform of a packet ``p`` is ``p_hat(q) = int p(x) e^{i q.x} d^4x``.

Three packet families are supported:

* ``gaussian``      -- product of per-axis Gaussians (closed-form transform);
* ``bump-product``  -- product of per-axis compactly supported bumps
  ``exp(-1/(1-t^2))`` (transform via cached one-dimensional quadrature);
* ``momentum-window`` -- defined directly on the momentum side as a smooth
  compactly supported frequency window times a Gaussian in the spatial
  momentum.  Such packets have no position-space representative; every
  consumer works with the momentum function only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

#: signs s_a such that q.x = sum_a s_a q_a x_a.
METRIC_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])

KINDS = ("gaussian", "bump-product", "momentum-window")


# ---------------------------------------------------------------------------
# bump profile helpers
# ---------------------------------------------------------------------------

def bump_profile(t: np.ndarray, power: int = 1) -> np.ndarray:
    """``exp(-power/(1-t^2))`` on (-1, 1), zero outside."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-power / (1.0 - ti * ti))
    return out


@lru_cache(maxsize=32)
def _bump_quad_nodes(n: int = 512) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    # map to [0, 1]
    return 0.5 * (x + 1.0), 0.5 * w


def bump_ft_direct(y: np.ndarray, power: int = 1) -> np.ndarray:
    """``B(y) = int_{-1}^{1} bump(t)^power e^{i y t} dt`` (real and even)."""
    t, w = _bump_quad_nodes()
    vals = w * bump_profile(t, power)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    # bump is even: B(y) = 2 int_0^1 bump cos(y t) dt
    out = 2.0 * np.cos(np.multiply.outer(y, t)) @ vals
    return out


def bump_ft_moment_direct(y: np.ndarray, power: int = 1) -> np.ndarray:
    """``Bm(y) = int t bump(t)^power e^{i y t} dt / i`` (odd, real)."""
    t, w = _bump_quad_nodes()
    vals = w * t * bump_profile(t, power)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    # i * Bm would be the raw moment; we store the real function
    # Bm_real(y) = 2 int_0^1 t bump(t) sin(y t) dt  so that the moment is i*Bm_real.
    return 2.0 * np.sin(np.multiply.outer(y, t)) @ vals


_BUMP_TABLE_YMAX = 600.0
_BUMP_TABLE_N = 60001


@lru_cache(maxsize=8)
def _bump_ft_spline(power: int) -> CubicSpline:
    y = np.linspace(0.0, _BUMP_TABLE_YMAX, _BUMP_TABLE_N)
    return CubicSpline(y, bump_ft_direct(y, power))


@lru_cache(maxsize=8)
def _bump_ft_moment_spline(power: int) -> CubicSpline:
    y = np.linspace(0.0, _BUMP_TABLE_YMAX, _BUMP_TABLE_N)
    return CubicSpline(y, bump_ft_moment_direct(y, power))


# dense tables for fast linear-interpolation lookup (absolute error ~1e-9,
# well below the quadrature tolerances of every consumer)
_BUMP_DENSE_N = 2_097_153


@lru_cache(maxsize=8)
def _bump_ft_dense(power: int) -> np.ndarray:
    y = np.linspace(0.0, _BUMP_TABLE_YMAX, _BUMP_DENSE_N)
    return _bump_ft_spline(power)(y)


@lru_cache(maxsize=8)
def _bump_ft_moment_dense(power: int) -> np.ndarray:
    y = np.linspace(0.0, _BUMP_TABLE_YMAX, _BUMP_DENSE_N)
    return _bump_ft_moment_spline(power)(y)


def _dense_lookup(y_abs: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Linear interpolation on the uniform table; zero beyond its range."""
    y_abs = np.atleast_1d(np.asarray(y_abs, dtype=float))
    pos = y_abs * ((_BUMP_DENSE_N - 1) / _BUMP_TABLE_YMAX)
    idx = pos.astype(np.int32)
    np.clip(idx, 0, _BUMP_DENSE_N - 2, out=idx)
    pos -= idx
    out = table[idx]
    out += (table[idx + 1] - out) * pos
    out[y_abs >= _BUMP_TABLE_YMAX] = 0.0
    return out


def bump_ft(y: np.ndarray, power: int = 1) -> np.ndarray:
    """Tabulated evaluation of ``B(y)``; falls back to zero beyond the table."""
    y = np.abs(np.asarray(y, dtype=float))
    return _dense_lookup(y, _bump_ft_dense(power))


@lru_cache(maxsize=32)
def bump_ft_tail(power: int, tol: float) -> float:
    """Smallest ``Y`` with ``|B(y)| < tol * B(0)`` for all tabulated y > Y."""
    y = np.linspace(0.0, _BUMP_TABLE_YMAX, _BUMP_TABLE_N)
    vals = np.abs(_bump_ft_spline(power)(y))
    above = np.nonzero(vals >= tol * vals[0])[0]
    return float(y[above[-1]]) if above.size else 0.0


def bump_ft_moment(y: np.ndarray, power: int = 1) -> np.ndarray:
    """Tabulated odd moment function ``Bm(y)`` (the moment itself is ``i Bm``)."""
    y = np.asarray(y, dtype=float)
    out = _dense_lookup(np.abs(y), _bump_ft_moment_dense(power))
    return np.sign(y) * out


# ---------------------------------------------------------------------------
# packet specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PacketSpec:
    """A smooth test packet on four-dimensional Minkowski space.

    For the position-space kinds ``center``/``widths`` are per-axis centres
    and widths of the profile.  For ``momentum-window`` packets ``widths[1:]``
    are momentum-space Gaussian widths, ``window`` holds the (lower, upper)
    edges of the smooth frequency window and ``shift`` is a spacetime
    translation realised as the phase ``e^{i q.shift}``.
    """

    kind: str
    center: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    widths: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    amplitude: float = 1.0
    power: int = 1
    window: tuple[float, float] | None = None
    shift: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown packet kind {self.kind!r}")
        if len(self.center) != 4 or len(self.widths) != 4 or len(self.shift) != 4:
            raise ValueError("center, widths and shift must have four entries")
        if any(w <= 0 for w in self.widths):
            raise ValueError("widths must be positive")
        if self.power < 1:
            raise ValueError("power must be a positive integer")
        if self.kind == "momentum-window":
            if self.window is None:
                raise ValueError("momentum-window packets need window edges")
            lo, hi = self.window
            if not lo < hi:
                raise ValueError("window edges must satisfy lower < upper")
        elif self.window is not None:
            raise ValueError("window edges only apply to momentum-window packets")
        if self.kind == "gaussian" and self.power != 1:
            raise ValueError("gaussian packets do not take a power")

    # -- position space -----------------------------------------------------

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Position-space values; ``x`` has shape (4,) or (4, ...)."""
        if self.kind == "momentum-window":
            raise ValueError("momentum-window packets have no position-space form")
        x = np.asarray(x, dtype=float)
        c = np.array(self.center)
        w = np.array(self.widths)
        t = (x - c.reshape((4,) + (1,) * (x.ndim - 1))) / w.reshape(
            (4,) + (1,) * (x.ndim - 1)
        )
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-0.5 * np.sum(t * t, axis=0))
        vals = self.amplitude * np.ones(t.shape[1:])
        for a in range(4):
            vals = vals * bump_profile(t[a], self.power)
        return vals

    # -- momentum space ------------------------------------------------------

    def _axis_factor(self, a: int, qa: np.ndarray) -> np.ndarray:
        """Per-axis Fourier factor for position-space kinds."""
        s = METRIC_SIGNS[a]
        c = self.center[a]
        w = self.widths[a]
        if self.kind == "gaussian":
            base = np.sqrt(2.0 * np.pi) * w * np.exp(-0.5 * (w * qa) ** 2)
        else:
            base = w * bump_ft(w * qa, self.power)
        if c == 0.0:
            return base
        return base * np.exp(1j * s * qa * c)

    def _axis_moment_factor(self, a: int, qa: np.ndarray) -> np.ndarray:
        """Per-axis factor of ``int x_a p(x) e^{i q.x}`` on axis ``a``."""
        s = METRIC_SIGNS[a]
        c = self.center[a]
        w = self.widths[a]
        phase = 1.0 if c == 0.0 else np.exp(1j * s * qa * c)
        if self.kind == "gaussian":
            base = np.sqrt(2.0 * np.pi) * w * np.exp(-0.5 * (w * qa) ** 2)
            return (c + 1j * s * qa * w * w) * phase * base
        plain = bump_ft(w * qa, self.power)
        moment = bump_ft_moment(s * w * qa, self.power)
        return w * phase * (c * plain + 1j * w * moment)

    def fourier(self, q: np.ndarray) -> np.ndarray:
        """Evaluate the 4D transform at ``q`` of shape (4,) or (4, ...)."""
        q = np.asarray(q, dtype=float)
        scalar = q.ndim == 1
        q2 = q.reshape(4, -1)
        if self.kind == "momentum-window":
            out = self._window_values(q2)
        else:
            out = self._axis_factor(0, q2[0])
            for a in range(1, 4):
                out = out * self._axis_factor(a, q2[a])
            out = out * self.amplitude
        out = out.reshape(q.shape[1:]) if not scalar else complex(out[0])
        return out

    def spatial_fourier(self, qspat: np.ndarray) -> np.ndarray:
        """Product of the three spatial axis factors (amplitude included).

        Together with :meth:`time_fourier` this factorises ``fourier`` for
        position-space kinds: useful when the spatial grid is fixed while the
        frequency argument varies.
        """
        if self.kind == "momentum-window":
            raise ValueError("factored transforms need a position-space packet")
        qspat = np.asarray(qspat, dtype=float).reshape(3, -1)
        out = self._axis_factor(1, qspat[0])
        for a in (2, 3):
            out = out * self._axis_factor(a, qspat[a - 1])
        return np.asarray(out * self.amplitude, dtype=complex)

    def spatial_fourier_moment(self, qspat: np.ndarray, axis: int) -> np.ndarray:
        """Spatial factors with the ``axis`` factor replaced by its moment.

        Bounds the spatial envelope of ``fourier_moment``: the moment factor
        has zeros offset from those of the plain factor, so masking grids on
        the plain transform alone would drop nodes where the moment is large.
        """
        if self.kind == "momentum-window":
            raise ValueError("factored transforms need a position-space packet")
        if axis not in (1, 2, 3):
            raise ValueError("spatial moment axis must be 1, 2 or 3")
        qspat = np.asarray(qspat, dtype=float).reshape(3, -1)
        out = np.full(qspat.shape[1], self.amplitude, dtype=complex)
        for a in (1, 2, 3):
            if a == axis:
                out = out * self._axis_moment_factor(a, qspat[a - 1])
            else:
                out = out * self._axis_factor(a, qspat[a - 1])
        return out

    def time_fourier(self, q0: np.ndarray) -> np.ndarray:
        """The time-axis factor of the factorised transform."""
        if self.kind == "momentum-window":
            raise ValueError("factored transforms need a position-space packet")
        return self._axis_factor(0, np.asarray(q0, dtype=float))

    def momentum_tail_reach(self, axis: int, tol: float = 1e-5) -> float:
        """Per-axis momentum reach beyond which the axis factor is below
        ``tol`` times its peak (position-space kinds only)."""
        if self.kind == "momentum-window":
            raise ValueError("tail reach needs a position-space packet")
        w = float(self.widths[axis])
        if self.kind == "gaussian":
            return np.sqrt(2.0 * np.log(1.0 / tol)) / w
        return bump_ft_tail(self.power, tol) / w

    def fourier_moment(self, q: np.ndarray, axis: int) -> np.ndarray:
        """Transform of ``x_axis * p(x)`` (position-space kinds only)."""
        if self.kind == "momentum-window":
            raise ValueError("momentum moments need a position-space packet")
        q = np.asarray(q, dtype=float)
        scalar = q.ndim == 1
        q2 = q.reshape(4, -1)
        out = np.full(q2.shape[1], self.amplitude, dtype=complex)
        for a in range(4):
            if a == axis:
                out = out * self._axis_moment_factor(a, q2[a])
            else:
                out = out * self._axis_factor(a, q2[a])
        return out.reshape(q.shape[1:]) if not scalar else complex(out[0])

    def _window_values(self, q2: np.ndarray) -> np.ndarray:
        lo, hi = self.window
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        t = (q2[0] - mid) / half
        win = np.zeros(q2.shape[1])
        inside = np.abs(t) < 1.0
        # normalised so the window peaks at one
        win[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
        sig = np.array(self.widths[1:])
        gauss = np.exp(-0.5 * np.sum((q2[1:] / sig[:, None]) ** 2, axis=0))
        shift = np.array(self.shift)
        phase = np.exp(1j * np.einsum("a,a...->...", METRIC_SIGNS, q2 * shift[:, None]))
        return self.amplitude * win * gauss * phase

    # -- transformations ------------------------------------------------------

    def scale_translate(self, lam: float, a=(0.0, 0.0, 0.0, 0.0)) -> "PacketSpec":
        """Return the packet ``lam^3 p(lam (x - a))``.

        On the momentum side this is ``lam^{-1} p_hat(q/lam) e^{i q.a}``; for
        momentum-window packets the rule is applied to the stored momentum
        function directly.
        """
        if lam <= 0:
            raise ValueError("scale parameter must be positive")
        a = tuple(float(v) for v in a)
        if len(a) != 4:
            raise ValueError("translation must have four entries")
        if self.kind == "momentum-window":
            lo, hi = self.window
            return replace(
                self,
                window=(lam * lo, lam * hi),
                widths=tuple(lam * w for w in self.widths),
                amplitude=self.amplitude / lam,
                shift=tuple(s / lam + av for s, av in zip(self.shift, a)),
            )
        return replace(
            self,
            widths=tuple(w / lam for w in self.widths),
            center=tuple(av + c / lam for av, c in zip(a, self.center)),
            amplitude=self.amplitude * lam**3,
        )

    def translate(self, a) -> "PacketSpec":
        return self.scale_translate(1.0, a)

    def squared(self) -> "PacketSpec":
        """Pointwise square of a position-space packet (again a packet)."""
        if self.kind == "momentum-window":
            raise ValueError("cannot square a momentum-window packet")
        if self.kind == "gaussian":
            return replace(
                self,
                widths=tuple(w / np.sqrt(2.0) for w in self.widths),
                amplitude=self.amplitude**2,
            )
        return replace(self, power=2 * self.power, amplitude=self.amplitude**2)

    def reflect_wedge(self) -> "PacketSpec":
        """Pull back under the wedge reflection ``j(x) = (-x0, -x1, x2, x3)``."""
        if self.kind == "momentum-window":
            raise ValueError("wedge reflection needs a position-space packet")
        c = self.center
        return replace(self, center=(-c[0], -c[1], c[2], c[3]))

    def integral(self) -> complex:
        """``int p(x) d^4x`` (the transform at zero)."""
        return self.fourier(np.zeros(4))

    def momentum_halfwidths(self, nsig: float = 8.0) -> np.ndarray:
        """Per-axis momentum half-widths outside which the transform is tiny."""
        if self.kind == "momentum-window":
            lo, hi = self.window
            freq = max(abs(lo), abs(hi))
            sig = np.array(self.widths[1:])
            return np.array([freq, *(nsig * sig)])
        w = np.array(self.widths)
        if self.kind == "gaussian":
            return nsig * 1.0 / w
        # bump transforms decay sub-exponentially; use a generous factor
        return (6.0 * nsig) / w

    # -- (de)serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "center": list(self.center),
            "widths": list(self.widths),
            "amplitude": self.amplitude,
            "power": self.power,
            "shift": list(self.shift),
        }
        if self.window is not None:
            d["window"] = list(self.window)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PacketSpec":
        return cls(
            kind=d["kind"],
            center=tuple(d.get("center", (0.0,) * 4)),
            widths=tuple(d.get("widths", (1.0,) * 4)),
            amplitude=float(d.get("amplitude", 1.0)),
            power=int(d.get("power", 1)),
            window=tuple(d["window"]) if "window" in d else None,
            shift=tuple(d.get("shift", (0.0,) * 4)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "PacketSpec":
        return cls.from_dict(json.loads(s))


# ---------------------------------------------------------------------------
# sampled transform tables
# ---------------------------------------------------------------------------

@dataclass
class FourierTable:
    """A sampled 4D Fourier transform on a rectangular momentum lattice."""

    packet: PacketSpec
    axes: list[np.ndarray] = field(repr=False)
    values: np.ndarray = field(repr=False)

    @classmethod
    def from_packet(cls, packet: PacketSpec, axes) -> "FourierTable":
        axes = [np.asarray(a, dtype=float) for a in axes]
        if len(axes) != 4:
            raise ValueError("need one sample axis per spacetime dimension")
        grids = np.meshgrid(*axes, indexing="ij")
        q = np.stack([g.ravel() for g in grids])
        vals = packet.fourier(q).reshape([len(a) for a in axes])
        return cls(packet=packet, axes=axes, values=vals)

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["q0", "q1", "q2", "q3", "re", "im"])
            grids = np.meshgrid(*self.axes, indexing="ij")
            flat = [g.ravel() for g in grids]
            vals = self.values.ravel()
            for i in range(vals.size):
                wr.writerow(
                    [
                        f"{flat[0][i]:.17g}",
                        f"{flat[1][i]:.17g}",
                        f"{flat[2][i]:.17g}",
                        f"{flat[3][i]:.17g}",
                        f"{vals[i].real:.17g}",
                        f"{vals[i].imag:.17g}",
                    ]
                )
