"""Finite-dimensional standard forms and noncommutative L^p norms.

A faithful density matrix ``rho`` on C^n generates the Hilbert-Schmidt
standard form: vectors are n x n matrices with inner product
``<X, Y> = tr(X^dag Y)``, the algebra acts by left multiplication, its
commutant by right multiplication, the cyclic vector is ``rho^{1/2}`` and the
modular data are ``J X = X^dag`` and ``Delta X = rho X rho^{-1}``.

The vector L^p norms implemented here are

* ``p = 2``   the Hilbert-Schmidt norm of ``A rho^{1/2}``;
* ``p = 4``   ``|| Delta^{1/4} A^dag A Omega ||^{1/2}``;
* ``p = inf`` the operator norm of ``A``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

_EIG_FLOOR = 1e-12


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    return m


def herm_power(m: np.ndarray, t: float) -> np.ndarray:
    """Fractional power of a positive Hermitian matrix via eigendecomposition."""
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals**t) @ vecs.conj().T


@dataclass
class StandardForm:
    """Hilbert-Schmidt standard form of ``M_n`` with a faithful state."""

    rho: np.ndarray
    _pows: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        rho = _as_matrix(self.rho)
        if not np.allclose(rho, rho.conj().T, atol=1e-12):
            raise ValueError("density matrix must be Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"density matrix must have unit trace, got {tr!r}")
        lam = np.linalg.eigvalsh(rho)
        if lam.min() <= _EIG_FLOOR:
            raise ValueError(
                f"density matrix must be faithful; smallest eigenvalue {lam.min():.3e}"
            )
        self.rho = rho

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def rho_power(self, t: float) -> np.ndarray:
        key = round(float(t), 12)
        if key not in self._pows:
            self._pows[key] = herm_power(self.rho, float(t))
        return self._pows[key]

    # -- vectors ---------------------------------------------------------------

    @property
    def omega(self) -> np.ndarray:
        """The cyclic vector ``rho^{1/2}``."""
        return self.rho_power(0.5)

    @staticmethod
    def inner(x: np.ndarray, y: np.ndarray) -> complex:
        return complex(np.trace(x.conj().T @ y))

    @staticmethod
    def norm(x: np.ndarray) -> float:
        return float(np.linalg.norm(x))

    # -- modular data ------------------------------------------------------------

    @staticmethod
    def j(x: np.ndarray) -> np.ndarray:
        """Modular conjugation (antilinear): ``J X = X^dag``."""
        return np.asarray(x).conj().T

    def delta_power(self, t: float, x: np.ndarray) -> np.ndarray:
        """``Delta^t X = rho^t X rho^{-t}``."""
        return self.rho_power(t) @ x @ self.rho_power(-t)

    def s_op(self, x: np.ndarray) -> np.ndarray:
        """Tomita operator ``S = J Delta^{1/2}``."""
        return self.j(self.delta_power(0.5, x))

    def act(self, m: np.ndarray, x: np.ndarray, side: str = "system") -> np.ndarray:
        """Apply an algebra (left) or commutant (right) element to a vector."""
        if side == "system":
            return m @ x
        if side == "commutant":
            return x @ m
        raise ValueError("side must be 'system' or 'commutant'")


def gibbs_state(beta: float, energies) -> StandardForm:
    """Standard form of the Gibbs state ``exp(-beta H)/Z`` for diagonal H."""
    e = np.asarray(energies, dtype=float)
    w = np.exp(-beta * (e - e.min()))
    return StandardForm(np.diag(w / w.sum()).astype(complex))


# ---------------------------------------------------------------------------
# vector L^p norms
# ---------------------------------------------------------------------------

def lp_norm(sf: StandardForm, a: np.ndarray, p) -> float:
    """L^p norm of the vector ``A Omega`` for ``p`` in {2, 4, inf}."""
    a = _as_matrix(a)
    if p == 2:
        return sf.norm(a @ sf.omega)
    if p == 4:
        vec = sf.delta_power(0.25, a.conj().T @ a @ sf.omega)
        return float(np.sqrt(sf.norm(vec)))
    if p in (np.inf, float("inf"), "inf"):
        return float(np.linalg.norm(a, 2))
    raise ValueError("p must be one of 2, 4, inf")


def l4_via_positive_cone(sf: StandardForm, a: np.ndarray) -> float:
    """``|| A J A Omega ||^{1/2}``; equals the p=4 norm because A and JAJ commute."""
    a = _as_matrix(a)
    vec = a @ sf.j(a @ sf.omega)
    return float(np.sqrt(sf.norm(vec)))


def _sigma_quarter(params: np.ndarray, n: int) -> np.ndarray:
    c = (params[: n * n] + 1j * params[n * n :]).reshape(n, n)
    sigma = c @ c.conj().T
    tr = np.trace(sigma).real
    if tr <= 0:
        return np.zeros((n, n), dtype=complex)
    return herm_power(sigma / tr, 0.25)


def araki_masuda_l4(
    sf: StandardForm,
    a: np.ndarray,
    n_starts: int = 8,
    seed: int = 7,
    return_details: bool = False,
):
    """Variational L^4 norm: ``sup_sigma || sigma^{1/4} A rho^{1/4} ||_HS``.

    The supremum runs over density matrices ``sigma``; it is attained at the
    state induced by the positive-cone vector ``A J A Omega`` and reproduces
    the closed-form p=4 norm.  The optimiser reports the best of ``n_starts``
    seeded quasi-Newton runs.
    """
    a = _as_matrix(a)
    n = sf.dim
    target = a @ sf.rho_power(0.25)

    def objective(params: np.ndarray) -> float:
        q = _sigma_quarter(params, n)
        return -float(np.linalg.norm(q @ target))

    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(n_starts):
        x0 = rng.standard_normal(2 * n * n)
        res = minimize(objective, x0, method="L-BFGS-B", options={"ftol": 1e-14, "gtol": 1e-12})
        best = min(best, res.fun)
    value = float(-best)
    if return_details:
        return value, {"closed_form": lp_norm(sf, a, 4)}
    return value


def commutant_l4_bound(sf: StandardForm, a: np.ndarray, t_prime: np.ndarray):
    """Bound ``|(A Omega, T' A Omega)| <= ||Delta^{-1/4} T' Omega|| ||A Omega||_4^2``.

    ``t_prime`` is the right-multiplication matrix of a commutant element.
    Returns ``(lhs, rhs, c_factor)``.
    """
    a = _as_matrix(a)
    tp = _as_matrix(t_prime)
    vec = a @ sf.omega
    lhs = abs(sf.inner(vec, sf.act(tp, vec, side="commutant")))
    c_factor = sf.norm(sf.delta_power(-0.25, sf.act(tp, sf.omega, side="commutant")))
    rhs = c_factor * lp_norm(sf, a, 4) ** 2
    return lhs, rhs, c_factor


# ---------------------------------------------------------------------------
# modular Hamiltonian and passivity
# ---------------------------------------------------------------------------

@dataclass
class ModularHamiltonian:
    """``K = -(1/beta) log Delta``, acting as a commutator with ``log rho``."""

    sf: StandardForm
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValueError("inverse temperature must be positive")
        vals, vecs = np.linalg.eigh(self.sf.rho)
        self._log_rho = (vecs * np.log(vals)) @ vecs.conj().T

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (-1.0 / self.beta) * (self._log_rho @ x - x @ self._log_rho)

    def expectation(self, x: np.ndarray) -> float:
        val = self.sf.inner(x, self.apply(x))
        return float(val.real)


def passivity_gap(sf: StandardForm, a: np.ndarray, beta: float = 1.0):
    """Return ``(form_value, gap)`` for the passivity bound.

    ``form_value = (A Omega, K A Omega)`` with ``K = -(1/beta) log Delta`` and
    ``gap = beta * form_value - (||A Omega||^2 - ||A* Omega||^2) >= 0``, which
    follows from ``x >= 1 - e^{-x}`` applied spectrally to ``-log Delta``.
    """
    a = _as_matrix(a)
    mh = ModularHamiltonian(sf, beta)
    vec = a @ sf.omega
    vec_star = a.conj().T @ sf.omega
    form_value = mh.expectation(vec)
    gap = beta * form_value - (sf.norm(vec) ** 2 - sf.norm(vec_star) ** 2)
    return form_value, gap


def random_density(n: int, rng: np.random.Generator) -> np.ndarray:
    """A random faithful density matrix (Hilbert-Schmidt induced measure)."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ g.conj().T + 1e-3 * np.eye(n)
    return rho / np.trace(rho).real


def random_matrix(n: int, rng: np.random.Generator, hermitian: bool = False) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (g + g.conj().T) if hermitian else g


# ---------------------------------------------------------------------------
# randomized property suite
# ---------------------------------------------------------------------------

def property_suite(
    ns=(2, 3, 4, 6),
    n_draws: int = 500,
    seed: int = 11,
    beta: float = 1.0,
    lemma_draws: int = 200,
    araki_draws: int = 50,
) -> list[dict]:
    """Randomised verification of the finite-dimensional norm/modular laws.

    Returns one row per check with the worst observed slack or defect; a
    check passes when the slack stays above (defects below) its tolerance.
    Covered: p-norm triangle inequality, the 2-4-infinity norm chain, the
    positive-cone identity for the 4-norm, the variational 4-norm, the
    commutant quadratic bound, and passivity of the modular Hamiltonian.
    """
    rng = np.random.default_rng(seed)
    rows: list[dict] = []
    for n in ns:
        tri_slack = np.inf
        chain_slack = np.inf
        jaj_defect = 0.0
        for _ in range(n_draws):
            sf = StandardForm(random_density(n, rng))
            a = random_matrix(n, rng)
            b = random_matrix(n, rng)
            for p in (2, 4, np.inf):
                tri_slack = min(
                    tri_slack,
                    lp_norm(sf, a, p) + lp_norm(sf, b, p) - lp_norm(sf, a + b, p),
                )
            n2, n4, ninf = (lp_norm(sf, a, p) for p in (2, 4, np.inf))
            chain_slack = min(chain_slack, n4 - n2, ninf - n4)
            lhs = n4**2
            rhs = l4_via_positive_cone(sf, a) ** 2
            jaj_defect = max(jaj_defect, abs(lhs - rhs) / max(1.0, lhs))
        rows.append(
            {"check": "triangle", "n": n, "draws": n_draws, "worst": float(tri_slack),
             "tol": -1e-10, "passed": bool(tri_slack >= -1e-10)}
        )
        rows.append(
            {"check": "chain-2-4-inf", "n": n, "draws": n_draws,
             "worst": float(chain_slack), "tol": -1e-12,
             "passed": bool(chain_slack >= -1e-12)}
        )
        rows.append(
            {"check": "positive-cone-l4", "n": n, "draws": n_draws,
             "worst": float(jaj_defect), "tol": 1e-10,
             "passed": bool(jaj_defect <= 1e-10)}
        )

    # commutant quadratic bound and passivity at n = 4
    n = 4
    lemma_viol = 0
    lemma_worst = np.inf
    herm_worst = np.inf
    gap_worst = np.inf
    for _ in range(lemma_draws):
        sf = StandardForm(random_density(n, rng))
        a = random_matrix(n, rng)
        t_prime = random_matrix(n, rng)
        lhs, rhs, _ = commutant_l4_bound(sf, a, t_prime)
        lemma_worst = min(lemma_worst, rhs - lhs)
        if lhs > rhs + 1e-10:
            lemma_viol += 1
        h = random_matrix(n, rng, hermitian=True)
        herm_worst = min(herm_worst, passivity_gap(sf, h, beta)[0])
        gap_worst = min(gap_worst, passivity_gap(sf, a, beta)[1])
    rows.append(
        {"check": "commutant-bound", "n": n, "draws": lemma_draws,
         "worst": float(lemma_worst), "tol": -1e-10, "passed": bool(lemma_viol == 0)}
    )
    rows.append(
        {"check": "passivity-hermitian", "n": n, "draws": lemma_draws,
         "worst": float(herm_worst), "tol": -1e-10,
         "passed": bool(herm_worst >= -1e-10)}
    )
    rows.append(
        {"check": "passivity-gap", "n": n, "draws": lemma_draws,
         "worst": float(gap_worst), "tol": -1e-10,
         "passed": bool(gap_worst >= -1e-10)}
    )

    # variational 4-norm against the closed form on small dimensions
    araki_worst = 0.0
    for _ in range(araki_draws):
        nn = int(rng.integers(2, 5))
        sf = StandardForm(random_density(nn, rng))
        a = random_matrix(nn, rng)
        closed = lp_norm(sf, a, 4)
        variational = araki_masuda_l4(sf, a)
        araki_worst = max(araki_worst, abs(variational - closed) / closed)
    rows.append(
        {"check": "variational-l4", "n": 4, "draws": araki_draws,
         "worst": float(araki_worst), "tol": 1e-5,
         "passed": bool(araki_worst <= 1e-5)}
    )
    return rows
