"""Normal-ordered quadratic boson forms on discrete mode grids.

A form is ``H = sum_ij N_ij c*_i c_j + (1/2) sum_ij (P_ij c*_i c*_j + h.c.)``
with Hermitian number block ``N`` and symmetric pair block ``P``.  Its ground
energy follows from the symplectic (Bogoliubov) diagonalisation of the
Bogoliubov-de Gennes matrix ``[[N, P], [conj(P), conj(N)]]``:

    E0 = (sum of positive symplectic eigenvalues - tr N) / 2,

valid when the BdG matrix is positive semidefinite; otherwise the form is
unbounded below and flagged unstable.

The module also assembles the discretised thermal energy/Liouvillian
densities and the wedge boost density as such forms, provides a truncated
Fock-space exact-diagonalisation oracle, and cross-checks the doubled
(purified) single-mode representation of a thermal oscillator.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .packets import PacketSpec
from .thermal import TWO_PI_CUBED, ThermalParams, thermal_factor

_ZERO_MODE_TOL = 1e-10


@dataclass(frozen=True)
class ModeGrid:
    """Discrete momentum modes with quadrature weights.

    ``species`` is ``"single"`` (one oscillator per node) or ``"doubled"``
    (hole/particle pairs: block index 0..n-1 holds the ``a`` species and
    n..2n-1 the ``b`` species).
    """

    momenta: np.ndarray
    weights: np.ndarray
    species: str = "single"

    def __post_init__(self) -> None:
        if self.species not in ("single", "doubled"):
            raise ValueError("species must be 'single' or 'doubled'")
        if self.momenta.shape[0] != 3 or self.momenta.shape[1] != self.weights.size:
            raise ValueError("momenta must be (3, n) matching the weights")

    @property
    def n_nodes(self) -> int:
        return self.weights.size

    @property
    def n_modes(self) -> int:
        return self.n_nodes * (2 if self.species == "doubled" else 1)

    def block_index(self, species: str, i: int) -> int:
        if self.species == "single":
            return i
        return i if species == "a" else self.n_nodes + i


@dataclass
class QuadraticBosonForm:
    grid: ModeGrid
    number_block: np.ndarray = field(repr=False)
    pair_block: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        n = self.grid.n_modes
        if self.number_block.shape != (n, n) or self.pair_block.shape != (n, n):
            raise ValueError("block shapes must match the mode count")
        if not np.allclose(self.number_block, self.number_block.conj().T, atol=1e-9):
            raise ValueError("number block must be Hermitian")
        if not np.allclose(self.pair_block, self.pair_block.T, atol=1e-9):
            raise ValueError("pair block must be symmetric")

    def bdg_matrix(self) -> np.ndarray:
        n_, p_ = self.number_block, self.pair_block
        top = np.hstack([n_, p_])
        bot = np.hstack([p_.conj(), n_.conj()])
        return np.vstack([top, bot])

    def restrict(self, species: str) -> "QuadraticBosonForm":
        """Restriction to one species block of a doubled grid."""
        if self.grid.species != "doubled":
            raise ValueError("sector restriction needs a doubled grid")
        n = self.grid.n_nodes
        sl = slice(0, n) if species == "a" else slice(n, 2 * n)
        sub = ModeGrid(self.grid.momenta, self.grid.weights, species="single")
        return QuadraticBosonForm(
            grid=sub,
            number_block=self.number_block[sl, sl].copy(),
            pair_block=self.pair_block[sl, sl].copy(),
        )


@dataclass
class GroundEnergyResult:
    energy: float
    stable: bool
    symplectic_spectrum: np.ndarray
    n_zero_modes: int
    min_bdg_eigenvalue: float


def ground_energy(form: QuadraticBosonForm) -> GroundEnergyResult:
    """Bogoliubov ground energy of the form; unstable forms return -inf."""
    h_bdg = form.bdg_matrix()
    herm_eigs = np.linalg.eigvalsh(0.5 * (h_bdg + h_bdg.conj().T))
    min_eig = float(herm_eigs[0])
    n = form.grid.n_modes
    sigma3 = np.diag(np.concatenate([np.ones(n), -np.ones(n)]))
    if min_eig < -_ZERO_MODE_TOL * max(1.0, abs(herm_eigs[-1])):
        return GroundEnergyResult(
            energy=float("-inf"),
            stable=False,
            symplectic_spectrum=np.sort(np.real(np.linalg.eigvals(sigma3 @ h_bdg))),
            n_zero_modes=0,
            min_bdg_eigenvalue=min_eig,
        )
    eigs = np.linalg.eigvals(sigma3 @ h_bdg)
    pos = np.sort(np.real(eigs))[n:]
    zero = int(np.sum(np.abs(pos) < _ZERO_MODE_TOL * max(1.0, abs(herm_eigs[-1]))))
    energy = 0.5 * (np.sum(pos) - np.trace(form.number_block).real)
    return GroundEnergyResult(
        energy=float(energy),
        stable=True,
        symplectic_spectrum=pos,
        n_zero_modes=zero,
        min_bdg_eigenvalue=min_eig,
    )


# ---------------------------------------------------------------------------
# assembly of field densities
# ---------------------------------------------------------------------------

# field kernel entries: (species, dagger, thermal weight sign, phase sign)
# weight sign +1 -> B+, -1 -> B-, 0 -> 1 (vacuum)
_SYSTEM_FIELD = (
    ("a", False, -1, +1),
    ("a", True, -1, -1),
    ("b", False, +1, -1),
    ("b", True, +1, +1),
)
_BATH_FIELD = (
    ("b", False, -1, -1),
    ("b", True, -1, +1),
    ("a", False, +1, +1),
    ("a", True, +1, -1),
)
_VACUUM_FIELD = (
    ("a", False, 0, -1),
    ("a", True, 0, +1),
)


def _entry_weight(sign: int, w: np.ndarray, beta: float | None) -> np.ndarray:
    if sign == 0:
        return np.ones_like(w)
    return thermal_factor(sign, w, beta)


def _route(blocks, grid: ModeGrid, e1, e2, coeff: np.ndarray) -> None:
    """Accumulate the coefficient matrix of the monomial  op1(k_i) op2(p_j)."""
    num, pair, annih = blocks
    sp1, dag1 = e1[0], e1[1]
    sp2, dag2 = e2[0], e2[1]
    n = grid.n_nodes
    idx1 = np.arange(n) if grid.species == "single" else (
        np.arange(n) if sp1 == "a" else n + np.arange(n)
    )
    idx2 = np.arange(n) if grid.species == "single" else (
        np.arange(n) if sp2 == "a" else n + np.arange(n)
    )
    if dag1 and not dag2:
        num[np.ix_(idx1, idx2)] += coeff
    elif not dag1 and dag2:
        # normal ordering: c(k) c*(p) -> c*(p) c(k) (+ dropped contraction)
        num[np.ix_(idx2, idx1)] += coeff.T
    elif dag1 and dag2:
        pair[np.ix_(idx1, idx2)] += coeff
    else:
        annih[np.ix_(idx1, idx2)] += coeff


def _formal_match(grid: ModeGrid, target: np.ndarray) -> np.ndarray:
    """Index of the grid node equal to each target momentum column (else -1)."""
    n = grid.n_nodes
    out = np.full(target.shape[1], -1, dtype=int)
    for j in range(target.shape[1]):
        d = np.max(np.abs(grid.momenta - target[:, j : j + 1]), axis=0)
        hit = np.argmin(d)
        if d[hit] < 1e-9:
            out[j] = hit
    return out


def assemble(
    kind: str,
    grid: ModeGrid,
    params: ThermalParams,
    smearing: PacketSpec | None = None,
) -> QuadraticBosonForm:
    """Assemble a discretised quadratic density as a boson form.

    ``kind``:

    * ``"thermal-h"``    system energy density ``h(f)`` on a doubled grid;
    * ``"thermal-bath"`` its bath copy ``J h(f) J``;
    * ``"thermal-ell"``  the Liouvillian density ``h(f) - J h(f) J``;
    * ``"vacuum-h"``     vacuum energy density on a single grid;
    * ``"boost-kappa"``  smeared wedge boost density ``kappa(f)``, assembled
      channel by channel from its five lightcone squares.

    ``smearing=None`` uses the formal spatially-homogeneous smear (a
    fixed-time integral), in which the thermal Liouvillian becomes the
    diagonal form ``sum_k w_k (b*b - a*a)``; the grid must then be closed
    under ``k -> -k``.
    """
    if kind == "thermal-ell":
        h = assemble("thermal-h", grid, params, smearing)
        b = assemble("thermal-bath", grid, params, smearing)
        return QuadraticBosonForm(
            grid=grid,
            number_block=h.number_block - b.number_block,
            pair_block=h.pair_block - b.pair_block,
        )
    if kind == "boost-kappa":
        return _assemble_boost_kappa(grid, params, smearing)
    if kind in ("thermal-h", "thermal-bath"):
        if grid.species != "doubled":
            raise ValueError("thermal densities need a doubled grid")
        entries = _SYSTEM_FIELD if kind == "thermal-h" else _BATH_FIELD
        beta = params.beta
    elif kind == "vacuum-h":
        if grid.species != "single":
            raise ValueError("the vacuum density needs a single-species grid")
        entries = _VACUUM_FIELD
        beta = None
    else:
        raise ValueError(f"unknown form kind {kind!r}")

    n = grid.n_nodes
    m = grid.n_modes
    num = np.zeros((m, m), dtype=complex)
    pair = np.zeros((m, m), dtype=complex)
    annih = np.zeros((m, m), dtype=complex)
    k = grid.momenta
    w = params.omega(k)
    mass2 = params.mass**2
    sqw = np.sqrt(grid.weights)

    for e1 in entries:
        w1 = _entry_weight(e1[2], w, beta)
        s1 = e1[3]
        for e2 in entries:
            w2 = _entry_weight(e2[2], w, beta)
            s2 = e2[3]
            poly = 0.5 * (
                -(s1 * s2) * (np.multiply.outer(w, w) + k.T @ k) + mass2
            )
            base = (
                poly
                * np.multiply.outer(w1, w2)
                / (2.0 * np.sqrt(np.multiply.outer(w, w)))
            )
            if smearing is not None:
                freq = s1 * w[:, None] + s2 * w[None, :]
                mom = s1 * k[:, :, None] + s2 * k[:, None, :]
                q4 = np.concatenate([freq[None], mom]).reshape(4, -1)
                fhat = smearing.fourier(q4).reshape(n, n)
                coeff = base * fhat * np.multiply.outer(sqw, sqw) / TWO_PI_CUBED
            else:
                match = _formal_match(grid, -(s1 * s2) * k)
                coeff = np.zeros((n, n), dtype=complex)
                rows = np.arange(n)[match >= 0]
                cols = match[match >= 0]
                coeff[rows, cols] = base[rows, cols] * np.sqrt(
                    grid.weights[rows] / grid.weights[cols]
                )
            _route((num, pair, annih), grid, e1, e2, coeff)

    return _finalise(grid, num, pair, annih)


def _finalise(grid, num, pair, annih) -> QuadraticBosonForm:
    herm_defect = np.max(np.abs(num - num.conj().T)) if num.size else 0.0
    pair_sym = pair + pair.T
    annih_sym = annih + annih.T
    cross_defect = np.max(np.abs(annih_sym - pair_sym.conj())) if pair.size else 0.0
    scale = max(1.0, np.max(np.abs(num)), np.max(np.abs(pair_sym)))
    if max(herm_defect, cross_defect) > 1e-9 * scale:
        raise ArithmeticError(
            f"assembled form is not Hermitian (defects {herm_defect:.2e}, {cross_defect:.2e})"
        )
    return QuadraticBosonForm(
        grid=grid,
        number_block=0.5 * (num + num.conj().T),
        pair_block=0.5 * (pair_sym + annih_sym.conj()),
    )


# lightcone channels of the boost density: (derivative factor, weight moments)
# d(k) conventions: time derivative of e^{i s k.x} gives i s w, spatial gives -i s k_a.
def _boost_channels(mass: float):
    return (
        (lambda s, w, k: -1j * s * k[1], "x1"),  # d_2 (transverse)
        (lambda s, w, k: -1j * s * k[2], "x1"),  # d_3 (transverse)
        (lambda s, w, k: mass * np.ones_like(w) * (1.0 + 0j), "x1"),  # mass channel
        (lambda s, w, k: 1j * s * (w + k[0]), "vplus"),  # d_v = d_0 - d_1
        (lambda s, w, k: 1j * s * (w - k[0]), "vminus"),  # d_u = d_0 + d_1
    )


def _channel_weight_transform(f: PacketSpec, which: str, q4: np.ndarray) -> np.ndarray:
    """Transform of the channel weight times ``f``; weights are linear in x."""
    m0 = f.fourier_moment(q4, 0)
    m1 = f.fourier_moment(q4, 1)
    if which == "x1":
        return 0.5 * m1
    if which == "vplus":
        return 0.25 * (m0 + m1)
    if which == "vminus":
        return 0.25 * (m1 - m0)
    raise ValueError(which)


def _assemble_boost_kappa(grid: ModeGrid, params: ThermalParams, f: PacketSpec):
    if grid.species != "single":
        raise ValueError("the boost density needs a single-species grid")
    if f is None:
        raise ValueError("the boost density needs a smearing packet")
    n = grid.n_nodes
    num = np.zeros((n, n), dtype=complex)
    pair = np.zeros((n, n), dtype=complex)
    annih = np.zeros((n, n), dtype=complex)
    k = grid.momenta
    # the transverse axes feed k[1], k[2]; the boost axis is component 0 here
    # -> store momenta in the natural order (k1, k2, k3)
    w = params.omega(k)
    sqw = np.sqrt(grid.weights)
    for dfun, wname in _boost_channels(params.mass):
        for e1 in _VACUUM_FIELD:
            s1 = e1[3]
            d1 = dfun(s1, w, (k[0], k[1], k[2]))
            for e2 in _VACUUM_FIELD:
                s2 = e2[3]
                d2 = dfun(s2, w, (k[0], k[1], k[2]))
                base = np.multiply.outer(d1, d2) / (
                    2.0 * np.sqrt(np.multiply.outer(w, w))
                )
                freq = s1 * w[:, None] + s2 * w[None, :]
                mom = s1 * k[:, :, None] + s2 * k[:, None, :]
                q4 = np.concatenate([freq[None], mom]).reshape(4, -1)
                what = _channel_weight_transform(f, wname, q4).reshape(n, n)
                coeff = base * what * np.multiply.outer(sqw, sqw) / TWO_PI_CUBED
                _route((num, pair, annih), grid, e1, e2, coeff)
    return _finalise(grid, num, pair, annih)


def commutator_bracket(a: QuadraticBosonForm, b: QuadraticBosonForm) -> float:
    """Norm of the BdG bracket of two forms (zero iff the forms commute)."""
    sigma3 = np.diag(
        np.concatenate([np.ones(a.grid.n_modes), -np.ones(a.grid.n_modes)])
    )
    ha, hb = a.bdg_matrix(), b.bdg_matrix()
    bracket = ha @ sigma3 @ hb - hb @ sigma3 @ ha
    return float(np.linalg.norm(bracket))


# ---------------------------------------------------------------------------
# exact diagonalisation oracle
# ---------------------------------------------------------------------------

_MAX_FOCK_DIM = 200_000


def _ladder(nmax: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, nmax + 1.0)), 1)


def _mode_operator(op: np.ndarray, mode: int, n_modes: int, nmax: int) -> sp.csr_matrix:
    mats = []
    eye = sp.identity(nmax + 1, format="csr")
    for m in range(n_modes):
        mats.append(sp.csr_matrix(op) if m == mode else eye)
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def fock_operator(form: QuadraticBosonForm, nmax: int):
    """The form as a sparse operator on the truncated Fock space."""
    n_modes = form.grid.n_modes
    dim = (nmax + 1) ** n_modes
    if dim > _MAX_FOCK_DIM:
        raise ValueError(f"truncated Fock dimension {dim} too large")
    a_ops = [
        _mode_operator(_ladder(nmax), m, n_modes, nmax) for m in range(n_modes)
    ]
    h = sp.csr_matrix((dim, dim), dtype=complex)
    nb, pb = form.number_block, form.pair_block
    for i in range(n_modes):
        for j in range(n_modes):
            if nb[i, j] != 0:
                h = h + nb[i, j] * (a_ops[i].conj().T @ a_ops[j])
            if pb[i, j] != 0:
                h = h + 0.5 * pb[i, j] * (a_ops[i].conj().T @ a_ops[j].conj().T)
                h = h + 0.5 * np.conj(pb[i, j]) * (a_ops[i] @ a_ops[j])
    return h


def exact_diag_oracle(form: QuadraticBosonForm, nmax: int) -> float:
    """Smallest eigenvalue of the truncated Fock-space operator."""
    h = fock_operator(form, nmax)
    if h.shape[0] <= 2048:
        return float(np.linalg.eigvalsh(h.toarray())[0])
    vals = spla.eigsh(h, k=1, which="SA", return_eigenvectors=False)
    return float(vals[0])


# ---------------------------------------------------------------------------
# purified single-mode thermal oscillator
# ---------------------------------------------------------------------------

def purification_crosscheck(beta: float, omega: float, levels: int = 40) -> dict:
    """Checks on the doubled (two-mode squeezed) thermal oscillator.

    Builds the truncated purified state ``Omega ~ sum_n e^{-beta w n / 2} |n, n>``
    with hole mode ``a`` and particle mode ``b`` and verifies

    * the occupation ``<b* b> = (e^{beta w} - 1)^{-1}``;
    * the KMS relation ``e^{-beta w} <b b*> = <b* b>``;
    * the thermal quasiparticle ``B+ b - B- a*`` annihilates the state;
    * the log-spectrum of ``Delta = e^{-beta L}``, ``L = w (b*b - a*a)``;
    * ``J Omega = Omega`` for the swap conjugation;
    * agreement with the standard-form (density matrix) expectation.
    """
    if levels < 4:
        raise ValueError("need at least four levels")
    d = levels
    a1 = _ladder(d - 1)
    eye = np.eye(d)
    # doubled space: first factor holds the a (hole) mode, second the b mode
    a_op = np.kron(a1, eye)
    b_op = np.kron(eye, a1)
    nvec = np.arange(d)
    z = np.sum(np.exp(-beta * omega * nvec))
    diag_amp = np.exp(-0.5 * beta * omega * nvec) / np.sqrt(z)
    omega_vec = np.zeros(d * d)
    omega_vec[nvec * d + nvec] = diag_amp

    n_a = a_op.conj().T @ a_op
    n_b = b_op.conj().T @ b_op
    l_op = omega * (n_b - n_a)

    occupation = float(omega_vec @ n_b @ omega_vec)
    target = 1.0 / np.expm1(beta * omega)

    kms_lhs = np.exp(-beta * omega) * float(
        omega_vec @ (b_op @ b_op.conj().T) @ omega_vec
    )
    kms_defect = abs(kms_lhs - occupation)

    bp = float(thermal_factor(+1, omega, beta))
    bm = float(thermal_factor(-1, omega, beta))
    # cancellation is exact even in truncation: the truncated a* skips the
    # top level, matching the range the truncated b reaches
    quasi = (bp * b_op - bm * a_op.conj().T) @ omega_vec
    quasi_defect = float(np.linalg.norm(quasi))

    # Delta spectrum pattern, compared on the log scale
    expected = beta * omega * (np.add.outer(-nvec, nvec)).ravel()
    delta_defect = float(
        np.max(np.abs(np.sort(beta * np.diag(l_op)) - np.sort(expected)))
    )

    # swap conjugation
    swapped = omega_vec.reshape(d, d).T.ravel()
    j_defect = float(np.linalg.norm(swapped - omega_vec))

    # standard-form bridge: Gibbs density matrix on d levels
    rho = np.diag(np.exp(-beta * omega * nvec) / z).astype(complex)
    sf_occ = float(np.trace(rho @ np.diag(nvec)).real)

    tail = float(np.exp(-beta * omega * (d - 1)) * d)
    return {
        "occupation": occupation,
        "occupation_target": target,
        "occupation_defect": abs(occupation - target),
        "kms_defect": kms_defect,
        "quasiparticle_defect": abs(quasi_defect),
        "delta_spectrum_defect": delta_defect,
        "j_defect": j_defect,
        "standard_form_occupation": sf_occ,
        "bridge_defect": abs(sf_occ - occupation),
        "truncation_tail": tail,
    }
