"""Register master equation: canonical dissipator, decoherence functionals,
and adaptive time integration.

The generator acts on 2^N x 2^N density matrices as

    drho/dt = (i/hbar) [rho, H_R + dH_R]
              + sum_{eta,mu} lam_mu^eta ( L rho L+ - 1/2 {L+ L, rho} )

with H_R = E sum_i sz_i, dH_R the Lamb shift assembled from the Delta
matrices, and the jump operators L_mu^eta = sum_i u_i^mu sigma_i^eta obtained
from the Hermitian eigendecomposition of Gamma^(eta).  Rates lam are in ps^-1
(the 1/hbar of the golden rule is folded into the Gamma matrices), energies
in meV.

Because H_R generates identical phase rotations on every site, it commutes
with the Lamb shift and leaves the dissipator invariant; ``evolve`` therefore
integrates in the frame co-rotating with H_R (an exact transformation) and
restores the phases at the sample times.  Set ``lab_frame=True`` to integrate
the untransformed equation instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import registers as reg
from .phonon import CouplingMatrices
from .units import HBAR


class EvolutionError(RuntimeError):
    """Integration failure: step underflow or loss of positivity."""


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

class RegisterState:
    """Pure vector or density operator on the 2^N register space."""

    def __init__(self, vector=None, rho=None):
        if (vector is None) == (rho is None):
            raise ValueError("provide exactly one of vector, rho")
        if vector is not None:
            v = np.asarray(vector, dtype=complex).ravel()
            self._check_dim(v.shape[0])
            norm = np.linalg.norm(v)
            if abs(norm - 1.0) > 1e-8:
                raise ValueError(f"pure state norm {norm} != 1")
            self.vector = v / norm
            self.rho = None
        else:
            m = np.asarray(rho, dtype=complex)
            self._check_dim(m.shape[0])
            if m.shape[0] != m.shape[1]:
                raise ValueError("rho must be square")
            if np.abs(m - m.conj().T).max() > 1e-10 * max(np.abs(m).max(), 1e-300):
                raise ValueError("rho is not Hermitian")
            if abs(np.trace(m).real - 1.0) > 1e-10:
                raise ValueError("tr rho != 1")
            if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -1e-8:
                raise ValueError("rho has a significantly negative eigenvalue")
            self.vector = None
            self.rho = m

    @staticmethod
    def _check_dim(d):
        n = int(round(np.log2(d)))
        if 2 ** n != d or n < 1 or n > reg.MAX_QUBITS:
            raise ValueError(f"dimension {d} is not 2^N with N <= {reg.MAX_QUBITS}")

    @classmethod
    def pure(cls, vector) -> "RegisterState":
        return cls(vector=vector)

    @classmethod
    def mixed(cls, rho) -> "RegisterState":
        return cls(rho=rho)

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @property
    def dim(self) -> int:
        return len(self.vector) if self.is_pure else self.rho.shape[0]

    @property
    def num_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.vector, self.vector.conj())
        return self.rho.copy()


@dataclass(frozen=True)
class TrajectoryPoint:
    time: float             # ps
    fidelity: float         # <psi0| rho |psi0>
    linear_entropy: float   # 1 - tr rho^2
    trace_error: float      # |tr rho - 1|
    min_eigenvalue: float


@dataclass(frozen=True)
class LindbladModel:
    """Canonical dissipator plus register Hamiltonian for N qubit dots."""

    num_qubits: int
    level_splitting: float                # E, meV
    rates_minus: np.ndarray               # (N,), ps^-1
    ops_minus: np.ndarray                 # (N, D, D)
    u_minus: np.ndarray                   # (N, N) eigenvector columns
    rates_plus: np.ndarray
    ops_plus: np.ndarray
    u_plus: np.ndarray
    lamb_shift: np.ndarray | None = None  # (D, D), meV

    def channels(self):
        """Yield (eta, lam, L) over all decomposition channels."""
        for lam, L in zip(self.rates_minus, self.ops_minus):
            yield "-", lam, L
        for lam, L in zip(self.rates_plus, self.ops_plus):
            yield "+", lam, L

    def hamiltonian(self, include_lamb: bool = True) -> np.ndarray:
        """H_R (+ dH_R), meV."""
        h = self.level_splitting * reg.sz_total(self.num_qubits)
        if include_lamb and self.lamb_shift is not None:
            h = h + self.lamb_shift
        return h

    def effective_hamiltonian(self) -> np.ndarray:
        """H~ = sum lam L+ L (ps^-1); <psi|H~|psi> is the sz-eigenstate rate."""
        d = 2 ** self.num_qubits
        h = np.zeros((d, d), dtype=complex)
        for _, lam, L in self.channels():
            h += lam * (L.conj().T @ L)
        return h

    def without_lamb_shift(self) -> "LindbladModel":
        return LindbladModel(self.num_qubits, self.level_splitting,
                             self.rates_minus, self.ops_minus, self.u_minus,
                             self.rates_plus, self.ops_plus, self.u_plus, None)


def _decompose(gamma: np.ndarray, kind: str, scale: float):
    w, v = np.linalg.eigh(0.5 * (gamma + gamma.conj().T))
    floor = -1e-10 * max(scale, 1e-300)
    if w.min() < floor:
        raise ValueError(
            f"gamma_{kind} has genuinely negative eigenvalue {w.min():.3e} "
            f"(clip floor {floor:.3e}); not a valid coupling matrix")
    w = np.clip(w, 0.0, None)
    n = gamma.shape[0]
    ops_site = reg.lowering_ops(n) if kind == "minus" else reg.raising_ops(n)
    ops = np.einsum("im,ijk->mjk", v, ops_site)
    return w, ops, v


def canonical_lindblad(coupling: CouplingMatrices, level_splitting: float = 0.0,
                       include_lamb: bool = True) -> LindbladModel:
    """Diagonalize Gamma^(eta) into rates and collective jump operators.

    Eigenvalues inside the numerical-noise band [-1e-10 * ||Gamma||, 0) are
    clipped to zero; anything lower raises (invalid coupling).
    """
    n = coupling.num_dots
    if n > reg.MAX_QUBITS:
        raise ValueError(f"dense representation capped at {reg.MAX_QUBITS} qubits")
    scale = max(np.abs(coupling.gamma_minus).max(),
                np.abs(coupling.gamma_plus).max())
    wm, om, vm = _decompose(coupling.gamma_minus, "minus", scale)
    wp, op, vp = _decompose(coupling.gamma_plus, "plus", scale)
    lamb = None
    if include_lamb and coupling.delta_minus is not None:
        lamb = lamb_shift_hamiltonian(coupling)
    return LindbladModel(num_qubits=n, level_splitting=level_splitting,
                         rates_minus=wm, ops_minus=om, u_minus=vm,
                         rates_plus=wp, ops_plus=op, u_plus=vp,
                         lamb_shift=lamb)


def lamb_shift_hamiltonian(coupling: CouplingMatrices) -> np.ndarray:
    """dH_R = sum_eta sum_ij Delta^(eta)_ij sigma_i^{-eta} sigma_j^{eta}, meV."""
    n = coupling.num_dots
    sp, sm = reg.raising_ops(n), reg.lowering_ops(n)
    d = 2 ** n
    h = np.zeros((d, d), dtype=complex)
    dm = coupling.delta_minus if coupling.delta_minus is not None else np.zeros((n, n))
    dp = coupling.delta_plus if coupling.delta_plus is not None else np.zeros((n, n))
    h += np.einsum("ij,iab,jbc->ac", dm, sp, sm)
    h += np.einsum("ij,iab,jbc->ac", dp, sm, sp)
    return h


def effective_hamiltonian(coupling: CouplingMatrices) -> np.ndarray:
    """H~ = sum_ij Gamma-_ij s+_i s-_j + Gamma+_ij s-_i s+_j, ps^-1."""
    n = coupling.num_dots
    sp, sm = reg.raising_ops(n), reg.lowering_ops(n)
    h = np.einsum("ij,iab,jbc->ac", coupling.gamma_minus.astype(complex), sp, sm)
    h += np.einsum("ij,iab,jbc->ac", coupling.gamma_plus.astype(complex), sm, sp)
    return h


# ---------------------------------------------------------------------------
# generator and functionals
# ---------------------------------------------------------------------------

def _dissipator_parts(model: LindbladModel):
    """(scaled ops, conj ops, sum lam L+ L) with zero-rate channels pruned."""
    lams, ops = [], []
    for _, lam, L in model.channels():
        if lam > 0.0:
            lams.append(lam)
            ops.append(L)
    d = 2 ** model.num_qubits
    if not lams:
        z = np.zeros((0, d, d), dtype=complex)
        return z, z, np.zeros((d, d), dtype=complex)
    lams = np.asarray(lams)
    ops = np.stack(ops)
    big_k = np.einsum("m,mji,mjk->ik", lams, ops.conj(), ops)   # sum lam L+ L
    return lams[:, None, None] * ops, ops.conj(), big_k


def liouvillian_apply(model: LindbladModel, rho: np.ndarray,
                      include_lamb: bool = True) -> np.ndarray:
    """Right-hand side drho/dt of the master equation, ps^-1."""
    rho = np.asarray(rho, dtype=complex)
    h = model.hamiltonian(include_lamb)
    ops_scaled, ops_conj, big_k = _dissipator_parts(model)
    out = (1j / HBAR) * (rho @ h - h @ rho)
    if len(ops_scaled):
        jump = np.tensordot(ops_scaled @ rho, ops_conj, axes=([0, 2], [0, 2]))
        out += jump - 0.5 * (big_k @ rho + rho @ big_k)
    return out


def fidelity(rho: np.ndarray, psi0: np.ndarray) -> float:
    """F = <psi0| rho |psi0>, clipped to [0, 1] within tolerance."""
    f = float(np.real(psi0.conj() @ rho @ psi0))
    return min(max(f, 0.0), 1.0)


def linear_entropy(rho: np.ndarray) -> float:
    """delta = 1 - tr rho^2 (zero for pure states)."""
    s = 1.0 - float(np.real(np.einsum("ij,ji->", rho, rho)))
    return max(s, 0.0)


def tau1_inverse(model: LindbladModel, psi: np.ndarray) -> float:
    """First-order decoherence rate of a pure state, ps^-1.

    sum_{eta,mu} lam (||L psi||^2 - |<psi|L|psi>|^2): the dispersion of the
    jump operators in the state.  Independent of H_R and the Lamb shift.
    """
    psi = np.asarray(psi, dtype=complex)
    total = 0.0
    for _, lam, L in model.channels():
        if lam == 0.0:
            continue
        v = L @ psi
        total += lam * (np.vdot(v, v).real - abs(np.vdot(psi, v)) ** 2)
    return max(total, 0.0)


def _require_sz_eigenstate(psi: np.ndarray, n: int, what: str) -> None:
    m = reg.sz_diagonal(n)
    mv = m * psi
    mean = float(np.real(np.vdot(psi, mv)))
    if np.linalg.norm(mv - mean * psi) > 1e-8:
        raise ValueError(f"{what} is defined only for sz eigenstates")


def tau1_inverse_via_heff(coupling: CouplingMatrices, psi: np.ndarray) -> float:
    """Decoherence rate as <psi| H~ |psi>; valid for sz eigenstates only."""
    psi = np.asarray(psi, dtype=complex)
    n = coupling.num_dots
    _require_sz_eigenstate(psi, n, "the effective-Hamiltonian rate")
    h = effective_hamiltonian(coupling)
    return float(np.real(np.vdot(psi, h @ psi)))


def tau_u_inverse(lamb_shift: np.ndarray, psi: np.ndarray) -> float:
    """Unitary dephasing rate sqrt(Var(dH_R)/2)/hbar for an sz eigenstate, ps^-1."""
    psi = np.asarray(psi, dtype=complex)
    n = int(round(np.log2(len(psi))))
    _require_sz_eigenstate(psi, n, "tau_U")
    hpsi = lamb_shift @ psi
    var = np.vdot(hpsi, hpsi).real - np.vdot(psi, hpsi).real ** 2
    scale = max(np.vdot(hpsi, hpsi).real, 1.0)
    if var < -1e-12 * scale:
        raise ValueError(f"negative variance {var:.3e}")
    return float(np.sqrt(max(var, 0.0) / 2.0) / HBAR)


# ---------------------------------------------------------------------------
# adaptive integration (Dormand-Prince 5(4) with PI step control)
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])


def evolve(model: LindbladModel, state0: RegisterState, t_grid,
           rtol: float = 1e-8, atol: float = 1e-10,
           include_lamb: bool = True, lab_frame: bool = False,
           max_steps: int = 5_000_000, keep_states: bool = False):
    """Integrate the master equation, sampling observables on ``t_grid``.

    ``t_grid`` must start at 0 and increase.  The initial state must be pure
    (it is the fidelity reference).  Returns a list of TrajectoryPoint; with
    ``keep_states`` a second list of lab-frame density matrices is returned.

    Hermiticity is restored after every accepted step.  A trajectory whose
    smallest eigenvalue falls below -1e-6 aborts with EvolutionError.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must start at 0 and be strictly increasing")
    if not state0.is_pure:
        raise ValueError("evolve needs a pure initial state as fidelity reference")
    psi0 = state0.vector
    n = state0.num_qubits
    if n != model.num_qubits:
        raise ValueError("state dimension does not match the model")

    ops_scaled, ops_conj, big_k = _dissipator_parts(model)
    if lab_frame:
        h_frame = model.hamiltonian(include_lamb)
        m_diag = None
    else:
        # co-rotating frame of H_R: exact, since H_R commutes with dH_R and
        # rotates every jump operator by a pure phase
        h_frame = model.lamb_shift if (include_lamb and model.lamb_shift is not None) \
            else np.zeros((2 ** n, 2 ** n), dtype=complex)
        m_diag = reg.sz_diagonal(n)
    have_jumps = len(ops_scaled) > 0

    def rhs(rho):
        out = (1j / HBAR) * (rho @ h_frame - h_frame @ rho)
        if have_jumps:
            out += np.tensordot(ops_scaled @ rho, ops_conj, axes=([0, 2], [0, 2]))
            out -= 0.5 * (big_k @ rho + rho @ big_k)
        return out

    def to_lab(rho, t):
        if m_diag is None:
            return rho
        u = np.exp(-1j * model.level_splitting * t / HBAR * m_diag)
        return u[:, None] * rho * u.conj()[None, :]

    def err_norm(e, y0, y1):
        sc = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
        return float(np.sqrt(np.mean((np.abs(e) / sc) ** 2)))

    rho = state0.density()
    points, states = [], []

    def record(t, rho_frame):
        rho_lab = to_lab(rho_frame, t)
        w = np.linalg.eigvalsh(0.5 * (rho_lab + rho_lab.conj().T))
        if w.min() < -1e-6:
            raise EvolutionError(
                f"positivity lost at t = {t:.6g} ps (min eigenvalue {w.min():.3e})")
        points.append(TrajectoryPoint(
            time=float(t),
            fidelity=fidelity(rho_lab, psi0),
            linear_entropy=linear_entropy(rho_lab),
            trace_error=abs(np.trace(rho_lab).real - 1.0),
            min_eigenvalue=float(w.min())))
        if keep_states:
            states.append(rho_lab)

    record(0.0, rho)
    t = 0.0
    # initial step from the RHS magnitude
    f0 = rhs(rho)
    scale = atol + rtol * np.abs(rho).max()
    h = min(t_grid[-1], 0.1 * scale / max(np.abs(f0).max(), 1e-300))
    h = max(h, 1e-12)
    err_prev = 1.0
    k_last = f0
    steps = 0

    for t_target in t_grid[1:]:
        while t < t_target:
            h = min(h, t_target - t)
            if h < 1e-14 * max(1.0, t):
                raise EvolutionError(f"step size underflow at t = {t:.6g} ps")
            k = [k_last]
            for i in range(1, 7):
                y = rho
                for j, a in enumerate(_DP_A[i]):
                    if a:
                        y = y + (h * a) * k[j]
                k.append(rhs(y))
            y5 = rho
            for j in range(7):
                if _DP_B5[j]:
                    y5 = y5 + (h * _DP_B5[j]) * k[j]
            err = np.zeros_like(rho)
            for j in range(7):
                db = _DP_B5[j] - _DP_B4[j]
                if db:
                    err = err + (h * db) * k[j]
            enorm = err_norm(err, rho, y5)
            steps += 1
            if steps > max_steps:
                raise EvolutionError("maximum step count exceeded")
            if enorm <= 1.0:
                t += h
                rho = 0.5 * (y5 + y5.conj().T)
                k_last = rhs(rho)   # FSAL invalidated by resymmetrization
                fac = 0.9 * (enorm + 1e-16) ** -0.14 * (err_prev + 1e-16) ** 0.08
                err_prev = enorm
            else:
                fac = max(0.2, 0.9 * (enorm + 1e-16) ** -0.2)
            h *= min(5.0, max(0.2, fac))
        record(t_target, rho)

    return (points, states) if keep_states else points
