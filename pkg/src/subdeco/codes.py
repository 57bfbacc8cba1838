"""Encoded states, closed-form rate factors, and the circular coupling model.

Candidate encodings are dimer products (singlet/triplet pairs over a perfect
matching of the sites) and the symmetric sz = 0 Dicke state.  Their
first-order decoherence rates follow from the normalized coupling matrix
through the closed-form factors ``f_factors``; the general search reduces to
the kernel of the effective Hamiltonian H~.

The circular model (CM) idealizes the couplings as Gamma_ij = Gamma cos(Q(i-j))
with a dimensionless angle Q; its effective Hamiltonian is generated by the
phased collective operators S_Q^{+-} = sum_j e^{iQj} sigma_j^{+-}, whose Lie
closure, kernel dimensions and Q = 0 spectra are computed here and checked in
the verification harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import registers as reg
from .lindblad import effective_hamiltonian
from .phonon import CouplingMatrices


@dataclass(frozen=True)
class DimerSpec:
    """Perfect matching of sites 1..N with a singlet/triplet signature.

    ``pairs`` are 1-based index pairs; ``signature`` assigns each pair 0
    (singlet) or 1 (triplet).  Stored canonically: each pair sorted, pairs
    sorted by first element, signature aligned.
    """

    pairs: tuple
    signature: tuple

    def __init__(self, pairs, signature):
        pairs = [tuple(sorted(int(x) for x in p)) for p in pairs]
        if isinstance(signature, dict):
            signature = [signature[p] for p in pairs]
        if len(signature) != len(pairs):
            raise ValueError("signature length must match the number of pairs")
        order = sorted(range(len(pairs)), key=lambda k: pairs[k])
        pairs = tuple(pairs[k] for k in order)
        signature = tuple(int(signature[k]) for k in order)
        if any(s not in (0, 1) for s in signature):
            raise ValueError("signature entries must be 0 or 1")
        flat = [i for p in pairs for i in p]
        n = 2 * len(pairs)
        if sorted(flat) != list(range(1, n + 1)):
            raise ValueError(f"pairs must partition 1..{n} into disjoint pairs")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "signature", signature)

    @property
    def num_qubits(self) -> int:
        return 2 * len(self.pairs)


@dataclass(frozen=True)
class CMSpec:
    """Circular-model parameters: N sites, angle Q, scalar rates (ps^-1)."""

    num_qubits: int
    q_angle: float
    gamma_minus: float
    gamma_plus: float = 0.0

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        if self.gamma_minus < 0 or self.gamma_plus < 0:
            raise ValueError("rates must be >= 0")
        if self.gamma_plus > self.gamma_minus:
            raise ValueError("gamma_minus must dominate gamma_plus")


@dataclass(frozen=True)
class CodeReport:
    """Kernel data of an effective Hamiltonian (rates in the matrix units)."""

    ground_energy: float
    kernel_dimension: int
    kernel_basis: np.ndarray        # (D, d_N), orthonormal columns
    eigenvalues: np.ndarray         # full ascending spectrum
    tau1_table: tuple = ()          # optional ((label, rate), ...)


# ---------------------------------------------------------------------------
# state constructions
# ---------------------------------------------------------------------------

def dimer_state(spec: DimerSpec) -> np.ndarray:
    """Normalized product of pair states (|01> - (-1)^gamma |10>)/sqrt(2)."""
    n = spec.num_qubits
    psi = np.zeros(2 ** n, dtype=complex)
    m = len(spec.pairs)
    for choice in range(2 ** m):
        amp = 1.0
        excited = []
        for k, (i, j) in enumerate(spec.pairs):
            if (choice >> k) & 1:
                excited.append(i - 1)       # |10>: first member excited
                amp *= -((-1) ** spec.signature[k])
            else:
                excited.append(j - 1)       # |01>: second member excited
        idx = 0
        for s in excited:
            idx |= 1 << (n - 1 - s)
        psi[idx] += amp
    return psi / np.linalg.norm(psi)


def synthesize_dimer(spec: DimerSpec) -> np.ndarray:
    """Build the dimer state by gates: per pair, prepare |gamma+1 mod 2, 1>,
    Hadamard on the first member, then CNOT onto the second.

    Agrees with ``dimer_state`` up to a global phase.
    """
    n = spec.num_qubits
    excited = []
    for (l, m), g in zip(spec.pairs, spec.signature):
        if (g + 1) % 2 == 1:
            excited.append(l - 1)
        excited.append(m - 1)
    psi = reg.basis_state(excited, n)
    for (l, m), _ in zip(spec.pairs, spec.signature):
        psi = reg.hadamard(l - 1, n) @ psi
        psi = reg.cnot(l - 1, m - 1, n) @ psi
    return psi


def symmetric_state(n: int) -> np.ndarray:
    """Totally symmetric sz = 0 Dicke state of N (even) qubits."""
    if n % 2 != 0:
        raise ValueError("symmetric sz = 0 state needs even N")
    d = 2 ** n
    psi = np.zeros(d, dtype=complex)
    half = n // 2
    for b in range(d):
        if bin(b).count("1") == half:
            psi[b] = 1.0
    return psi / np.linalg.norm(psi)


def dimer_partitions(n: int):
    """All perfect matchings of 1..N (N even), canonically ordered."""
    if n % 2 != 0:
        raise ValueError("perfect matchings need even N")

    def rec(items):
        if not items:
            yield ()
            return
        first = items[0]
        for k in range(1, len(items)):
            rest = items[1:k] + items[k + 1:]
            for tail in rec(rest):
                yield ((first, items[k]),) + tail

    yield from rec(tuple(range(1, n + 1)))


# ---------------------------------------------------------------------------
# closed-form rates
# ---------------------------------------------------------------------------

def f_factors(gamma_tilde: np.ndarray, state) -> float:
    """Many-qubit correlation factor; tau1^-1 = f * Gamma_0 N / 2.

    ``gamma_tilde`` is the coupling matrix normalized to unit diagonal;
    ``state`` is a DimerSpec or the string "sym".  f = 1 for uncorrelated
    couplings (gamma_tilde = identity).
    """
    g = np.asarray(gamma_tilde)
    n = g.shape[0]
    if np.abs(np.diagonal(g) - 1.0).max() > 1e-9:
        raise ValueError("gamma_tilde must have unit diagonal")
    if isinstance(state, str):
        if state != "sym":
            raise ValueError(f"unknown state label {state!r}")
        tri = np.triu_indices(n, k=1)
        return float(1.0 + np.real(g[tri]).sum() / (n - 1))
    spec = state
    if spec.num_qubits != n:
        raise ValueError("dimer spec size does not match gamma_tilde")
    s = sum((-1) ** gk * np.real(g[i - 1, j - 1])
            for (i, j), gk in zip(spec.pairs, spec.signature))
    return float(1.0 - 2.0 * s / n)


# ---------------------------------------------------------------------------
# circular model
# ---------------------------------------------------------------------------

def cm_model(spec: CMSpec):
    """Coupling matrices Gamma_ij = Gamma^(eta) cos(Q (i-j)) and the matching
    effective Hamiltonian H_Q built from the phased collective operators."""
    n = spec.num_qubits
    diff = np.arange(n)[:, None] - np.arange(n)[None, :]
    cos = np.cos(spec.q_angle * diff)
    coupling = CouplingMatrices(spec.gamma_minus * cos, spec.gamma_plus * cos)
    d = 2 ** n
    h = np.zeros((d, d), dtype=complex)
    for alpha, rate in (("-", spec.gamma_minus), ("+", spec.gamma_plus)):
        if rate == 0.0:
            continue
        opp = "+" if alpha == "-" else "-"
        s_a_q = reg.s_q(spec.q_angle, alpha, n)
        s_a_mq = reg.s_q(-spec.q_angle, alpha, n)
        s_o_q = reg.s_q(spec.q_angle, opp, n)
        s_o_mq = reg.s_q(-spec.q_angle, opp, n)
        h += 0.5 * rate * (s_o_q @ s_a_mq + s_o_mq @ s_a_q)
    return coupling, h


def verify_commutators(n: int, q1: float, q2: float, tol: float = 1e-12):
    """Check [S^+-_Q, S^-+_Q'] = +-2 S^z_{Q+Q'} and [S^z, S^+-_Q] = +-S^+-_Q.

    Returns (passed, max_error) over the four relations.
    """
    sz = reg.sz_total(n)
    worst = 0.0
    for sign, a, b in ((+1, "+", "-"), (-1, "-", "+")):
        sa, sb = reg.s_q(q1, a, n), reg.s_q(q2, b, n)
        lhs = sa @ sb - sb @ sa
        rhs = sign * 2.0 * reg.s_q(q1 + q2, "z", n)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
        sq = reg.s_q(q1, a, n)
        lhs2 = sz @ sq - sq @ sz
        worst = max(worst, float(np.abs(lhs2 - sign * sq).max()))
    return worst <= tol * max(1.0, n), worst


def lindblad_algebra_dim(n: int, q_angle: float, tol: float = 1e-10,
                         max_dim: int | None = None) -> int:
    """Dimension of the complex Lie closure of {S^+-_Q, S^+-_{-Q}}.

    Iterated commutators are orthogonalized against the running span
    (flattened matrices, modified Gram-Schmidt); a direction counts as new
    when its residual exceeds ``tol`` relative to the commutator norm.
    """
    if n > 8:
        raise ValueError("dense Lie closure capped at N = 8")
    gens = [reg.s_q(s * q_angle, kind, n)
            for s in (1, -1) for kind in ("+", "-")]
    basis = []          # orthonormal flattened directions
    elements = []       # matrices spanning the algebra

    def add(mat, scale):
        """scale: norm a vanishing result would have been built from."""
        v = mat.ravel().astype(complex)
        norm0 = np.linalg.norm(v)
        if norm0 <= 100.0 * tol * scale:    # numerically zero commutator
            return False
        for _ in range(2):      # twice for numerical robustness
            for b in basis:
                v = v - (b.conj() @ v) * b
        resid = np.linalg.norm(v)
        if resid <= tol * norm0:
            return False
        basis.append(v / resid)
        elements.append(mat)
        return True

    queue = [g for g in gens if add(g, np.linalg.norm(g))]
    limit = max_dim or 3 * n
    while queue:
        x = queue.pop(0)
        nx = np.linalg.norm(x)
        for y in list(elements):
            c = x @ y - y @ x
            if add(c, nx * np.linalg.norm(y)):
                queue.append(c)
        if len(elements) > limit:
            raise RuntimeError("Lie closure failed to stabilize")
    return len(elements)


def kernel_report(h: np.ndarray, rel_threshold: float = 1e-10) -> CodeReport:
    """Eigendecompose a PSD effective Hamiltonian and extract its kernel."""
    h = np.asarray(h, dtype=complex)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    scale = max(abs(w[-1]), 1e-300)
    mask = w < rel_threshold * scale
    return CodeReport(ground_energy=float(w[0]),
                      kernel_dimension=int(mask.sum()),
                      kernel_basis=v[:, mask],
                      eigenvalues=w)


def sl2_multiplicity(j, n: int) -> int:
    """Multiplicity n(J, N) of the spin-J multiplet in N spin-1/2 systems.

    n(J,N) = N! (2J+1) / ((N/2+J+1)! (N/2-J)!); J is integer for even N and
    half-integer for odd N, with J_min = 0 or 1/2 accordingly.
    """
    two_j = int(round(2 * j))
    if abs(2 * j - two_j) > 1e-12 or two_j < 0:
        raise ValueError("J must be a non-negative (half-)integer")
    if (n + two_j) % 2 != 0:
        raise ValueError(f"J = {j} has wrong parity for N = {n}")
    if two_j > n:
        raise ValueError(f"J = {j} out of range for N = {n}")
    up = (n + two_j) // 2
    return math.factorial(n) * (two_j + 1) // (math.factorial(up + 1)
                                               * math.factorial(n - up))


def allowed_spins(n: int):
    """J values of the N-qubit decomposition (J_min .. N/2 in integer steps)."""
    two_j = n % 2
    out = []
    while two_j <= n:
        out.append(two_j / 2.0)
        two_j += 2
    return out


def cm_spectrum_q0(n: int, gamma_minus: float, gamma_plus: float,
                   check_tol: float = 1e-10):
    """Closed-form spectrum of the Q = 0 circular model.

    E(J, M) = sum_alpha Gamma^(alpha) [J(J+1) - M(M+alpha)], each with
    multiplicity n(J, N).  The table is validated against dense
    diagonalization of the model Hamiltonian (values and multiplicities).
    """
    rows = []
    for j in allowed_spins(n):
        mult = sl2_multiplicity(j, n)
        m = -j
        while m <= j + 1e-9:
            e = (gamma_minus * (j * (j + 1) - m * (m - 1))
                 + gamma_plus * (j * (j + 1) - m * (m + 1)))
            rows.append((j, m, mult, float(e)))
            m += 1.0
    expected = np.sort(np.concatenate([[e] * mult for (_, _, mult, e) in rows]))
    _, h = cm_model(CMSpec(n, 0.0, gamma_minus, gamma_plus))
    w = np.sort(np.linalg.eigvalsh(h))
    scale = max(abs(w).max(), 1.0)
    if len(w) != len(expected) or np.abs(w - expected).max() > check_tol * scale:
        raise RuntimeError("closed-form spectrum disagrees with dense diagonalization")
    return rows


@dataclass(frozen=True)
class N2Spectrum:
    """Closed-form two-qubit spectrum for gamma_12 = beta * gamma_11."""

    energies: dict          # label -> rate
    states: dict            # label -> vector
    beta_critical: float


def n2_spectrum(gamma_minus: float, gamma_plus: float, beta: float) -> N2Spectrum:
    """Two-qubit effective-Hamiltonian spectrum and its ground-state regimes.

    Eigenstates are |11>, |00> and the triplet/singlet combinations; the
    ground state switches from |00> to the singlet (triplet) as beta crosses
    +beta_c (-beta_c), with beta_c = (G- - G+)/(G- + G+).
    """
    if abs(beta) > 1.0:
        raise ValueError("positivity requires |beta| <= 1")
    if not (gamma_minus >= gamma_plus >= 0.0):
        raise ValueError("need gamma_minus >= gamma_plus >= 0")
    s = gamma_minus + gamma_plus
    energies = {
        "11": 2.0 * gamma_minus,
        "00": 2.0 * gamma_plus,
        "triplet": s * (1.0 + beta),
        "singlet": s * (1.0 - beta),
    }
    isq = 1.0 / np.sqrt(2.0)
    states = {
        "11": reg.basis_state([0, 1], 2),
        "00": reg.basis_state([], 2),
        "triplet": isq * (reg.basis_state([1], 2) + reg.basis_state([0], 2)),
        "singlet": isq * (reg.basis_state([1], 2) - reg.basis_state([0], 2)),
    }
    beta_c = (gamma_minus - gamma_plus) / s if s > 0 else 1.0
    return N2Spectrum(energies=energies, states=states, beta_critical=beta_c)


def cm_kernel_states(n: int, j: int) -> np.ndarray:
    """The distance-N/2 dimer state that spans the CM kernel at Q_j on Z_N^*.

    |psi_j> = prod over pairs (i, i+N/2) of (|01> - (-1)^j |10>)/sqrt(2).
    """
    pairs = [(i, i + n // 2) for i in range(1, n // 2 + 1)]
    sig = [j % 2] * len(pairs)
    return dimer_state(DimerSpec(pairs, sig))


def effective_hamiltonian_from_cm(spec: CMSpec) -> np.ndarray:
    """H~ assembled from the CM coupling matrices (equals the S_Q form)."""
    coupling, _ = cm_model(spec)
    return effective_hamiltonian(coupling)
