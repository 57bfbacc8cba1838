"""Dense operators on the 2^N register space of N qubit dots.

Basis convention: site 0 is the leftmost tensor factor (most significant bit);
basis index b has site i excited iff bit (N-1-i) of b is set.  Single-site
algebra: [s+, s-] = 2 sz with sz = diag(-1/2, +1/2) in the (|0>, |1>) basis,
so the register Hamiltonian E * sum_i sz_i splits the qubit levels by E.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

#: Dense-representation cap; density-matrix evolution is O(2^{3N}).
MAX_QUBITS = 10

_SP2 = np.array([[0.0, 0.0], [1.0, 0.0]])        # |1><0|
_SM2 = _SP2.T.copy()                             # |0><1|
_SZ2 = np.diag([-0.5, 0.5])
_HAD2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def _check_n(n: int) -> None:
    if not (1 <= n <= MAX_QUBITS):
        raise ValueError(f"num qubits must be in 1..{MAX_QUBITS}, got {n}")


def dim(n: int) -> int:
    return 2 ** n


def site_operator(op2: np.ndarray, site: int, n: int) -> np.ndarray:
    """Embed a 2x2 operator on one site of the N-qubit register."""
    _check_n(n)
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for {n} qubits")
    m = np.array([[1.0]], dtype=complex)
    for j in range(n):
        m = np.kron(m, op2 if j == site else np.eye(2))
    return m


@lru_cache(maxsize=MAX_QUBITS)
def lowering_ops(n: int) -> np.ndarray:
    """Stack of sigma^-_i, shape (n, 2^n, 2^n)."""
    return np.stack([site_operator(_SM2, i, n) for i in range(n)])


@lru_cache(maxsize=MAX_QUBITS)
def raising_ops(n: int) -> np.ndarray:
    return np.stack([site_operator(_SP2, i, n) for i in range(n)])


@lru_cache(maxsize=MAX_QUBITS)
def sz_diagonal(n: int) -> np.ndarray:
    """Diagonal of the total sz operator (half-integers), shape (2^n,)."""
    _check_n(n)
    bits = (np.arange(dim(n))[:, None] >> np.arange(n)[None, :]) & 1
    return bits.sum(axis=1) - n / 2.0


def sz_total(n: int) -> np.ndarray:
    return np.diag(sz_diagonal(n)).astype(complex)


def collective(coeffs, kind: str, n: int) -> np.ndarray:
    """sum_i coeffs[i] * sigma^kind_i for kind in {'+', '-', 'z'}."""
    ops = {"+": raising_ops, "-": lowering_ops}.get(kind)
    if ops is not None:
        return np.einsum("i,ijk->jk", np.asarray(coeffs, dtype=complex), ops(n))
    if kind != "z":
        raise ValueError("kind must be '+', '-' or 'z'")
    return sum(coeffs[i] * site_operator(_SZ2, i, n) for i in range(n))


def s_q(q: float, kind: str, n: int) -> np.ndarray:
    """Phased collective operator sum_j e^{i q j} sigma^kind_j, j = 1..N."""
    phases = np.exp(1j * q * np.arange(1, n + 1))
    return collective(phases, kind, n)


def u_q(q: float, n: int) -> np.ndarray:
    """Diagonal unitary exp(i q sum_j j sz_j), j = 1..N."""
    _check_n(n)
    bits = (np.arange(dim(n))[:, None] >> np.arange(n)[None, :]) & 1
    # bit k holds site i = n-1-k, whose 1-based label is j = n-k
    j = n - np.arange(n)
    phase = (bits * j[None, :]).sum(axis=1) - j.sum() / 2.0
    return np.diag(np.exp(1j * q * phase))


def total_spin_squared(n: int) -> np.ndarray:
    """S^2 = (1/2)(S+ S- + S- S+) + Sz^2 for the collective spin."""
    sp = collective(np.ones(n), "+", n)
    sm = sp.conj().T
    sz = sz_total(n)
    return 0.5 * (sp @ sm + sm @ sp) + sz @ sz


def hadamard(site: int, n: int) -> np.ndarray:
    return site_operator(_HAD2, site, n)


def cnot(control: int, target: int, n: int) -> np.ndarray:
    """Controlled-NOT flipping ``target`` when ``control`` is excited."""
    _check_n(n)
    d = dim(n)
    m = np.zeros((d, d), dtype=complex)
    cbit, tbit = n - 1 - control, n - 1 - target
    for b in range(d):
        out = b ^ (1 << tbit) if (b >> cbit) & 1 else b
        m[out, b] = 1.0
    return m


def basis_state(excited_sites, n: int) -> np.ndarray:
    """Computational basis vector with the given sites excited."""
    _check_n(n)
    idx = 0
    for s in excited_sites:
        if not 0 <= s < n:
            raise ValueError(f"site {s} out of range")
        idx |= 1 << (n - 1 - s)
    v = np.zeros(dim(n), dtype=complex)
    v[idx] = 1.0
    return v
