"""Acoustic-phonon deformation-potential dissipation matrices.

Couples each dot's qubit transition to a single linear acoustic branch
(omega_q = c q) through the deformation potential, |g(q)|^2 = hbar D^2 q /
(2 rho V c).  Tracing out the bath in the Born-Markov limit leaves two pairs
of N x N Hermitian input matrices:

* ``gamma_minus`` / ``gamma_plus`` (ps^-1): on-shell golden-rule rates for
  emission (weight n+1) and absorption (weight n), evaluated at |q| = Q =
  E/(hbar c).  The angular integral is reduced analytically over the azimuth
  (the in-plane factor depends on phi only through qy^2, whose average adds a
  factor pi q_perp^2) and the remaining cos(theta) integral is done by graded
  composite Gauss-Legendre panels with global refinement.

* ``delta_minus`` / ``delta_plus`` (meV): Lamb-shift matrices, a radial
  principal-value integral with the same angular reduction.  The pole at
  hbar c q = E is removed by subtracting the integrand value at the pole over
  a symmetric window.

All matrices are real symmetric Toeplitz: entries depend on the dot distance
z = a (i - j) only.  Because every entry of a given matrix is assembled from
one shared quadrature rule with positive weights, the Gamma matrices are Gram
matrices of the sampled phase vectors and hence positive semidefinite to
machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .device import DeviceParams, MaterialParams, well_form_factor
from .units import HBAR, KB


class QuadratureError(RuntimeError):
    """Raised when a quadrature fails its refinement or cutoff convergence check."""


@dataclass(frozen=True)
class CouplingMatrices:
    """Master-equation input matrices; ``delta_*`` may be None (rate-only)."""

    gamma_minus: np.ndarray     # (N, N), ps^-1
    gamma_plus: np.ndarray      # (N, N), ps^-1
    delta_minus: np.ndarray | None = None   # (N, N), meV
    delta_plus: np.ndarray | None = None    # (N, N), meV

    @property
    def num_dots(self) -> int:
        return self.gamma_minus.shape[0]

    def gamma_total(self) -> np.ndarray:
        return self.gamma_minus + self.gamma_plus

    def with_delta(self, delta: "CouplingMatrices") -> "CouplingMatrices":
        return CouplingMatrices(self.gamma_minus, self.gamma_plus,
                                delta.delta_minus, delta.delta_plus)

    def validate(self, rtol: float = 1e-10) -> None:
        """Check Hermiticity, Toeplitz structure and positivity invariants."""
        mats = [("gamma_minus", self.gamma_minus), ("gamma_plus", self.gamma_plus)]
        if self.delta_minus is not None:
            mats += [("delta_minus", self.delta_minus), ("delta_plus", self.delta_plus)]
        for name, m in mats:
            scale = max(np.abs(m).max(), 1e-300)
            if np.abs(m - m.conj().T).max() > 1e-12 * scale:
                raise ValueError(f"{name} is not Hermitian")
            for k in range(1 - self.num_dots, self.num_dots):
                diag = np.diagonal(m, k)
                if np.abs(diag - diag[0]).max() > 1e-10 * scale:
                    raise ValueError(f"{name} is not Toeplitz")
        for name, m in (("gamma_minus", self.gamma_minus),
                        ("gamma_plus", self.gamma_plus),
                        ("gamma_minus - gamma_plus", self.gamma_minus - self.gamma_plus)):
            scale = max(np.abs(self.gamma_minus).max(), 1e-300)
            w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
            if w.min() < -rtol * scale:
                raise ValueError(f"{name} has negative eigenvalue {w.min():.3e}")


@dataclass(frozen=True)
class CircularFit:
    """Least-squares fit of gamma_ij / gamma_11 against cos(Q_eff z_ij)."""

    gamma_11: float        # ps^-1
    q_eff: float           # nm^-1
    max_residual: float    # dimensionless


def bose_occupation(energy: float, temperature: float) -> float:
    """Thermal boson occupation n = 1/(exp(E/kT) - 1); 0 at T = 0."""
    if energy <= 0:
        raise ValueError("energy must be positive")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        return 0.0
    return float(1.0 / np.expm1(energy / (KB * temperature)))


def _bose_array(energies: np.ndarray, temperature: float) -> np.ndarray:
    if temperature == 0:
        return np.zeros_like(energies)
    with np.errstate(over="ignore"):
        n = 1.0 / np.expm1(energies / (KB * temperature))
    return np.where(np.isfinite(n), n, 0.0)


# ---------------------------------------------------------------------------
# quadrature grids
# ---------------------------------------------------------------------------

_GL_NODES = 16


@lru_cache(maxsize=8)
def _gl_rule(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panels(edges: np.ndarray, n: int = _GL_NODES):
    """Composite Gauss-Legendre nodes/weights over consecutive edge intervals."""
    x, w = _gl_rule(n)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * x[None, :]).ravel(), (np.abs(half) * w[None, :]).ravel()


def _t_edges(x_break: float, level: int) -> np.ndarray:
    """Panel edges on [-1, 1], graded geometrically toward the endpoints.

    The on-shell integrand concentrates in a shrinking layer around |t| = 1,
    so panel widths halve toward the endpoints down to ~1e-5.  Interior panels
    are uniform; the removable points t = 0 and |t| = x_break (= q0/Q scaled)
    are inserted as panel boundaries when they fall inside.
    """
    depth = 13 + 2 * level
    graded = 1.0 - 0.5 ** np.arange(1, depth + 1)
    interior = np.linspace(-0.5, 0.5, 8 * 2 ** level + 1)
    edges = np.concatenate([[-1.0], -graded[::-1], interior, graded, [1.0]])
    extra = [x for x in (x_break, -x_break) if 0.0 < abs(x) < 1.0]
    edges = np.unique(np.concatenate([edges, extra]))
    return edges


def _angular_base(q: np.ndarray, t: np.ndarray, wt: np.ndarray,
                  a0: float, q0: float) -> np.ndarray:
    """Weighted angular integrand (without the cos(q t z) factor), shape (nq, nt).

    base[iq, it] = w_t (1 - t^2) exp(-q^2 (1-t^2)/(4 a0)) f(q t / q0)^2
    """
    one_mt2 = 1.0 - t * t
    expo = np.exp(-np.outer(q * q, one_mt2) / (4.0 * a0))
    fw = well_form_factor(np.outer(q, t) / q0) ** 2
    return expo * fw * (one_mt2 * wt)[None, :]


def _angular_integral(base: np.ndarray, qt: np.ndarray, q: np.ndarray,
                      a0: float, z: np.ndarray) -> np.ndarray:
    """A(q, z) = (pi q^2 / 4 a0) * sum_t base * cos(q t z); shape (nq, nz)."""
    out = np.empty((len(q), len(z)))
    for k, zk in enumerate(z):
        out[:, k] = np.einsum("qt,qt->q", base, np.cos(qt * zk))
    return (np.pi * q * q / (4.0 * a0))[:, None] * out


# ---------------------------------------------------------------------------
# cached workspaces (grids + base tensors are distance-independent)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _gamma_workspace(E: float, d: float, a0: float, c: float, level: int):
    Q = E / (HBAR * c)
    q0 = 2.0 * np.pi / d
    t, wt = _panels(_t_edges(q0 / Q, level))
    qrow = np.array([Q])
    base = _angular_base(qrow, t, wt, a0, q0)
    return t, wt, base, qrow * t[None, :]   # qt has shape (1, nt)


@lru_cache(maxsize=16)
def _radial_workspace(E: float, d: float, T: float, a0: float, c: float,
                      qmax_factor: float, level: int, tail: bool):
    """Radial PV grid and shared tensors for the Lamb-shift integral.

    With ``tail`` the grid covers [qmax, 2*qmax] instead (used for the cutoff
    convergence check); the pole window is never inside the tail.
    """
    Q = E / (HBAR * c)
    q0 = 2.0 * np.pi / d
    qmax = qmax_factor * q0
    w_half = Q / 2.0
    if Q + w_half >= qmax:
        raise QuadratureError(
            f"radial cutoff {qmax:.3g} nm^-1 too small for pole window around {Q:.3g}")
    m = 2 ** level
    if tail:
        n_pan = max(4, int(np.ceil(qmax / q0))) * m
        q_edges = np.linspace(qmax, 2.0 * qmax, n_pan + 1)
        window = None
        edges_all = [q_edges]
    else:
        s1 = np.linspace(1e-9, Q - w_half, 4 * m + 1)
        s2 = np.linspace(Q - w_half, Q + w_half, 4 * m + 1)
        n3 = max(4, int(np.ceil((qmax - Q - w_half) / q0))) * m
        s3 = np.linspace(Q + w_half, qmax, n3 + 1)
        edges_all = [s1, s2, s3]
        window = (len(s1) - 1) * _GL_NODES, (len(s1) + len(s2) - 2) * _GL_NODES
    qs, wqs = [], []
    for e in edges_all:
        qn, wn = _panels(e)
        qs.append(qn)
        wqs.append(wn)
    q = np.concatenate(qs)
    wq = np.concatenate(wqs)
    t, wt = _panels(_t_edges(q0 / Q, level))
    base = _angular_base(q, t, wt, a0, q0)
    bose = _bose_array(HBAR * c * q, T)
    return q, wq, t, base, np.outer(q, t), bose, window


def _gamma_values(device: DeviceParams, mat: MaterialParams, z: np.ndarray,
                  level: int) -> dict:
    """Gamma^(eta)(z) for an array of distances, at one refinement level."""
    E, d, T = device.level_splitting, device.well_width, device.temperature
    a0, c = device.a0(mat), mat.sound_velocity
    Q = device.resonant_wavevector(mat)
    t, wt, base, qt = _gamma_workspace(E, d, a0, c, level)
    A = _angular_integral(base, qt, np.array([Q]), a0, z)[0]
    pref = (mat.deformation_constant ** 2 * Q ** 3
            / (8.0 * np.pi ** 2 * mat.mass_density * HBAR * c ** 2))
    n = bose_occupation(E, T)
    return {"-": pref * (n + 1.0) * A, "+": pref * n * A}


def _delta_values(device: DeviceParams, mat: MaterialParams, z: np.ndarray,
                  level: int, qmax_factor: float, tail: bool = False) -> dict:
    """Delta^(eta)(z) (meV) at one refinement level (or the cutoff tail)."""
    E, d, T = device.level_splitting, device.well_width, device.temperature
    a0, c = device.a0(mat), mat.sound_velocity
    Q = device.resonant_wavevector(mat)
    q, wq, t, base, qt, bose, window = _radial_workspace(
        E, d, T, a0, c, qmax_factor, level, tail)
    A = _angular_integral(base, qt, q, a0, z)          # (nq, nz)
    pref = (mat.deformation_constant ** 2
            / (16.0 * np.pi ** 3 * mat.mass_density * c ** 2))
    out = {}
    for eta, theta in (("-", 1.0), ("+", 0.0)):
        h = ((bose + theta) * q ** 3)[:, None] * A
        if tail:
            out[eta] = pref * (wq / (q - Q)) @ h
            continue
        # subtract the pole value over the symmetric window [Q-w, Q+w]
        tg, wtg, baseQ, qtQ = _gamma_workspace(E, d, a0, c, level)
        AQ = _angular_integral(baseQ, qtQ, np.array([Q]), a0, z)[0]
        hQ = (bose_occupation(E, T) + theta) * Q ** 3 * AQ
        i0, i1 = window
        num = h.copy()
        num[i0:i1] -= hQ[None, :]
        out[eta] = pref * (wq / (q - Q)) @ num
    return out


def _toeplitz(row: np.ndarray) -> np.ndarray:
    idx = np.abs(np.arange(len(row))[:, None] - np.arange(len(row))[None, :])
    return row[idx]


def _refine(values_fn, rtol: float, max_level: int, what: str):
    """Run values_fn(level) with doubling resolution until stable."""
    prev = values_fn(0)
    for level in range(1, max_level + 1):
        cur = values_fn(level)
        scale = max(max(np.abs(v).max() for v in cur.values()), 1e-300)
        err = max(np.abs(cur[k] - prev[k]).max() for k in cur)
        if err <= rtol * scale:
            return cur
        prev = cur
    raise QuadratureError(
        f"{what} quadrature did not converge to rtol={rtol:g} "
        f"within {max_level} refinements (last change {err / scale:.3e})")


def gamma_pair(device: DeviceParams, mat: MaterialParams, *,
               rtol: float = 1e-6, max_level: int = 4) -> CouplingMatrices:
    """On-shell rate matrices Gamma^(+-) for the device, ps^-1.

    The refinement doubles all quadrature panels and requires the largest
    entry change to fall below ``rtol`` relative to the largest entry.
    """
    z = device.dot_positions()
    vals = _refine(lambda lv: _gamma_values(device, mat, z, lv),
                   rtol, max_level, "angular")
    return CouplingMatrices(_toeplitz(vals["-"]), _toeplitz(vals["+"]))


def delta_pair(device: DeviceParams, mat: MaterialParams, *,
               rtol: float = 1e-6, max_level: int = 4,
               qmax_factor: float = 20.0, cutoff_rtol: float = 1e-3,
               check_cutoff: bool = True) -> CouplingMatrices:
    """Lamb-shift matrices Delta^(+-), meV (gamma fields are zero matrices).

    The radial integral is cut off at ``qmax_factor * q0``; with
    ``check_cutoff`` the [qmax, 2 qmax] tail is evaluated and must stay below
    ``cutoff_rtol`` of the result, otherwise QuadratureError is raised.
    """
    z = device.dot_positions()
    vals = _refine(lambda lv: _delta_values(device, mat, z, lv, qmax_factor),
                   rtol, max_level, "radial principal-value")
    if check_cutoff:
        tail = _delta_values(device, mat, z, 1, qmax_factor, tail=True)
        scale = max(max(np.abs(v).max() for v in vals.values()), 1e-300)
        worst = max(np.abs(tail[k]).max() for k in tail)
        if worst > cutoff_rtol * scale:
            raise QuadratureError(
                f"Lamb-shift radial cutoff not converged: doubling q_max "
                f"changes the result by {worst / scale:.3e} (> {cutoff_rtol:g})")
    n = device.num_dots
    zero = np.zeros((n, n))
    return CouplingMatrices(zero, zero, _toeplitz(vals["-"]), _toeplitz(vals["+"]))


def coupling_matrices(device: DeviceParams, mat: MaterialParams, *,
                      include_delta: bool = True, **kwargs) -> CouplingMatrices:
    """Full master-equation input: Gamma matrices plus (optionally) Delta."""
    gm = gamma_pair(device, mat)
    if not include_delta:
        return gm
    return gm.with_delta(delta_pair(device, mat, **kwargs))


def single_dot_rate(level_splitting: float, well_width: float, temperature: float,
                    mat: MaterialParams) -> float:
    """Total (emission + absorption) carrier-phonon rate of one dot, ps^-1."""
    device = DeviceParams(num_dots=1, level_splitting=level_splitting,
                          well_width=well_width, dot_spacing=well_width,
                          temperature=temperature)
    cm = gamma_pair(device, mat)
    return float(cm.gamma_minus[0, 0] + cm.gamma_plus[0, 0])


def circular_fit(gamma: np.ndarray, device: DeviceParams,
                 mat: MaterialParams | None = None,
                 q_expected: float | None = None) -> CircularFit:
    """Fit gamma_1j / gamma_11 to cos(Q_eff z_1j) by least squares over Q_eff.

    Sampling at z = a k aliases Q_eff by multiples of 2 pi / a, so when the
    physical on-shell wavevector is known (``mat`` or ``q_expected`` given)
    the search is restricted to its alias branch; otherwise the best fit in
    (0, pi/a] is returned (exact e.g. for N = 2).
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0]
    if n < 2:
        raise ValueError("circular fit needs at least two dots")
    g11 = float(gamma[0, 0])
    if g11 <= 0:
        raise ValueError("gamma_11 must be positive")
    row = gamma[0, :] / g11
    a = device.dot_spacing
    z = device.dot_positions()

    def ssr(q):
        return float(np.sum((row - np.cos(q * z)) ** 2))

    if q_expected is None and mat is not None:
        q_expected = device.resonant_wavevector(mat)
    if q_expected is not None:
        lo, hi = 0.75 * q_expected, 1.25 * q_expected
    else:
        lo, hi = 1e-9, np.pi / a
    grid = np.linspace(lo, hi, 2001)
    q_best = grid[int(np.argmin([ssr(q) for q in grid]))]
    span = (hi - lo) / 2000.0
    qlo, qhi = max(lo, q_best - 2 * span), min(hi, q_best + 2 * span)
    for _ in range(60):   # golden-section polish
        m1 = qlo + 0.381966011 * (qhi - qlo)
        m2 = qhi - 0.381966011 * (qhi - qlo)
        if ssr(m1) < ssr(m2):
            qhi = m2
        else:
            qlo = m1
    q_eff = 0.5 * (qlo + qhi)
    zmat = np.abs(z[:, None] - z[None, :])
    resid = float(np.abs(gamma / g11 - np.cos(q_eff * zmat)).max())
    return CircularFit(gamma_11=g11, q_eff=float(q_eff), max_residual=resid)
