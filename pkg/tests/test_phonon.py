"""Dissipation-matrix tests, including the brute-force angular oracle."""

import math

import numpy as np
import pytest

from subdeco import device as dv
from subdeco import phonon as ph
from subdeco.units import HBAR, KB

GAAS = dv.gaas()


def make_device(**kw):
    base = dict(num_dots=4, level_splitting=5.0, well_width=4.0,
                dot_spacing=6.0, temperature=10.0)
    base.update(kw)
    return dv.DeviceParams(**base)


# ---------------------------------------------------------------------------
# independent oracle: brute 2-D (t, phi) angular quadrature built on the raw
# form factors, with no analytic azimuthal reduction
# ---------------------------------------------------------------------------

def _gl_panels(a, b, n_panels, n_nodes=24):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()


def gamma_oracle(device, mat, n_t=256, n_phi=64):
    """Gamma^(+-) by brute 2-D angular quadrature over (cos theta, phi).

    Independent of the production path: the azimuthal integral is done
    numerically and the form factors are transcribed directly (the raw
    sin(pi x)/(pi x (1-x^2)) well overlap; quadrature nodes never hit its
    removable points).
    """
    q_res = device.resonant_wavevector(mat)
    a0 = device.a0(mat)
    t, wt = _gl_panels(-1.0, 1.0, n_t, 8)
    phi, wphi = _gl_panels(0.0, 2.0 * np.pi, n_phi, 8)
    qz = q_res * t
    qperp = q_res * np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    qx = qperp[:, None] * np.cos(phi)[None, :]
    qy = qperp[:, None] * np.sin(phi)[None, :]
    gx2 = np.exp(-qx * qx / (4.0 * a0))
    gy2 = qy * qy / (4.0 * a0) * np.exp(-qy * qy / (4.0 * a0))
    x = qz / device.q0
    fz2 = (np.sin(np.pi * x) / (np.pi * x * (1.0 - x * x))) ** 2
    w_t = wt * fz2 * ((gx2 * gy2) @ wphi)          # numeric phi integral
    z = device.dot_positions()
    dz = z[:, None] - z[None, :]
    acc = np.einsum("t,tij->ij", w_t, np.cos(qz[:, None, None] * dz[None, :, :]))
    pref = (mat.deformation_constant ** 2 * q_res ** 3
            / (8.0 * np.pi ** 2 * mat.mass_density * HBAR
               * mat.sound_velocity ** 2))
    n_th = ph.bose_occupation(device.level_splitting, device.temperature)
    return pref * (n_th + 1.0) * acc, pref * n_th * acc


class TestBose:
    def test_zero_temperature(self):
        assert ph.bose_occupation(5.0, 0.0) == 0.0

    def test_scalar_value(self):
        # oracle: direct evaluation with k_B = 0.0861733 meV/K
        expected = 1.0 / (math.exp(5.0 / (0.0861733 * 10.0)) - 1.0)
        got = ph.bose_occupation(5.0, 10.0)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(3.03e-3, rel=2e-2)

    def test_monotone_in_temperature(self):
        temps = np.linspace(1.0, 300.0, 40)
        vals = [ph.bose_occupation(5.0, t) for t in temps]
        assert np.all(np.diff(vals) > 0)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            ph.bose_occupation(-1.0, 10.0)
        with pytest.raises(ValueError):
            ph.bose_occupation(5.0, -1.0)


class TestGammaPair:
    def test_structure_invariants(self):
        cm = ph.gamma_pair(make_device(), GAAS)
        cm.validate()
        g = cm.gamma_minus
        assert np.ptp(np.diagonal(g)) < 1e-12 * g[0, 0]
        # Hermiticity tighter than validate's bound
        assert np.abs(g - g.T).max() < 1e-13 * g[0, 0]

    def test_zero_temperature_kills_absorption(self):
        cm = ph.gamma_pair(make_device(temperature=0.0), GAAS)
        assert np.all(cm.gamma_plus == 0.0)

    def test_detailed_balance(self):
        device = make_device()
        cm = ph.gamma_pair(device, GAAS)
        n = ph.bose_occupation(device.level_splitting, device.temperature)
        ratio = cm.gamma_plus / cm.gamma_minus
        assert np.abs(ratio - n / (n + 1.0)).max() < 1e-12

    def test_positive_semidefinite(self):
        for a in (4.5, 6.0, 9.0):
            cm = ph.gamma_pair(make_device(dot_spacing=a), GAAS)
            for m in (cm.gamma_minus, cm.gamma_plus,
                      cm.gamma_minus - cm.gamma_plus):
                w = np.linalg.eigvalsh(m)
                assert w.min() > -1e-10 * np.trace(m)

    def test_cosine_law_at_gaas_defaults(self):
        device = make_device(dot_spacing=4.2266)
        cm = ph.gamma_pair(device, GAAS)
        q_res = device.resonant_wavevector(GAAS)
        z = device.dot_positions()
        ratio = cm.gamma_minus[0] / cm.gamma_minus[0, 0]
        assert np.abs(ratio - np.cos(q_res * z)).max() < 0.1

    @pytest.mark.parametrize("kwargs,mult", [
        (dict(), 1.0),
        (dict(level_splitting=3.0, well_width=3.0, dot_spacing=5.0,
              temperature=0.0, num_dots=3), 5.0),
        (dict(level_splitting=8.0, well_width=5.0, dot_spacing=7.5,
              temperature=20.0, num_dots=3), 10.0),
    ])
    def test_matches_brute_2d_oracle(self, kwargs, mult):
        device = make_device(**kwargs)
        mat = dv.gaas(mult)
        cm = ph.gamma_pair(device, mat)
        om, op = gamma_oracle(device, mat)
        scale = np.abs(om).max()
        assert np.abs(cm.gamma_minus - om).max() < 1e-6 * scale
        if device.temperature > 0:
            assert np.abs(cm.gamma_plus - op).max() < 1e-6 * scale


class TestDeltaPair:
    def test_structure(self):
        cm = ph.delta_pair(make_device(), GAAS)
        for m in (cm.delta_minus, cm.delta_plus):
            assert np.abs(m - m.T).max() < 1e-12 * max(np.abs(m).max(), 1e-300)
            idx = np.abs(np.arange(4)[:, None] - np.arange(4)[None, :])
            assert np.abs(m - m[0, idx[0]][idx]).max() == 0.0

    def test_cutoff_doubling_stable(self):
        device = make_device()
        d20 = ph.delta_pair(device, GAAS, qmax_factor=20.0)
        d40 = ph.delta_pair(device, GAAS, qmax_factor=40.0)
        scale = np.abs(d20.delta_minus).max()
        assert np.abs(d40.delta_minus - d20.delta_minus).max() < 1e-3 * scale
        assert np.abs(d40.delta_plus - d20.delta_plus).max() < 1e-3 * scale

    def test_cutoff_too_small_raises(self):
        with pytest.raises(ph.QuadratureError):
            ph.delta_pair(make_device(), GAAS, qmax_factor=0.2)

    def test_sine_law_against_rate_scale(self):
        # off-diagonal Delta_ij ~ hbar Gamma_11 sin(Q z_ij + phi), small phi,
        # with the signed distance convention z_ij = a (i - j)
        device = make_device(dot_spacing=5.3)
        dm = ph.delta_pair(device, GAAS).delta_minus
        gm = ph.gamma_pair(device, GAAS).gamma_minus
        q_res = device.resonant_wavevector(GAAS)
        z_signed = -device.dot_positions()[1:]          # row i = 0, j > 0
        y = dm[0, 1:] / (HBAR * gm[0, 0])
        # least squares over amplitude and phase via the linear model
        # A sin(Qz + phi) = (A cos phi) sin(Qz) + (A sin phi) cos(Qz)
        basis = np.stack([np.sin(q_res * z_signed), np.cos(q_res * z_signed)],
                         axis=1)
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        phi = math.atan2(coef[1], coef[0])
        assert abs(phi) < 0.3
        assert coef[0] > 0          # amplitude tracks +sin(Q z_ij)

    def test_emission_channel_dominates_at_low_t(self):
        cm = ph.delta_pair(make_device(temperature=0.0), GAAS)
        assert np.abs(cm.delta_plus).max() == 0.0
        assert np.abs(cm.delta_minus).max() > 0.0


class TestSingleDotRate:
    def test_width_ordering_at_5mev(self):
        rates = [ph.single_dot_rate(5.0, d, 10.0, GAAS) for d in (3.0, 4.0, 5.0)]
        assert rates[0] > rates[1] > rates[2]

    def test_bottleneck_decrease_beyond_peak(self):
        # the rate peaks near E* = 0.84 * 2 pi hbar c / d (about 4.4 meV for
        # d = 4 nm); beyond the peak it falls monotonically
        energies = np.linspace(4.6, 10.0, 12)
        rates = [ph.single_dot_rate(e, 4.0, 10.0, GAAS) for e in energies]
        assert np.all(np.diff(rates) < 0)

    def test_thermal_ratio(self):
        e, d = 5.0, 4.0
        r0 = ph.single_dot_rate(e, d, 0.0, GAAS)
        r10 = ph.single_dot_rate(e, d, 10.0, GAAS)
        n = ph.bose_occupation(e, 10.0)
        assert r10 / r0 == pytest.approx(1.0 + 2.0 * n, rel=1e-9)


class TestCircularFit:
    def test_exact_cosine_input(self):
        device = make_device()
        q_true = 0.9
        z = device.dot_positions()
        gamma = 0.7 * np.cos(q_true * np.abs(z[:, None] - z[None, :]))
        fit = ph.circular_fit(gamma, device, q_expected=q_true)
        assert fit.q_eff == pytest.approx(q_true, rel=1e-6)
        assert fit.max_residual < 1e-9
        assert fit.gamma_11 == pytest.approx(0.7)

    def test_n2_degenerate_case(self):
        device = make_device(num_dots=2)
        gamma = np.array([[1.0, 0.42], [0.42, 1.0]])
        fit = ph.circular_fit(gamma, device)
        expected = math.acos(0.42) / device.dot_spacing
        assert fit.q_eff == pytest.approx(expected, rel=1e-6)
        assert fit.max_residual < 1e-9

    def test_needs_two_dots(self):
        with pytest.raises(ValueError):
            ph.circular_fit(np.array([[1.0]]), make_device(num_dots=1,
                                                           dot_spacing=4.0))

    def test_residual_grows_with_mass_multiplier(self):
        device = make_device()
        resids = []
        for mult in (1.0, 5.0, 10.0):
            mat = dv.gaas(mult)
            cm = ph.gamma_pair(device, mat)
            resids.append(ph.circular_fit(cm.gamma_minus, device, mat).max_residual)
        assert resids[0] < resids[1] < resids[2]


def test_oracle_equivalence_documented_in_validate():
    # validate() accepts the production matrices built at several spacings
    for a in (4.3, 7.9):
        cm = ph.coupling_matrices(make_device(dot_spacing=a), GAAS)
        cm.validate()
