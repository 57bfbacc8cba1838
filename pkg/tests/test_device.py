"""Device geometry, units, and form-factor tests."""

import numpy as np
import pytest

from subdeco import device as dv
from subdeco import units


GAAS = dv.gaas()


def test_unit_round_trips():
    for rho in (5300.0, 2329.0, 1.0):
        internal = units.mass_density_from_si(rho)
        assert abs(units.mass_density_to_si(internal) - rho) < 1e-12 * rho
    for v in (5110.0, 343.0):
        internal = units.velocity_from_si(v)
        assert abs(units.velocity_to_si(internal) - v) < 1e-12 * v


def test_gaas_defaults_in_internal_units():
    assert GAAS.reference_mass_energy == pytest.approx(569.0)
    assert GAAS.sound_velocity == pytest.approx(5.11)
    # 5300 kg/m^3 converted at ingestion
    assert GAAS.mass_density == pytest.approx(units.mass_density_from_si(5300.0), rel=1e-4)


def make_device(**kw):
    base = dict(num_dots=4, level_splitting=5.0, well_width=4.0,
                dot_spacing=6.0, temperature=10.0)
    base.update(kw)
    return dv.DeviceParams(**base)


class TestDeviceParams:
    def test_overlap_is_hard_error(self):
        with pytest.raises(dv.DeviceError):
            make_device(dot_spacing=3.0, well_width=4.0)

    def test_optical_threshold(self):
        with pytest.raises(dv.DeviceError):
            make_device(level_splitting=40.0, dot_spacing=50.0)

    def test_derived_quantities(self):
        d = make_device()
        assert d.a0(GAAS) == pytest.approx(5.0 / (4.0 * 569.0))
        assert d.q0 == pytest.approx(2.0 * np.pi / 4.0)
        assert d.perp_length(GAAS) == pytest.approx(1.0 / np.sqrt(d.a0(GAAS)))
        assert d.resonant_wavevector(GAAS) == pytest.approx(
            5.0 / (units.HBAR * 5.11))

    def test_mass_multiplier_scales_a0(self):
        d = make_device()
        assert d.a0(dv.gaas(10.0)) == pytest.approx(10.0 * d.a0(GAAS))


class TestQubitEnergies:
    def test_splitting_is_exactly_e(self):
        d = make_device()
        e0, e1 = dv.qubit_energies(d, GAAS)
        assert e1 - e0 == pytest.approx(5.0, abs=1e-12)

    def test_parallel_ground_energy_value(self):
        # oracle: pi^2 * 569 / 16, evaluated independently
        expected = np.pi ** 2 * 569.0 / 16.0
        assert expected == pytest.approx(350.9878065, rel=1e-9)
        d = make_device()
        e0 = dv.qubit_energies(d, GAAS, levels=[(0, 0, 1)])[0]
        assert e0 - 1.0 * d.level_splitting == pytest.approx(expected, rel=1e-12)

    def test_doubling_width_quarters_parallel_term(self):
        d1 = make_device(well_width=4.0)
        d2 = make_device(well_width=8.0, dot_spacing=8.0)
        p1 = dv.qubit_energies(d1, GAAS, levels=[(0, 0, 1)])[0] - 5.0
        p2 = dv.qubit_energies(d2, GAAS, levels=[(0, 0, 1)])[0] - 5.0
        assert p1 == pytest.approx(4.0 * p2, rel=1e-12)


class TestFormFactors:
    def test_zero_wavevector(self):
        d = make_device()
        ff = dv.form_factors((0.0, 0.0, 0.0), 0, d, GAAS)
        assert ff.gx == pytest.approx(1.0)
        assert ff.gy == pytest.approx(0.0)
        assert ff.gz == pytest.approx(1.0)

    def test_well_factor_limits(self):
        # removable points have exact values 1 and 1/2
        assert dv.well_form_factor(0.0) == pytest.approx(1.0, abs=1e-14)
        assert dv.well_form_factor(1.0) == pytest.approx(0.5, abs=1e-14)
        assert dv.well_form_factor(-1.0) == pytest.approx(0.5, abs=1e-14)
        # numerical approach to the limit agrees with the branch value
        # (symmetric average cancels the linear term of the smooth function)
        eps = 1e-6
        approach = 0.5 * (dv.well_form_factor(1.0 + eps)
                          + dv.well_form_factor(1.0 - eps))
        assert abs(approach - dv.well_form_factor(1.0)) < 1e-8
        approach0 = 0.5 * (dv.well_form_factor(eps) + dv.well_form_factor(-eps))
        assert abs(approach0 - 1.0) < 1e-8

    def test_well_factor_matches_direct_formula(self):
        # away from the removable points the smooth rewriting equals the
        # textbook expression sin(pi x) / (pi x (1 - x^2))
        x = np.array([0.3, 0.7, 1.3, 2.4, -0.6, -1.7])
        direct = np.sin(np.pi * x) / (np.pi * x * (1.0 - x * x))
        assert np.abs(dv.well_form_factor(x) - direct).max() < 1e-13

    def test_gz_limit_at_q0(self):
        d = make_device()
        q0 = d.q0
        exact = dv.form_factors((0, 0, q0), 0, d, GAAS).gz
        near = 0.5 * (dv.form_factors((0, 0, q0 * (1 + 1e-7)), 0, d, GAAS).gz
                      + dv.form_factors((0, 0, q0 * (1 - 1e-7)), 0, d, GAAS).gz)
        assert abs(exact - near) < 1e-8
        assert abs(exact - 0.5) < 1e-12

    def test_phase_factorization(self):
        d = make_device()
        qz = 0.9
        gi = dv.form_factors((0, 0, qz), 2, d, GAAS).gz
        gj = dv.form_factors((0, 0, qz), 0, d, GAAS).gz
        z_ij = 2 * d.dot_spacing
        assert gi * np.conj(gj) == pytest.approx(
            abs(gi) * abs(gj) * np.exp(1j * qz * z_ij))

    def test_dot_index_enters_only_through_phase(self):
        d = make_device()
        for qz in (0.2, 1.1, 2.7):
            mags = [abs(dv.form_factors((0, 0, qz), i, d, GAAS).gz)
                    for i in range(4)]
            assert np.ptp(mags) < 1e-14

    def test_gaussian_magnitudes_bounded_and_decaying(self):
        d = make_device()
        qs = np.linspace(0.0, 6.0, 40)
        gx = np.array([abs(dv.form_factors((q, 0, 0), 0, d, GAAS).gx) for q in qs])
        gz = np.array([abs(dv.form_factors((0, 0, q), 0, d, GAAS).gz) for q in qs])
        assert np.all(gx <= 1.0 + 1e-12)
        assert np.all(gz <= 1.0 + 1e-12)
        assert np.all(np.diff(gx) <= 1e-15)     # monotone decay in |qx|
        gy = np.array([dv.form_factors((0, q, 0), 0, d, GAAS).gy for q in qs])
        assert np.abs(gy.real).max() < 1e-15    # purely imaginary
        minus = dv.form_factors((0, -1.3, 0), 0, d, GAAS).gy
        plus = dv.form_factors((0, 1.3, 0), 0, d, GAAS).gy
        assert minus == pytest.approx(-plus)    # odd in qy
        gxm = dv.form_factors((-1.3, 0, 0), 0, d, GAAS).gx
        gxp = dv.form_factors((1.3, 0, 0), 0, d, GAAS).gx
        assert gxm.imag == 0 and gxm == pytest.approx(gxp)  # real, even in qx


class TestValidate:
    def test_no_warnings_at_default_point(self):
        # E/k_B T = 5 / 0.861733 = 5.80 > 5: no leakage warning
        assert dv.validate(make_device(), GAAS) == []

    def test_leakage_warning(self):
        warns = dv.validate(make_device(level_splitting=2.0), GAAS)
        assert any("leakage" in w for w in warns)

    def test_cosine_degradation_warning(self):
        # multiplier 12 pushes Q/sqrt(a0) = 31.7/sqrt(12) below 10
        warns = dv.validate(make_device(), dv.gaas(12.0))
        assert any("cosine" in w for w in warns)
        assert dv.validate(make_device(), dv.gaas(10.0)) == []
