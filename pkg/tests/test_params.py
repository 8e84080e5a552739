import math

import numpy as np
import pytest

from ringmzi import (CavityRates, DomainError, Injection, PumpSpec, REFERENCE_GEOMETRY,
                     RingGeometry, chi3_from_n2, derive_rates, efficiency, fwm_gain,
                     injection_from_pump, intracavity_pump, n2_from_chi3, pump_amplitude,
                     resonance_frequency, sigma_from_power, threshold_power)
from ringmzi.constants import C_VACUUM, CODATA2018, EPSILON_0, HBAR, PhysicalConstants

RING_LENGTH = 2 * math.pi * 220e-6


def make_geometry(**overrides):
    fields = dict(ring_length=RING_LENGTH, n_eff=1.801, n_g=2.10087, cross_coupling=0.01,
                  alpha_loss=0.23, n2=2.4e-19, a_eff=1.05564e-12, lambda_p=1550e-9)
    fields.update(overrides)
    return RingGeometry(**fields)


class TestConstants:
    def test_codata_values(self):
        assert CODATA2018.c == 299792458.0
        assert CODATA2018.hbar == pytest.approx(1.054571817e-34, rel=1e-9)
        assert CODATA2018.eps0 == 8.8541878128e-12

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            PhysicalConstants(c=0.0)


class TestDeriveRates:
    def test_reference_design_regression(self, rates):
        """kappa ~ 1208 MHz and gamma ~ 38.3 MHz for the reference ring."""
        assert rates.kappa == pytest.approx(1208e6, rel=0.01)
        assert rates.gamma == pytest.approx(38.3e6, rel=0.01)

    def test_no_coupling_no_loss(self):
        rates = derive_rates(make_geometry(cross_coupling=0.0, alpha_loss=0.0))
        assert rates.kappa == 0.0
        assert rates.gamma == 0.0

    def test_full_coupling(self):
        rates = derive_rates(make_geometry(cross_coupling=1.0))
        assert rates.kappa == pytest.approx(C_VACUUM / (1.801 * RING_LENGTH), rel=1e-14)

    def test_round_trip_and_transmission(self, rates):
        assert rates.t_round == pytest.approx(1.801 * RING_LENGTH / C_VACUUM, rel=1e-14)
        assert rates.t_trans == pytest.approx(0.99 * C_VACUUM / (1.801 * RING_LENGTH), rel=1e-14)

    def test_gamma_total_bit_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            kappa, gamma = rng.uniform(0, 1e10, size=2)
            assert CavityRates(kappa=kappa, gamma=gamma).gamma_total == kappa + gamma

    def test_rates_scale_inversely_with_length(self):
        """kappa and gamma go as 1/L at fixed X and fixed alpha_loss*L."""
        base = derive_rates(make_geometry())
        for factor in np.linspace(0.5, 5.0, 10):
            scaled = derive_rates(make_geometry(ring_length=RING_LENGTH * factor,
                                                alpha_loss=0.23 / factor))
            assert scaled.kappa * factor == pytest.approx(base.kappa, rel=1e-12)
            assert scaled.gamma * factor == pytest.approx(base.gamma, rel=1e-12)

    def test_zero_length_rejected(self):
        with pytest.raises(DomainError):
            make_geometry(ring_length=0.0)

    def test_negative_rate_rejected(self):
        with pytest.raises(DomainError):
            CavityRates(kappa=-1.0, gamma=0.0)

    def test_geometry_range_checks(self):
        with pytest.raises(DomainError, match="cross_coupling"):
            make_geometry(cross_coupling=1.5)
        with pytest.raises(DomainError, match="alpha_loss"):
            make_geometry(alpha_loss=-1.0)


class TestEfficiency:
    def test_lossless(self):
        assert efficiency(0.0, 123.0) == 1.0

    def test_critical_length_value(self):
        assert efficiency(0.23, 2 / 0.23) == pytest.approx(math.exp(-2), rel=1e-14)

    def test_ring_pass(self):
        assert efficiency(0.23, RING_LENGTH) == pytest.approx(math.exp(-0.23 * RING_LENGTH),
                                                              rel=1e-14)

    def test_multiplicative(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            l1, l2 = rng.uniform(0, 10, size=2)
            product = efficiency(0.23, l1) * efficiency(0.23, l2)
            assert efficiency(0.23, l1 + l2) == pytest.approx(product, rel=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            efficiency(-0.1, 1.0)
        with pytest.raises(DomainError):
            efficiency(0.1, -1.0)


class TestFwmGain:
    def test_reference_value(self, geometry):
        # independent evaluation of the degenerate gain formula
        omega_p = 2 * math.pi * C_VACUUM / 1550e-9
        v_g = C_VACUUM / 2.10087
        expected = HBAR * omega_p**2 * v_g**2 * 2.4e-19 / (C_VACUUM * 1.05564e-12 * RING_LENGTH)
        strength = fwm_gain(geometry)
        assert strength.gain == pytest.approx(expected, rel=1e-12)
        assert strength.gain == pytest.approx(1.5, rel=0.25)
        assert strength.v_g == pytest.approx(v_g, rel=1e-14)
        assert strength.gamma_nl == pytest.approx(omega_p * 2.4e-19 / (C_VACUUM * 1.05564e-12),
                                                  rel=1e-12)

    def test_zero_nonlinearity(self):
        assert fwm_gain(make_geometry(n2=0.0)).gain == 0.0

    def test_inverse_length_dependence(self, geometry):
        doubled = fwm_gain(make_geometry(ring_length=2 * RING_LENGTH)).gain
        assert doubled == pytest.approx(fwm_gain(geometry).gain / 2, rel=1e-12)

    def test_exact_form_reduces_to_degenerate(self, geometry):
        omega_p = geometry.pump_frequency()
        exact = fwm_gain(geometry, omega_s=omega_p, omega_i=omega_p).gain
        assert exact == pytest.approx(fwm_gain(geometry).gain, rel=1e-12)

    def test_exact_form_requires_both_frequencies(self, geometry):
        with pytest.raises(DomainError):
            fwm_gain(geometry, omega_s=geometry.pump_frequency())


class TestNonlinearIndex:
    def test_zero(self):
        assert n2_from_chi3(0.0, 1.8) == 0.0

    def test_unit_identity(self):
        chi3 = 4 * EPSILON_0 * C_VACUUM * 1.8**2 / 3
        assert n2_from_chi3(chi3, 1.8) == pytest.approx(1.0, rel=1e-14)

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        for chi3 in rng.uniform(1e-22, 1e-18, size=10):
            back = chi3_from_n2(n2_from_chi3(chi3, 1.801), 1.801)
            assert back == pytest.approx(chi3, rel=1e-12)


class TestPumpAmplitude:
    def test_zero_power(self):
        assert pump_amplitude(0.0, 1e15) == 0.0

    def test_unit_flux(self):
        omega = 1.2e15
        value = pump_amplitude(HBAR * omega, omega, phase=0.3)
        assert value == pytest.approx(complex(math.cos(0.3), math.sin(0.3)), rel=1e-12)

    def test_flux_value(self):
        omega = 2 * math.pi * C_VACUUM / 1550e-9
        flux = abs(pump_amplitude(14.12e-3, omega)) ** 2
        assert flux == pytest.approx(14.12e-3 / (HBAR * omega), rel=1e-12)
        assert flux == pytest.approx(1.101e17, rel=1e-3)

    def test_rejects_bad_domain(self):
        with pytest.raises(DomainError):
            pump_amplitude(1.0, 0.0)
        with pytest.raises(DomainError):
            pump_amplitude(-1.0, 1e15)


class TestPumpSpec:
    def test_from_power_consistent(self):
        omega = 1.2e15
        spec = PumpSpec.from_power(2e-3, omega, phase=0.1)
        assert abs(spec.alpha_l) ** 2 == pytest.approx(2e-3 / (HBAR * omega), rel=1e-12)

    def test_inconsistent_amplitude_rejected(self):
        with pytest.raises(DomainError):
            PumpSpec(power=1e-3, phase=0.0, omega_p=1.2e15, alpha_l=1.0 + 0j)


class TestIntracavityPump:
    def test_zero_drive(self, rates):
        assert intracavity_pump(0.0, rates) == 0.0

    def test_lossless_reduction(self):
        rates = CavityRates(kappa=2e9, gamma=0.0)
        alpha_p = intracavity_pump(3.0, rates)
        assert alpha_p == pytest.approx(2 * 3.0 / math.sqrt(2e9), rel=1e-12)

    def test_lorentzian_fwhm(self, rates):
        gamma_total = rates.gamma_total
        peak = abs(intracavity_pump(1.0, rates, 0.0)) ** 2
        for delta in (-gamma_total / 2, gamma_total / 2):
            half = abs(intracavity_pump(1.0, rates, delta)) ** 2
            assert half == pytest.approx(peak / 2, rel=1e-12)

    def test_degenerate_cavity_rejected(self):
        with pytest.raises(DomainError):
            intracavity_pump(1.0, CavityRates(kappa=0.0, gamma=0.0), 0.0)


class TestInjection:
    def test_zero_pump(self, rates):
        assert injection_from_pump(1.5, 0.0, rates).sigma_mag == 0.0

    def test_magnitude(self, rates):
        alpha_p = math.sqrt(4.1e8)
        injection = injection_from_pump(1.5, alpha_p, rates)
        assert injection.sigma_mag == pytest.approx(2 * 1.5 * 4.1e8, rel=1e-12)
        assert injection.sigma_mag == pytest.approx(1.23e9, rel=1e-12)

    def test_phase_doubles(self, rates):
        alpha_p = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
        injection = injection_from_pump(1.5, alpha_p, rates)
        assert injection.phi_sigma == pytest.approx(math.pi / 2, rel=1e-12)

    def test_sigma_n_definition(self, rates):
        injection = Injection.from_sigma_n(0.5, rates)
        assert injection.sigma_th == rates.gamma_total
        assert injection.sigma_n == pytest.approx(0.5, rel=1e-15)

    def test_negative_rejected(self, rates):
        with pytest.raises(DomainError):
            Injection.from_sigma_n(-0.1, rates)


class TestThresholdPower:
    def test_on_resonance_value(self, rates, gain, geometry):
        omega_p = geometry.pump_frequency()
        expected = rates.gamma_total**3 * HBAR * omega_p / (8 * gain * rates.kappa)
        assert threshold_power(rates, gain, omega_p) == pytest.approx(expected, rel=1e-12)

    def test_gain_halves_threshold(self, rates, gain, geometry):
        omega_p = geometry.pump_frequency()
        assert threshold_power(rates, 2 * gain, omega_p) == pytest.approx(
            threshold_power(rates, gain, omega_p) / 2, rel=1e-12)

    def test_round_trip_with_sigma(self, rates, gain, geometry):
        omega_p = geometry.pump_frequency()
        for delta_p in (0.0, 0.3 * rates.gamma_total):
            p_th = threshold_power(rates, gain, omega_p, delta_p)
            injection = sigma_from_power(p_th, rates, gain, omega_p, delta_p)
            assert injection.sigma_n == pytest.approx(1.0, rel=1e-12)

    def test_domain_errors(self, rates, geometry):
        omega_p = geometry.pump_frequency()
        with pytest.raises(DomainError):
            threshold_power(rates, 0.0, omega_p)
        with pytest.raises(DomainError):
            threshold_power(CavityRates(kappa=0.0, gamma=1e7), 1.5, omega_p)


class TestSigmaFromPower:
    def test_zero_power(self, rates, gain, geometry):
        injection = sigma_from_power(0.0, rates, gain, geometry.pump_frequency())
        assert injection.sigma_n == 0.0

    def test_half_threshold(self, rates, gain, geometry):
        omega_p = geometry.pump_frequency()
        p_th = threshold_power(rates, gain, omega_p)
        assert sigma_from_power(0.5 * p_th, rates, gain, omega_p).sigma_n == pytest.approx(
            0.5, rel=1e-12)

    @pytest.mark.parametrize("scale", [0.1, 0.5, 2.0])
    def test_linearity_in_power(self, rates, gain, geometry, scale):
        omega_p = geometry.pump_frequency()
        base = sigma_from_power(1e-3, rates, gain, omega_p).sigma_n
        assert sigma_from_power(scale * 1e-3, rates, gain, omega_p).sigma_n == pytest.approx(
            scale * base, rel=1e-12)


class TestResonanceFrequency:
    def test_mode_index_doubles(self, geometry):
        assert resonance_frequency(geometry, 2000) == pytest.approx(
            2 * resonance_frequency(geometry, 1000), rel=1e-14)

    def test_nearest_mode_to_pump(self, geometry):
        target = geometry.pump_frequency()
        fsr = 2 * math.pi * C_VACUUM / (geometry.n_eff * geometry.ring_length)
        best = min(
            (abs(resonance_frequency(geometry, m) - target)
             for m in range(1, 5000)),
        )
        assert best < fsr

    def test_unit_optical_path(self):
        geom = make_geometry(ring_length=C_VACUUM, n_eff=1.0, n_g=1.0)
        assert resonance_frequency(geom, 7) == pytest.approx(2 * math.pi * 7, rel=1e-14)

    def test_rejects_bad_index(self, geometry):
        with pytest.raises(DomainError):
            resonance_frequency(geometry, 0)


def test_reference_geometry_is_validated():
    assert REFERENCE_GEOMETRY.cross_coupling == 0.01
    assert REFERENCE_GEOMETRY.ring_length == pytest.approx(RING_LENGTH)
