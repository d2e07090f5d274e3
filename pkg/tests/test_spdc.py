import math

import numpy as np
import pytest
from scipy.optimize import brentq

from biphoton.errors import BasisMismatchError, InvalidParameterError
from biphoton.grids import Basis, Grid1D
from biphoton.spdc import (
    CrystalPumpConfig,
    PhaseMatching,
    PumpKind,
    PumpProfile,
    delta_k_z,
    delta_kappa_p_from_beam_diameter,
    momentum_distribution,
    phase_matching_amplitude,
    synthesize_state,
)
from biphoton.transforms import distribution_moments

CFG = CrystalPumpConfig()
K_P = CFG.k_p


def default_grids(n=512, extent=760.0):
    return Grid1D(n, extent), Grid1D(n, extent)


def gaussian_state(n=512, extent=760.0, **kwargs):
    cfg = CrystalPumpConfig(**kwargs)
    gs, gi = default_grids(n, extent)
    return cfg, synthesize_state(cfg, cfg.pump(), gs, gi)


def plane_wave_state(n=256, extent=760.0):
    cfg = CrystalPumpConfig(delta_kappa_p=0.0)
    gs, gi = default_grids(n, extent)
    return cfg, synthesize_state(cfg, cfg.pump(), gs, gi)


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"ell": 0.0},
            {"ell": -1.0},
            {"k_p": 0.0},
            {"alpha": 0.0},
            {"delta_kappa_p": -0.5},
        ],
    )
    def test_invalid_parameters_rejected(self, kwargs):
        with pytest.raises(InvalidParameterError):
            CrystalPumpConfig(**kwargs)

    def test_pump_width_from_one_mm_diameter(self):
        assert delta_kappa_p_from_beam_diameter(1.0) == 1.0

    def test_pump_kind_follows_width(self):
        assert CrystalPumpConfig(delta_kappa_p=0.0).pump().kind is PumpKind.PLANE_WAVE
        assert CrystalPumpConfig().pump().kind is PumpKind.GAUSSIAN

    def test_inconsistent_pump_rejected(self):
        gs, gi = default_grids(64)
        with pytest.raises(InvalidParameterError):
            synthesize_state(CFG, PumpProfile(PumpKind.PLANE_WAVE), gs, gi)


class TestDeltaKz:
    def test_degenerate_collinear_is_zero(self):
        assert delta_k_z(3.7, 3.7, CFG) == 0.0

    def test_reference_value(self):
        val = delta_k_z(10.0, -10.0, CFG)
        assert val == pytest.approx(400.0 / (2.0 * 1.5514e4), rel=1e-4)

    def test_exchange_symmetry(self):
        assert delta_k_z(4.0, -7.0, CFG) == delta_k_z(-7.0, 4.0, CFG)


class TestPhaseMatchingKernel:
    def test_peak_value_both_modes(self):
        for pm in PhaseMatching:
            cfg = CrystalPumpConfig(phase_matching=pm)
            assert phase_matching_amplitude(0.0, cfg) == pytest.approx(1.0 + 0.0j)

    def test_default_alpha(self):
        assert CFG.alpha == 0.455

    def test_shared_linear_phase_near_origin(self):
        # both kernels carry exp(-i*l*dkz/2); compare finite-difference phase slopes
        dkz = np.array([1e-4, 2e-4])
        slopes = []
        for pm in PhaseMatching:
            cfg = CrystalPumpConfig(phase_matching=pm)
            ph = np.angle(phase_matching_amplitude(dkz, cfg))
            slopes.append((ph[1] - ph[0]) / (dkz[1] - dkz[0]))
        assert slopes[0] == pytest.approx(slopes[1], rel=1e-6)
        assert slopes[0] == pytest.approx(-CFG.ell / 2.0, rel=1e-6)

    def test_width_comparison_against_root_find_oracle(self):
        # Root-find both half-maximum points of |kernel|^2 as a function of
        # the transverse difference coordinate q (dkz = q^2/(2 k_p)).
        def intensity(cfg):
            return lambda q: abs(phase_matching_amplitude(q**2 / (2 * cfg.k_p), cfg)) ** 2

        cfg_sinc = CrystalPumpConfig(phase_matching=PhaseMatching.EXACT_SINC)
        cfg_gauss = CrystalPumpConfig(phase_matching=PhaseMatching.GAUSSIAN_APPROX)
        q_sinc = brentq(lambda q: intensity(cfg_sinc)(q) - 0.5, 1e-6, 300.0)
        q_gauss = brentq(lambda q: intensity(cfg_gauss)(q) - 0.5, 1e-6, 300.0)
        # the half-power points sit at l*dkz/2 = 1.3916 (sinc) and ln2/(2a) (gauss)
        assert cfg_sinc.ell * q_sinc**2 / (4 * cfg_sinc.k_p) == pytest.approx(
            1.39155737825, rel=1e-6
        )
        assert cfg_gauss.ell * q_gauss**2 / (4 * cfg_gauss.k_p) == pytest.approx(
            math.log(2) / (2 * 0.455), rel=1e-6
        )
        # alpha = 0.455 matches the kernels at the 1/e^2 intensity level, so the
        # FWHM of the approximation is narrower by sqrt(ln2/(2a)/1.3916) ~ 0.74
        assert q_gauss / q_sinc == pytest.approx(0.7399, abs=0.01)
        q2_sinc = brentq(lambda q: intensity(cfg_sinc)(q) - math.exp(-2), 1e-6, 300.0)
        q2_gauss = brentq(lambda q: intensity(cfg_gauss)(q) - math.exp(-2), 1e-6, 300.0)
        assert q2_gauss == pytest.approx(q2_sinc, rel=5e-3)


class TestSynthesizeState:
    def test_plane_wave_ridge_support(self):
        _, state = plane_wave_state()
        prob = state.probability()
        ks = state.axis_s.coordinates
        ki = state.axis_i.coordinates
        off_ridge = np.abs(ks[:, None] + ki[None, :]) > state.axis_s.spacing / 2
        assert prob[off_ridge].max() == 0.0
        assert prob.sum() == pytest.approx(1.0, abs=1e-12)

    def test_difference_coordinate_variance_matches_crystal_formula(self):
        cfg, state = gaussian_state()
        _, cov = distribution_moments(momentum_distribution(state))
        var_diff = cov[0, 0] + cov[1, 1] - 2 * cov[0, 1]
        assert var_diff == pytest.approx(cfg.k_p / (cfg.alpha * cfg.ell), rel=0.01)

    def test_sum_coordinate_std_matches_pump_width(self):
        cfg, state = gaussian_state()
        _, cov = distribution_moments(momentum_distribution(state))
        var_sum = cov[0, 0] + cov[1, 1] + 2 * cov[0, 1]
        assert math.sqrt(var_sum) == pytest.approx(cfg.delta_kappa_p, rel=0.01)

    def test_exchange_symmetry_of_amplitude(self):
        _, state = gaussian_state(n=256)
        assert np.array_equal(state.amplitude, state.amplitude.T)

    def test_norm_is_one(self):
        _, state = gaussian_state(n=256)
        assert state.norm_squared() == pytest.approx(1.0, abs=1e-12)


class TestMomentumDistribution:
    def test_total_mass_one(self):
        _, state = gaussian_state(n=256)
        assert momentum_distribution(state).total_mass() == pytest.approx(1.0, abs=1e-12)

    def test_plane_wave_mass_on_antidiagonal(self):
        _, state = plane_wave_state()
        dens = momentum_distribution(state)
        ks = dens.axis_s.coordinates
        ki = dens.axis_i.coordinates
        ridge = np.abs(ks[:, None] + ki[None, :]) <= dens.axis_s.spacing / 2
        mass = dens.values * dens.cell_area
        assert mass[ridge].sum() == pytest.approx(1.0, abs=1e-12)

    def test_wrong_basis_rejected(self):
        from biphoton.transforms import to_position_basis

        _, state = gaussian_state(n=256)
        with pytest.raises(BasisMismatchError):
            momentum_distribution(to_position_basis(state))
