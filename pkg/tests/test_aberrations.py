import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biphoton.aberrations import (
    Arm,
    ArmAssignment,
    PhaseDomain,
    PhaseProfile,
    apply_aberration,
    cancellation_partner,
    joint_phase_expansion,
)
from biphoton.errors import (
    BasisMismatchError,
    InsufficientOrderError,
    InvalidParameterError,
)
from biphoton.grids import Grid1D
from biphoton.spdc import CrystalPumpConfig, momentum_distribution, synthesize_state

coeff_lists = st.lists(
    st.floats(min_value=-10.0, max_value=10.0, allow_nan=False), min_size=1, max_size=6
)


def small_state(n=128, extent=760.0):
    cfg = CrystalPumpConfig()
    g = Grid1D(n, extent)
    return synthesize_state(cfg, cfg.pump(), g, g)


class TestPhaseProfile:
    def test_evaluation_matches_taylor_series(self):
        p = PhaseProfile.from_derivatives(
            PhaseDomain.MOMENTUM, {1: 0.5, 2: -0.02, 3: 3e-4}
        )
        u = 7.0
        expected = 0.5 * u - 0.02 * u**2 / 2 + 3e-4 * u**3 / 6
        assert p.evaluate(u) == pytest.approx(expected, rel=1e-14)

    def test_default_padding_gives_spare_orders(self):
        p = PhaseProfile.from_derivatives(PhaseDomain.MOMENTUM, {2: 1.0})
        assert p.order == 5

    def test_from_terms_validates_units(self):
        p = PhaseProfile.from_terms([(2, 0.02, "mm^2")], PhaseDomain.MOMENTUM)
        assert p.derivative_at_zero(2) == 0.02
        with pytest.raises(InvalidParameterError):
            PhaseProfile.from_terms([(2, 0.02, "mm^-2")], PhaseDomain.MOMENTUM)
        with pytest.raises(InvalidParameterError):
            PhaseProfile.from_terms([(2, 73.7, "mm^2")], PhaseDomain.POSITION)
        PhaseProfile.from_terms([(2, 73.7, "mm^-2")], PhaseDomain.POSITION)

    def test_duplicate_order_rejected(self):
        with pytest.raises(InvalidParameterError):
            PhaseProfile.from_terms(
                [(2, 0.1, "mm^2"), (2, 0.2, "mm^2")], PhaseDomain.MOMENTUM
            )


class TestApplyAberration:
    def test_zero_profile_is_bitwise_identity(self):
        state = small_state()
        out = apply_aberration(
            state, ArmAssignment(Arm.SIGNAL, PhaseProfile.zero())
        )
        assert np.array_equal(out.amplitude, state.amplitude)

    def test_pure_phase_preserves_norm(self):
        state = small_state()
        profile = PhaseProfile.from_derivatives(PhaseDomain.MOMENTUM, {2: -0.0052})
        out = apply_aberration(state, ArmAssignment(Arm.SIGNAL, profile))
        assert abs(out.norm_squared() - state.norm_squared()) < 1e-12

    def test_phase_lands_on_assigned_arm(self):
        state = small_state()
        profile = PhaseProfile.from_derivatives(PhaseDomain.MOMENTUM, {2: 0.01})
        out = apply_aberration(state, ArmAssignment(Arm.IDLER, profile))
        ki = state.axis_i.coordinates
        expected = state.amplitude * np.exp(1j * 0.01 * ki[None, :] ** 2 / 2)
        assert np.allclose(out.amplitude, expected, rtol=0, atol=1e-15)

    def test_domain_basis_mismatch_instructs_transform(self):
        state = small_state()
        profile = PhaseProfile.from_derivatives(PhaseDomain.POSITION, {2: 73.7})
        with pytest.raises(BasisMismatchError, match="transform"):
            apply_aberration(state, ArmAssignment(Arm.IDLER, profile))


class TestCancellationPartner:
    def test_quadratic_flips_sign(self):
        p = PhaseProfile.from_derivatives(PhaseDomain.MOMENTUM, {2: 0.02})
        assert cancellation_partner(p).derivative_at_zero(2) == -0.02

    def test_cubic_is_preserved(self):
        p = PhaseProfile.from_derivatives(PhaseDomain.MOMENTUM, {3: 2e-4})
        assert cancellation_partner(p).derivative_at_zero(3) == 2e-4

    def test_zero_profile_is_fixed_point(self):
        z = PhaseProfile.zero()
        assert cancellation_partner(z) == z

    @given(coeff_lists)
    @settings(max_examples=100)
    def test_involution(self, coeffs):
        p = PhaseProfile(PhaseDomain.MOMENTUM, tuple(coeffs))
        assert cancellation_partner(cancellation_partner(p)) == p

    @given(coeff_lists, st.floats(min_value=-50, max_value=50, allow_nan=False))
    @settings(max_examples=100)
    def test_partner_cancels_joint_phase_pointwise(self, coeffs, kappa):
        p = PhaseProfile(PhaseDomain.MOMENTUM, tuple(coeffs))
        partner = cancellation_partner(p)
        total = partner.evaluate(kappa) + p.evaluate(-kappa)
        scale = max(1.0, abs(p.evaluate(-kappa)))
        assert abs(total) <= 1e-12 * scale


class TestJointPhaseExpansion:
    def test_partner_pair_gives_all_zeros(self):
        p = PhaseProfile.from_derivatives(
            PhaseDomain.MOMENTUM, {1: 0.3, 2: 0.02, 3: 1e-3}
        )
        coeffs = joint_phase_expansion(cancellation_partner(p), p, order=5)
        assert coeffs == [0.0] * 6

    def test_idler_only_quadratic(self):
        beta = 0.02
        phi_i = PhaseProfile.from_derivatives(PhaseDomain.MOMENTUM, {2: beta})
        coeffs = joint_phase_expansion(PhaseProfile.zero(), phi_i, order=3)
        assert coeffs[2] == pytest.approx(beta / 2.0, rel=1e-15)
        assert coeffs[0] == coeffs[1] == coeffs[3] == 0.0

    def test_equal_linear_terms_cancel(self):
        a = 0.7
        phi = PhaseProfile.from_derivatives(PhaseDomain.MOMENTUM, {1: a})
        coeffs = joint_phase_expansion(phi, phi, order=2)
        assert coeffs[1] == 0.0

    def test_insufficient_order_raises(self):
        short = PhaseProfile(PhaseDomain.MOMENTUM, (0.0, 1.0))
        with pytest.raises(InsufficientOrderError):
            joint_phase_expansion(short, short, order=3)


class TestMomentumInvariance:
    @given(
        st.lists(st.floats(min_value=-0.01, max_value=0.01, allow_nan=False),
                 min_size=1, max_size=5),
        st.lists(st.floats(min_value=-0.01, max_value=0.01, allow_nan=False),
                 min_size=1, max_size=5),
    )
    @settings(max_examples=15, deadline=None)
    def test_any_phase_pair_leaves_momentum_distribution_unchanged(self, cs, ci):
        state = small_state(n=128)
        before = momentum_distribution(state).values
        aberrated = apply_aberration(
            state,
            ArmAssignment(Arm.SIGNAL, PhaseProfile(PhaseDomain.MOMENTUM, tuple(cs))),
        )
        aberrated = apply_aberration(
            aberrated,
            ArmAssignment(Arm.IDLER, PhaseProfile(PhaseDomain.MOMENTUM, tuple(ci))),
        )
        after = momentum_distribution(aberrated).values
        assert np.abs(after - before).max() <= 1e-12 * before.max()
