import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biphoton.errors import (
    BasisMismatchError,
    GridTooSmallError,
    InvalidParameterError,
)
from biphoton.grids import (
    CONVENTION,
    AxisUnit,
    Basis,
    BiphotonGrid,
    Grid1D,
    JointDensity,
    fourier_plane_position,
    kappa_from_fourier_position,
    make_conjugate_grid,
    wavenumber_from_wavelength,
)


class TestUnitsConvention:
    def test_witness_bound_is_quarter_with_hbar_one(self):
        assert CONVENTION.hbar == 1.0
        assert CONVENTION.witness_bound == 0.25

    def test_units_are_millimetre_based(self):
        assert CONVENTION.length_unit == "mm"
        assert CONVENTION.wavenumber_unit == "mm^-1"


class TestWavenumber:
    def test_pump_405nm(self):
        assert wavenumber_from_wavelength(4.05e-4) == pytest.approx(1.5514e4, rel=1e-4)

    def test_photon_810nm(self):
        assert wavenumber_from_wavelength(8.1e-4) == pytest.approx(7.757e3, rel=1e-4)

    def test_two_pi_wavelength_gives_unity(self):
        assert wavenumber_from_wavelength(2 * math.pi) == pytest.approx(1.0, rel=1e-15)

    @pytest.mark.parametrize("bad", [0.0, -1e-4])
    def test_nonpositive_wavelength_rejected(self, bad):
        with pytest.raises(InvalidParameterError):
            wavenumber_from_wavelength(bad)


class TestFourierPlaneMapping:
    F = 400.0
    K = wavenumber_from_wavelength(8.1e-4)

    def test_on_axis_ray(self):
        assert fourier_plane_position(0.0, self.F, self.K) == 0.0

    def test_reference_geometry_maps_to_one_mm(self):
        rho = fourier_plane_position(19.39, self.F, self.K)
        assert rho == pytest.approx(1.0, rel=2e-3)

    def test_round_trip_is_identity(self):
        kappa = 37.1
        rho = fourier_plane_position(kappa, self.F, self.K)
        assert kappa_from_fourier_position(rho, self.F, self.K) == pytest.approx(
            kappa, rel=1e-15
        )

    def test_mapping_is_linear(self):
        a, b, k1, k2 = 2.5, -1.75, 11.0, 29.0
        lhs = fourier_plane_position(a * k1 + b * k2, self.F, self.K)
        rhs = a * fourier_plane_position(k1, self.F, self.K) + b * fourier_plane_position(
            k2, self.F, self.K
        )
        assert lhs == pytest.approx(rhs, rel=1e-14)

    @pytest.mark.parametrize("f,k", [(0.0, 100.0), (-1.0, 100.0), (400.0, 0.0), (400.0, -5.0)])
    def test_invalid_optics_rejected(self, f, k):
        with pytest.raises(InvalidParameterError):
            fourier_plane_position(1.0, f, k)
        with pytest.raises(InvalidParameterError):
            kappa_from_fourier_position(1.0, f, k)


class TestGrid1D:
    def test_coordinates_symmetric_about_center(self):
        g = Grid1D(8, 4.0, center=1.5, unit=AxisUnit.MM)
        coords = g.coordinates
        assert np.allclose(coords + coords[::-1], 2 * 1.5)
        assert np.allclose(np.diff(coords), g.spacing)

    def test_spacing_is_extent_over_n(self):
        g = Grid1D(1024, 10.0)
        assert g.spacing == 10.0 / 1024

    @pytest.mark.parametrize("n", [0, 3, 12, 1000])
    def test_non_power_of_two_rejected(self, n):
        with pytest.raises(InvalidParameterError):
            Grid1D(n, 1.0)

    def test_nonpositive_extent_rejected(self):
        with pytest.raises(InvalidParameterError):
            Grid1D(16, 0.0)


class TestConjugateGrid:
    def test_conjugate_extent_value(self):
        g = Grid1D(1024, 10.0, unit=AxisUnit.MM)
        conj = make_conjugate_grid(g)
        assert conj.extent == pytest.approx(643.4, rel=1e-3)
        assert conj.unit is AxisUnit.PER_MM

    def test_product_of_spacings(self):
        g = Grid1D(256, 7.3, unit=AxisUnit.MM)
        conj = make_conjugate_grid(g)
        assert g.spacing * conj.spacing * g.n_points == pytest.approx(
            2 * math.pi, rel=1e-15
        )

    def test_smallest_case_spacing(self):
        conj = make_conjugate_grid(Grid1D(2, 2.0, unit=AxisUnit.MM))
        assert conj.spacing == pytest.approx(math.pi, rel=1e-15)

    @given(
        st.sampled_from([2, 16, 256, 1024, 2048]),
        st.floats(min_value=1e-3, max_value=1e4, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_involution(self, n, extent):
        g = Grid1D(n, extent, unit=AxisUnit.PER_MM)
        back = make_conjugate_grid(make_conjugate_grid(g))
        assert back.n_points == g.n_points
        assert back.center == g.center
        assert back.unit is g.unit
        # the double division reproduces the extent to at most one ulp
        assert back.extent == pytest.approx(g.extent, rel=5e-16)


def _uniform_state(n=16, extent=4.0):
    g = Grid1D(n, extent)
    amp = np.ones((n, n), dtype=complex)
    return BiphotonGrid(g, g, Basis.MOMENTUM, amp)


class TestBiphotonGrid:
    def test_normalization_invariant(self):
        state = _uniform_state().normalized()
        assert abs(state.norm_squared() - 1.0) < 1e-12

    def test_probability_sums_to_one(self):
        state = _uniform_state().normalized()
        assert state.probability().sum() == pytest.approx(1.0, abs=1e-12)

    def test_basis_unit_consistency_enforced(self):
        g_mm = Grid1D(16, 4.0, unit=AxisUnit.MM)
        g_k = Grid1D(16, 4.0, unit=AxisUnit.PER_MM)
        amp = np.ones((16, 16), dtype=complex)
        with pytest.raises(BasisMismatchError):
            BiphotonGrid(g_mm, g_k, Basis.MOMENTUM, amp)
        with pytest.raises(BasisMismatchError):
            BiphotonGrid(g_k, g_k, Basis.POSITION, amp)

    def test_shape_mismatch_rejected(self):
        g = Grid1D(16, 4.0)
        with pytest.raises(InvalidParameterError):
            BiphotonGrid(g, g, Basis.MOMENTUM, np.ones((16, 8), dtype=complex))

    def test_amplitude_is_read_only(self):
        state = _uniform_state()
        with pytest.raises(ValueError):
            state.amplitude[0, 0] = 0.0

    def test_boundary_guard_triggers_on_edge_mass(self):
        state = _uniform_state().normalized()  # uniform: plenty of edge mass
        with pytest.raises(GridTooSmallError) as err:
            state.check_boundary()
        assert 0.0 < err.value.leakage <= 1.0

    def test_boundary_guard_passes_for_contained_state(self):
        n = 64
        g = Grid1D(n, 16.0)
        x = g.coordinates
        amp = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2))  # sigma ~ 0.7, edge at 8
        state = BiphotonGrid(g, g, Basis.MOMENTUM, amp.astype(complex)).normalized()
        state.check_boundary()


class TestJointDensity:
    def test_total_mass_and_normalization(self):
        g = Grid1D(32, 8.0, unit=AxisUnit.MM)
        x = g.coordinates
        vals = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2))
        dens = JointDensity(g, g, vals, Basis.POSITION).normalized()
        assert dens.total_mass() == pytest.approx(1.0, abs=1e-12)

    def test_rescaled_axes_preserves_mass(self):
        g = Grid1D(32, 8.0)
        x = g.coordinates
        vals = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2))
        dens = JointDensity(g, g, vals, Basis.MOMENTUM).normalized()
        scaled = dens.rescaled_axes(0.05, 0.05, AxisUnit.MM)
        assert scaled.total_mass() == pytest.approx(1.0, rel=1e-12)
        assert scaled.axis_s.extent == pytest.approx(0.4, rel=1e-12)
