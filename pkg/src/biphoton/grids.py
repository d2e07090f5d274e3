"""Units convention, coordinate mappings and the shared joint-amplitude grid.

All lengths are expressed in millimetres and all transverse momenta as
wavenumbers kappa in mm^-1.  Planck's constant is set to hbar = 1, so momenta
p = hbar*kappa are reported directly as kappa and the entanglement-witness
bound hbar^2/4 becomes 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import BasisMismatchError, GridTooSmallError, InvalidParameterError

__all__ = [
    "UnitsConvention",
    "CONVENTION",
    "AxisUnit",
    "Basis",
    "Grid1D",
    "BiphotonGrid",
    "JointDensity",
    "wavenumber_from_wavelength",
    "fourier_plane_position",
    "kappa_from_fourier_position",
    "make_conjugate_grid",
]

# Boundary guard: a state is considered safely contained if less than this
# fraction of its probability sits within GUARD_CELLS cells of any edge.
GUARD_LEAKAGE = 1e-6
GUARD_CELLS = 3

# Default detection optics: the Fourier plane of the crystal is accessed
# through an f = 400 mm lens, and both down-converted photons are filtered
# at 810 nm (degenerate operation).
DEFAULT_FOCAL_LENGTH_MM = 400.0
DEFAULT_PHOTON_WAVELENGTH_MM = 8.1e-4


@dataclass(frozen=True)
class UnitsConvention:
    """Fixed unit system shared by every module.

    Lengths are millimetres, transverse momenta are wavenumbers in mm^-1 and
    hbar = 1.  With these choices the Heisenberg-type witness bound
    hbar^2/4 evaluates to 1/4.
    """

    length_unit: str = "mm"
    wavenumber_unit: str = "mm^-1"
    hbar: float = 1.0

    @property
    def witness_bound(self) -> float:
        return self.hbar**2 / 4.0


CONVENTION = UnitsConvention()


class AxisUnit(Enum):
    """Unit tag carried by each grid axis."""

    MM = "mm"
    PER_MM = "mm^-1"

    @property
    def conjugate(self) -> "AxisUnit":
        return AxisUnit.PER_MM if self is AxisUnit.MM else AxisUnit.MM


class Basis(Enum):
    """Representation of a joint amplitude."""

    MOMENTUM = "momentum"
    POSITION = "position"

    @property
    def axis_unit(self) -> AxisUnit:
        return AxisUnit.PER_MM if self is Basis.MOMENTUM else AxisUnit.MM


def wavenumber_from_wavelength(wavelength_mm: float) -> float:
    """Return the wavenumber k = 2*pi/lambda in mm^-1.

    Parameters
    ----------
    wavelength_mm : float
        Vacuum wavelength in millimetres (e.g. 4.05e-4 for 405 nm).
    """
    if wavelength_mm <= 0:
        raise InvalidParameterError(
            f"wavelength must be positive, got {wavelength_mm}"
        )
    return 2.0 * math.pi / wavelength_mm


def fourier_plane_position(kappa, focal_length_mm: float, k_photon: float):
    """Map transverse momentum to position in the Fourier plane of a lens.

    A lens of focal length f maps a plane-wave component of transverse
    wavenumber kappa onto the position rho = f*kappa/k in its back focal
    plane, where k is the photon wavenumber.

    Parameters
    ----------
    kappa : float or ndarray
        Transverse wavenumber(s) in mm^-1.
    focal_length_mm : float
        Lens focal length in mm.
    k_photon : float
        Photon wavenumber in mm^-1.

    Returns
    -------
    float or ndarray
        Fourier-plane position(s) in mm.
    """
    if focal_length_mm <= 0:
        raise InvalidParameterError(f"focal length must be positive, got {focal_length_mm}")
    if k_photon <= 0:
        raise InvalidParameterError(f"photon wavenumber must be positive, got {k_photon}")
    return focal_length_mm * kappa / k_photon


def kappa_from_fourier_position(rho, focal_length_mm: float, k_photon: float):
    """Inverse of :func:`fourier_plane_position`: kappa = k*rho/f."""
    if focal_length_mm <= 0:
        raise InvalidParameterError(f"focal length must be positive, got {focal_length_mm}")
    if k_photon <= 0:
        raise InvalidParameterError(f"photon wavenumber must be positive, got {k_photon}")
    return k_photon * rho / focal_length_mm


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D sampling grid, symmetric about its centre.

    The n_points coordinates are center + (j - (n-1)/2) * spacing for
    j = 0..n-1, so the sample set is exactly mirror-symmetric about the
    centre (the centre itself falls between the two middle samples).

    Parameters
    ----------
    n_points : int
        Number of samples; must be a power of two for FFT efficiency.
    extent : float
        Full width n_points * spacing, in the axis unit.
    center : float
        Coordinate of the grid midpoint.
    unit : AxisUnit
        mm for position axes, mm^-1 for momentum axes.
    """

    n_points: int
    extent: float
    center: float = 0.0
    unit: AxisUnit = AxisUnit.PER_MM

    def __post_init__(self):
        if not _is_power_of_two(self.n_points):
            raise InvalidParameterError(
                f"n_points must be a power of two, got {self.n_points}"
            )
        if self.extent <= 0:
            raise InvalidParameterError(f"extent must be positive, got {self.extent}")

    @property
    def spacing(self) -> float:
        return self.extent / self.n_points

    @cached_property
    def coordinates(self) -> np.ndarray:
        j = np.arange(self.n_points)
        coords = self.center + (j - (self.n_points - 1) / 2.0) * self.spacing
        coords.setflags(write=False)
        return coords


def make_conjugate_grid(grid: Grid1D) -> Grid1D:
    """Return the Fourier-conjugate grid of ``grid``.

    The conjugate grid has the same number of points, the conjugate unit,
    and a spacing obeying d_kappa * d_x = 2*pi/n exactly.  The centre value
    is carried over unchanged (grids used for joint amplitudes are centred
    at zero, where this is the physically meaningful choice).  Applying the
    function twice returns the original grid up to one floating-point ulp in
    the extent (the double division 2*pi*n/(2*pi*n/L) is not always exactly
    invertible in IEEE arithmetic).
    """
    n = grid.n_points
    conj_extent = (2.0 * math.pi * n) / grid.extent
    return Grid1D(n, conj_extent, grid.center, grid.unit.conjugate)


@dataclass(frozen=True, eq=False)
class BiphotonGrid:
    """Discretised complex joint amplitude over a 2-D coordinate grid.

    The first array axis is the signal coordinate, the second the idler
    coordinate.  Amplitudes follow the continuum normalisation: after
    :meth:`normalized` the squared modulus summed over cells times the cell
    area equals one.

    Attributes
    ----------
    axis_s, axis_i : Grid1D
        Signal and idler sampling grids.
    basis : Basis
        Representation tag; must be consistent with the axis units.
    amplitude : ndarray
        Complex matrix of shape (axis_s.n_points, axis_i.n_points).
    """

    axis_s: Grid1D
    axis_i: Grid1D
    basis: Basis
    amplitude: np.ndarray

    def __post_init__(self):
        expected = (self.axis_s.n_points, self.axis_i.n_points)
        if self.amplitude.shape != expected:
            raise InvalidParameterError(
                f"amplitude shape {self.amplitude.shape} does not match grids {expected}"
            )
        for name, axis in (("signal", self.axis_s), ("idler", self.axis_i)):
            if axis.unit is not self.basis.axis_unit:
                raise BasisMismatchError(
                    f"{name} axis unit {axis.unit.value} inconsistent with "
                    f"{self.basis.value} basis (expected {self.basis.axis_unit.value})"
                )
        amp = np.ascontiguousarray(self.amplitude, dtype=np.complex128)
        amp.setflags(write=False)
        object.__setattr__(self, "amplitude", amp)

    @property
    def cell_area(self) -> float:
        return self.axis_s.spacing * self.axis_i.spacing

    def norm_squared(self) -> float:
        """Total probability: sum |amplitude|^2 * cell area."""
        return float((np.abs(self.amplitude) ** 2).sum() * self.cell_area)

    def normalized(self) -> "BiphotonGrid":
        """Return a copy rescaled to unit total probability."""
        n2 = self.norm_squared()
        if n2 <= 0:
            raise InvalidParameterError("cannot normalise a zero amplitude")
        return BiphotonGrid(
            self.axis_s, self.axis_i, self.basis, self.amplitude / math.sqrt(n2)
        )

    def probability(self) -> np.ndarray:
        """Per-cell probability mass |amplitude|^2 * cell area."""
        return np.abs(self.amplitude) ** 2 * self.cell_area

    def boundary_leakage(self, cells: int = GUARD_CELLS) -> float:
        """Fraction of total probability within ``cells`` cells of any edge."""
        p = np.abs(self.amplitude) ** 2
        total = p.sum()
        if total == 0:
            return 0.0
        frame = np.zeros(p.shape, dtype=bool)
        frame[:cells, :] = frame[-cells:, :] = True
        frame[:, :cells] = frame[:, -cells:] = True
        return float(p[frame].sum() / total)

    def check_boundary(self, threshold: float = GUARD_LEAKAGE) -> None:
        """Raise :class:`GridTooSmallError` if the boundary guard fails."""
        leakage = self.boundary_leakage()
        if leakage >= threshold:
            raise GridTooSmallError(
                f"{leakage:.3e} of the probability lies within {GUARD_CELLS} "
                f"cells of the {self.basis.value}-grid edge (threshold "
                f"{threshold:.0e}); enlarge the grid extent or point count",
                leakage=leakage,
            )


@dataclass(frozen=True, eq=False)
class JointDensity:
    """Real joint probability density over a pair of 1-D grids.

    ``values[j, l]`` is the probability density (per unit area) at
    ``(axis_s.coordinates[j], axis_i.coordinates[l])``; the integral is
    approximated by ``values.sum() * cell_area``.
    """

    axis_s: Grid1D
    axis_i: Grid1D
    values: np.ndarray
    basis: Basis | None = None

    def __post_init__(self):
        expected = (self.axis_s.n_points, self.axis_i.n_points)
        if self.values.shape != expected:
            raise InvalidParameterError(
                f"values shape {self.values.shape} does not match grids {expected}"
            )
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def cell_area(self) -> float:
        return self.axis_s.spacing * self.axis_i.spacing

    def total_mass(self) -> float:
        return float(self.values.sum() * self.cell_area)

    def normalized(self) -> "JointDensity":
        mass = self.total_mass()
        if mass <= 0:
            raise InvalidParameterError("cannot normalise a zero density")
        return JointDensity(self.axis_s, self.axis_i, self.values / mass, self.basis)

    def rescaled_axes(self, scale_s: float, scale_i: float,
                      unit: AxisUnit) -> "JointDensity":
        """Linear change of variables on both axes (density re-weighted).

        Used e.g. to express a momentum-basis density over Fourier-plane
        positions rho = f*kappa/k; the Jacobian keeps the mass unchanged.
        """
        if scale_s <= 0 or scale_i <= 0:
            raise InvalidParameterError("axis scale factors must be positive")
        new_s = Grid1D(self.axis_s.n_points, self.axis_s.extent * scale_s,
                       self.axis_s.center * scale_s, unit)
        new_i = Grid1D(self.axis_i.n_points, self.axis_i.extent * scale_i,
                       self.axis_i.center * scale_i, unit)
        return JointDensity(new_s, new_i, self.values / (scale_s * scale_i), self.basis)
