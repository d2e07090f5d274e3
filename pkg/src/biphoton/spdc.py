"""Biphoton state synthesis for collinear degenerate down-conversion.

The joint momentum amplitude of the signal/idler pair is the product of the
pump angular spectrum, evaluated at the summed transverse wavenumber
kappa_s + kappa_i, and the crystal phase-matching kernel, evaluated at the
longitudinal wavevector mismatch.  Per-arm aberration transfer functions are
applied separately (see :mod:`biphoton.aberrations`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BasisMismatchError, InvalidParameterError
from .grids import Basis, BiphotonGrid, Grid1D, JointDensity, wavenumber_from_wavelength

__all__ = [
    "PhaseMatching",
    "PumpKind",
    "PumpProfile",
    "CrystalPumpConfig",
    "delta_kappa_p_from_beam_diameter",
    "delta_k_z",
    "phase_matching_amplitude",
    "synthesize_state",
    "momentum_distribution",
    "DEFAULT_CRYSTAL_LENGTH_MM",
    "DEFAULT_PUMP_WAVELENGTH_MM",
    "DEFAULT_DELTA_KAPPA_P",
    "GAUSSIAN_SINC_ALPHA",
]

# Default physical parameters.  The crystal length is not a measured value;
# 2 mm is a typical BBO thickness and every derived quantity is parametric
# in it.  The pump width follows from a 1 mm 1/e^2-intensity-diameter
# collimated beam through delta_kappa_p_from_beam_diameter.
DEFAULT_CRYSTAL_LENGTH_MM = 2.0
DEFAULT_PUMP_WAVELENGTH_MM = 4.05e-4
DEFAULT_DELTA_KAPPA_P = 1.0
GAUSSIAN_SINC_ALPHA = 0.455


class PhaseMatching(Enum):
    """Longitudinal phase-matching kernel variant."""

    EXACT_SINC = "exact-sinc"
    GAUSSIAN_APPROX = "gaussian"


class PumpKind(Enum):
    PLANE_WAVE = "plane-wave"
    GAUSSIAN = "gaussian"


def delta_kappa_p_from_beam_diameter(diameter_mm: float) -> float:
    """Pump angular-spectrum width for a collimated Gaussian beam.

    ``diameter_mm`` is the 1/e^2 intensity diameter.  With waist radius
    w = diameter/2 the adopted mapping is delta_kappa_p = 1/(2w) = 1/diameter,
    the standard deviation of the intensity angular spectrum in the summed
    coordinate kappa_s + kappa_i.
    """
    if diameter_mm <= 0:
        raise InvalidParameterError(f"beam diameter must be positive, got {diameter_mm}")
    return 1.0 / diameter_mm


@dataclass(frozen=True)
class PumpProfile:
    """Angular profile of the pump beam as a function of u = kappa_s + kappa_i.

    Gaussian pumps have amplitude proportional to exp[-u^2/(4 dkp^2)] so the
    intensity |E|^2 has standard deviation dkp in u.  A plane-wave pump is
    represented on a discrete grid as the narrowest normalisable ridge: one
    cell wide in the summed coordinate.
    """

    kind: PumpKind
    delta_kappa_p: float = 0.0

    def __post_init__(self):
        if self.kind is PumpKind.GAUSSIAN and self.delta_kappa_p <= 0:
            raise InvalidParameterError(
                "Gaussian pump requires delta_kappa_p > 0, got "
                f"{self.delta_kappa_p}"
            )
        if self.kind is PumpKind.PLANE_WAVE and self.delta_kappa_p != 0.0:
            raise InvalidParameterError("plane-wave pump must have delta_kappa_p = 0")

    def amplitude(self, u, ridge_half_width: float | None = None):
        """Evaluate E(u); ``ridge_half_width`` selects the plane-wave ridge."""
        u = np.asarray(u, dtype=float)
        if self.kind is PumpKind.GAUSSIAN:
            return np.exp(-(u**2) / (4.0 * self.delta_kappa_p**2))
        if ridge_half_width is None:
            raise InvalidParameterError(
                "plane-wave pump needs the grid cell half-width to form its ridge"
            )
        return (np.abs(u) <= ridge_half_width).astype(float)


@dataclass(frozen=True)
class CrystalPumpConfig:
    """Crystal and pump parameters entering the joint amplitude.

    Attributes
    ----------
    ell : float
        Crystal length in mm.
    k_p : float
        Pump wavenumber in mm^-1.
    alpha : float
        Dimensionless constant of the Gaussian fit to the sinc kernel.
    delta_kappa_p : float
        Pump angular-spectrum standard deviation in mm^-1; 0 encodes a
        plane-wave pump.
    phase_matching : PhaseMatching
        Kernel variant used when synthesising states.
    """

    ell: float = DEFAULT_CRYSTAL_LENGTH_MM
    k_p: float = wavenumber_from_wavelength(DEFAULT_PUMP_WAVELENGTH_MM)
    alpha: float = GAUSSIAN_SINC_ALPHA
    delta_kappa_p: float = DEFAULT_DELTA_KAPPA_P
    phase_matching: PhaseMatching = PhaseMatching.GAUSSIAN_APPROX

    def __post_init__(self):
        if self.ell <= 0:
            raise InvalidParameterError(f"crystal length must be positive, got {self.ell}")
        if self.k_p <= 0:
            raise InvalidParameterError(f"pump wavenumber must be positive, got {self.k_p}")
        if self.alpha <= 0:
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha}")
        if self.delta_kappa_p < 0:
            raise InvalidParameterError(
                f"delta_kappa_p must be non-negative, got {self.delta_kappa_p}"
            )

    def pump(self) -> PumpProfile:
        """Pump profile consistent with this configuration."""
        if self.delta_kappa_p == 0.0:
            return PumpProfile(PumpKind.PLANE_WAVE)
        return PumpProfile(PumpKind.GAUSSIAN, self.delta_kappa_p)


def delta_k_z(kappa_s, kappa_i, cfg: CrystalPumpConfig):
    """Longitudinal wavevector mismatch (kappa_s - kappa_i)^2 / (2 k_p).

    Paraxial, degenerate, walk-off neglected.  Symmetric under exchange of
    the two arguments.
    """
    diff = np.asarray(kappa_s, dtype=float) - np.asarray(kappa_i, dtype=float)
    return diff**2 / (2.0 * cfg.k_p)


def phase_matching_amplitude(delta_kz, cfg: CrystalPumpConfig):
    """Complex phase-matching kernel at mismatch ``delta_kz``.

    EXACT_SINC returns exp(-i*l*dkz/2) * sinc(l*dkz/2) with the unnormalised
    sinc(x) = sin(x)/x; GAUSSIAN_APPROX replaces the sinc by exp(-alpha*x),
    which is Gaussian in the transverse difference coordinate.  Both kernels
    equal 1 at dkz = 0 and share the same linear phase -l*dkz/2.
    """
    x = 0.5 * cfg.ell * np.asarray(delta_kz, dtype=float)
    if cfg.phase_matching is PhaseMatching.EXACT_SINC:
        return np.exp(-1j * x) * np.sinc(x / math.pi)
    return np.exp(-(cfg.alpha + 1j) * x)


def synthesize_state(
    cfg: CrystalPumpConfig,
    pump: PumpProfile,
    grid_s: Grid1D,
    grid_i: Grid1D,
    check_guard: bool = True,
) -> BiphotonGrid:
    """Build the normalised joint momentum amplitude on the given grids.

    The amplitude is E(kappa_s + kappa_i) * chi(delta_k_z) with unit arm
    transfer functions; aberrations are applied afterwards.  Grids must be
    momentum grids centred at kappa = 0.

    Raises
    ------
    GridTooSmallError
        If more than the guard fraction of the probability ends up within
        three cells of the grid edge.
    """
    expected_kind = PumpKind.PLANE_WAVE if cfg.delta_kappa_p == 0 else PumpKind.GAUSSIAN
    if pump.kind is not expected_kind:
        raise InvalidParameterError(
            f"pump kind {pump.kind.value} inconsistent with config "
            f"delta_kappa_p={cfg.delta_kappa_p}"
        )
    if pump.kind is PumpKind.GAUSSIAN and not math.isclose(
        pump.delta_kappa_p, cfg.delta_kappa_p, rel_tol=1e-12
    ):
        raise InvalidParameterError("pump and config delta_kappa_p differ")
    for name, g in (("signal", grid_s), ("idler", grid_i)):
        if g.unit is not Basis.MOMENTUM.axis_unit:
            raise BasisMismatchError(f"{name} grid is not a momentum grid")
        if g.center != 0.0:
            raise InvalidParameterError(f"{name} grid must be centred at kappa = 0")

    ks = grid_s.coordinates[:, None]
    ki = grid_i.coordinates[None, :]
    u = ks + ki
    # Ridge half-width: u values are quantised in steps of the cell spacing,
    # so half a (summed) cell selects exactly the u = 0 anti-diagonal.
    ridge = 0.5 * min(grid_s.spacing, grid_i.spacing)
    envelope = pump.amplitude(u, ridge_half_width=ridge)
    kernel = phase_matching_amplitude(delta_k_z(ks, ki, cfg), cfg)
    state = BiphotonGrid(grid_s, grid_i, Basis.MOMENTUM, envelope * kernel).normalized()
    if check_guard:
        state.check_boundary()
    return state


def momentum_distribution(state: BiphotonGrid) -> JointDensity:
    """Joint momentum probability density |amplitude|^2, normalised to 1.

    Pure-phase arm transfer functions drop out of the modulus, so the
    distribution is invariant under any momentum-domain aberration.
    """
    if state.basis is not Basis.MOMENTUM:
        raise BasisMismatchError(
            f"momentum_distribution needs a momentum-basis state, got {state.basis.value}"
        )
    norm = state.norm_squared()
    return JointDensity(
        state.axis_s, state.axis_i, np.abs(state.amplitude) ** 2 / norm, Basis.MOMENTUM
    )
