"""Ghost imaging of an absorptive bar target with nonlocal defocus cancellation.

The target sits in the signal arm's Fourier plane in front of a bucket
detector (no spatial resolution); the image is built from coincidences while
scanning a slit across the idler arm's Fourier plane.  Aberrations act in
the crystal image plane, i.e. as position-domain phase profiles, where the
photons' birth-position correlation replaces the momentum anticorrelation in
the cancellation argument: a quadratic idler phase is cancelled by the
sign-flipped quadratic on the signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aberrations import Arm, ArmAssignment, PhaseDomain, PhaseProfile, apply_aberration
from .detection import NoiseModel, SlitScanConfig, boxcar_window_integrals
from .errors import InvalidParameterError, PeriodEstimationError, ScanRangeError
from .grids import (
    DEFAULT_FOCAL_LENGTH_MM,
    DEFAULT_PHOTON_WAVELENGTH_MM,
    Grid1D,
    fourier_plane_position,
    wavenumber_from_wavelength,
)
from .spdc import CrystalPumpConfig, PumpProfile, momentum_distribution, synthesize_state
from .transforms import to_momentum_basis, to_position_basis

__all__ = [
    "BarObject",
    "VisibilityReport",
    "GhostImageResult",
    "run_ghost_scenario",
    "visibility",
    "period_estimate",
]

# Modulation below this fraction of the mean level counts as a flat trace.
_LOW_MODULATION = 1e-3


@dataclass(frozen=True)
class BarObject:
    """Periodic opaque-bar target (transmission 0 on bars, 1 elsewhere)."""

    bar_width: float = 0.4
    period: float = 0.8
    n_bars: int = 3
    center: float = 0.0

    def __post_init__(self):
        if self.bar_width <= 0 or self.period <= 0:
            raise InvalidParameterError("bar width and period must be positive")
        if self.bar_width >= self.period:
            raise InvalidParameterError(
                f"bar width {self.bar_width} must be smaller than the period {self.period}"
            )
        if self.n_bars < 1:
            raise InvalidParameterError("need at least one bar")

    @property
    def pattern_half_extent(self) -> float:
        """Half the span from the outer edge of the first to the last bar."""
        return ((self.n_bars - 1) * self.period + self.bar_width) / 2.0

    def transmission(self, rho) -> np.ndarray:
        """Binary transmission mask evaluated at positions ``rho`` (mm)."""
        rho = np.asarray(rho, dtype=float)
        first = self.center - (self.n_bars - 1) * self.period / 2.0
        t = np.ones_like(rho)
        for b in range(self.n_bars):
            c = first + b * self.period
            t[np.abs(rho - c) <= self.bar_width / 2.0] = 0.0
        return t


@dataclass(frozen=True)
class VisibilityReport:
    """Michelson contrast of a trace; flagged when the trace is flat."""

    value: float
    low_modulation: bool


@dataclass(frozen=True, eq=False)
class GhostImageResult:
    """One-dimensional coincidence image of the bar target.

    ``rates[j]`` is the coincidence rate with the idler slit centred at
    ``positions[j]`` (Fourier-plane mm).  ``visibility`` is the Michelson
    contrast over the modulated window, ``period`` the dominant modulation
    period (None when no dominant peak exists), and ``transmitted_mass``
    the probability that a signal photon passes the object.
    """

    positions: np.ndarray
    rates: np.ndarray
    visibility: float
    low_modulation: bool
    period: float | None
    transmitted_mass: float
    window_half_width: float

    def __post_init__(self):
        if (self.rates < 0).any():
            raise InvalidParameterError("rates must be non-negative")
        if not 0.0 <= self.visibility <= 1.0:
            raise InvalidParameterError("visibility must lie in [0, 1]")


def visibility(rates: np.ndarray, positions: np.ndarray | None = None,
               window_half_width: float | None = None) -> VisibilityReport:
    """Michelson contrast (max - min)/(max + min) of a trace.

    When ``positions`` and ``window_half_width`` are given, only samples with
    |position| <= window_half_width enter, restricting the statistic to the
    centrally modulated region.  A flat trace returns 0 with the
    low-modulation flag set.
    """
    rates = np.asarray(rates, dtype=float)
    if positions is not None and window_half_width is not None:
        sel = np.abs(np.asarray(positions)) <= window_half_width
        if not sel.any():
            raise InvalidParameterError("visibility window contains no samples")
        rates = rates[sel]
    hi = float(rates.max())
    lo = float(rates.min())
    if hi <= 0.0 or (hi - lo) <= _LOW_MODULATION * (hi + lo):
        return VisibilityReport(0.0, True)
    return VisibilityReport((hi - lo) / (hi + lo), False)


def period_estimate(positions: np.ndarray, rates: np.ndarray,
                    pad_factor: int = 16, dominance: float = 3.0) -> float:
    """Dominant modulation period of a trace, in mm.

    The mean-subtracted trace is zero-padded and Fourier transformed; the
    strongest non-DC spectral line, refined by parabolic interpolation,
    gives the period.  At least two full periods must fit in the scanned
    range and the line must stand out of the spectral background.

    Raises
    ------
    PeriodEstimationError
        No sufficiently dominant peak, or fewer than two periods in range.
    """
    positions = np.asarray(positions, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if len(rates) < 8:
        raise PeriodEstimationError("trace too short for a period estimate")
    step = positions[1] - positions[0]
    y = rates - rates.mean()
    spectrum = np.abs(np.fft.rfft(y, pad_factor * len(y)))
    freqs = np.fft.rfftfreq(pad_factor * len(y), step)
    # ignore the smeared DC foot introduced by zero padding
    guard = pad_factor
    body = spectrum[guard:]
    if body.size < 3:
        raise PeriodEstimationError("trace too short for a period estimate")
    peak_rel = int(np.argmax(body))
    peak = peak_rel + guard
    background = float(np.median(body))
    if background <= 0 or spectrum[peak] < dominance * background:
        raise PeriodEstimationError(
            "no dominant modulation peak in the trace spectrum"
        )
    if 0 < peak < len(spectrum) - 1:
        a, b, c = spectrum[peak - 1], spectrum[peak], spectrum[peak + 1]
        denom = a - 2.0 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        f_peak = freqs[peak] + shift * (freqs[1] - freqs[0])
    else:
        f_peak = freqs[peak]
    if f_peak <= 0:
        raise PeriodEstimationError("spectral peak collapsed onto DC")
    period = 1.0 / float(f_peak)
    span = positions[-1] - positions[0]
    if period > span / 2.0:
        raise PeriodEstimationError(
            f"fewer than two periods in range (period {period:.3g} mm over "
            f"{span:.3g} mm)"
        )
    return period


def run_ghost_scenario(
    cfg: CrystalPumpConfig,
    pump: PumpProfile,
    theta_i: PhaseProfile,
    theta_s: PhaseProfile,
    bar_object: BarObject,
    scan: SlitScanConfig,
    grid_s: Grid1D | None = None,
    grid_i: Grid1D | None = None,
    focal_length_mm: float = DEFAULT_FOCAL_LENGTH_MM,
    photon_wavelength_mm: float = DEFAULT_PHOTON_WAVELENGTH_MM,
) -> GhostImageResult:
    """Simulate the defocus-cancellation ghost-imaging experiment.

    Pipeline: synthesise the momentum state, transform to the crystal image
    plane, apply the position-domain phases theta_s/theta_i, transform back,
    absorb at the bar target on the signal Fourier-plane coordinate
    rho = f*kappa/k, trace out the signal (ideal bucket detection) and scan
    the idler slit across its Fourier plane.

    Raises
    ------
    ScanRangeError
        If the bar pattern is clipped by the sampled Fourier-plane extent.
    """
    for name, profile in (("theta_s", theta_s), ("theta_i", theta_i)):
        if profile.domain is not PhaseDomain.POSITION:
            raise InvalidParameterError(
                f"{name} must be a position-domain profile for image-plane aberrations"
            )
    if grid_s is None:
        grid_s = Grid1D(1024, 800.0)
    if grid_i is None:
        grid_i = Grid1D(1024, 800.0)
    k_photon = wavenumber_from_wavelength(photon_wavelength_mm)

    state = synthesize_state(cfg, pump, grid_s, grid_i)
    image_plane = to_position_basis(state)
    image_plane = apply_aberration(image_plane, ArmAssignment(Arm.SIGNAL, theta_s))
    image_plane = apply_aberration(image_plane, ArmAssignment(Arm.IDLER, theta_i))
    fourier_plane = to_momentum_basis(image_plane)

    density = momentum_distribution(fourier_plane)
    rho_s = fourier_plane_position(density.axis_s.coordinates, focal_length_mm, k_photon)
    rho_i = fourier_plane_position(density.axis_i.coordinates, focal_length_mm, k_photon)
    outer_edge = bar_object.pattern_half_extent + abs(bar_object.center)
    if outer_edge > rho_s.max() or -outer_edge < rho_s.min():
        raise ScanRangeError(
            f"bar pattern (|rho| <= {outer_edge:.3g} mm) is clipped by the "
            f"sampled signal Fourier plane [{rho_s.min():.3g}, {rho_s.max():.3g}] mm"
        )

    mask = bar_object.transmission(rho_s)
    masked_mass = density.values * density.cell_area * mask[:, None]
    transmitted = float(masked_mass.sum())
    trace_mass_per_cell = masked_mass.sum(axis=0)

    # express the bucket trace as a density per mm of idler Fourier-plane position
    rho_spacing = density.axis_i.spacing * focal_length_mm / k_photon
    rho_grid = Grid1D(
        density.axis_i.n_points,
        density.axis_i.extent * focal_length_mm / k_photon,
        density.axis_i.center * focal_length_mm / k_photon,
        unit=density.axis_i.unit.conjugate,
    )
    trace_density = trace_mass_per_cell / rho_spacing

    positions = scan.positions(scan.range_i)
    window_mass = boxcar_window_integrals(rho_grid, trace_density, positions, scan.slit_width)
    rates = scan.total_counts * window_mass
    if scan.noise is NoiseModel.POISSON:
        rng = np.random.Generator(np.random.Philox(scan.seed))
        rates = rng.poisson(rates).astype(np.float64)

    window = bar_object.pattern_half_extent + bar_object.period / 2.0
    vis = visibility(rates, positions, window_half_width=window)
    try:
        period = period_estimate(positions, rates)
    except PeriodEstimationError:
        period = None
    return GhostImageResult(
        positions=positions,
        rates=rates,
        visibility=vis.value,
        low_modulation=vis.low_modulation,
        period=period,
        transmitted_mass=transmitted,
        window_half_width=window,
    )
