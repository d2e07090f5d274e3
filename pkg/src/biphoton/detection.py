"""Slit-scan coincidence measurement model.

Each detector is a slit of finite width translated in steps across its arm's
detection plane; a coincidence bin integrates the joint density over the
slit_width x slit_width window centred on the slit pair.  Optional Poisson
shot noise draws independent counts per bin from the expected rates, with a
counter-based generator so results are reproducible for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidParameterError, ScanRangeError
from .grids import Basis, Grid1D, JointDensity

__all__ = [
    "NoiseModel",
    "SlitScanConfig",
    "CoincidenceHistogram",
    "slit_scan",
    "expected_counts_total",
    "boxcar_window_integrals",
    "DEFAULT_SLIT_WIDTH_MM",
    "DEFAULT_SLIT_STEP_MM",
    "DEFAULT_SCAN_HALF_RANGE_MM",
    "DEFAULT_TOTAL_COUNTS",
]

DEFAULT_SLIT_WIDTH_MM = 0.1
DEFAULT_SLIT_STEP_MM = 0.1
DEFAULT_SCAN_HALF_RANGE_MM = 2.0
DEFAULT_TOTAL_COUNTS = 1e5


class NoiseModel(Enum):
    NOISELESS = "noiseless"
    POISSON = "poisson"


@dataclass(frozen=True)
class SlitScanConfig:
    """Geometry and statistics of a two-arm slit scan.

    ``range_s``/``range_i`` are (lo, hi) intervals of slit-centre positions
    in mm; ``total_counts`` sets the expected number of coincidences a
    full-range scan would collect.
    """

    slit_width: float = DEFAULT_SLIT_WIDTH_MM
    step: float = DEFAULT_SLIT_STEP_MM
    range_s: tuple[float, float] = (-DEFAULT_SCAN_HALF_RANGE_MM, DEFAULT_SCAN_HALF_RANGE_MM)
    range_i: tuple[float, float] = (-DEFAULT_SCAN_HALF_RANGE_MM, DEFAULT_SCAN_HALF_RANGE_MM)
    total_counts: float = DEFAULT_TOTAL_COUNTS
    noise: NoiseModel = NoiseModel.POISSON
    seed: int = 0

    def __post_init__(self):
        if self.slit_width <= 0:
            raise InvalidParameterError(f"slit width must be positive, got {self.slit_width}")
        if self.step <= 0:
            raise InvalidParameterError(f"scan step must be positive, got {self.step}")
        for name, (lo, hi) in (("range_s", self.range_s), ("range_i", self.range_i)):
            if hi < lo:
                raise InvalidParameterError(f"{name} interval is empty: {(lo, hi)}")
        if self.total_counts <= 0:
            raise InvalidParameterError("total_counts must be positive")

    def positions(self, rng: tuple[float, float]) -> np.ndarray:
        lo, hi = rng
        n = int(math.floor((hi - lo) / self.step + 1e-9)) + 1
        return lo + self.step * np.arange(n)


@dataclass(frozen=True, eq=False)
class CoincidenceHistogram:
    """Slit-scan coincidence counts over a grid of slit-centre pairs.

    ``counts[j, l]`` belongs to signal slit position ``positions_s[j]`` and
    idler slit position ``positions_i[l]``.  Counts are integers in Poisson
    mode and real expected rates in noiseless mode.  For momentum-basis
    histograms the positions are Fourier-plane coordinates in mm and
    ``kappa_per_mm`` converts them to transverse wavenumbers.
    """

    positions_s: np.ndarray
    positions_i: np.ndarray
    counts: np.ndarray
    basis: Basis
    config: SlitScanConfig
    kappa_per_mm: float | None = None

    def __post_init__(self):
        counts = np.ascontiguousarray(self.counts, dtype=np.float64)
        if counts.shape != (len(self.positions_s), len(self.positions_i)):
            raise InvalidParameterError("counts shape does not match position lists")
        if (counts < 0).any():
            raise InvalidParameterError("counts must be non-negative")
        if self.basis is Basis.MOMENTUM and self.kappa_per_mm is None:
            raise InvalidParameterError(
                "momentum-basis histograms need kappa_per_mm to map slit "
                "positions to wavenumbers"
            )
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)


def boxcar_window_integrals(grid: Grid1D, values_1d: np.ndarray,
                            centers: np.ndarray, width: float) -> np.ndarray:
    """Integrals of a piecewise-constant 1-D density over sliding windows.

    ``values_1d`` is a density per unit length sampled on ``grid``; the
    integral over [c - width/2, c + width/2] is evaluated exactly for the
    piecewise-constant interpolant via its cumulative integral.

    Raises
    ------
    ScanRangeError
        If any window extends beyond the sampled extent.
    """
    coords = grid.coordinates
    d = grid.spacing
    edges_lo = coords[0] - d / 2.0
    edges_hi = coords[-1] + d / 2.0
    lows = centers - width / 2.0
    highs = centers + width / 2.0
    if lows.min() < edges_lo - 1e-12 or highs.max() > edges_hi + 1e-12:
        raise ScanRangeError(
            f"slit window [{lows.min():.4g}, {highs.max():.4g}] mm exits the "
            f"sampled extent [{edges_lo:.4g}, {edges_hi:.4g}] mm"
        )
    cum = np.concatenate([[0.0], np.cumsum(values_1d) * d])

    def integral(points):
        pts = np.clip(points, edges_lo, edges_hi)
        idx = np.clip(((pts - edges_lo) / d).astype(int), 0, len(values_1d) - 1)
        return cum[idx] + (pts - (edges_lo + idx * d)) * values_1d[idx]

    return integral(highs) - integral(lows)


def slit_scan(density: JointDensity, cfg: SlitScanConfig,
              kappa_per_mm: float | None = None) -> CoincidenceHistogram:
    """Simulate a coincidence slit scan of a normalised joint density.

    The expected rate in each bin is ``total_counts`` times the probability
    mass inside the slit_width x slit_width window centred on the slit pair
    (a separable boxcar in the two slit coordinates).  Poisson mode draws
    one independent variate per bin; a fixed seed reproduces counts exactly.
    """
    pos_s = cfg.positions(cfg.range_s)
    pos_i = cfg.positions(cfg.range_i)
    # separable boxcar: the window mass factorises into per-axis overlaps
    w_s = _window_matrix(density.axis_s, pos_s, cfg.slit_width)
    w_i = _window_matrix(density.axis_i, pos_i, cfg.slit_width)
    expected_mass = w_s @ density.values @ w_i.T * density.cell_area
    rates = cfg.total_counts * expected_mass
    if cfg.noise is NoiseModel.NOISELESS:
        counts = rates
    else:
        rng = np.random.Generator(np.random.Philox(cfg.seed))
        counts = rng.poisson(rates).astype(np.float64)
    return CoincidenceHistogram(pos_s, pos_i, counts, density.basis, cfg,
                                kappa_per_mm=kappa_per_mm)


def _window_matrix(grid: Grid1D, centers: np.ndarray, width: float) -> np.ndarray:
    """Sparse-in-spirit matrix of per-cell overlap fractions for each window."""
    coords = grid.coordinates
    d = grid.spacing
    edges_lo = coords[0] - d / 2.0
    edges_hi = coords[-1] + d / 2.0
    lows = centers - width / 2.0
    highs = centers + width / 2.0
    if lows.min() < edges_lo - 1e-12 or highs.max() > edges_hi + 1e-12:
        raise ScanRangeError(
            f"slit window [{lows.min():.4g}, {highs.max():.4g}] exits the "
            f"sampled extent [{edges_lo:.4g}, {edges_hi:.4g}]"
        )
    cell_lo = coords - d / 2.0
    cell_hi = coords + d / 2.0
    # overlap length of [low, high) with each cell, as a fraction of the cell
    overlap = np.clip(
        np.minimum(highs[:, None], cell_hi[None, :])
        - np.maximum(lows[:, None], cell_lo[None, :]),
        0.0,
        d,
    )
    return overlap / d


def expected_counts_total(hist: CoincidenceHistogram) -> float:
    """Sum of all histogram counts.

    For a noiseless full-range scan with step equal to the slit width this
    equals ``total_counts`` times the in-range probability mass exactly; in
    Poisson mode it fluctuates around that value.
    """
    return float(hist.counts.sum())
