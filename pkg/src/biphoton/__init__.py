"""Simulation and analysis of nonlocal aberration cancellation with entangled photons.

The package synthesises the joint momentum amplitude of a down-converted
photon pair, applies per-arm polynomial phase aberrations, changes basis via
unitary FFTs, models slit-scan coincidence detection with Poisson noise,
fits bivariate Gaussians by maximum likelihood to evaluate the
position-momentum entanglement witness, and reproduces a defocus-cancelled
ghost-imaging measurement.
"""

from .aberrations import (
    Arm,
    ArmAssignment,
    PhaseDomain,
    PhaseProfile,
    apply_aberration,
    cancellation_partner,
    joint_phase_expansion,
)
from .analysis import (
    GaussianFitReport,
    WitnessReport,
    delta_kappa_minus_sq,
    evaluate_witness,
    fit_bivariate_gaussian,
    monte_carlo_errors,
    poisson_nll_and_grad,
    predicted_delta_x_minus_sq,
    predicted_delta_x_minus_sq_expansion,
)
from .detection import (
    CoincidenceHistogram,
    NoiseModel,
    SlitScanConfig,
    expected_counts_total,
    slit_scan,
)
from .errors import (
    BasisMismatchError,
    BiphotonError,
    ConfigError,
    FitConvergenceError,
    GridTooSmallError,
    InsufficientOrderError,
    InvalidParameterError,
    PeriodEstimationError,
    ScanRangeError,
    SingularFitError,
    UnstableFitError,
)
from .grids import (
    CONVENTION,
    AxisUnit,
    Basis,
    BiphotonGrid,
    Grid1D,
    JointDensity,
    UnitsConvention,
    fourier_plane_position,
    kappa_from_fourier_position,
    make_conjugate_grid,
    wavenumber_from_wavelength,
)
from .imaging import (
    BarObject,
    GhostImageResult,
    VisibilityReport,
    period_estimate,
    run_ghost_scenario,
    visibility,
)
from .scenarios import (
    BUILTIN_SCENARIOS,
    ScenarioConfig,
    ScenarioResult,
    builtin_config,
    export_scenario,
    list_scenarios,
    load_config,
    run_scenario,
)
from .spdc import (
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
from .transforms import (
    RotatedDistribution,
    antidiagonal_slice_variance,
    distribution_moments,
    marginals,
    minus_skewness,
    minus_variance,
    plus_variance,
    position_density,
    rotate_to_pm,
    to_momentum_basis,
    to_position_basis,
)

__version__ = "0.1.0"
