"""Closed-form width predictions, Gaussian MLE fitting and the entanglement witness.

Coincidence counts are Poisson distributed, so histogram fits maximise the
Poisson likelihood of a bivariate-Gaussian rate surface rather than a least
squares objective; fit errors come from parametric Monte Carlo resampling of
the fitted surface.  The Heisenberg-type witness declares entanglement when
the product of the position anti-diagonal variance and the momentum diagonal
variance falls below 1/4 (hbar = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detection import CoincidenceHistogram
from .errors import (
    BasisMismatchError,
    FitConvergenceError,
    InvalidParameterError,
    SingularFitError,
    UnstableFitError,
)
from .grids import CONVENTION, Basis
from .spdc import CrystalPumpConfig
from .transforms import minus_variance, plus_variance

__all__ = [
    "predicted_delta_x_minus_sq",
    "predicted_delta_x_minus_sq_expansion",
    "delta_kappa_minus_sq",
    "GaussianFitReport",
    "WitnessReport",
    "poisson_nll_and_grad",
    "fit_bivariate_gaussian",
    "monte_carlo_errors",
    "evaluate_witness",
]


# ---------------------------------------------------------------------------
# closed-form predictions for the Gaussian model
# ---------------------------------------------------------------------------

def predicted_delta_x_minus_sq(beta: float, cfg: CrystalPumpConfig) -> float:
    """Width of the anti-diagonal position profile under pairwise cancellation.

    For quadratic aberrations satisfying the cancellation condition
    phi_s''(0) = -phi_i''(0) = beta, a Gaussian pump of width delta_kappa_p
    and the Gaussian phase-matching kernel, the joint position density along
    the anti-diagonal x_s = -x_i is Gaussian with variance

        [(l*alpha + k_p*beta^2*dkp^2)^2 + l^2] /
        [2*k_p*l*alpha + 2*k_p^2*beta^2*dkp^2]

    in the x_- = (x_s - x_i)/sqrt(2) coordinate.  This is the variance of
    the slice through the distribution at x_+ = 0 (a residual x_+/x_-
    correlation appears for beta != 0, so it differs from the marginal x_-
    variance, which evaluates to the beta = 0 value plus
    beta^2*dkp^2/2).  At beta = 0 both reduce to l*(alpha^2+1)/(2*k_p*alpha).
    """
    s = cfg.ell * cfg.alpha + cfg.k_p * beta**2 * cfg.delta_kappa_p**2
    denom = 2.0 * cfg.k_p * cfg.ell * cfg.alpha \
        + 2.0 * cfg.k_p**2 * beta**2 * cfg.delta_kappa_p**2
    return (s**2 + cfg.ell**2) / denom


def predicted_delta_x_minus_sq_expansion(beta: float, cfg: CrystalPumpConfig) -> float:
    """Second-order expansion of :func:`predicted_delta_x_minus_sq` in delta_kappa_p.

    Expanding the closed form about delta_kappa_p = 0 gives

        l*(alpha^2+1)/(2*k_p*alpha) - (1-alpha^2)/(2*alpha^2) * beta^2 * dkp^2,

    whose residual against the closed form scales as dkp^4.  The zeroth-order
    term is the aberration-free width.
    """
    zeroth = cfg.ell * (cfg.alpha**2 + 1.0) / (2.0 * cfg.k_p * cfg.alpha)
    second = (1.0 - cfg.alpha**2) / (2.0 * cfg.alpha**2) \
        * beta**2 * cfg.delta_kappa_p**2
    return zeroth - second


def delta_kappa_minus_sq(cfg: CrystalPumpConfig) -> float:
    """Crystal-limited momentum anticorrelation width k_p/(alpha*l).

    Under the Gaussian phase-matching kernel the joint momentum density
    depends on the difference coordinate through
    exp[-(kappa_s - kappa_i)^2 * alpha*l/(2*k_p)], i.e. the variance of
    kappa_s - kappa_i equals k_p/(alpha*l) independently of the pump.
    (The variance of the normalised coordinate (kappa_s - kappa_i)/sqrt(2)
    is half this value.)
    """
    return cfg.k_p / (cfg.alpha * cfg.ell)


# ---------------------------------------------------------------------------
# Poisson maximum-likelihood fit of a bivariate-Gaussian rate surface
# ---------------------------------------------------------------------------
#
# Parameter vector: (log_amplitude, mean_s, mean_i, t1, t2, t3) with the
# covariance in log-Cholesky form  Sigma = L L^T,  L = [[e^t1, 0], [t3, e^t2]],
# which keeps Sigma positive definite for every parameter value.

_FIT_MAX_ITER = 200
_FIT_GTOL = 1e-8


def _covariance_from_params(t1: float, t2: float, t3: float) -> np.ndarray:
    e1, e2 = math.exp(t1), math.exp(t2)
    return np.array([[e1 * e1, t3 * e1], [t3 * e1, t3 * t3 + e2 * e2]])


def _params_from_moments(mean: np.ndarray, cov: np.ndarray,
                         log_amplitude: float) -> np.ndarray:
    chol = np.linalg.cholesky(cov)
    return np.array([
        log_amplitude, mean[0], mean[1],
        math.log(chol[0, 0]), math.log(chol[1, 1]), chol[1, 0],
    ])


def poisson_nll_and_grad(params: np.ndarray, xs: np.ndarray, xi: np.ndarray,
                         counts: np.ndarray):
    """Poisson negative log-likelihood of the Gaussian rate surface.

    ``xs``, ``xi`` and ``counts`` are flat per-bin arrays.  Returns the
    objective (without the data-only log-factorial term), its analytic
    gradient, the per-bin rates and the per-bin gradient of log(rate), the
    last two being reused by the Fisher-information step.
    """
    log_amp, mu_s, mu_i, t1, t2, t3 = params
    e1, e2 = math.exp(t1), math.exp(t2)
    sigma = _covariance_from_params(t1, t2, t3)
    det = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] ** 2
    prec = np.array([[sigma[1, 1], -sigma[0, 1]],
                     [-sigma[0, 1], sigma[0, 0]]]) / det
    ds = xs - mu_s
    di = xi - mu_i
    qs = prec[0, 0] * ds + prec[0, 1] * di
    qi = prec[1, 0] * ds + prec[1, 1] * di
    quad = ds * qs + di * qi
    log_rate = log_amp - math.log(2.0 * math.pi) - 0.5 * math.log(det) - 0.5 * quad
    rate = np.exp(log_rate)

    # d log(rate) / d theta for each bin
    dsig_dt = (
        np.array([[2.0 * e1 * e1, t3 * e1], [t3 * e1, 0.0]]),
        np.array([[0.0, 0.0], [0.0, 2.0 * e2 * e2]]),
        np.array([[0.0, e1], [e1, 2.0 * t3]]),
    )
    glog = np.empty((6, rate.size))
    glog[0] = 1.0
    glog[1] = qs
    glog[2] = qi
    for k, dS in enumerate(dsig_dt):
        # d log(rate)/d Sigma = (q q^T - Sigma^-1)/2, contracted with dSigma/dt
        qq = (
            dS[0, 0] * qs * qs + 2.0 * dS[0, 1] * qs * qi + dS[1, 1] * qi * qi
        )
        trace_term = (
            dS[0, 0] * prec[0, 0] + 2.0 * dS[0, 1] * prec[0, 1]
            + dS[1, 1] * prec[1, 1]
        )
        glog[3 + k] = 0.5 * (qq - trace_term)

    nll = float(rate.sum() - (counts * log_rate).sum())
    grad = glog @ (rate - counts)
    return nll, grad, rate, glog


def _fit_params(xs, xi, counts):
    nonzero = int((counts > 0).sum())
    if nonzero < 6:
        raise SingularFitError(
            f"need at least 6 bins with nonzero counts, got {nonzero}"
        )
    total = counts.sum()
    w = counts / total
    mean = np.array([w @ xs, w @ xi])
    ds = xs - mean[0]
    di = xi - mean[1]
    cov = np.array([
        [w @ (ds * ds), w @ (ds * di)],
        [w @ (ds * di), w @ (di * di)],
    ])
    eigvals = np.linalg.eigvalsh(cov)
    if eigvals[0] <= 1e-12 * max(eigvals[1], 1e-300):
        raise SingularFitError(
            "count pattern is effectively rank-1; covariance cannot be fitted"
        )
    solved = np.linalg.solve(cov, np.stack([ds, di]))
    pdf_sum = float(
        np.exp(-0.5 * (ds * solved[0] + di * solved[1])).sum()
        / (2.0 * math.pi * math.sqrt(np.linalg.det(cov)))
    )
    params = _params_from_moments(mean, cov, math.log(total / pdf_sum))

    nll, grad, rate, glog = poisson_nll_and_grad(params, xs, xi, counts)
    for iteration in range(_FIT_MAX_ITER):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= _FIT_GTOL * max(1.0, abs(nll)):
            return params, nll, iteration
        # Fisher scoring step with backtracking
        fisher = (glog * rate) @ glog.T
        fisher[np.diag_indices_from(fisher)] += 1e-12 * np.trace(fisher)
        try:
            step = np.linalg.solve(fisher, -grad)
        except np.linalg.LinAlgError as exc:
            raise FitConvergenceError(
                "Fisher matrix became singular during the fit",
                last_params=params, grad_norm=gnorm,
            ) from exc
        scale = 1.0
        for _ in range(40):
            trial = params + scale * step
            nll_t, grad_t, rate_t, glog_t = poisson_nll_and_grad(trial, xs, xi, counts)
            if np.isfinite(nll_t) and nll_t <= nll + 1e-12 * abs(nll):
                params, nll, grad, rate, glog = trial, nll_t, grad_t, rate_t, glog_t
                break
            scale *= 0.5
        else:
            raise FitConvergenceError(
                "line search failed to reduce the objective",
                last_params=params, grad_norm=gnorm,
            )
    raise FitConvergenceError(
        f"no convergence after {_FIT_MAX_ITER} iterations "
        f"(|grad| = {float(np.linalg.norm(grad)):.3e})",
        last_params=params, grad_norm=float(np.linalg.norm(grad)),
    )


@dataclass(frozen=True, eq=False)
class GaussianFitReport:
    """Maximum-likelihood bivariate-Gaussian parameters of a histogram.

    ``covariance`` is expressed in the scan coordinates (mm^2).
    ``delta_minus_sq`` is the fitted variance along u_- = (u_s - u_i)/sqrt(2)
    in mm^2; ``delta_plus_sq`` the variance along u_+, converted to mm^-2
    for momentum-basis histograms via the Fourier-plane mapping.
    ``se_minus``/``se_plus`` are Monte Carlo standard errors of the
    corresponding (non-squared) widths; zero until estimated.
    """

    mean: np.ndarray
    covariance: np.ndarray
    delta_minus_sq: float
    delta_plus_sq: float
    se_minus: float
    se_plus: float
    n_samples: float
    basis: Basis
    kappa_per_mm: float | None
    log_amplitude: float
    nll: float
    n_iterations: int

    @property
    def delta_minus(self) -> float:
        return math.sqrt(self.delta_minus_sq)

    @property
    def delta_plus(self) -> float:
        return math.sqrt(self.delta_plus_sq)


def fit_bivariate_gaussian(hist: CoincidenceHistogram) -> GaussianFitReport:
    """Fit a bivariate-Gaussian Poisson rate surface to a coincidence histogram.

    The optimiser is Fisher scoring on the Poisson likelihood with the
    covariance in log-Cholesky form (positive definite by construction) and
    sample moments as the starting point.  Convergence requires the gradient
    norm to fall below 1e-8 relative to the objective.

    Raises
    ------
    SingularFitError
        Fewer than 6 nonzero bins, or an effectively rank-1 count pattern.
    FitConvergenceError
        Iteration cap reached; carries the last iterate for diagnosis.
    """
    ps, pi = np.meshgrid(hist.positions_s, hist.positions_i, indexing="ij")
    xs = ps.ravel()
    xi = pi.ravel()
    counts = hist.counts.ravel()
    params, nll, n_iter = _fit_params(xs, xi, counts)
    cov = _covariance_from_params(params[3], params[4], params[5])
    d_minus_sq = minus_variance(cov)
    d_plus_sq = plus_variance(cov)
    if hist.basis is Basis.MOMENTUM:
        d_plus_sq *= hist.kappa_per_mm**2
    return GaussianFitReport(
        mean=params[1:3].copy(),
        covariance=cov,
        delta_minus_sq=d_minus_sq,
        delta_plus_sq=d_plus_sq,
        se_minus=0.0,
        se_plus=0.0,
        n_samples=float(counts.sum()),
        basis=hist.basis,
        kappa_per_mm=hist.kappa_per_mm,
        log_amplitude=float(params[0]),
        nll=nll,
        n_iterations=n_iter,
    )


def monte_carlo_errors(
    hist: CoincidenceHistogram,
    fit: GaussianFitReport,
    n_resamples: int = 200,
    seed: int = 1,
    max_failure_fraction: float = 0.05,
) -> tuple[float, float]:
    """Parametric Monte Carlo standard errors of the fitted widths.

    Counts are redrawn as Poisson variates of the fitted rate surface and
    refitted; the spread of the refitted widths across resamples estimates
    the standard errors of delta_minus and delta_plus (in the report's
    units).  Each resample uses an independent, deterministically derived
    random stream, so results are reproducible and order-independent.

    Raises
    ------
    UnstableFitError
        If more than ``max_failure_fraction`` of the resample fits fail.
    """
    if n_resamples < 100:
        raise InvalidParameterError(
            f"n_resamples must be at least 100, got {n_resamples}"
        )
    ps, pi = np.meshgrid(hist.positions_s, hist.positions_i, indexing="ij")
    xs = ps.ravel()
    xi = pi.ravel()
    params0 = _params_from_moments(fit.mean, fit.covariance, fit.log_amplitude)
    _, _, rate, _ = poisson_nll_and_grad(params0, xs, xi, np.zeros_like(xs))
    kappa_sq = fit.kappa_per_mm**2 if hist.basis is Basis.MOMENTUM else 1.0

    streams = np.random.SeedSequence(seed).spawn(n_resamples)
    d_minus, d_plus = [], []
    failures = 0
    for stream in streams:
        rng = np.random.Generator(np.random.Philox(stream))
        resampled = rng.poisson(rate).astype(np.float64)
        try:
            params, _, _ = _fit_params(xs, xi, resampled)
        except (SingularFitError, FitConvergenceError):
            failures += 1
            continue
        cov = _covariance_from_params(params[3], params[4], params[5])
        d_minus.append(math.sqrt(minus_variance(cov)))
        d_plus.append(math.sqrt(plus_variance(cov) * kappa_sq))
    if failures > max_failure_fraction * n_resamples:
        raise UnstableFitError(
            f"{failures}/{n_resamples} Monte Carlo resample fits failed"
        )
    return float(np.std(d_minus, ddof=1)), float(np.std(d_plus, ddof=1))


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of the Heisenberg-type entanglement witness.

    ``violated`` is true when the product of the position u_- variance and
    the momentum u_+ variance falls below the separability bound hbar^2/4
    (0.25 with hbar = 1), certifying position-momentum entanglement.
    Satisfying the bound does not imply the state is unentangled.
    """

    product: float
    bound: float
    violated: bool
    product_se: float


def evaluate_witness(
    fit_position: GaussianFitReport, fit_momentum: GaussianFitReport
) -> WitnessReport:
    """Combine a position-basis and a momentum-basis fit into the witness.

    Uses delta_minus_sq from the position fit (mm^2) and delta_plus_sq from
    the momentum fit (mm^-2); the product is dimensionless.  Standard errors
    propagate in quadrature.
    """
    if fit_position.basis is not Basis.POSITION:
        raise BasisMismatchError("first argument must come from a position-basis fit")
    if fit_momentum.basis is not Basis.MOMENTUM:
        raise BasisMismatchError("second argument must come from a momentum-basis fit")
    v_minus = fit_position.delta_minus_sq
    v_plus = fit_momentum.delta_plus_sq
    product = v_minus * v_plus
    rel_sq = 0.0
    if fit_position.se_minus > 0:
        rel_sq += (2.0 * fit_position.se_minus / fit_position.delta_minus) ** 2
    if fit_momentum.se_plus > 0:
        rel_sq += (2.0 * fit_momentum.se_plus / fit_momentum.delta_plus) ** 2
    bound = CONVENTION.witness_bound
    return WitnessReport(
        product=product,
        bound=bound,
        violated=product < bound,
        product_se=product * math.sqrt(rel_sq),
    )
