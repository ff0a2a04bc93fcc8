"""
Plug-in inference for the logistic MLE in high dimensions.

Given (alpha, sigma, lambda) from the fixed-point system and the conditional
standard deviations tau_j, the MLE satisfies approximately

    sqrt(n) (beta_hat_j - alpha beta_j) tau_j / sigma ~ N(0, 1),

which yields bias-corrected intervals and t-test p-values; the LLR is
rescaled by lambda / (kappa sigma^2) before the chi-squared comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.optimize import minimize_scalar
from scipy.stats import chi2, norm

from engine.errors import (
    HDLogitError,
    InvalidParameterError,
    NonConvergenceError,
    RankDeficientError,
)
from engine.gauss_designs import build_ar1, conditional_sd
from engine.logistic_core import FitResult, llr
from engine.theory_engine import FixedPoint
from utils.json_utils import dump_json, load_json_file
from utils.logger import logger
from utils.parallel import map_ordered

TauSource = Literal["rss", "ar1", "provided"]

REPORT_COLUMNS = ["j", "beta_hat", "tau_hat", "debiased", "ci_lo", "ci_hi", "p_t", "p_lrt"]
AR1_BOUND = 0.999
COLLINEAR_TOL = 1e-10


# ============================================================================
# Conditional-variance estimates
# ============================================================================

def _check_design(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidParameterError(f"X must be 2-dimensional, got shape {X.shape}")
    n, p = X.shape
    if n <= p:
        raise InvalidParameterError(f"tau estimation needs n > p, got n={n}, p={p}")
    return X


def estimate_tau_rss(X: np.ndarray, j: int) -> float:
    """
    tau_hat_j from the residuals of regressing column j on the others.

    tau_hat_j^2 = (RSS_j / n) / (1 - p/n)
    """
    X = _check_design(X)
    n, p = X.shape
    if not 0 <= j < p:
        raise InvalidParameterError(f"column index {j} out of range [0, {p})")
    target = X[:, j]
    others = np.delete(X, j, axis=1)
    if others.shape[1] == 0:
        rss = float(target @ target)
    else:
        coef, _, rank, _ = np.linalg.lstsq(others, target, rcond=None)
        if rank < others.shape[1]:
            raise RankDeficientError(f"design without column {j} has rank {rank} < {others.shape[1]}")
        resid = target - others @ coef
        rss = float(resid @ resid)
    if rss <= COLLINEAR_TOL * max(float(target @ target), 1e-300):
        raise RankDeficientError(f"column {j} is collinear with the other columns")
    return float(np.sqrt((rss / n) / (1.0 - p / n)))


def estimate_tau_rss_all(X: np.ndarray) -> np.ndarray:
    """
    All tau_hat_j at once: RSS_j = 1 / [(X^T X)^{-1}]_jj through a Cholesky factor.
    """
    X = _check_design(X)
    n, p = X.shape
    gram = X.T @ X
    try:
        chol = linalg.cholesky(gram, lower=True)
    except linalg.LinAlgError as exc:
        raise RankDeficientError(f"X^T X is not positive definite: {exc}") from exc
    pivots = np.diag(chol) ** 2
    if pivots.min() <= COLLINEAR_TOL * np.max(np.diag(gram)):
        raise RankDeficientError("design columns are (numerically) collinear")
    inv_chol = linalg.solve_triangular(chol, np.eye(p), lower=True)
    rss = 1.0 / np.einsum("ij,ij->j", inv_chol, inv_chol)
    return np.sqrt(rss / (n - p))


@dataclass(frozen=True, eq=False)
class AR1Estimate:
    """AR(1) fit of the covariate rows: correlation, common scale and implied tau."""

    rho: float
    scale: float
    tau: np.ndarray


def _ar1_quadratic(X: np.ndarray, rho: float) -> float:
    innov = X[:, 1:] - rho * X[:, :-1]
    return float(np.sum(X[:, 0] ** 2) + np.sum(innov**2) / (1.0 - rho**2))


def estimate_rho_ar1(X: np.ndarray) -> AR1Estimate:
    """
    Maximum-likelihood AR(1) correlation pooled over rows, scale profiled out.

    Each row is modeled as a stationary Gaussian AR(1) sequence with
    covariance s^2 R(rho), R(rho)_ij = rho^|i-j|.

    Args:
        X: n x p design (p >= 2)

    Returns:
        AR1Estimate with tau_j = s * tau_j(R(rho))
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise InvalidParameterError("AR(1) correlation is undefined for fewer than two columns")
    n, p = X.shape

    def neg_profile(rho: float) -> float:
        q = _ar1_quadratic(X, rho)
        return 0.5 * n * p * np.log(q / (n * p)) + 0.5 * n * (p - 1) * np.log1p(-(rho**2))

    result = minimize_scalar(neg_profile, bounds=(-AR1_BOUND, AR1_BOUND), method="bounded")
    if not result.success:
        raise HDLogitError(f"AR(1) likelihood search failed: {result.message}")
    rho = float(result.x)
    scale = float(np.sqrt(_ar1_quadratic(X, rho) / (n * p)))
    logger.debug(f"AR(1) fit: rho={rho:.4f}, scale={scale:.4f}")
    return AR1Estimate(rho=rho, scale=scale, tau=scale * conditional_sd(build_ar1(p, rho)))


# ============================================================================
# Intervals, p-values and standardized statistics
# ============================================================================

def _z(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise InvalidParameterError(f"level must lie in (0, 1), got {level}")
    return float(norm.ppf(0.5 * (1.0 + level)))


def adjusted_ci(beta_hat_j, alpha: float, sigma: float, tau_j, n: int, level: float):
    """
    Bias-corrected interval (beta_hat_j -/+ z sigma / (sqrt(n) tau_j)) / alpha.

    Works elementwise on arrays of beta_hat_j and tau_j.
    """
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    if np.any(np.asarray(tau_j) <= 0):
        raise InvalidParameterError("tau_j must be positive")
    half = _z(level) * sigma / (np.sqrt(n) * np.asarray(tau_j, dtype=float))
    b = np.asarray(beta_hat_j, dtype=float)
    lo, hi = (b - half) / alpha, (b + half) / alpha
    if lo.ndim == 0:
        return float(lo), float(hi)
    return lo, hi


def adjusted_ci_direction(
    v: np.ndarray,
    beta_hat: np.ndarray,
    alpha: float,
    sigma: float,
    tau_v: float,
    n: int,
    level: float,
) -> tuple[float, float]:
    """Interval for the linear combination v^T beta, with tau_v = tau(v) for unit v."""
    return adjusted_ci(float(np.dot(v, beta_hat)), alpha, sigma, tau_v, n, level)


def t_pvalue(beta_hat_j, sigma: float, tau_j, n: int):
    """Two-sided p-value 2 * P(Z > sqrt(n) tau_j |beta_hat_j| / sigma)."""
    if sigma <= 0 or np.any(np.asarray(tau_j) <= 0):
        raise InvalidParameterError("sigma and tau_j must be positive")
    stat = np.sqrt(n) * np.asarray(tau_j) * np.abs(beta_hat_j) / sigma
    p = 2.0 * norm.sf(stat)
    return float(p) if np.ndim(p) == 0 else p


def lrt_pvalue(llr_value: float, kappa: float, sigma: float, lam: float, df: int = 1) -> float:
    """P(chi2_df >= (lambda / (kappa sigma^2)) * 2 * llr_value)."""
    if llr_value < 0:
        raise InvalidParameterError(f"LLR must be non-negative, got {llr_value}")
    factor = lam / (kappa * sigma**2)
    return float(chi2.sf(factor * 2.0 * llr_value, df))


def standardize_T(
    beta_hat: np.ndarray,
    beta_true: np.ndarray,
    alpha_star: float,
    sigma_star: float,
    tau: np.ndarray,
    n: int,
) -> np.ndarray:
    """T_j = sqrt(n) (beta_hat_j - alpha* beta_j) tau_j / sigma*."""
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_true = np.asarray(beta_true, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if not beta_hat.shape == beta_true.shape == tau.shape:
        raise InvalidParameterError("beta_hat, beta_true and tau must have the same shape")
    return np.sqrt(n) * (beta_hat - alpha_star * beta_true) * tau / sigma_star


def standardize_multi(
    beta_hat_S: np.ndarray,
    beta_S: np.ndarray,
    Theta_S: np.ndarray,
    alpha_star: float,
    sigma_star: float,
    n: int,
) -> np.ndarray:
    """sqrt(n) Theta_S^{-1/2} (beta_hat_S - alpha* beta_S) / sigma*, symmetric square root."""
    theta = np.atleast_2d(np.asarray(Theta_S, dtype=float))
    diff = np.atleast_1d(np.asarray(beta_hat_S, dtype=float) - alpha_star * np.asarray(beta_S, dtype=float))
    if theta.shape != (diff.size, diff.size):
        raise InvalidParameterError(f"Theta_S has shape {theta.shape}, expected ({diff.size}, {diff.size})")
    if np.max(np.abs(theta - theta.T)) > 1e-10 * max(1.0, np.max(np.abs(theta))):
        raise InvalidParameterError("Theta_S is not symmetric")
    w, v = linalg.eigh(theta)
    if w.min() <= 0:
        raise InvalidParameterError(f"Theta_S is not positive definite (smallest eigenvalue {w.min():.3e})")
    inv_sqrt = (v / np.sqrt(w)) @ v.T
    return np.sqrt(n) * (inv_sqrt @ diff) / sigma_star


# ============================================================================
# Report
# ============================================================================

@dataclass(eq=False)
class InferenceReport:
    """Per-coordinate table plus the header of plug-in parameters."""

    table: pd.DataFrame
    header: dict[str, Any] = field(default_factory=dict)

    def records(self) -> list[dict[str, Any]]:
        return self.table.to_dict(orient="records")


def _lrt_one(context: tuple[np.ndarray, np.ndarray, FitResult], j: int) -> float:
    X, y, full = context
    return llr(X, y, [j], full=full)


def build_report(
    X: np.ndarray,
    y: np.ndarray,
    fit: FitResult,
    params: FixedPoint,
    tau_source: TauSource = "rss",
    level: float = 0.95,
    tau: Optional[np.ndarray] = None,
    lrt: bool = False,
    gamma_hat: Optional[float] = None,
    names: Optional[Sequence[str]] = None,
    threads: int = 1,
) -> InferenceReport:
    """
    Assemble the adjusted per-coordinate report.

    Args:
        X, y: Data the fit was computed on
        fit: Converged unrestricted fit
        params: Fixed point at (p/n, gamma_hat)
        tau_source: ``rss``, ``ar1`` or ``provided`` (then ``tau`` is required)
        level: Confidence level
        tau: Conditional standard deviations when ``tau_source='provided'``
        lrt: Also compute rescaled LRT p-values (one restricted refit per coordinate)
        gamma_hat: Signal strength recorded in the header
        names: Optional column names recorded in the header
        threads: Workers for the LRT refits

    Returns:
        InferenceReport
    """
    if not fit.converged:
        raise NonConvergenceError(f"cannot report on a non-converged fit ({fit.diagnostic})", fit)
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    header: dict[str, Any] = {}

    if tau_source == "rss":
        tau_hat = estimate_tau_rss_all(X)
    elif tau_source == "ar1":
        est = estimate_rho_ar1(X)
        tau_hat = est.tau
        header.update({"rho_hat": est.rho, "scale_hat": est.scale})
    elif tau_source == "provided":
        if tau is None:
            raise InvalidParameterError("tau_source='provided' needs a tau vector")
        tau_hat = np.asarray(tau, dtype=float)
        if tau_hat.shape != (p,):
            raise InvalidParameterError(f"tau has shape {tau_hat.shape}, expected ({p},)")
    else:
        raise InvalidParameterError(f"unknown tau_source {tau_source!r}")

    alpha, sigma, lam = params.alpha_star, params.sigma_star, params.lambda_star
    beta_hat = fit.beta_hat
    ci_lo, ci_hi = adjusted_ci(beta_hat, alpha, sigma, tau_hat, n, level)
    p_t = t_pvalue(beta_hat, sigma, tau_hat, n)

    p_lrt = np.full(p, np.nan)
    if lrt:
        logger.info(f"Computing rescaled LRT for {p} coordinates")
        llrs = map_ordered(_lrt_one, (X, np.asarray(y, dtype=float), fit), list(range(p)), threads)
        p_lrt = np.array([lrt_pvalue(v, p / n, sigma, lam) for v in llrs])

    table = pd.DataFrame(
        {
            "j": np.arange(p),
            "beta_hat": beta_hat,
            "tau_hat": tau_hat,
            "debiased": beta_hat / alpha,
            "ci_lo": ci_lo,
            "ci_hi": ci_hi,
            "p_t": p_t,
            "p_lrt": p_lrt,
        },
        columns=REPORT_COLUMNS,
    )
    header.update(
        {
            "n": n,
            "p": p,
            "kappa": p / n,
            "gamma_hat": params.inputs.gamma if gamma_hat is None else float(gamma_hat),
            "alpha_hat": alpha,
            "sigma_hat": sigma,
            "lambda_hat": lam,
            "level": level,
            "tau_source": tau_source,
        }
    )
    if names is not None:
        header["names"] = list(names)
    return InferenceReport(table=table, header=header)


def sidecar_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_report(report: InferenceReport, csv_path: str | Path) -> Path:
    """CSV at 17 significant digits plus a JSON sidecar holding the header."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    report.table.to_csv(csv_path, index=False, float_format="%.17g")
    dump_json(report.header, sidecar_path(csv_path))
    return csv_path


def read_report(csv_path: str | Path) -> InferenceReport:
    csv_path = Path(csv_path)
    table = pd.read_csv(csv_path, float_precision="round_trip")
    header: dict[str, Any] = {}
    if sidecar_path(csv_path).exists():
        header, error = load_json_file(sidecar_path(csv_path))
        if error:
            logger.warning(f"Ignoring unreadable report header: {error}")
    return InferenceReport(table=table, header=header)
