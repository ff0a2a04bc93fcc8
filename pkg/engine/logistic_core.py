"""
Logistic likelihood, Newton MLE fits, separability LP and the LLR statistic.

Labels are +/-1 internally, and the log-likelihood of b is

    l(b) = sum_i -log(1 + exp(-y_i x_i^T b)).

There is no intercept: inputs are expected to be centered.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.optimize import linprog
from scipy.special import expit

from engine.errors import (
    InvalidParameterError,
    NonConvergenceError,
    SeparabilityIndeterminateError,
)
from utils.logger import logger

DEFAULT_MAX_ITER = 200
DEFAULT_NORM_CAP = 1e3
DEFAULT_GRAD_TOL_PER_OBS = 1e-8
MAX_HALVINGS = 30
RIDGE_FACTOR = 1e-10
MARGIN_REL_TOL = 1e-9
LP_MAX_ITER = 100_000

# FitResult.diagnostic values
SEPARABLE_SUSPECTED = "separable?"
MAX_ITER_REACHED = "max_iter"
LINE_SEARCH_STALLED = "stalled"


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a (possibly restricted) maximum-likelihood fit."""

    beta_hat: np.ndarray
    converged: bool
    iterations: int
    loglik: float
    grad_norm: float
    diagnostic: Optional[str] = None


@dataclass(frozen=True, eq=False)
class SeparabilityReport:
    """Complete-separation verdict with an optional witness b (y_i x_i^T b >= 1)."""

    separable: bool
    witness: Optional[np.ndarray] = None


def to_pm1_labels(y: Sequence[float] | np.ndarray) -> np.ndarray:
    """
    Map 0/1 or -1/+1 labels to a float array of -1/+1.

    Args:
        y: Label vector

    Returns:
        Array with entries in {-1.0, +1.0}
    """
    y = np.asarray(y, dtype=float).ravel()
    values = set(np.unique(y).tolist())
    if values <= {-1.0, 1.0}:
        return y.copy()
    if values <= {0.0, 1.0}:
        return 2.0 * y - 1.0
    raise InvalidParameterError(f"labels must be 0/1 or -1/+1, found values {sorted(values)}")


def _check_xy(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise InvalidParameterError(f"X must be 2-dimensional, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise InvalidParameterError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
    return X, y


def sample_labels(X: np.ndarray, beta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw y_i in {-1, +1} with P(y_i = 1 | x_i) = rho'(x_i^T beta)."""
    prob = expit(np.asarray(X) @ np.asarray(beta))
    return np.where(rng.random(prob.shape[0]) < prob, 1.0, -1.0)


def log_likelihood(b: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    """Sum of -log(1 + exp(-y_i x_i^T b)), evaluated without overflow."""
    t = y * (X @ b)
    return float(-np.logaddexp(0.0, -t).sum())


def grad_hess(b: np.ndarray, X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Gradient and Hessian of the log-likelihood.

    gradient = sum_i y_i rho'(-y_i x_i^T b) x_i
    Hessian  = -X^T D X,  D_ii = rho''(x_i^T b)
    """
    eta = X @ b
    grad = X.T @ (y * expit(-y * eta))
    weights = expit(eta) * expit(-eta)
    hess = -(X.T * weights) @ X
    return grad, hess


def fisher_information(X: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Classical information X^T D(b) X (the negated Hessian at b)."""
    eta = X @ b
    weights = expit(eta) * expit(-eta)
    return (X.T * weights) @ X


def classical_se(X: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Square roots of the diagonal of the inverse information at b."""
    info = fisher_information(np.asarray(X, dtype=float), np.asarray(b, dtype=float))
    try:
        factor = linalg.cho_factor(info, lower=True)
    except linalg.LinAlgError as exc:
        raise InvalidParameterError(f"information matrix is singular: {exc}") from exc
    inv = linalg.cho_solve(factor, np.eye(info.shape[0]))
    return np.sqrt(np.diag(inv))


def _newton_direction(grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
    neg_hess = -hess
    try:
        factor = linalg.cho_factor(neg_hess, lower=True)
    except linalg.LinAlgError:
        # Ridge only for the linear solve; the objective is untouched
        ridge = RIDGE_FACTOR * max(np.trace(neg_hess), 1e-300) / neg_hess.shape[0]
        factor = linalg.cho_factor(neg_hess + ridge * np.eye(neg_hess.shape[0]), lower=True)
    return linalg.cho_solve(factor, grad)


def fit_mle(
    X: np.ndarray,
    y: np.ndarray,
    max_iter: int = DEFAULT_MAX_ITER,
    grad_tol: Optional[float] = None,
    norm_cap: float = DEFAULT_NORM_CAP,
) -> FitResult:
    """
    Maximum-likelihood fit by damped Newton from b = 0.

    Steps are halved (at most 30 times) until the log-likelihood does not
    decrease. A fit that leaves the ball ||b|| <= norm_cap or runs out of
    iterations returns ``converged=False``; use ``check_separable`` to tell
    separation apart from slow convergence.

    Args:
        X: n x p design (n > p)
        y: Labels in {-1, +1} with both signs present
        max_iter: Newton iteration cap
        grad_tol: Gradient-norm tolerance, default 1e-8 * n
        norm_cap: Norm beyond which divergence is assumed

    Returns:
        FitResult
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    if n <= p:
        raise InvalidParameterError(f"fit_mle needs n > p, got n={n}, p={p}")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise InvalidParameterError("both label signs must be present to fit the MLE")
    tol = DEFAULT_GRAD_TOL_PER_OBS * n if grad_tol is None else grad_tol

    b = np.zeros(p)
    ll = log_likelihood(b, X, y)
    grad, hess = grad_hess(b, X, y)
    diagnostic = MAX_ITER_REACHED

    for it in range(max_iter + 1):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= tol:
            if np.min(y * (X @ b)) > 0:
                # b classifies every point correctly, so the data are separable
                diagnostic = SEPARABLE_SUSPECTED
                break
            return FitResult(b, True, it, ll, gnorm)
        if it == max_iter:
            break

        direction = _newton_direction(grad, hess)
        step = 1.0
        for _ in range(MAX_HALVINGS + 1):
            candidate = b + step * direction
            cand_ll = log_likelihood(candidate, X, y)
            if cand_ll >= ll:
                break
            step *= 0.5
        else:
            diagnostic = LINE_SEARCH_STALLED
            logger.debug(f"Newton line search stalled at iteration {it}, ||grad||={gnorm:.3e}")
            break

        b, ll = candidate, cand_ll
        if np.linalg.norm(b) > norm_cap:
            diagnostic = SEPARABLE_SUSPECTED
            break
        grad, hess = grad_hess(b, X, y)

    gnorm = float(np.linalg.norm(grad_hess(b, X, y)[0]))
    return FitResult(b, False, it, ll, gnorm, diagnostic)


def fit_restricted(X: np.ndarray, y: np.ndarray, S: Sequence[int], **opts) -> FitResult:
    """MLE with the coordinates in S pinned to zero."""
    X, y = _check_xy(X, y)
    n, p = X.shape
    drop = np.asarray(sorted(set(int(j) for j in S)), dtype=int)
    if drop.size and (drop.min() < 0 or drop.max() >= p):
        raise InvalidParameterError(f"restricted index set out of range [0, {p}): {list(S)}")
    if drop.size == 0:
        return fit_mle(X, y, **opts)

    keep = np.setdiff1d(np.arange(p), drop)
    if keep.size == 0:
        b = np.zeros(p)
        return FitResult(b, True, 0, -n * np.log(2.0), 0.0)

    reduced = fit_mle(X[:, keep], y, **opts)
    b = np.zeros(p)
    b[keep] = reduced.beta_hat
    return FitResult(
        b,
        reduced.converged,
        reduced.iterations,
        reduced.loglik,
        reduced.grad_norm,
        reduced.diagnostic,
    )


def check_separable(X: np.ndarray, y: np.ndarray) -> SeparabilityReport:
    """
    Decide complete separation with the bounded margin LP

        max t  s.t.  y_i x_i^T b >= t,  -1 <= b_j <= 1,  t <= 1.

    The LP is always feasible (b = 0, t = 0) and bounded, so HiGHS never has
    to tell infeasible from unbounded. The data are completely separable iff
    the optimal margin is positive; a positive witness is rescaled so that
    y_i x_i^T b >= 1 for all i.

    Raises:
        SeparabilityIndeterminateError: LP hit its iteration cap or failed numerically
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    signed = y[:, None] * X
    c = np.zeros(p + 1)
    c[-1] = -1.0
    result = linprog(
        c=c,
        A_ub=np.hstack([-signed, np.ones((n, 1))]),
        b_ub=np.zeros(n),
        bounds=[(-1.0, 1.0)] * p + [(None, 1.0)],
        method="highs",
        options={"maxiter": LP_MAX_ITER},
    )
    if result.status != 0:
        raise SeparabilityIndeterminateError(
            f"separability LP ended with status {result.status}: {result.message}"
        )

    b = np.asarray(result.x[:p], dtype=float)
    # Exact margin of the returned direction; LP feasibility slack does not count
    margin = float(np.min(signed @ b))
    scale = float(np.max(np.abs(signed).sum(axis=1)))
    if scale == 0.0 or margin <= MARGIN_REL_TOL * scale:
        return SeparabilityReport(False)
    return SeparabilityReport(True, b / margin)


def llr(X: np.ndarray, y: np.ndarray, S: Sequence[int], full: Optional[FitResult] = None) -> float:
    """
    Log-likelihood ratio max_b l(b) - max_{b_S = 0} l(b).

    Args:
        X: Design matrix
        y: +/-1 labels
        S: Coordinates pinned to zero under the null
        full: Optional precomputed unrestricted fit

    Returns:
        The non-negative LLR (round-off below zero is clipped)
    """
    full = fit_mle(X, y) if full is None else full
    if not full.converged:
        raise NonConvergenceError(f"unrestricted fit did not converge ({full.diagnostic})", full)
    if len(S) == 0:
        return 0.0
    restricted = fit_restricted(X, y, S)
    if not restricted.converged:
        raise NonConvergenceError(
            f"restricted fit did not converge ({restricted.diagnostic})", restricted
        )
    return max(full.loglik - restricted.loglik, 0.0)
