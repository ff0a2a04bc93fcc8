"""
Covariance models and Gaussian design matrices.

A ``CovarianceSpec`` bundles a positive-definite covariance Sigma with its
lower Cholesky factor and the diagonal of the precision matrix
Theta = Sigma^{-1}. All precision quantities go through triangular solves
against the Cholesky factor; no dense inverse of Sigma is formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd
from scipy import linalg

from engine.errors import ConfigurationError, InvalidParameterError
from utils.logger import logger

SYMMETRY_TOL = 1e-12
PIVOT_TOL = 1e-10
UNIT_NORM_TOL = 1e-8
MAX_PD_RETRIES = 5

KINDS = ("identity", "ar1", "random_correlation", "explicit")


def _as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CovarianceSpec:
    """Immutable covariance model with its derived Cholesky geometry."""

    kind: str
    sigma: np.ndarray
    chol: np.ndarray
    theta_diag: np.ndarray
    cond: float
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.sigma.shape[0]

    def describe(self) -> str:
        extra = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}(p={self.p}{', ' + extra if extra else ''})"


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """n x p matrix of covariate rows."""

    x: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


def _from_sigma(kind: str, sigma: np.ndarray, params: dict[str, Any]) -> CovarianceSpec:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] < 1:
        raise InvalidParameterError(f"covariance must be a square matrix, got shape {sigma.shape}")
    if not np.all(np.isfinite(sigma)):
        raise InvalidParameterError("covariance contains non-finite entries")

    scale = max(1.0, float(np.max(np.abs(sigma))))
    if np.max(np.abs(sigma - sigma.T)) > SYMMETRY_TOL * scale:
        raise InvalidParameterError("covariance is not symmetric")
    sigma = 0.5 * (sigma + sigma.T)

    try:
        chol = linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError as exc:
        raise InvalidParameterError(f"covariance is not positive definite: {exc}") from exc

    pivots = np.diag(chol) ** 2
    if pivots.min() <= PIVOT_TOL * np.max(np.diag(sigma)):
        raise InvalidParameterError(
            f"covariance is numerically singular (smallest Cholesky pivot {pivots.min():.3e})"
        )

    # Theta_jj = ||L^{-1} e_j||^2, i.e. column norms of the inverse factor
    inv_chol = linalg.solve_triangular(chol, np.eye(sigma.shape[0]), lower=True)
    theta_diag = np.einsum("ij,ij->j", inv_chol, inv_chol)

    eig = linalg.eigvalsh(sigma)
    cond = float(eig[-1] / eig[0])

    return CovarianceSpec(
        kind=kind,
        sigma=_readonly(sigma),
        chol=_readonly(chol),
        theta_diag=_readonly(theta_diag),
        cond=cond,
        params=params,
    )


def build_identity(p: int) -> CovarianceSpec:
    """Identity covariance of dimension p."""
    if p < 1:
        raise InvalidParameterError(f"p must be >= 1, got {p}")
    eye = np.eye(p)
    return CovarianceSpec(
        kind="identity",
        sigma=_readonly(eye),
        chol=_readonly(eye),
        theta_diag=_readonly(np.ones(p)),
        cond=1.0,
        params={},
    )


def build_ar1(p: int, rho: float) -> CovarianceSpec:
    """AR(1) correlation matrix, sigma[i][j] = rho^|i-j|."""
    if p < 1:
        raise InvalidParameterError(f"p must be >= 1, got {p}")
    if not -1.0 < rho < 1.0:
        raise InvalidParameterError(f"AR(1) correlation must lie in (-1, 1), got {rho}")
    idx = np.arange(p)
    sigma = float(rho) ** np.abs(idx[:, None] - idx[None, :])
    return _from_sigma("ar1", sigma, {"rho": float(rho)})


def _haar_orthogonal(p: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((p, p))
    q, r = np.linalg.qr(g)
    # Sign fix on R's diagonal makes Q Haar distributed
    return q * np.sign(np.diag(r))


def build_random_correlation(
    p: int,
    df: int,
    rng: np.random.Generator | int | None = None,
) -> CovarianceSpec:
    """
    Random correlation matrix from a Haar rotation of chi-squared eigenvalues.

    B = U^T diag(lambda) U with lambda_i ~ chi2(df), rescaled to unit diagonal.

    Args:
        p: Dimension (>= 2)
        df: Chi-squared degrees of freedom (>= 1)
        rng: Generator or integer seed; the same seed reproduces the matrix

    Returns:
        CovarianceSpec of kind ``random_correlation``
    """
    if p < 2:
        raise InvalidParameterError(f"random correlation needs p >= 2, got {p}")
    if int(df) != df or df < 1:
        raise InvalidParameterError(f"df must be a positive integer, got {df}")
    seed_label = rng if isinstance(rng, int) else None
    gen = _as_rng(rng)

    for attempt in range(MAX_PD_RETRIES + 1):
        u = _haar_orthogonal(p, gen)
        lam = gen.chisquare(df, size=p)
        b = u.T @ (lam[:, None] * u)
        d = np.sqrt(np.diag(b))
        sigma = b / np.outer(d, d)
        sigma = 0.5 * (sigma + sigma.T)
        np.fill_diagonal(sigma, 1.0)
        try:
            return _from_sigma("random_correlation", sigma, {"df": int(df), "seed": seed_label})
        except InvalidParameterError:
            logger.warning(
                f"Random correlation draw not positive definite (attempt {attempt + 1}); resampling"
            )
            gen = gen.spawn(1)[0]

    raise InvalidParameterError(
        f"random correlation matrix stayed non-PD after {MAX_PD_RETRIES} retries"
    )


def build_explicit(matrix: np.ndarray | Sequence[Sequence[float]]) -> CovarianceSpec:
    """Covariance given as an explicit symmetric positive-definite matrix."""
    return _from_sigma("explicit", np.asarray(matrix, dtype=float), {})


def load_explicit(path: str | Path) -> CovarianceSpec:
    """Read a headerless p x p CSV matrix and build an explicit covariance."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"covariance file not found: {path}")
    matrix = pd.read_csv(path, header=None).to_numpy(dtype=float)
    return replace(build_explicit(matrix), params={"path": str(path)})


def covariance_from_descriptor(
    descriptor: dict[str, Any],
    base_dir: str | Path | None = None,
    seed: int | None = None,
) -> CovarianceSpec:
    """
    Build a CovarianceSpec from its JSON descriptor.

    Args:
        descriptor: e.g. {"kind": "ar1", "p": 800, "rho": 0.5}
        base_dir: Directory that relative ``path`` entries are resolved against
        seed: Fallback seed for random correlation descriptors without one

    Returns:
        The constructed CovarianceSpec
    """
    kind = descriptor.get("kind")
    if kind == "identity":
        return build_identity(int(descriptor["p"]))
    if kind == "ar1":
        return build_ar1(int(descriptor["p"]), float(descriptor["rho"]))
    if kind == "random_correlation":
        rc_seed = descriptor.get("seed", seed)
        return build_random_correlation(int(descriptor["p"]), int(descriptor.get("df", 10)), rc_seed)
    if kind == "explicit":
        path = Path(descriptor["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return load_explicit(path)
    raise ConfigurationError(f"unknown covariance kind {kind!r}; expected one of {KINDS}")


def sample_design(n: int, spec: CovarianceSpec, rng: np.random.Generator | int | None) -> DesignMatrix:
    """Draw n i.i.d. rows x_i = L z_i with z_i standard normal."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    gen = _as_rng(rng)
    z = gen.standard_normal((n, spec.p))
    if spec.kind == "identity":
        return DesignMatrix(z)
    return DesignMatrix(z @ spec.chol.T)


def conditional_sd(spec: CovarianceSpec) -> np.ndarray:
    """tau_j = 1/sqrt(Theta_jj), the conditional sd of x_j given the rest."""
    return 1.0 / np.sqrt(spec.theta_diag)


def tau_of_direction(spec: CovarianceSpec, v: np.ndarray) -> float:
    """
    tau(v) = (v^T Theta v)^{-1/2} for a unit vector v.

    Uses ||L^{-1} v||^2 = v^T Theta v, one triangular solve.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (spec.p,):
        raise InvalidParameterError(f"direction must have shape ({spec.p},), got {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > UNIT_NORM_TOL:
        raise InvalidParameterError(f"direction must have unit norm, got {np.linalg.norm(v):.6g}")
    w = linalg.solve_triangular(spec.chol, v, lower=True)
    return float(1.0 / np.sqrt(w @ w))


def _check_index_set(S: Sequence[int], p: int) -> np.ndarray:
    idx = np.asarray(list(S), dtype=int)
    if idx.ndim != 1 or idx.size == 0:
        raise InvalidParameterError("index set must be a non-empty sequence")
    if idx.size != np.unique(idx).size:
        raise InvalidParameterError(f"index set has duplicates: {list(S)}")
    if idx.min() < 0 or idx.max() >= p:
        raise InvalidParameterError(f"index set out of range [0, {p}): {list(S)}")
    return idx


def schur_precision_block(spec: CovarianceSpec, S: Sequence[int]) -> np.ndarray:
    """Theta[S, S] computed as W^T W with W = L^{-1} E_S."""
    idx = _check_index_set(S, spec.p)
    e = np.zeros((spec.p, idx.size))
    e[idx, np.arange(idx.size)] = 1.0
    w = linalg.solve_triangular(spec.chol, e, lower=True)
    block = w.T @ w
    return 0.5 * (block + block.T)
