"""
ProbeFrontier: estimate the signal strength gamma of one dataset.

Subsamples of decreasing size n' = round(p / kappa') are drawn until they
become linearly separable about half of the time. The dimension ratio where
that happens, kappa_hat, is mapped back through the frontier curve to give
gamma_hat = g_MLE(kappa_hat).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from config.settings import settings
from engine.errors import (
    InvalidParameterError,
    ProbeGridError,
    SeparabilityIndeterminateError,
    SeparableDataError,
)
from engine.logistic_core import check_separable
from engine.theory_engine import FixedPoint, FrontierCurve, TheoryInputs, solve_fixed_point
from utils.logger import logger
from utils.parallel import map_seeded, spawn_seeds

GRID_STEP = 0.02
GRID_UPPER = 0.5
GRID_LIMIT = 0.55


def default_grid(kappa0: float, step: float = GRID_STEP, upper: float = GRID_UPPER) -> tuple[float, ...]:
    """kappa' from kappa0 + step up to ``upper`` in increments of ``step``."""
    count = int(np.floor((upper - kappa0) / step + 1e-9))
    grid = tuple(round(kappa0 + step * (i + 1), 10) for i in range(count))
    if not grid:
        raise ProbeGridError(
            f"dataset ratio p/n={kappa0:.4f} leaves no room below {upper}; extend kappa_grid"
        )
    return grid


@dataclass(frozen=True)
class ProbeConfig:
    """Settings of one ProbeFrontier run."""

    kappa_grid: tuple[float, ...]
    resamples_per_kappa: int = field(default_factory=lambda: settings.PROBE_RESAMPLES)
    crossing_target: float = 0.5
    seed: Optional[int] = None
    early_stop: bool = True

    def __post_init__(self):
        grid = tuple(float(k) for k in self.kappa_grid)
        object.__setattr__(self, "kappa_grid", grid)
        if not grid:
            raise InvalidParameterError("kappa_grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidParameterError(f"kappa_grid must be strictly increasing, got {grid}")
        if grid[-1] >= GRID_LIMIT:
            raise InvalidParameterError(f"kappa_grid must stay below {GRID_LIMIT}, got max {grid[-1]}")
        if self.resamples_per_kappa < 1:
            raise InvalidParameterError("resamples_per_kappa must be >= 1")
        if not 0.0 < self.crossing_target < 1.0:
            raise InvalidParameterError("crossing_target must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class ProbeResult:
    """Crossing ratio, estimated signal strength and the per-grid fractions."""

    kappa_hat: float
    gamma_hat: float
    kappa_grid: np.ndarray
    separability_fractions: np.ndarray
    fitted_fractions: np.ndarray
    resamples_per_kappa: int

    def as_dict(self) -> dict:
        return {
            "kappa_hat": self.kappa_hat,
            "gamma_hat": self.gamma_hat,
            "kappa_grid": self.kappa_grid.tolist(),
            "separability_fractions": [None if np.isnan(f) else float(f) for f in self.separability_fractions],
            "resamples_per_kappa": self.resamples_per_kappa,
        }


def _subsample_trial(context: tuple[np.ndarray, np.ndarray, int], seed: np.random.SeedSequence) -> Optional[bool]:
    X, y, n_sub = context
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(X.shape[0], size=n_sub, replace=False))
    try:
        return check_separable(X[idx], y[idx]).separable
    except SeparabilityIndeterminateError:
        return None


def probe(
    X: np.ndarray,
    y: np.ndarray,
    cfg: ProbeConfig,
    curve: FrontierCurve,
    threads: int = 1,
    check_full: bool = True,
) -> ProbeResult:
    """
    Run ProbeFrontier on one dataset.

    Args:
        X: n x p design
        y: +/-1 labels
        cfg: Grid, resample count, target and seed
        curve: Frontier curve used to map kappa_hat to gamma_hat
        threads: Worker processes for the resamples
        check_full: Verify that the full dataset is not separable first

    Returns:
        ProbeResult

    Raises:
        SeparableDataError: the full dataset is separable
        ProbeGridError: the fitted fraction never reaches the target on the grid
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    kappa0 = p / n
    if cfg.kappa_grid[0] <= kappa0:
        raise InvalidParameterError(
            f"kappa_grid must start above the dataset ratio p/n={kappa0:.4f}, got {cfg.kappa_grid[0]}"
        )
    if check_full and check_separable(X, y).separable:
        raise SeparableDataError("data are completely separable: MLE does not exist, gamma not estimable")

    grid = np.asarray(cfg.kappa_grid)
    fractions = np.full(grid.size, np.nan)
    point_seeds = spawn_seeds(cfg.seed, grid.size)

    for i, (kappa_prime, point_seed) in enumerate(zip(grid, point_seeds)):
        n_sub = int(round(p / kappa_prime))
        outcomes = map_seeded(
            _subsample_trial,
            (X, y, n_sub),
            point_seed.spawn(cfg.resamples_per_kappa),
            threads,
        )
        decided = [o for o in outcomes if o is not None]
        if not decided:
            logger.warning(f"All separability checks indeterminate at kappa'={kappa_prime:.3f}")
            continue
        fractions[i] = float(np.mean(decided))
        logger.debug(f"Probe kappa'={kappa_prime:.3f} (n'={n_sub}): separable fraction {fractions[i]:.2f}")
        if cfg.early_stop and fractions[i] >= 1.0:
            break

    probed = ~np.isnan(fractions)
    xs = np.concatenate([[kappa0], grid[probed]])
    fs = np.concatenate([[0.0], fractions[probed]])
    fitted = np.asarray(isotonic_regression(fs, increasing=True).x, dtype=float)

    hits = np.nonzero(fitted >= cfg.crossing_target)[0]
    if hits.size == 0:
        raise ProbeGridError(
            f"separable fraction never reached {cfg.crossing_target} up to kappa'={grid[-1]:.3f}; "
            "extend kappa_grid"
        )
    i = int(hits[0])
    x0, x1, f0, f1 = xs[i - 1], xs[i], fitted[i - 1], fitted[i]
    kappa_hat = float(x0 + (cfg.crossing_target - f0) * (x1 - x0) / (f1 - f0))
    lo, hi = curve.domain
    if not lo <= kappa_hat <= hi:
        raise ProbeGridError(
            f"kappa_hat={kappa_hat:.4f} lies outside the frontier domain [{lo:.3f}, {hi:.3f}]; "
            "rebuild the frontier with knots covering it (HDLOGIT_FRONTIER_KAPPAS)"
        )
    gamma_hat = curve(kappa_hat)
    logger.info(f"ProbeFrontier: kappa_hat={kappa_hat:.4f}, gamma_hat={gamma_hat:.4f}")

    fitted_full = np.full(grid.size, np.nan)
    fitted_full[probed] = fitted[1:]
    return ProbeResult(
        kappa_hat=kappa_hat,
        gamma_hat=gamma_hat,
        kappa_grid=grid,
        separability_fractions=fractions,
        fitted_fractions=fitted_full,
        resamples_per_kappa=cfg.resamples_per_kappa,
    )


def estimate_theory_params(
    kappa: float,
    gamma_hat: float,
    curve: Optional[FrontierCurve] = None,
) -> FixedPoint:
    """Fixed point at the dataset's own kappa = p/n and the probed gamma_hat."""
    return solve_fixed_point(TheoryInputs(kappa, gamma_hat), curve=curve)


def probe_config_from_dict(data: dict, kappa0: float, seed: Optional[int] = None) -> ProbeConfig:
    """ProbeConfig from an experiment/CLI dictionary, with the default grid when none is given."""
    grid: Sequence[float] = data.get("kappa_grid") or default_grid(kappa0)
    return ProbeConfig(
        kappa_grid=tuple(grid),
        resamples_per_kappa=int(data.get("resamples_per_kappa", settings.PROBE_RESAMPLES)),
        crossing_target=float(data.get("crossing_target", 0.5)),
        seed=data.get("seed", seed),
        early_stop=bool(data.get("early_stop", True)),
    )
