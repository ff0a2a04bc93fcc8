"""
Asymptotic theory for the logistic MLE.

Scalar link functions, the proximal operator of rho(t) = log(1 + e^t),
tensor Gauss-Hermite expectations over the bivariate normal (Q1, Q2), the
solver for the (alpha, sigma, lambda) system, and the Monte-Carlo
phase-transition frontier kappa -> g_MLE(kappa).

The system solved for (alpha, sigma, lambda), with
Q1 = gamma Z1 and Q2 = -alpha gamma Z1 + sqrt(kappa) sigma Z2:

    sigma^2   = E[2 rho'(Q1) (lambda rho'(prox(Q2)))^2] / kappa^2
    0         = E[rho'(Q1) Q1 lambda rho'(prox(Q2))]
    1 - kappa = E[2 rho'(Q1) / (1 + lambda rho''(prox(Q2)))]
"""

from __future__ import annotations

import functools
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.optimize import isotonic_regression
from scipy.special import expit

from config.settings import settings
from engine.errors import (
    ConfigurationError,
    FixedPointError,
    FrontierError,
    InvalidParameterError,
    OutOfRegionError,
    SeparabilityIndeterminateError,
)
from engine.logistic_core import check_separable, sample_labels
from utils.logger import logger
from utils.parallel import map_seeded, spawn_seeds

MIN_QUADRATURE_ORDER = 8
PROX_MAX_ITER = 100
RESIDUAL_TOL = 1e-6
SCALED_TOL = 1e-10
SOLVER_MAX_ITER = 500
FD_STEP = 1e-6
GAMMA_FLOOR = 1e-4
CONTINUATION_STEPS = 10
CACHE_ROUNDING = 6

FRONTIER_SCHEMA = "hdlogit.frontier/v1"
FRONTIER_GAMMA_TOL = 0.05
FRONTIER_GAMMA_MAX = 64.0
FRONTIER_CROSSING = 0.5


# ============================================================================
# Link functions and the proximal operator
# ============================================================================

def rho_family(t):
    """
    rho, rho' and rho'' of rho(t) = log(1 + e^t).

    Args:
        t: Scalar or array

    Returns:
        Tuple (rho, rho', rho'') with the shape of t
    """
    t = np.asarray(t, dtype=float)
    d1 = expit(t)
    rho = np.logaddexp(0.0, t)
    d2 = d1 * expit(-t)
    if t.ndim == 0:
        return float(rho), float(d1), float(d2)
    return rho, d1, d2


def prox(lam: float, z):
    """
    prox_{lam rho}(z): the root of lam rho'(t) + t - z = 0.

    Safeguarded Newton inside the bracket [z - lam, z]; a step leaving the
    bracket is replaced by bisection.

    Args:
        lam: Non-negative scale
        z: Scalar or array

    Returns:
        prox values with the shape of z
    """
    if lam < 0:
        raise InvalidParameterError(f"prox needs lambda >= 0, got {lam}")
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)

    if lam == 0:
        t = z_arr.copy()
    else:
        lo = z_arr - lam
        hi = z_arr.copy()
        t = z_arr - lam * expit(z_arr)
        tol = 1e-14 * (1.0 + np.abs(z_arr) + lam)
        for _ in range(PROX_MAX_ITER):
            s = expit(t)
            r = lam * s + t - z_arr
            active = np.abs(r) > tol
            if not active.any():
                break
            hi = np.where(r > 0, t, hi)
            lo = np.where(r < 0, t, lo)
            t_new = t - r / (1.0 + lam * s * (1.0 - s))
            outside = (t_new <= lo) | (t_new >= hi)
            t_new = np.where(outside, 0.5 * (lo + hi), t_new)
            t = np.where(active, t_new, t)

    return float(t[0]) if scalar else t


# ============================================================================
# Quadrature
# ============================================================================

@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensor Gauss-Hermite rule for a standard bivariate normal (Z1, Z2)."""

    z1: np.ndarray
    z2: np.ndarray
    weights: np.ndarray
    order: int

    def expect(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * values))


def build_quadrature(order: Optional[int] = None) -> QuadratureGrid:
    """Physicists' Hermite nodes rescaled to N(0, 1), weights normalized to 1."""
    order = settings.QUADRATURE_ORDER if order is None else int(order)
    if order < MIN_QUADRATURE_ORDER:
        raise ConfigurationError(
            f"quadrature order must be >= {MIN_QUADRATURE_ORDER} per axis, got {order}"
        )
    x, w = hermgauss(order)
    nodes = x * np.sqrt(2.0)
    w = w / np.sqrt(np.pi)
    w = w / w.sum()
    z1, z2 = np.meshgrid(nodes, nodes, indexing="ij")
    return QuadratureGrid(z1.ravel(), z2.ravel(), np.outer(w, w).ravel(), order)


@functools.lru_cache(maxsize=8)
def _cached_quadrature(order: int) -> QuadratureGrid:
    return build_quadrature(order)


# ============================================================================
# The three-equation system
# ============================================================================

@dataclass(frozen=True)
class TheoryInputs:
    """Dimensionality ratio kappa in (0, 1) and signal strength gamma >= 0."""

    kappa: float
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise InvalidParameterError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not self.gamma >= 0.0:
            raise InvalidParameterError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class FixedPoint:
    """Solution (alpha*, sigma*, lambda*) of the system at ``inputs``."""

    alpha_star: float
    sigma_star: float
    lambda_star: float
    residuals: np.ndarray
    inputs: TheoryInputs
    iterations: int = 0

    @property
    def lrt_factor(self) -> float:
        """lambda* / (kappa sigma*^2), the LRT rescaling factor."""
        return self.lambda_star / (self.inputs.kappa * self.sigma_star**2)

    def as_dict(self) -> dict:
        return {
            "kappa": self.inputs.kappa,
            "gamma": self.inputs.gamma,
            "alpha_star": self.alpha_star,
            "sigma_star": self.sigma_star,
            "lambda_star": self.lambda_star,
            "max_residual": float(np.max(np.abs(self.residuals))),
        }


def _moments(alpha: float, sigma: float, lam: float, inputs: TheoryInputs, grid: QuadratureGrid):
    kappa, gamma = inputs.kappa, inputs.gamma
    q1 = gamma * grid.z1
    q2 = -alpha * gamma * grid.z1 + np.sqrt(kappa) * sigma * grid.z2
    pr = prox(lam, q2)
    d1 = expit(q1)
    s = expit(pr)
    g = lam * s
    curv = lam * s * (1.0 - s)
    return q1, d1, g, curv


def system_residuals(
    alpha: float,
    sigma: float,
    lam: float,
    inputs: TheoryInputs,
    grid: Optional[QuadratureGrid] = None,
) -> np.ndarray:
    """
    lhs - rhs of each of the three equations at (alpha, sigma, lambda).

    Args:
        alpha, sigma, lam: Positive trial values
        inputs: (kappa, gamma)
        grid: Quadrature rule (default order from settings)

    Returns:
        Array of three residuals
    """
    if min(alpha, sigma, lam) <= 0:
        raise InvalidParameterError(
            f"alpha, sigma, lambda must be positive, got ({alpha}, {sigma}, {lam})"
        )
    grid = _cached_quadrature(settings.QUADRATURE_ORDER) if grid is None else grid
    if grid.order < MIN_QUADRATURE_ORDER:
        raise ConfigurationError(f"quadrature order {grid.order} is below {MIN_QUADRATURE_ORDER}")
    kappa = inputs.kappa
    q1, d1, g, curv = _moments(alpha, sigma, lam, inputs, grid)
    r_sigma = sigma**2 - grid.expect(2.0 * d1 * g**2) / kappa**2
    r_alpha = grid.expect(d1 * q1 * g)
    r_lambda = (1.0 - kappa) - grid.expect(2.0 * d1 / (1.0 + curv))
    return np.array([r_sigma, r_alpha, r_lambda])


def _scaled_residuals(x: np.ndarray, inputs: TheoryInputs, grid: QuadratureGrid) -> np.ndarray:
    """Residuals rescaled for the solver; same roots as ``system_residuals``."""
    alpha, sigma, lam = x
    kappa, gamma = inputs.kappa, inputs.gamma
    q1, d1, g, curv = _moments(alpha, sigma, lam, inputs, grid)
    r_sigma = 1.0 - grid.expect(2.0 * d1 * g**2) / (kappa * sigma) ** 2
    if gamma >= GAMMA_FLOOR:
        r_alpha = grid.expect(d1 * q1 * g) / gamma**2
    else:
        # gamma -> 0 limit of the alpha equation divided by gamma^2
        r_alpha = 0.25 * grid.expect(g) - 0.5 * alpha * grid.expect(curv / (1.0 + curv))
    r_lambda = (1.0 - kappa) - grid.expect(2.0 * d1 / (1.0 + curv))
    return np.array([r_sigma, r_alpha, r_lambda])


def _jacobian(x: np.ndarray, inputs: TheoryInputs, grid: QuadratureGrid) -> np.ndarray:
    jac = np.empty((3, 3))
    for k in range(3):
        h = FD_STEP * max(abs(x[k]), 1.0)
        up, down = x.copy(), x.copy()
        up[k] += h
        down[k] = max(down[k] - h, 0.5 * down[k])
        jac[:, k] = (_scaled_residuals(up, inputs, grid) - _scaled_residuals(down, inputs, grid)) / (
            up[k] - down[k]
        )
    return jac


def _damped_newton(
    x0: np.ndarray,
    inputs: TheoryInputs,
    grid: QuadratureGrid,
    max_iter: int = SOLVER_MAX_ITER,
) -> tuple[np.ndarray, int, bool]:
    x = np.asarray(x0, dtype=float).copy()
    f = _scaled_residuals(x, inputs, grid)
    merit = float(f @ f)
    for it in range(max_iter):
        if np.max(np.abs(f)) <= SCALED_TOL:
            return x, it, True
        jac = _jacobian(x, inputs, grid)
        try:
            dx = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(jac, -f, rcond=None)[0]

        step = 1.0
        accepted = False
        for _ in range(40):
            cand = x + step * dx
            if np.all(cand > 0):
                f_cand = _scaled_residuals(cand, inputs, grid)
                m_cand = float(f_cand @ f_cand)
                if np.isfinite(m_cand) and m_cand < merit:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            logger.debug(f"Fixed-point line search failed at iteration {it}, merit={merit:.3e}")
            return x, it, False
        x, f, merit = cand, f_cand, m_cand
    return x, max_iter, bool(np.max(np.abs(f)) <= SCALED_TOL)


def _initial_point(inputs: TheoryInputs) -> np.ndarray:
    # Classical scale: sigma ~ 2, lambda ~ 4 kappa / (1 - kappa) at gamma = 0
    kappa, gamma = inputs.kappa, inputs.gamma
    return np.array([1.0 + kappa, 2.0 * (1.0 + gamma), 4.0 * kappa / (1.0 - kappa) * (1.0 + gamma)])


def _solve(
    kappa: float,
    gamma: float,
    order: int,
    start: Optional[Sequence[float]] = None,
) -> FixedPoint:
    inputs = TheoryInputs(kappa, gamma)
    grid = _cached_quadrature(order)

    x0 = _initial_point(inputs) if start is None else np.asarray(start, dtype=float)
    if x0.shape != (3,) or np.any(x0 <= 0):
        raise InvalidParameterError(f"start must be three positive numbers, got {start}")
    x, iters, ok = _damped_newton(x0, inputs, grid)
    if not ok:
        # Continuation in gamma from the near-classical regime
        logger.info(f"Direct solve failed at kappa={kappa}, gamma={gamma}; using continuation")
        x = _initial_point(TheoryInputs(kappa, gamma / CONTINUATION_STEPS))
        for k in range(1, CONTINUATION_STEPS + 1):
            stage = TheoryInputs(kappa, gamma * k / CONTINUATION_STEPS)
            x, stage_iters, ok = _damped_newton(x, stage, grid)
            iters += stage_iters
            if not ok:
                break

    if not ok:
        raise FixedPointError(
            f"no solution after {SOLVER_MAX_ITER} iterations at kappa={kappa}, gamma={gamma}; "
            "verify that (kappa, gamma) lies below the MLE existence frontier"
        )

    residuals = system_residuals(x[0], x[1], x[2], inputs, grid)
    if np.max(np.abs(residuals)) > RESIDUAL_TOL:
        raise FixedPointError(
            f"solver residuals {residuals} exceed {RESIDUAL_TOL} at kappa={kappa}, gamma={gamma}"
        )
    logger.debug(
        f"Solved kappa={kappa}, gamma={gamma}: alpha={x[0]:.6f}, sigma={x[1]:.6f}, lambda={x[2]:.6f}"
    )
    return FixedPoint(float(x[0]), float(x[1]), float(x[2]), residuals, inputs, iters)


@functools.lru_cache(maxsize=1024)
def _solve_cached(kappa: float, gamma: float, order: int) -> FixedPoint:
    return _solve(kappa, gamma, order)


def solve_fixed_point(
    inputs: TheoryInputs,
    curve: Optional["FrontierCurve"] = None,
    order: Optional[int] = None,
    start: Optional[Sequence[float]] = None,
) -> FixedPoint:
    """
    Solve for (alpha*, sigma*, lambda*) at (kappa, gamma).

    Results are memoized on (kappa, gamma) rounded to 1e-6; an explicit
    ``start`` bypasses the memo.

    Args:
        inputs: (kappa, gamma)
        curve: Optional frontier; when given, points on or above it are rejected
        order: Quadrature nodes per axis (default from settings)
        start: Optional initial (alpha, sigma, lambda)

    Returns:
        FixedPoint with residuals <= 1e-6
    """
    if curve is not None and not exists_mle(inputs, curve):
        raise OutOfRegionError(
            f"(kappa={inputs.kappa}, gamma={inputs.gamma}) lies on or above the frontier "
            f"(g_MLE={curve(inputs.kappa):.4f}); the MLE does not exist asymptotically"
        )
    order = settings.QUADRATURE_ORDER if order is None else int(order)
    kappa = round(float(inputs.kappa), CACHE_ROUNDING)
    gamma = round(float(inputs.gamma), CACHE_ROUNDING)
    if start is not None:
        return _solve(kappa, gamma, order, start)
    return _solve_cached(kappa, gamma, order)


# ============================================================================
# Monte-Carlo phase-transition frontier
# ============================================================================

@dataclass(frozen=True, eq=False)
class FrontierCurve:
    """Knots (kappa, gamma at the frontier) with linear interpolation."""

    kappas: np.ndarray
    gammas: np.ndarray
    n: int
    reps: int
    seed: Optional[int] = None
    skipped: tuple = field(default_factory=tuple)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.kappas[0]), float(self.kappas[-1])

    def __call__(self, kappa: float) -> float:
        lo, hi = self.domain
        if not lo - 1e-12 <= kappa <= hi + 1e-12:
            raise FrontierError(f"kappa={kappa} outside the frontier domain [{lo}, {hi}]")
        return float(np.interp(kappa, self.kappas, self.gammas))


def _separable_trial(context: tuple[int, int, float], seed: np.random.SeedSequence) -> Optional[bool]:
    n, p, gamma = context
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[0] = gamma
    y = sample_labels(X, beta, rng)
    try:
        return check_separable(X, y).separable
    except SeparabilityIndeterminateError:
        return None


def _separable_fraction(
    n: int,
    p: int,
    gamma: float,
    seeds: Sequence[np.random.SeedSequence],
    threads: int,
) -> float:
    outcomes = map_seeded(_separable_trial, (n, p, float(gamma)), seeds, threads)
    decided = [o for o in outcomes if o is not None]
    if len(decided) < len(outcomes):
        logger.warning(f"{len(outcomes) - len(decided)} separability trials were indeterminate")
    if not decided:
        raise FrontierError(f"all separability trials indeterminate at n={n}, p={p}, gamma={gamma}")
    return float(np.mean(decided))


def mc_separability_prob(
    kappa: float,
    gamma: float,
    n: int,
    reps: int,
    rng: np.random.Generator | np.random.SeedSequence | int | None,
    threads: int = 1,
) -> float:
    """
    Fraction of reps in which an i.i.d. Gaussian design with p = round(kappa n)
    and all signal in one coordinate (beta^T beta = gamma^2) is completely separable.
    """
    if reps < 1:
        raise InvalidParameterError(f"reps must be >= 1, got {reps}")
    if n * kappa < 2:
        raise InvalidParameterError(f"need n * kappa >= 2, got n={n}, kappa={kappa}")
    p = int(round(kappa * n))
    return _separable_fraction(n, p, gamma, spawn_seeds(rng, reps), threads)


def _bisect_knot(
    kappa: float,
    n: int,
    reps: int,
    seeds: Sequence[np.random.SeedSequence],
    threads: int,
) -> float:
    p = int(round(kappa * n))
    if p < 1 or n * kappa < 2:
        raise FrontierError(f"kappa={kappa} too small for pilot size n={n}")

    # Common random numbers across gamma probes of one knot
    def prob(g: float) -> float:
        return _separable_fraction(n, p, g, seeds, threads)

    lo, hi = 0.0, 1.0
    if prob(lo) >= FRONTIER_CROSSING:
        return 0.0
    while prob(hi) < FRONTIER_CROSSING:
        lo, hi = hi, 2.0 * hi
        if hi > FRONTIER_GAMMA_MAX:
            raise FrontierError(
                f"separability probability never reached {FRONTIER_CROSSING} "
                f"for gamma <= {FRONTIER_GAMMA_MAX} at kappa={kappa}"
            )
    while hi - lo > FRONTIER_GAMMA_TOL:
        mid = 0.5 * (lo + hi)
        if prob(mid) >= FRONTIER_CROSSING:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _monotone_knots(gammas: np.ndarray) -> np.ndarray:
    """Decreasing isotonic fit, then a tiny ramp so positive knots strictly decrease."""
    fitted = np.asarray(isotonic_regression(gammas, increasing=False).x, dtype=float)
    for i in range(1, fitted.size):
        if fitted[i] >= fitted[i - 1]:
            fitted[i] = max(fitted[i - 1] - 1e-6, 0.0)
    return fitted


def frontier_from_knots(
    kappas: Sequence[float],
    gammas: Sequence[float],
    n: int,
    reps: int,
    seed: Optional[int] = None,
    skipped: Sequence[float] = (),
) -> FrontierCurve:
    """Assemble a FrontierCurve from raw knots (sorted, isotonic-clipped)."""
    kappas = np.asarray(kappas, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    if kappas.size == 0 or kappas.size != gammas.size:
        raise FrontierError("frontier needs at least one (kappa, gamma) knot")
    order = np.argsort(kappas)
    kappas, gammas = kappas[order], gammas[order]
    if np.any(np.diff(kappas) <= 0):
        raise FrontierError("frontier kappas must be distinct")
    clipped = _monotone_knots(gammas)
    if np.any(np.abs(clipped - gammas) > 1e-9):
        logger.warning("Frontier knots were not monotone; applied isotonic clip")
    return FrontierCurve(
        kappas=kappas,
        gammas=clipped,
        n=int(n),
        reps=int(reps),
        seed=seed,
        skipped=tuple(float(k) for k in skipped),
    )


def build_frontier(
    kappas: Sequence[float],
    n: int,
    reps: int,
    rng: int | np.random.SeedSequence | np.random.Generator | None,
    threads: int = 1,
) -> FrontierCurve:
    """
    Monte-Carlo frontier: for each kappa, bisect gamma to where the
    separability probability crosses 0.5 (to within 0.05 in gamma).

    Knots whose bracket fails are skipped with a warning.
    """
    grid = sorted(float(k) for k in kappas)
    if not grid or grid[0] <= 0 or grid[-1] > 0.5:
        raise InvalidParameterError(f"frontier grid must lie in (0, 0.5], got {grid}")
    seed_label = rng if isinstance(rng, int) else None
    knot_seeds = spawn_seeds(rng, len(grid))

    kept_k, kept_g, skipped = [], [], []
    for kappa, knot_seed in zip(grid, knot_seeds):
        logger.info(f"Frontier knot kappa={kappa:.3f} (n={n}, reps={reps})")
        try:
            gamma = _bisect_knot(kappa, n, reps, knot_seed.spawn(reps), threads)
        except FrontierError as exc:
            logger.warning(f"Skipping frontier knot kappa={kappa}: {exc}")
            skipped.append(kappa)
            continue
        logger.info(f"  g_MLE({kappa:.3f}) ~ {gamma:.3f}")
        kept_k.append(kappa)
        kept_g.append(gamma)

    if not kept_k:
        raise FrontierError("every frontier knot failed")
    return frontier_from_knots(kept_k, kept_g, n, reps, seed_label, skipped)


def exists_mle(inputs: TheoryInputs, curve: FrontierCurve) -> bool:
    """True iff gamma < g_MLE(kappa) (strict)."""
    return inputs.gamma < curve(inputs.kappa)


# ============================================================================
# Frontier cache
# ============================================================================

def grid_hash(kappas: Sequence[float]) -> str:
    text = ",".join(f"{k:.6f}" for k in sorted(kappas))
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]


def frontier_cache_path(cache_dir: str | Path, kappas: Sequence[float], n: int, reps: int, seed: int) -> Path:
    return Path(cache_dir) / f"frontier-n{n}-r{reps}-s{seed}-{grid_hash(kappas)}.json"


def save_frontier(curve: FrontierCurve, path: str | Path) -> Path:
    """Write the curve as a versioned JSON knot table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "schema": FRONTIER_SCHEMA,
        "seed": curve.seed,
        "n": curve.n,
        "reps": curve.reps,
        "grid_hash": grid_hash(list(curve.kappas) + list(curve.skipped)),
        "knots": [
            {"kappa": float(k), "gamma": float(g), "n": curve.n, "reps": curve.reps}
            for k, g in zip(curve.kappas, curve.gammas)
        ],
        "skipped": list(curve.skipped),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
    return path


def load_frontier(path: str | Path) -> FrontierCurve:
    """Read a frontier cache file written by ``save_frontier``."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise FrontierError(f"cannot read frontier cache {path}: {exc}") from exc
    if payload.get("schema") != FRONTIER_SCHEMA:
        raise FrontierError(f"{path} has schema {payload.get('schema')!r}, expected {FRONTIER_SCHEMA!r}")
    knots = payload.get("knots") or []
    return FrontierCurve(
        kappas=np.array([k["kappa"] for k in knots], dtype=float),
        gammas=np.array([k["gamma"] for k in knots], dtype=float),
        n=int(payload["n"]),
        reps=int(payload["reps"]),
        seed=payload.get("seed"),
        skipped=tuple(payload.get("skipped", [])),
    )


def load_or_build_frontier(
    cache_dir: str | Path,
    kappas: Optional[Sequence[float]] = None,
    n: Optional[int] = None,
    reps: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    refresh: bool = False,
) -> FrontierCurve:
    """
    Return the cached frontier for these settings, building it when missing.

    Args:
        cache_dir: Directory holding frontier JSON files
        kappas, n, reps, seed, threads: Build settings (defaults from settings)
        refresh: Rebuild even when a cache file exists

    Returns:
        FrontierCurve
    """
    kappas = list(settings.FRONTIER_KAPPAS if kappas is None else kappas)
    n = settings.FRONTIER_N if n is None else n
    reps = settings.FRONTIER_REPS if reps is None else reps
    seed = settings.SEED if seed is None else seed
    threads = settings.THREADS if threads is None else threads

    path = frontier_cache_path(cache_dir, kappas, n, reps, seed)
    if path.exists() and not refresh:
        logger.info(f"Loading cached frontier: {path}")
        return load_frontier(path)

    logger.info(f"Building Monte-Carlo frontier ({len(kappas)} knots); this can take a while")
    curve = build_frontier(kappas, n, reps, seed, threads)
    save_frontier(curve, path)
    logger.info(f"Frontier cached at {path}")
    return curve
