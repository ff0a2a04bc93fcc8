"""
Seeded Monte-Carlo studies of the high-dimensional logistic MLE.

Each study draws one coefficient vector from the master seed, then runs
independent replicates on pre-spawned sub-streams:

- marginal:    coverage of one tracked coordinate and its standardized T_j
- bulk:        fraction of all p coordinates covered within each fit
- pvalue:      classical Wald / classical LRT / adjusted t / rescaled LRT tails
- convergence: alpha(n), sigma(n)^2 against (alpha*, kappa sigma*^2)
- sphere:      uniformity of the MLE direction orthogonal to beta

Replicates whose data are separable (or whose plug-in estimation fails) are
counted and excluded; more than 1% failures flags the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.stats import chi2, kstest, norm

from config.settings import settings
from engine.errors import ConfigurationError, HDLogitError, InvalidParameterError
from engine.gauss_designs import (
    CovarianceSpec,
    build_identity,
    conditional_sd,
    covariance_from_descriptor,
    sample_design,
)
from engine.inference import (
    adjusted_ci,
    estimate_rho_ar1,
    estimate_tau_rss_all,
    lrt_pvalue,
    standardize_T,
    t_pvalue,
)
from engine.logistic_core import classical_se, fit_mle, llr, sample_labels
from engine.probe_frontier import estimate_theory_params, probe, probe_config_from_dict
from engine.theory_engine import (
    FixedPoint,
    FrontierCurve,
    TheoryInputs,
    load_or_build_frontier,
    solve_fixed_point,
)
from schemas.validators import validate_experiment_config
from utils.json_utils import dump_json
from utils.logger import logger
from utils.parallel import map_seeded, spawn_seeds

DEFAULT_LEVELS = (0.99, 0.98, 0.95, 0.90, 0.80)
PVALUE_CUTOFFS = (0.10, 0.05, 0.01, 0.005)
PVALUE_METHODS = ("classical_wald", "classical_lrt", "adjusted_t", "rescaled_lrt")
FAILURE_FLAG_RATE = 0.01
BETA_CHECK_TOL = 1e-10


# ============================================================================
# Coefficient schemes
# ============================================================================

@dataclass(frozen=True, eq=False)
class BetaDraw:
    """Coefficient vector with its tracked non-null and null coordinates."""

    beta: np.ndarray
    nonnull_index: Optional[int]
    null_index: Optional[int]


def make_beta_draw(
    scheme: str,
    spec: CovarianceSpec,
    gamma2: float,
    rng: np.random.Generator,
    explicit: Optional[Sequence[float]] = None,
) -> BetaDraw:
    """
    Draw beta for ``scheme`` so that beta^T Sigma beta = gamma2.

    Args:
        scheme: zero, half_nonnull_equal, single_spike or explicit
        spec: Covariance of the design
        gamma2: Target signal strength (ignored by ``explicit``)
        rng: Generator used for the support shuffle
        explicit: Coefficients for the explicit scheme

    Returns:
        BetaDraw
    """
    if gamma2 < 0:
        raise InvalidParameterError(f"gamma2 must be >= 0, got {gamma2}")
    p = spec.p
    beta = np.zeros(p)

    if scheme == "zero":
        if gamma2 != 0:
            raise InvalidParameterError(f"zero scheme cannot reach gamma2={gamma2}")
        order = rng.permutation(p)
        return BetaDraw(beta, None, int(order[0]))

    if scheme == "half_nonnull_equal":
        order = rng.permutation(p)
        k = p // 2
        support = order[:k]
        if k == 0 and gamma2 > 0:
            raise InvalidParameterError("half_nonnull_equal needs p >= 2 for a positive signal")
        if k > 0:
            quad = float(spec.sigma[np.ix_(support, support)].sum())
            beta[support] = np.sqrt(gamma2 / quad)
        nonnull = int(order[0]) if k > 0 else None
        null = int(order[k]) if k < p else None
    elif scheme == "single_spike":
        beta[0] = np.sqrt(gamma2 / spec.sigma[0, 0])
        nonnull, null = 0, (1 if p > 1 else None)
    elif scheme == "explicit":
        if explicit is None or len(explicit) != p:
            raise InvalidParameterError(f"explicit scheme needs {p} coefficients")
        beta = np.asarray(explicit, dtype=float).copy()
        nonzero = np.flatnonzero(beta)
        zero = np.flatnonzero(beta == 0)
        return BetaDraw(
            beta,
            int(nonzero[0]) if nonzero.size else None,
            int(zero[0]) if zero.size else None,
        )
    else:
        raise InvalidParameterError(f"unknown beta scheme {scheme!r}")

    achieved = float(beta @ spec.sigma @ beta)
    if abs(achieved - gamma2) > BETA_CHECK_TOL * max(1.0, gamma2):
        raise InvalidParameterError(f"beta^T Sigma beta = {achieved:.12g}, expected {gamma2}")
    return BetaDraw(beta, nonnull, null)


def make_beta(
    scheme: str,
    spec: CovarianceSpec,
    gamma2: float,
    rng: np.random.Generator,
    explicit: Optional[Sequence[float]] = None,
) -> np.ndarray:
    return make_beta_draw(scheme, spec, gamma2, rng, explicit).beta


# ============================================================================
# Results
# ============================================================================

@dataclass(eq=False)
class ExperimentResult:
    """Tables, QQ pairs and a JSON-ready summary of one study."""

    study: str
    tables: dict[str, pd.DataFrame]
    summary: dict[str, Any] = field(default_factory=dict)
    qq: Optional[pd.DataFrame] = None
    failures: int = 0
    replicates: int = 0

    @property
    def flagged(self) -> bool:
        return self.failures > FAILURE_FLAG_RATE * self.replicates


def _proportion_table(hits: np.ndarray, labels: Sequence[float], label_name: str) -> pd.DataFrame:
    prop = hits.mean(axis=0)
    se = np.sqrt(prop * (1.0 - prop) / hits.shape[0])
    return pd.DataFrame(
        {
            label_name: 100.0 * np.asarray(labels),
            "proportion_pct": 100.0 * prop,
            "se_pct": 100.0 * se,
        }
    )


def _qq_pairs(values: np.ndarray) -> pd.DataFrame:
    m = values.size
    return pd.DataFrame(
        {
            "theoretical": norm.ppf((np.arange(1, m + 1) - 0.5) / m),
            "empirical": np.sort(values),
        }
    )


def _finish(study: str, replicates: int, outcomes: list) -> tuple[list, int]:
    ok = [o for o in outcomes if o is not None]
    failures = replicates - len(ok)
    if not ok:
        raise HDLogitError(f"{study}: every replicate failed")
    if failures > FAILURE_FLAG_RATE * replicates:
        logger.warning(f"{study}: {failures}/{replicates} replicates failed (flagged)")
    elif failures:
        logger.info(f"{study}: {failures}/{replicates} replicates excluded")
    return ok, failures


# ============================================================================
# Replicate context and workers
# ============================================================================

@dataclass(frozen=True, eq=False)
class _Context:
    spec: CovarianceSpec
    beta: np.ndarray
    n: int
    tracked: Optional[int]
    levels: tuple[float, ...]
    truth: FixedPoint
    tau_true: np.ndarray
    parameter_mode: str = "true"
    tau_mode: str = "true"
    curve: Optional[FrontierCurve] = None
    probe: Optional[dict] = None


def _simulate(ctx: _Context, rng: np.random.Generator):
    X = sample_design(ctx.n, ctx.spec, rng).x
    y = sample_labels(X, ctx.beta, rng)
    if np.all(y > 0) or np.all(y < 0):
        return None
    fit = fit_mle(X, y)
    if not fit.converged:
        return None
    return X, y, fit


def _plugin(ctx: _Context, X: np.ndarray, y: np.ndarray, rng: np.random.Generator):
    """(alpha, sigma, lambda, tau) used by the interval and test under the configured modes."""
    n, p = X.shape
    if ctx.tau_mode == "rss":
        tau = estimate_tau_rss_all(X)
    elif ctx.tau_mode == "ar1":
        tau = estimate_rho_ar1(X).tau
    else:
        tau = ctx.tau_true

    if ctx.parameter_mode == "probefrontier":
        cfg = probe_config_from_dict(ctx.probe or {}, p / n, seed=int(rng.integers(2**32)))
        result = probe(X, y, cfg, ctx.curve, threads=1, check_full=False)
        fp = estimate_theory_params(p / n, result.gamma_hat, curve=ctx.curve)
    else:
        fp = ctx.truth
    return fp.alpha_star, fp.sigma_star, fp.lambda_star, tau


def _marginal_replicate(ctx: _Context, seed: np.random.SeedSequence) -> Optional[dict]:
    rng = np.random.default_rng(seed)
    drawn = _simulate(ctx, rng)
    if drawn is None:
        return None
    X, y, fit = drawn
    j = ctx.tracked
    b_j, beta_j = fit.beta_hat[j], ctx.beta[j]
    t_stat = standardize_T(
        fit.beta_hat[[j]], ctx.beta[[j]], ctx.truth.alpha_star, ctx.truth.sigma_star, ctx.tau_true[[j]], ctx.n
    )[0]

    try:
        if ctx.parameter_mode == "classical":
            se = classical_se(X, fit.beta_hat)[j]
            covered = [abs(b_j - beta_j) <= norm.ppf(0.5 * (1 + lv)) * se for lv in ctx.levels]
        else:
            alpha, sigma, _, tau = _plugin(ctx, X, y, rng)
            covered = []
            for lv in ctx.levels:
                lo, hi = adjusted_ci(b_j, alpha, sigma, tau[j], ctx.n, lv)
                covered.append(lo <= beta_j <= hi)
    except HDLogitError:
        return None
    return {"t": float(t_stat), "covered": covered}


def _bulk_replicate(ctx: _Context, seed: np.random.SeedSequence) -> Optional[np.ndarray]:
    rng = np.random.default_rng(seed)
    drawn = _simulate(ctx, rng)
    if drawn is None:
        return None
    X, y, fit = drawn
    try:
        if ctx.parameter_mode == "classical":
            se = classical_se(X, fit.beta_hat)
            dev = np.abs(fit.beta_hat - ctx.beta)
            return np.array([np.mean(dev <= norm.ppf(0.5 * (1 + lv)) * se) for lv in ctx.levels])
        alpha, sigma, _, tau = _plugin(ctx, X, y, rng)
    except HDLogitError:
        return None
    fractions = []
    for lv in ctx.levels:
        lo, hi = adjusted_ci(fit.beta_hat, alpha, sigma, tau, ctx.n, lv)
        fractions.append(np.mean((lo <= ctx.beta) & (ctx.beta <= hi)))
    return np.array(fractions)


def _pvalue_replicate(ctx: _Context, seed: np.random.SeedSequence) -> Optional[dict]:
    rng = np.random.default_rng(seed)
    drawn = _simulate(ctx, rng)
    if drawn is None:
        return None
    X, y, fit = drawn
    n, p = X.shape
    j = ctx.tracked
    b_j = fit.beta_hat[j]
    try:
        llr_j = llr(X, y, [j], full=fit)
        se = classical_se(X, fit.beta_hat)[j]
        alpha, sigma, lam, tau = _plugin(ctx, X, y, rng)
    except HDLogitError:
        return None
    kappa = p / n
    pvalues = [
        2.0 * norm.sf(abs(b_j) / se),
        chi2.sf(2.0 * llr_j, 1),
        t_pvalue(b_j, sigma, tau[j], n),
        lrt_pvalue(llr_j, kappa, sigma, lam),
    ]
    return {"p": pvalues, "stat": lam / (kappa * sigma**2) * 2.0 * llr_j}


# ============================================================================
# Study setup
# ============================================================================

def _descriptors(config: dict) -> list[dict]:
    covariance = config.get("covariance", {"kind": "identity"})
    return covariance if isinstance(covariance, list) else [covariance]


def _prepare(
    config: dict,
    descriptor: dict,
    beta_seed: np.random.SeedSequence,
    base_dir: Optional[Path],
    cache_dir: Optional[str] = None,
) -> _Context:
    n, p = int(config["n"]), int(config["p"])
    descriptor = dict(descriptor)
    if descriptor.get("kind") != "explicit":
        descriptor.setdefault("p", p)
    spec = covariance_from_descriptor(descriptor, base_dir=base_dir, seed=int(config["seed"]))
    if spec.p != p:
        raise ConfigurationError(f"covariance: dimension {spec.p} does not match p={p}")

    draw = make_beta_draw(
        config.get("beta_scheme", "half_nonnull_equal"),
        spec,
        float(config.get("gamma2", 0.0)),
        np.random.default_rng(beta_seed),
        config.get("beta"),
    )
    coordinate = config.get("coordinate", "null" if config["study"] == "pvalue" else "nonnull")
    tracked = draw.null_index if coordinate == "null" else draw.nonnull_index
    if tracked is None:
        tracked = draw.null_index if draw.nonnull_index is None else draw.nonnull_index
    if tracked is None and config["study"] in ("marginal", "pvalue"):
        raise ConfigurationError(f"coordinate: no {coordinate} coordinate exists under this beta scheme")

    gamma = float(np.sqrt(draw.beta @ spec.sigma @ draw.beta))
    truth = solve_fixed_point(TheoryInputs(p / n, gamma))
    logger.info(
        f"Prepared {spec.describe()}: kappa={p / n:.3f}, gamma={gamma:.4f}, "
        f"alpha*={truth.alpha_star:.4f}, sigma*={truth.sigma_star:.4f}"
    )

    parameter_mode = config.get("parameter_mode", "true")
    curve = None
    if parameter_mode == "probefrontier":
        curve = load_or_build_frontier(settings.cache_dir(cache_dir))

    return _Context(
        spec=spec,
        beta=draw.beta,
        n=n,
        tracked=tracked,
        levels=tuple(float(lv) for lv in config.get("levels", DEFAULT_LEVELS)),
        truth=truth,
        tau_true=conditional_sd(spec),
        parameter_mode=parameter_mode,
        tau_mode=config.get("tau_mode", "true"),
        curve=curve,
        probe=config.get("probe"),
    )


def _streams(config: dict) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    beta_seq, rep_seq = np.random.SeedSequence(int(config["seed"])).spawn(2)
    return beta_seq, rep_seq


def _base_summary(ctx: _Context, config: dict) -> dict[str, Any]:
    return {
        "covariance": ctx.spec.describe(),
        "n": ctx.n,
        "p": ctx.spec.p,
        "kappa": ctx.spec.p / ctx.n,
        "gamma": ctx.truth.inputs.gamma,
        "alpha_star": ctx.truth.alpha_star,
        "sigma_star": ctx.truth.sigma_star,
        "lambda_star": ctx.truth.lambda_star,
        "parameter_mode": ctx.parameter_mode,
        "tau_mode": ctx.tau_mode,
        "seed": config["seed"],
    }


# ============================================================================
# Studies
# ============================================================================

def run_marginal(
    config: dict,
    threads: int = 1,
    base_dir: Optional[Path] = None,
    cache_dir: Optional[str] = None,
) -> ExperimentResult:
    """Single-coordinate coverage at each level plus the T_j sample for QQ output."""
    beta_seq, rep_seq = _streams(config)
    ctx = _prepare(config, _descriptors(config)[0], beta_seq, base_dir, cache_dir)
    B = int(config["replicates"])
    logger.info(f"Marginal study: {B} replicates, tracked coordinate {ctx.tracked}")

    outcomes = map_seeded(_marginal_replicate, ctx, rep_seq.spawn(B), threads)
    ok, failures = _finish("marginal", B, outcomes)

    covered = np.array([o["covered"] for o in ok], dtype=float)
    t_values = np.array([o["t"] for o in ok])
    summary = _base_summary(ctx, config)
    summary.update(
        {
            "tracked": ctx.tracked,
            "beta_tracked": float(ctx.beta[ctx.tracked]),
            "t_mean": float(t_values.mean()),
            "t_sd": float(t_values.std(ddof=1)) if t_values.size > 1 else float("nan"),
        }
    )
    return ExperimentResult(
        study="marginal",
        tables={"coverage": _proportion_table(covered, ctx.levels, "level_pct")},
        summary=summary,
        qq=_qq_pairs(t_values),
        failures=failures,
        replicates=B,
    )


def run_bulk(
    config: dict,
    threads: int = 1,
    base_dir: Optional[Path] = None,
    cache_dir: Optional[str] = None,
) -> ExperimentResult:
    """Per-fit fraction of coordinates covered, one block per covariance model."""
    beta_seq, rep_seq = _streams(config)
    B = int(config["replicates"])
    rows = []
    models = []
    failures = 0

    descriptors = _descriptors(config)
    model_beta_seeds = beta_seq.spawn(len(descriptors))
    model_rep_seeds = rep_seq.spawn(len(descriptors))
    for descriptor, b_seed, r_seed in zip(descriptors, model_beta_seeds, model_rep_seeds):
        ctx = _prepare(config, descriptor, b_seed, base_dir, cache_dir)
        logger.info(f"Bulk study on {ctx.spec.describe()}: {B} replicates")
        outcomes = map_seeded(_bulk_replicate, ctx, r_seed.spawn(B), threads)
        ok, model_failures = _finish("bulk", B, outcomes)
        failures += model_failures

        fractions = np.array(ok)
        sd = fractions.std(axis=0, ddof=1) if len(ok) > 1 else np.full(len(ctx.levels), np.nan)
        for k, lv in enumerate(ctx.levels):
            rows.append(
                {
                    "covariance": ctx.spec.describe(),
                    "level_pct": 100.0 * lv,
                    "mean_pct": 100.0 * fractions[:, k].mean(),
                    "sd_pct": 100.0 * sd[k],
                    "se_pct": 100.0 * sd[k] / np.sqrt(len(ok)),
                }
            )
        models.append({**_base_summary(ctx, config), "failures": model_failures})

    return ExperimentResult(
        study="bulk",
        tables={"bulk_coverage": pd.DataFrame(rows)},
        summary={"models": models, "seed": config["seed"]},
        failures=failures,
        replicates=B * len(descriptors),
    )


def run_pvalue_study(
    config: dict,
    threads: int = 1,
    base_dir: Optional[Path] = None,
    cache_dir: Optional[str] = None,
) -> ExperimentResult:
    """Null-coordinate p-value tails for the classical and adjusted tests."""
    beta_seq, rep_seq = _streams(config)
    ctx = _prepare(config, _descriptors(config)[0], beta_seq, base_dir, cache_dir)
    if ctx.beta[ctx.tracked] != 0:
        raise ConfigurationError("coordinate: the tracked coordinate must be null in the p-value study")
    B = int(config["replicates"])
    logger.info(f"P-value study: {B} replicates, null coordinate {ctx.tracked}")

    outcomes = map_seeded(_pvalue_replicate, ctx, rep_seq.spawn(B), threads)
    ok, failures = _finish("pvalue", B, outcomes)

    pvalues = np.array([o["p"] for o in ok])
    stats = np.array([o["stat"] for o in ok])
    proportions = {"cutoff_pct": 100.0 * np.asarray(PVALUE_CUTOFFS)}
    standard_errors = {"cutoff_pct": 100.0 * np.asarray(PVALUE_CUTOFFS)}
    for k, method in enumerate(PVALUE_METHODS):
        hits = pvalues[:, [k]] <= np.asarray(PVALUE_CUTOFFS)[None, :]
        prop = hits.mean(axis=0)
        proportions[method] = 100.0 * prop
        standard_errors[method] = 100.0 * np.sqrt(prop * (1.0 - prop) / len(ok))

    summary = _base_summary(ctx, config)
    summary.update(
        {
            "tracked": ctx.tracked,
            "lrt_factor": ctx.truth.lrt_factor,
            "ks_pvalue_rescaled_lrt": float(kstest(stats, chi2(1).cdf).pvalue),
        }
    )
    return ExperimentResult(
        study="pvalue",
        tables={"pvalues": pd.DataFrame(proportions), "pvalues_se": pd.DataFrame(standard_errors)},
        summary=summary,
        failures=failures,
        replicates=B,
    )


def _convergence_replicate(context: tuple[int, int, float], seed: np.random.SeedSequence) -> Optional[tuple]:
    n, p, gamma = context
    rng = np.random.default_rng(seed)
    beta = np.zeros(p)
    beta[0] = gamma
    X = sample_design(n, build_identity(p), rng).x
    y = sample_labels(X, beta, rng)
    if np.all(y > 0) or np.all(y < 0):
        return None
    fit = fit_mle(X, y)
    if not fit.converged:
        return None
    alpha_n = float(fit.beta_hat @ beta / (beta @ beta))
    resid = fit.beta_hat - alpha_n * beta
    return alpha_n, float(resid @ resid)


def run_convergence_check(
    kappa: float,
    gamma: float,
    n: int,
    replicates: int,
    rng: int | np.random.SeedSequence | np.random.Generator | None,
    threads: int = 1,
) -> ExperimentResult:
    """
    alpha(n) = <beta_hat, beta>/||beta||^2 and sigma(n)^2 = ||beta_hat - alpha(n) beta||^2
    over replicates, against alpha* and kappa sigma*^2.
    """
    if gamma <= 0:
        raise InvalidParameterError("the convergence check needs gamma > 0 (alpha(n) is undefined at 0)")
    p = int(round(kappa * n))
    truth = solve_fixed_point(TheoryInputs(p / n, gamma))
    logger.info(f"Convergence check: n={n}, p={p}, gamma={gamma:.4f}, {replicates} replicates")

    outcomes = map_seeded(_convergence_replicate, (n, p, float(gamma)), spawn_seeds(rng, replicates), threads)
    ok, failures = _finish("convergence", replicates, outcomes)
    values = np.array(ok)
    m = values.shape[0]
    alpha_mean, sigma2_mean = values.mean(axis=0)
    alpha_se, sigma2_se = values.std(axis=0, ddof=1) / np.sqrt(m) if m > 1 else (np.nan, np.nan)
    target_sigma2 = (p / n) * truth.sigma_star**2

    table = pd.DataFrame(
        {
            "quantity": ["alpha_n", "sigma2_n"],
            "mean": [alpha_mean, sigma2_mean],
            "se": [alpha_se, sigma2_se],
            "theory": [truth.alpha_star, target_sigma2],
            "rel_error": [alpha_mean / truth.alpha_star - 1.0, sigma2_mean / target_sigma2 - 1.0],
        }
    )
    summary = {**truth.as_dict(), "n": n, "p": p, "replicates_ok": m}
    return ExperimentResult(
        study="convergence",
        tables={"convergence": table},
        summary=summary,
        failures=failures,
        replicates=replicates,
    )


def _sphere_replicate(context: tuple[int, int, float], seed: np.random.SeedSequence) -> Optional[np.ndarray]:
    n, p, gamma = context
    rng = np.random.default_rng(seed)
    beta = np.zeros(p)
    beta[0] = gamma
    X = sample_design(n, build_identity(p), rng).x
    y = sample_labels(X, beta, rng)
    if np.all(y > 0) or np.all(y < 0):
        return None
    fit = fit_mle(X, y)
    if not fit.converged:
        return None
    # Projection orthogonal to beta = e_1 drops the first coordinate
    ortho = fit.beta_hat[1:]
    return ortho / np.linalg.norm(ortho)


def run_sphere_check(
    kappa: float,
    gamma: float,
    n: int,
    replicates: int,
    rng: int | np.random.SeedSequence | np.random.Generator | None,
    threads: int = 1,
) -> ExperimentResult:
    """
    Uniformity of u = P_perp beta_hat / ||P_perp beta_hat|| on the unit sphere
    of the (p - 1)-dimensional complement of beta.
    """
    p = int(round(kappa * n))
    if p < 4:
        raise InvalidParameterError(f"the sphere check needs p >= 4, got p={p}")
    logger.info(f"Sphere check: n={n}, p={p}, gamma={gamma:.4f}, {replicates} replicates")

    outcomes = map_seeded(_sphere_replicate, (n, p, float(gamma)), spawn_seeds(rng, replicates), threads)
    ok, failures = _finish("sphere", replicates, outcomes)
    units = np.array(ok)
    m = units.shape[0]
    scaled = np.sqrt(p - 1) * units
    means = scaled.mean(axis=0)
    corr = float(np.corrcoef(units[:, 1], units[:, 2])[0, 1]) if m > 2 else float("nan")

    summary = {
        "n": n,
        "p": p,
        "gamma": gamma,
        "replicates_ok": m,
        "max_abs_mean": float(np.max(np.abs(means))),
        "mean_bound": 3.0 / np.sqrt(m),
        "max_norm_error": float(np.max(np.abs(np.linalg.norm(units, axis=1) - 1.0))),
        "corr_u2_u3": corr,
    }
    table = pd.DataFrame({"j": np.arange(1, p), "mean_scaled": means, "sd_scaled": scaled.std(axis=0)})
    return ExperimentResult(
        study="sphere",
        tables={"sphere_means": table},
        summary=summary,
        failures=failures,
        replicates=replicates,
    )


def run_experiment(
    config: dict,
    threads: Optional[int] = None,
    base_dir: Optional[str | Path] = None,
    cache_dir: Optional[str] = None,
) -> ExperimentResult:
    """
    Validate ``config`` and dispatch on its ``study`` field.

    Args:
        config: Parsed experiment config
        threads: Worker processes (default from settings)
        base_dir: Directory that relative covariance paths resolve against
        cache_dir: Frontier cache directory for the probefrontier mode (HDLOGIT_CACHE wins)

    Returns:
        ExperimentResult
    """
    is_valid, errors = validate_experiment_config(config)
    if not is_valid:
        raise ConfigurationError("invalid experiment config: " + "; ".join(errors))
    threads = settings.THREADS if threads is None else threads
    base = Path(base_dir) if base_dir is not None else None
    study = config["study"]
    logger.info(f"Running {study} study '{config.get('name', study)}' with {threads} worker(s)")

    if study == "marginal":
        return run_marginal(config, threads, base, cache_dir)
    if study == "bulk":
        return run_bulk(config, threads, base, cache_dir)
    if study == "pvalue":
        return run_pvalue_study(config, threads, base, cache_dir)

    n, p = int(config["n"]), int(config["p"])
    gamma = float(np.sqrt(config.get("gamma2", 0.0)))
    _, rep_seq = _streams(config)
    if study == "convergence":
        return run_convergence_check(p / n, gamma, n, int(config["replicates"]), rep_seq, threads)
    return run_sphere_check(p / n, gamma, n, int(config["replicates"]), rep_seq, threads)


def write_result(
    result: ExperimentResult,
    out_dir: str | Path,
    outputs: Optional[Sequence[str]] = None,
) -> list[Path]:
    """
    Write tables as CSV, the QQ pairs as ``qq.csv`` and always ``summary.json``.

    Args:
        result: Finished study
        out_dir: Target directory (created when missing)
        outputs: Table names to write (``qq`` included); every table when None

    Returns:
        Paths written
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = dict(result.tables)
    if result.qq is not None:
        frames["qq"] = result.qq
    if outputs is not None:
        unknown = sorted(set(outputs) - set(frames))
        if unknown:
            logger.warning(f"{result.study} study produced no table named {', '.join(unknown)}")
        frames = {name: frame for name, frame in frames.items() if name in outputs}

    written = []
    for name, table in frames.items():
        path = out_dir / f"{name}.csv"
        table.to_csv(path, index=False, float_format="%.17g")
        written.append(path)
    summary = {
        "study": result.study,
        "replicates": result.replicates,
        "failures": result.failures,
        "flagged": result.flagged,
        **result.summary,
    }
    written.append(dump_json(summary, out_dir / "summary.json"))
    logger.info(f"Wrote {len(written)} files to {out_dir}")
    return written
