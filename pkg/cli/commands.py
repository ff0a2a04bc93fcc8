"""Implementations of the hdlogit subcommands."""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from scipy.stats import norm

from cli.dataset import Dataset, load_dataset
from config.settings import settings
from engine.errors import (
    ConfigurationError,
    HDLogitError,
    InvalidParameterError,
    NonConvergenceError,
    SeparableDataError,
)
from engine.logistic_core import check_separable, classical_se, fit_mle
from engine.probe_frontier import ProbeConfig, default_grid
from engine.theory_engine import load_or_build_frontier
from graphs.inference_graph import inference_graph
from simulation.sim_harness import run_experiment, write_result
from utils.formatting import format_header, format_params, format_table
from utils.json_utils import dump_json, load_json_file
from utils.logger import logger
from utils.parallel import map_seeded, spawn_seeds


def parse_float_list(raw: Optional[str]) -> Optional[list[float]]:
    """'0.1,0.2' -> [0.1, 0.2]; None or empty -> None."""
    if not raw:
        return None
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"expected a comma-separated list of numbers, got {raw!r}") from exc


def _out_dir(args: argparse.Namespace, fallback: Optional[Path] = None) -> Path:
    if args.out:
        return Path(args.out)
    return fallback if fallback is not None else Path(settings.OUTPUT_DIR)


def _fit_or_raise(ds: Dataset):
    if check_separable(ds.X, ds.y).separable:
        raise SeparableDataError(
            f"the data are completely separable (n={ds.n}, p={ds.p}); the MLE does not exist"
        )
    fit = fit_mle(ds.X, ds.y)
    if not fit.converged:
        raise NonConvergenceError(f"MLE did not converge ({fit.diagnostic})", fit)
    return fit


def _classical_table(ds: Dataset, beta_hat: np.ndarray) -> pd.DataFrame:
    se = classical_se(ds.X, beta_hat)
    z = beta_hat / se
    return pd.DataFrame(
        {
            "name": ds.names,
            "beta_hat": beta_hat,
            "se_classical": se,
            "z": z,
            "p_wald": 2.0 * norm.sf(np.abs(z)),
        }
    )


# ============================================================================
# simulate
# ============================================================================

def cmd_simulate(args: argparse.Namespace) -> int:
    """Run one experiment config and write its tables next to it (or at --out)."""
    config_path = Path(args.config)
    data, error = load_json_file(config_path)
    if error:
        raise ConfigurationError(f"{config_path}: {error}")
    if args.seed_override is not None:
        data["seed"] = args.seed_override

    result = run_experiment(
        data, threads=args.threads, base_dir=config_path.parent, cache_dir=args.cache_dir
    )
    out_dir = _out_dir(args, config_path.parent / config_path.stem)
    write_result(result, out_dir, data.get("outputs"))

    print(format_header(f"{result.study} study", f"{result.replicates} replicates"))
    for name, table in result.tables.items():
        print(f"[{name}]")
        print(format_table(table))
        print()
    print(f"Replicates: {result.replicates}, failures: {result.failures}"
          + (" (FLAGGED: >1% failed)" if result.flagged else ""))
    print(f"\n💾 Saved to: {out_dir}")
    return 0


# ============================================================================
# frontier
# ============================================================================

def cmd_frontier(args: argparse.Namespace) -> int:
    """Build (or load) the cached Monte-Carlo frontier and print its knots."""
    grid = parse_float_list(args.kappa_grid) or settings.FRONTIER_KAPPAS
    curve = load_or_build_frontier(
        settings.cache_dir(args.cache_dir),
        kappas=grid,
        n=args.n,
        reps=args.reps,
        seed=args.seed,
        threads=args.threads,
        refresh=args.refresh,
    )
    print(format_header("MLE existence frontier", f"n={curve.n}, reps={curve.reps}"))
    print(format_table(pd.DataFrame({"kappa": curve.kappas, "g_mle": curve.gammas})))
    if curve.skipped:
        print(f"\n⚠ Skipped knots: {', '.join(f'{k:g}' for k in curve.skipped)}")
    return 0


# ============================================================================
# fit
# ============================================================================

def cmd_fit(args: argparse.Namespace) -> int:
    """Classical MLE table: estimate, standard error, z and Wald p-value."""
    ds = load_dataset(args.data, args.label_col, center=not args.no_center)
    fit = _fit_or_raise(ds)
    table = _classical_table(ds, fit.beta_hat)

    out_path = _out_dir(args) / f"{Path(args.data).stem}-fit.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_path, index=False, float_format="%.17g")

    print(format_header("Classical logistic MLE", f"n={ds.n}, p={ds.p}, p/n={ds.p / ds.n:.4f}"))
    print(f"separable: no, iterations: {fit.iterations}\n")
    print(format_table(table))
    print(f"\n💾 Saved to: {out_path}")
    return 0


# ============================================================================
# infer
# ============================================================================

def cmd_infer(args: argparse.Namespace) -> int:
    """Fit, probe gamma, solve the fixed point and emit the adjusted report."""
    ds = load_dataset(args.data, args.label_col, center=not args.no_center)
    kappa0 = ds.p / ds.n
    cfg = ProbeConfig(
        kappa_grid=tuple(parse_float_list(args.kappa_grid) or default_grid(kappa0)),
        resamples_per_kappa=args.resamples,
        seed=args.seed,
    )
    out_path = _out_dir(args) / f"{Path(args.data).stem}-report.csv"

    initial_state = {
        "X": ds.X,
        "y": ds.y,
        "names": ds.names,
        "level": args.level,
        "tau_source": args.tau,
        "lrt": args.lrt,
        "probe_config": cfg,
        "curve": None,
        "cache_dir": str(settings.cache_dir(args.cache_dir)),
        "frontier_seed": args.frontier_seed,
        "threads": args.threads,
        "output_path": str(out_path),
        "errors": [],
        "exit_code": 0,
    }
    final_state = inference_graph.invoke(initial_state)

    if final_state["errors"]:
        print("\n❌ ERRORS ENCOUNTERED:")
        for error in final_state["errors"]:
            print(f"  • {error}")
        return final_state.get("exit_code") or 1

    report = final_state["report"]
    print(format_header("Adjusted inference", f"level={args.level:g}, tau from {args.tau}"))
    print(format_params({k: v for k, v in report.header.items() if k != "names"}))
    print()

    side = _classical_table(ds, final_state["fit"].beta_hat)[["name", "beta_hat", "se_classical", "p_wald"]]
    side = side.join(report.table[["debiased", "ci_lo", "ci_hi", "p_t", "p_lrt"]])
    if not args.lrt:
        side = side.drop(columns=["p_lrt"])
    print(format_table(side))
    print(f"\n💾 Saved to: {final_state['saved_path']}")
    return 0


# ============================================================================
# subsample-study
# ============================================================================

def _subsample_fit(context: tuple, seed: np.random.SeedSequence) -> Optional[tuple[float, float, float]]:
    X, y, j, n_sub, beta_full = context
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(X.shape[0], size=n_sub, replace=False))
    Xs, ys = X[idx], y[idx]
    if np.all(ys > 0) or np.all(ys < 0):
        return None
    try:
        fit = fit_mle(Xs, ys)
        if not fit.converged:
            return None
        se_observed = classical_se(Xs, fit.beta_hat)[j]
        se_expected = classical_se(Xs, beta_full)[j]
    except HDLogitError:
        return None
    return float(fit.beta_hat[j]), float(se_observed), float(se_expected)


def cmd_subsample_study(args: argparse.Namespace) -> int:
    """
    Fit the MLE on B subsamples of size round(p / kappa) for each kappa and
    record the target coefficient with its classical standard errors.
    """
    ds = load_dataset(args.data, args.label_col, center=not args.no_center)
    j = ds.column_index(args.variable)
    kappas = parse_float_list(args.kappas)
    if not kappas:
        raise ConfigurationError("--kappas must list at least one value")
    kappa0 = ds.p / ds.n
    for kappa in kappas:
        if not kappa0 - 1e-12 <= kappa < 1:
            raise InvalidParameterError(f"kappa={kappa} must lie in [p/n={kappa0:.4f}, 1)")
    if args.B < 1:
        raise InvalidParameterError("--B must be at least 1")

    beta_full = _fit_or_raise(ds).beta_hat
    reference = float(beta_full[j])
    logger.info(f"Full-data MLE for {ds.names[j]!r}: {reference:.6g}")

    rows, summary_rows, failed = [], [], []
    for kappa, k_seed in zip(kappas, spawn_seeds(args.seed, len(kappas))):
        n_sub = min(int(round(ds.p / kappa)), ds.n)
        outcomes = map_seeded(
            _subsample_fit, (ds.X, ds.y, j, n_sub, beta_full), k_seed.spawn(args.B), args.threads
        )
        kept = []
        for rep, outcome in enumerate(outcomes):
            if outcome is None:
                failed.append({"kappa": kappa, "rep": rep})
                continue
            b, se_obs, se_exp = outcome
            kept.append(outcome)
            rows.append(
                {
                    "kappa": kappa,
                    "rep": rep,
                    "n_sub": n_sub,
                    "beta_hat": b,
                    "se_classical": se_obs,
                    "se_expected": se_exp,
                    "beta_full": reference,
                }
            )
        values = np.array(kept) if kept else np.empty((0, 3))
        median = float(np.median(values[:, 0])) if kept else float("nan")
        summary_rows.append(
            {
                "kappa": kappa,
                "n_sub": n_sub,
                "reps_ok": len(kept),
                "failures": args.B - len(kept),
                "median_beta": median,
                "ratio_to_full": median / reference if reference != 0 else float("nan"),
                "sqrt_n_sd": float(np.sqrt(n_sub) * values[:, 0].std(ddof=1)) if len(kept) > 1 else float("nan"),
                "sqrt_n_se_observed": float(np.sqrt(n_sub) * values[:, 1].mean()) if kept else float("nan"),
                "sqrt_n_se_expected": float(np.sqrt(n_sub) * values[:, 2].mean()) if kept else float("nan"),
            }
        )
        logger.info(f"kappa={kappa:.3f} (n'={n_sub}): {len(kept)}/{args.B} fits, median {median:.4g}")

    out_dir = _out_dir(args)
    stem = f"{Path(args.data).stem}-subsample"
    long_path = out_dir / f"{stem}.csv"
    out_dir.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(
        rows, columns=["kappa", "rep", "n_sub", "beta_hat", "se_classical", "se_expected", "beta_full"]
    ).to_csv(long_path, index=False, float_format="%.17g")
    summary = pd.DataFrame(summary_rows)
    summary.to_csv(out_dir / f"{stem}-summary.csv", index=False, float_format="%.17g")
    dump_json(
        {
            "variable": ds.names[j],
            "beta_full": reference,
            "n": ds.n,
            "p": ds.p,
            "B": args.B,
            "seed": args.seed,
            "failed": failed,
        },
        out_dir / f"{stem}.json",
    )

    print(format_header(f"Subsample study: {ds.names[j]}", f"n={ds.n}, p={ds.p}"))
    print(format_table(summary))
    print(f"\nFull-data MLE: {reference:.6g}; failed fits: {len(failed)}")
    print(f"💾 Saved to: {long_path}")
    return 0
