"""Validation utilities for experiment configs and covariance descriptors."""

from typing import Any, Dict, List

COVARIANCE_KINDS = ("identity", "ar1", "random_correlation", "explicit")
STUDIES = ("marginal", "bulk", "pvalue", "convergence", "sphere")
BETA_SCHEMES = ("zero", "half_nonnull_equal", "single_spike", "explicit")
PARAMETER_MODES = ("true", "probefrontier", "classical")
TAU_MODES = ("true", "rss", "ar1")
COORDINATES = ("nonnull", "null")


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def validate_covariance_descriptor(descriptor: Any, p: Any = None) -> tuple[bool, List[str]]:
    """
    Validate one covariance descriptor.

    Args:
        descriptor: e.g. {"kind": "ar1", "p": 800, "rho": 0.5}
        p: Dimension the descriptor must match, when known

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    errors = []

    if not isinstance(descriptor, dict):
        errors.append("covariance: must be an object")
        return False, errors

    kind = descriptor.get("kind")
    if kind not in COVARIANCE_KINDS:
        errors.append(f"covariance.kind: must be one of {list(COVARIANCE_KINDS)}, got {kind!r}")
        return False, errors

    if kind != "explicit":
        dim = descriptor.get("p", p)
        if not _is_int(dim) or dim < 1:
            errors.append("covariance.p: must be a positive integer")
        elif _is_int(p) and dim != p:
            errors.append(f"covariance.p: {dim} does not match config p={p}")

    if kind == "ar1":
        rho = descriptor.get("rho")
        if not _is_number(rho) or not -1 < rho < 1:
            errors.append("covariance.rho: must be a number in (-1, 1)")
    elif kind == "random_correlation":
        df = descriptor.get("df", 10)
        if not _is_int(df) or df < 1:
            errors.append("covariance.df: must be a positive integer")
        if "seed" in descriptor and not _is_int(descriptor["seed"]):
            errors.append("covariance.seed: must be an integer")
    elif kind == "explicit":
        if not isinstance(descriptor.get("path"), str) or not descriptor.get("path"):
            errors.append("covariance.path: explicit covariances need a CSV path")

    return len(errors) == 0, errors


def validate_experiment_config(data: Dict[str, Any]) -> tuple[bool, List[str]]:
    """
    Validate a simulation config before any work starts.

    Args:
        data: Parsed JSON config

    Returns:
        Tuple of (is_valid, list_of_errors); each error names its field
    """
    errors = []

    if not isinstance(data, dict) or not data:
        errors.append("config: must be a non-empty JSON object")
        return False, errors

    study = data.get("study")
    if study not in STUDIES:
        errors.append(f"study: must be one of {list(STUDIES)}, got {study!r}")

    for key in ("n", "p", "replicates", "seed"):
        if key not in data:
            errors.append(f"{key}: required field missing")
        elif not _is_int(data[key]) or (key != "seed" and data[key] < 1):
            errors.append(f"{key}: must be a positive integer")
    if errors:
        return False, errors

    n, p = data["n"], data["p"]
    if p >= n:
        errors.append(f"p: must be smaller than n (got p={p}, n={n})")

    gamma2 = data.get("gamma2", 0.0)
    if not _is_number(gamma2) or gamma2 < 0:
        errors.append("gamma2: must be a non-negative number")

    scheme = data.get("beta_scheme", "half_nonnull_equal")
    if scheme not in BETA_SCHEMES:
        errors.append(f"beta_scheme: must be one of {list(BETA_SCHEMES)}, got {scheme!r}")
    if scheme == "zero" and _is_number(gamma2) and gamma2 != 0:
        errors.append("gamma2: the zero beta scheme has no signal; set gamma2 to 0")
    if scheme == "explicit":
        beta = data.get("beta")
        if not isinstance(beta, list) or len(beta) != p or not all(_is_number(b) for b in beta):
            errors.append(f"beta: explicit scheme needs a list of {p} numbers")

    covariance = data.get("covariance", {"kind": "identity"})
    descriptors = covariance if isinstance(covariance, list) else [covariance]
    if isinstance(covariance, list) and study != "bulk":
        errors.append("covariance: a list of models is only supported by the bulk study")
    if not descriptors:
        errors.append("covariance: must not be empty")
    for descriptor in descriptors:
        _, cov_errors = validate_covariance_descriptor(descriptor, p)
        errors.extend(cov_errors)

    parameter_mode = data.get("parameter_mode", "true")
    if parameter_mode not in PARAMETER_MODES:
        errors.append(f"parameter_mode: must be one of {list(PARAMETER_MODES)}")
    elif parameter_mode == "classical" and study not in ("marginal", "bulk"):
        errors.append("parameter_mode: 'classical' only applies to marginal and bulk studies")

    tau_mode = data.get("tau_mode", "true")
    if tau_mode not in TAU_MODES:
        errors.append(f"tau_mode: must be one of {list(TAU_MODES)}")

    coordinate = data.get("coordinate", "null" if study == "pvalue" else "nonnull")
    if coordinate not in COORDINATES:
        errors.append(f"coordinate: must be one of {list(COORDINATES)}")
    elif study == "pvalue" and coordinate != "null":
        errors.append("coordinate: the p-value study tracks a null coordinate")

    levels = data.get("levels", [0.99, 0.98, 0.95, 0.9, 0.8])
    if not isinstance(levels, list) or not levels or not all(
        _is_number(lv) and 0 < lv < 1 for lv in levels
    ):
        errors.append("levels: must be a non-empty list of numbers in (0, 1)")

    if study in ("convergence", "sphere"):
        if descriptors and descriptors[0].get("kind") not in (None, "identity"):
            errors.append(f"covariance: the {study} study requires the identity covariance")
        if study == "convergence" and _is_number(gamma2) and gamma2 == 0:
            errors.append("gamma2: the convergence study needs gamma2 > 0 (alpha(n) is undefined at 0)")

    outputs = data.get("outputs")
    if outputs is not None and (
        not isinstance(outputs, list) or not all(isinstance(o, str) and o for o in outputs)
    ):
        errors.append("outputs: must be a list of table names")

    if "cache_dir" in data:
        errors.append("cache_dir: not a config field; use --cache-dir or HDLOGIT_CACHE")

    probe = data.get("probe", {})
    if not isinstance(probe, dict):
        errors.append("probe: must be an object")
    elif "kappa_grid" in probe:
        grid = probe["kappa_grid"]
        if not isinstance(grid, list) or not all(_is_number(k) for k in grid):
            errors.append("probe.kappa_grid: must be a list of numbers")

    return len(errors) == 0, errors
