"""
TypedDict schemas for experiment configs, report rows and the infer pipeline state.

Experiment configs arrive as JSON; the graph state is the LangGraph
``StateGraph`` schema of the infer workflow.
"""

from typing import Annotated, Any, List, Literal, Union
import operator

from typing_extensions import NotRequired, TypedDict


# ============================================================================
# EXPERIMENT CONFIG
# ============================================================================

CovarianceKind = Literal["identity", "ar1", "random_correlation", "explicit"]
StudyKind = Literal["marginal", "bulk", "pvalue", "convergence", "sphere"]
BetaScheme = Literal["zero", "half_nonnull_equal", "single_spike", "explicit"]
ParameterMode = Literal["true", "probefrontier", "classical"]
TauMode = Literal["true", "rss", "ar1"]


class CovarianceDescriptor(TypedDict):
    """JSON description of a covariance model."""
    kind: CovarianceKind
    p: NotRequired[int]
    rho: NotRequired[float]  # ar1
    df: NotRequired[int]  # random_correlation
    seed: NotRequired[int]  # random_correlation
    path: NotRequired[str]  # explicit, CSV relative to the config file


class ProbeSettings(TypedDict, total=False):
    kappa_grid: List[float]
    resamples_per_kappa: int
    crossing_target: float
    early_stop: bool


class ExperimentConfig(TypedDict):
    """One simulation study."""
    study: StudyKind
    n: int
    p: int
    covariance: Union[CovarianceDescriptor, List[CovarianceDescriptor]]
    beta_scheme: BetaScheme
    gamma2: float
    replicates: int
    seed: int
    parameter_mode: NotRequired[ParameterMode]
    tau_mode: NotRequired[TauMode]
    coordinate: NotRequired[Literal["nonnull", "null"]]
    levels: NotRequired[List[float]]
    beta: NotRequired[List[float]]  # explicit scheme
    probe: NotRequired[ProbeSettings]
    name: NotRequired[str]
    outputs: NotRequired[List[str]]  # table names to write; all when absent


# ============================================================================
# REPORT ROWS
# ============================================================================

class ReportRecord(TypedDict):
    """One coordinate of an inference report."""
    j: int
    beta_hat: float
    tau_hat: float
    debiased: float  # beta_hat / alpha_hat
    ci_lo: float
    ci_hi: float
    p_t: float
    p_lrt: float  # NaN unless requested


# ============================================================================
# INFER PIPELINE STATE
# ============================================================================

class InferenceState(TypedDict):
    """
    State for the LangGraph infer workflow.

    Workflow:
    1. separability: reject completely separable data
    2. fit: unrestricted MLE
    3. probe: ProbeFrontier estimate of gamma
    4. solve: fixed point at (p/n, gamma_hat)
    5. report: adjusted per-coordinate table
    6. save: CSV + JSON sidecar
    """
    # Input
    X: Any
    y: Any
    names: List[str]
    level: float
    tau_source: Literal["rss", "ar1"]
    lrt: bool
    probe_config: Any  # ProbeConfig
    curve: Any  # FrontierCurve; loaded by the probe node when None
    cache_dir: str  # Frontier cache used when curve is None
    frontier_seed: int
    threads: int
    output_path: str

    # Node results
    fit: Any  # FitResult
    probe_result: Any  # ProbeResult
    params: Any  # FixedPoint
    report: Any  # InferenceReport
    saved_path: str

    errors: Annotated[List[str], operator.add]  # Collected node errors
    exit_code: int
