"""Schema package initialization."""

from schemas.experiment import (
    CovarianceDescriptor,
    ExperimentConfig,
    InferenceState,
    ProbeSettings,
    ReportRecord,
)

from schemas.validators import (
    validate_covariance_descriptor,
    validate_experiment_config,
)

__all__ = [
    # Config schemas
    "CovarianceDescriptor",
    "ExperimentConfig",
    "ProbeSettings",

    # Outputs and workflow state
    "ReportRecord",
    "InferenceState",

    # Validators
    "validate_covariance_descriptor",
    "validate_experiment_config",
]
