"""Configuration ingestion, experiment pipelines and report emission."""

from .config import (
    ConfigError,
    ConfigParseError,
    ConfigValidationError,
    ExperimentSpec,
    MissingFieldError,
    UnknownKeyError,
    ingest_config,
    spec_from_dict,
)
from .run import MissingInputError, ReportBundle, run_experiment

__all__ = [
    "ConfigError", "ConfigParseError", "ConfigValidationError", "ExperimentSpec", "MissingFieldError",
    "MissingInputError", "ReportBundle", "UnknownKeyError", "ingest_config", "run_experiment", "spec_from_dict",
]
