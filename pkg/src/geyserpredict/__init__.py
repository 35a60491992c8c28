"""Geyser eruption prediction: log ingestion, interval regression, offset
predictors and windowed-accuracy scoring."""

from geyserpredict.errors import (
    DegenerateDesign,
    EmptyInput,
    EmptyResult,
    GeyserError,
    MismatchedActuals,
    MissingColumn,
    NoMatches,
    NonConvergenceWarning,
    UnresolvableEnd,
)
from geyserpredict.ingest import ColumnMapping, EruptionRecord, Precision, RowError, parse_records
from geyserpredict.prep import FilterConfig, IntervalPair, OffsetPairing
from geyserpredict.regress import FitOptions, RegressionModel

__version__ = "0.1.0"

__all__ = [
    "ColumnMapping",
    "DegenerateDesign",
    "EmptyInput",
    "EmptyResult",
    "EruptionRecord",
    "FilterConfig",
    "FitOptions",
    "GeyserError",
    "IntervalPair",
    "MismatchedActuals",
    "MissingColumn",
    "NoMatches",
    "NonConvergenceWarning",
    "OffsetPairing",
    "Precision",
    "RegressionModel",
    "RowError",
    "UnresolvableEnd",
    "parse_records",
]
