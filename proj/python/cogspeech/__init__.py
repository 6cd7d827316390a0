"""Python bindings for the cogspeech feature extraction and evaluation core."""

from ._cogspeech import (
    ConfigError,
    ConvergenceError,
    DataError,
    Error,
    ParseError,
    VersionError,
    cross_validate,
    extract,
    feature_groups,
    feature_names,
    generate_fixtures,
    parse_chat,
    read_matrix,
    registry_hash,
    tsne,
    validate_report,
)

REPORT_COLUMNS = ("kind", "protocol", "model", "task", "seed", "fold", "id", "y_true", "y_pred", "metric", "value")
TRANSCRIPT_COLUMNS = ("id", "text", "label")

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "Error",
    "ParseError",
    "VersionError",
    "REPORT_COLUMNS",
    "TRANSCRIPT_COLUMNS",
    "cross_validate",
    "extract",
    "feature_groups",
    "feature_names",
    "generate_fixtures",
    "parse_chat",
    "read_matrix",
    "registry_hash",
    "tsne",
    "validate_report",
]
