"""Exception hierarchy shared across the package.

Every error carries a short machine-greppable code; the CLI prints it as a
single-line ``mtspike: error [CODE] message`` before exiting nonzero.
"""


class MTSpikeError(Exception):
    """Base class for all package errors."""

    code = "E_INTERNAL"


class ConfigError(MTSpikeError):
    """Invalid or inconsistent configuration (parameters, presets, config files)."""

    code = "E_CONFIG"


class DataError(MTSpikeError):
    """Malformed or unreadable input data (CSV rows, IDX payloads, counts)."""

    code = "E_DATA"


class StructureError(MTSpikeError):
    """Network/input shape mismatch or structurally invalid network."""

    code = "E_SHAPE"


class ModelIOError(MTSpikeError):
    """Corrupt, truncated, or unsupported model files."""

    code = "E_MODEL"


class DivergenceError(MTSpikeError):
    """Training aborted because the loss became non-finite."""

    code = "E_DIVERGED"


class EvaluationError(MTSpikeError):
    """Evaluation encountered values that cannot be classified (e.g. NaN delays)."""

    code = "E_EVAL"
