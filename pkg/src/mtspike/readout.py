"""Target delay assignment and class readout.

Two regimes are supported.  With a single output neuron, each class owns a
"delay checkpoint" spaced ``excitatory_offset`` apart beyond the encoding
window, and readout picks the checkpoint nearest to the actual output delay.
With one output neuron per class, the class's neuron gets the short
(excitatory) target and all others the longer inhibitory one, and readout
picks the neuron that fires earliest.  All targets sit at or beyond the
encoding window, and ties always break toward the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EvaluationError

__all__ = [
    "MODES",
    "TargetScheme",
    "target_vector",
    "target_matrix",
    "read_class",
    "read_class_batch",
    "pre_window_count",
]

MODES = ("single_neuron", "multi_neuron")


@dataclass(frozen=True)
class TargetScheme:
    """Readout regime with its target delays."""

    mode: str
    window: float
    num_classes: int
    excitatory_offset: float = 0.0
    inhibitory_offset: float = 4.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown readout mode {self.mode!r}")
        if self.num_classes < 1:
            raise ConfigError("num_classes must be >= 1")
        if self.window < 0:
            raise ConfigError("encoding window must be non-negative")
        if self.excitatory_offset < 0:
            raise ConfigError("excitatory offset must be non-negative")
        if self.mode == "single_neuron" and self.num_classes > 1 and self.excitatory_offset <= 0:
            raise ConfigError("single-neuron checkpoints need a positive excitatory offset")
        if self.mode == "multi_neuron" and not self.excitatory_offset < self.inhibitory_offset:
            raise ConfigError("excitatory offset must be smaller than inhibitory offset")

    @property
    def output_size(self) -> int:
        """Required size of the network's output layer."""
        return 1 if self.mode == "single_neuron" else self.num_classes

    @property
    def checkpoints(self) -> np.ndarray:
        """Per-class target delays of the single-neuron regime."""
        return self.window + np.arange(self.num_classes) * self.excitatory_offset


def target_vector(scheme: TargetScheme, class_index: int) -> np.ndarray:
    """Target delay of every output neuron for one class."""
    if not 0 <= class_index < scheme.num_classes:
        raise ConfigError(
            f"class index {class_index} out of range [0, {scheme.num_classes})"
        )
    if scheme.mode == "single_neuron":
        return np.array([scheme.window + class_index * scheme.excitatory_offset])
    targets = np.full(scheme.num_classes, scheme.window + scheme.inhibitory_offset)
    targets[class_index] = scheme.window + scheme.excitatory_offset
    return targets


def target_matrix(scheme: TargetScheme) -> np.ndarray:
    """Stacked ``(num_classes, output_size)`` targets, row per class."""
    return np.stack([target_vector(scheme, c) for c in range(scheme.num_classes)])


def read_class(scheme: TargetScheme, actual: np.ndarray) -> int:
    """Classify one output delay vector; ties break to the lowest class index."""
    return int(read_class_batch(scheme, np.atleast_2d(np.asarray(actual)))[0])


def read_class_batch(scheme: TargetScheme, actual: np.ndarray) -> np.ndarray:
    """Classify a ``(batch, output_size)`` matrix of output delays."""
    actual = np.asarray(actual, dtype=np.float64)
    if actual.ndim != 2 or actual.shape[1] != scheme.output_size:
        raise EvaluationError(
            f"expected (batch, {scheme.output_size}) output delays, "
            f"got shape {actual.shape}"
        )
    if not np.all(np.isfinite(actual)):
        raise EvaluationError("output delays contain non-finite values")
    if scheme.mode == "single_neuron":
        distances = np.abs(actual - scheme.checkpoints[np.newaxis, :])
        return np.argmin(distances, axis=1)
    return np.argmin(actual, axis=1)


def pre_window_count(scheme: TargetScheme, actual: np.ndarray) -> int:
    """How many output delays fall before the encoding window ends.

    Every legal target is at or after the window, so delays below it are
    early firings.  They still classify normally (nearest checkpoint or
    earliest spike); this diagnostic just counts them.
    """
    actual = np.asarray(actual, dtype=np.float64)
    return int(np.sum(actual < scheme.window))
