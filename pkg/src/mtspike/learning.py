"""Temporal error backpropagation, the heuristic loss, and batch training.

The learning signal is the per-neuron delay residual ``actual - target``.
Gradients flow through the averaged delay responses in one of two modes:

* ``paper`` — hidden deltas are plain weighted sums of downstream deltas.
  The omitted fan-in factor is absorbable into the learning rate, and
  gradients also pass through clipped neurons.  Default for training.
* ``exact`` — the strict chain rule, including the fan-in average and the
  activation derivative at every layer.  This is the mode the
  finite-difference check validates.

The heuristic loss restricts output-layer learning to the "involved" neurons
of the current class: walking a depth-first path through a binary decision
tree over class labels visits exactly neurons ``0..class_index``, with the
last one excitatory and the earlier ones inhibitory.  Only the synapses of
involved neurons are updated, which reduces weight competition between
classes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError, StructureError
from .network import (
    ForwardTrace,
    Network,
    activation_derivative,
    forward_batch,
)
from .readout import TargetScheme, read_class_batch, target_matrix

__all__ = [
    "GRADIENT_MODES",
    "UPDATE_GATES",
    "BATCH_REDUCTIONS",
    "TrainConfig",
    "TemporalError",
    "EpochStats",
    "involved_set",
    "output_delta",
    "temporal_error",
    "backward",
    "batch_indices",
    "train",
]

log = logging.getLogger(__name__)

GRADIENT_MODES = ("paper", "exact")
UPDATE_GATES = ("always", "on_misclassification")
BATCH_REDUCTIONS = ("sum", "mean")


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run.

    ``batch_reduction`` picks how per-sample gradients combine within a
    batch before the weight step: ``sum`` applies the per-sample rule
    literally, ``mean`` divides by the batch size.  At a fixed learning
    rate the sum variant takes steps ``batch_size`` times larger, which
    destabilises deeper networks; the multilayer presets therefore use
    ``mean`` while single-layer ones keep ``sum``.
    """

    learning_rate: float = 0.01
    batch_size: int = 30
    epochs: int = 100
    seed: int = 0
    gradient_mode: str = "paper"
    heuristic: bool = False
    update_gate: str = "always"
    batch_reduction: str = "sum"
    init_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigError("learning rate must be non-negative")
        if self.batch_size < 1:
            raise ConfigError("batch size must be >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ConfigError(f"unknown gradient mode {self.gradient_mode!r}")
        if self.update_gate not in UPDATE_GATES:
            raise ConfigError(f"unknown update gate {self.update_gate!r}")
        if self.batch_reduction not in BATCH_REDUCTIONS:
            raise ConfigError(f"unknown batch reduction {self.batch_reduction!r}")
        low, high = self.init_range
        if not low < high:
            raise ConfigError("init_range must be an increasing (low, high) pair")


@dataclass
class TemporalError:
    """Output-layer learning signal for one sample.

    ``deltas`` holds ``actual - target`` for involved neurons and 0
    elsewhere; ``error`` is half the sum of squared involved residuals.
    """

    deltas: np.ndarray
    error: float
    involved: np.ndarray


@dataclass
class EpochStats:
    epoch: int
    mse: float
    train_accuracy: float
    test_accuracy: float | None = None


def involved_set(class_index: int, num_classes: int) -> tuple[np.ndarray, int]:
    """Output neurons participating in learning for one class.

    The depth-first path for class ``c`` visits neurons ``0..c``; the deepest
    node ``c`` is the excitatory neuron, every earlier one is inhibitory.
    """
    if not 0 <= class_index < num_classes:
        raise ConfigError(
            f"class index {class_index} out of range [0, {num_classes})"
        )
    return np.arange(class_index + 1), class_index


def output_delta(actual: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Elementwise output-layer delta ``actual - target``."""
    actual = np.asarray(actual, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if actual.shape != target.shape:
        raise StructureError(
            f"actual shape {actual.shape} does not match target shape {target.shape}"
        )
    return actual - target


def temporal_error(
    actual: np.ndarray, target: np.ndarray, involved: np.ndarray | None = None
) -> TemporalError:
    """Residuals and squared error of one sample, optionally restricted."""
    deltas = output_delta(actual, target)
    if involved is None:
        involved = np.arange(deltas.shape[0])
    else:
        involved = np.asarray(involved, dtype=np.int64)
        keep = np.zeros(deltas.shape[0], dtype=bool)
        keep[involved] = True
        deltas = np.where(keep, deltas, 0.0)
    return TemporalError(
        deltas=deltas,
        error=0.5 * float(np.sum(deltas[involved] ** 2)),
        involved=involved,
    )


def backward(
    net: Network,
    trace: ForwardTrace,
    delta_out: np.ndarray,
    involved: np.ndarray | None = None,
    mode: str = "paper",
) -> list[np.ndarray]:
    """Per-layer weight gradients of the squared delay error.

    ``delta_out`` is the raw output residual ``actual - target`` (batched or
    single-sample).  When ``involved`` is given, residuals of all other
    output neurons are zeroed first, so their weight columns receive no
    update and upstream deltas sum over involved neurons only.
    """
    if mode not in GRADIENT_MODES:
        raise ConfigError(f"unknown gradient mode {mode!r}")
    depth = len(net.weights)
    if len(trace.nets) != depth or len(trace.delays) != depth + 1:
        raise StructureError("trace depth does not match the network")
    nets = [np.atleast_2d(z) for z in trace.nets]
    delays = [np.atleast_2d(d) for d in trace.delays]
    for l, d in enumerate(delays):
        if d.shape[1] != net.layer_sizes[l]:
            raise StructureError(f"trace layer {l} has width {d.shape[1]}, "
                                 f"expected {net.layer_sizes[l]}")
    delta = np.atleast_2d(np.asarray(delta_out, dtype=np.float64))
    if delta.shape != (delays[0].shape[0], net.layer_sizes[-1]):
        raise StructureError("delta_out shape does not match the output layer")
    if involved is not None:
        keep = np.zeros(net.layer_sizes[-1], dtype=bool)
        keep[np.asarray(involved, dtype=np.int64)] = True
        delta = np.where(keep, delta, 0.0)
    return _gradients(net, nets, delays, delta, mode)


def _gradients(
    net: Network,
    nets: list[np.ndarray],
    delays: list[np.ndarray],
    delta: np.ndarray,
    mode: str,
) -> list[np.ndarray]:
    """Backward sweep; ``delta`` is the masked output residual, batch-major."""
    if mode == "exact":
        delta = delta * activation_derivative(nets[-1], net.activation)
    grads: list[np.ndarray] = [np.empty(0)] * len(net.weights)
    for l in reversed(range(len(net.weights))):
        fan_in = net.layer_sizes[l]
        grads[l] = delays[l].T @ delta / fan_in
        if l > 0:
            delta = delta @ net.weights[l].T
            if mode == "exact":
                delta = delta / fan_in * activation_derivative(nets[l - 1], net.activation)
    return grads


def batch_indices(n: int, batch_size: int, rng: np.random.Generator):
    """Yield one epoch's batches: a seeded shuffle cut into contiguous slices."""
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def train(
    net: Network,
    data,
    scheme: TargetScheme,
    cfg: TrainConfig,
    eval_data=None,
    rng: np.random.Generator | None = None,
) -> tuple[Network, list[EpochStats]]:
    """Batch gradient descent on the temporal error; mutates ``net`` in place.

    Per epoch the samples are reshuffled, per-sample gradients are combined
    over each batch (summed or averaged per ``cfg.batch_reduction``), and
    weights move by ``-learning_rate`` times the combined gradient at batch
    end.  The recorded MSE is the mean squared residual over all samples of
    the epoch (restricted to involved output neurons when the heuristic loss
    is active).  ``eval_data`` adds a per-epoch test accuracy.  Fully
    deterministic for a fixed config seed (or caller-supplied generator).

    Raises :class:`DivergenceError` as soon as an epoch's MSE is non-finite.
    """
    if len(data) == 0:
        raise ConfigError("training dataset is empty")
    if scheme.output_size != net.layer_sizes[-1]:
        raise ConfigError(
            f"readout expects {scheme.output_size} output neurons, "
            f"network has {net.layer_sizes[-1]}"
        )
    if data.delays.shape[1] != net.layer_sizes[0]:
        raise StructureError(
            f"encoded input width {data.delays.shape[1]} does not match "
            f"input layer size {net.layer_sizes[0]}"
        )
    if cfg.heuristic and scheme.mode != "multi_neuron":
        raise ConfigError("the heuristic loss requires one output neuron per class")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    labels = data.labels
    targets = target_matrix(scheme)[labels]
    neuron_index = np.arange(scheme.output_size)
    history: list[EpochStats] = []

    for epoch in range(1, cfg.epochs + 1):
        squared_sum = 0.0
        term_count = 0
        hit_count = 0
        for idx in batch_indices(len(data), cfg.batch_size, rng):
            trace = forward_batch(net, data.delays[idx])
            resid = trace.outputs - targets[idx]
            if cfg.heuristic:
                mask = neuron_index[np.newaxis, :] <= labels[idx, np.newaxis]
                resid = np.where(mask, resid, 0.0)
                term_count += int(mask.sum())
            else:
                term_count += resid.size
            squared_sum += float(np.sum(resid * resid))
            predicted = read_class_batch(scheme, trace.outputs)
            hit_count += int(np.sum(predicted == labels[idx]))

            delta = resid
            if cfg.update_gate == "on_misclassification":
                delta = np.where((predicted == labels[idx])[:, np.newaxis], 0.0, delta)
            grads = _gradients(net, trace.nets, trace.delays, delta, cfg.gradient_mode)
            scale = cfg.learning_rate
            if cfg.batch_reduction == "mean":
                scale /= len(idx)
            for w, g in zip(net.weights, grads):
                w -= scale * g

        mse = squared_sum / term_count
        if not np.isfinite(mse):
            raise DivergenceError(f"training MSE became non-finite at epoch {epoch}")
        test_accuracy = None
        if eval_data is not None:
            outputs = forward_batch(net, eval_data.delays).outputs
            predictions = read_class_batch(scheme, outputs)
            test_accuracy = float(np.mean(predictions == eval_data.labels))
        stats = EpochStats(
            epoch=epoch,
            mse=mse,
            train_accuracy=hit_count / len(data),
            test_accuracy=test_accuracy,
        )
        history.append(stats)
        level = logging.INFO if epoch % max(1, cfg.epochs // 10) == 0 else logging.DEBUG
        log.log(
            level,
            "epoch %d/%d mse=%.6f train_acc=%.4f%s",
            epoch,
            cfg.epochs,
            mse,
            stats.train_accuracy,
            "" if test_accuracy is None else f" test_acc={test_accuracy:.4f}",
        )
    return net, history
