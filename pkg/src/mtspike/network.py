"""Dense layered propagation of spike delays via the average delay response rule.

Each neuron's output delay is the fan-in-averaged, weight-scaled mean of its
pre-synaptic delays, passed through a "special ReLU": delays stay
non-negative and an earlier spike means a stronger response.  There is no
membrane voltage and no thresholding; layers exchange plain delay values,
which is what makes the model differentiable end to end.

A network may carry a response ``window``: each non-input layer then fires
that many time units after the pure average-delay term, modelling neurons
that integrate over one coding window and respond in the next.  With a
window of ``T`` every spike time downstream of the input sits at or after
``T``, which is what lets output targets such as ``T + k`` be reached
exactly even though the averaging rule itself has no constant term.  A
window of 0 gives the plain rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coding import DelayVector
from .errors import StructureError

__all__ = [
    "ACTIVATIONS",
    "Network",
    "ForwardTrace",
    "init_network",
    "adr_neuron",
    "forward",
    "forward_batch",
    "activation",
    "activation_derivative",
]

ACTIVATIONS = ("special_relu", "identity")


def activation(x: np.ndarray, kind: str = "special_relu") -> np.ndarray:
    """Apply the layer activation: max(0, x) for special_relu, x unchanged for identity."""
    if kind == "special_relu":
        return np.maximum(x, 0.0)
    if kind == "identity":
        return np.asarray(x, dtype=np.float64)
    raise StructureError(f"unknown activation {kind!r}")


def activation_derivative(x: np.ndarray, kind: str = "special_relu") -> np.ndarray:
    """Derivative of :func:`activation`; the special_relu kink uses subgradient 0."""
    if kind == "special_relu":
        return (np.asarray(x) > 0).astype(np.float64)
    if kind == "identity":
        return np.ones_like(np.asarray(x, dtype=np.float64))
    raise StructureError(f"unknown activation {kind!r}")


@dataclass
class Network:
    """Ordered dense weight matrices between consecutive layers.

    ``weights[l][i, j]`` connects pre-synaptic neuron ``i`` of layer ``l`` to
    post-synaptic neuron ``j`` of layer ``l + 1``; matrix ``l`` therefore has
    shape ``(layer_sizes[l], layer_sizes[l + 1])``.

    ``window`` is the per-layer response offset described in the module
    docstring; it is part of the model (persisted alongside the weights)
    because the same weights produce different spike times under a
    different window.
    """

    layer_sizes: list[int]
    weights: list[np.ndarray]
    activation: str = "special_relu"
    window: float = 0.0

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise StructureError("a network needs at least an input and an output layer")
        if any(int(s) < 1 for s in self.layer_sizes):
            raise StructureError("every layer must contain at least one neuron")
        self.layer_sizes = [int(s) for s in self.layer_sizes]
        if len(self.weights) != len(self.layer_sizes) - 1:
            raise StructureError(
                f"expected {len(self.layer_sizes) - 1} weight matrices, "
                f"got {len(self.weights)}"
            )
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        for l, w in enumerate(self.weights):
            want = (self.layer_sizes[l], self.layer_sizes[l + 1])
            if w.shape != want:
                raise StructureError(
                    f"weight matrix {l} has shape {w.shape}, expected {want}"
                )
            if not np.all(np.isfinite(w)):
                raise StructureError(f"weight matrix {l} contains non-finite values")
        if self.activation not in ACTIVATIONS:
            raise StructureError(f"unknown activation {self.activation!r}")
        self.window = float(self.window)
        if not np.isfinite(self.window) or self.window < 0:
            raise StructureError(f"window must be finite and >= 0, got {self.window}")

    @property
    def num_weights(self) -> int:
        return sum(w.size for w in self.weights)

    def copy(self) -> "Network":
        return Network(
            layer_sizes=list(self.layer_sizes),
            weights=[w.copy() for w in self.weights],
            activation=self.activation,
            window=self.window,
        )


def init_network(
    layer_sizes: list[int],
    rng: np.random.Generator | None = None,
    init_range: tuple[float, float] = (0.0, 1.0),
    activation: str = "special_relu",
    window: float = 0.0,
) -> Network:
    """Build a network with uniformly random weights drawn from ``init_range``."""
    if rng is None:
        rng = np.random.default_rng()
    low, high = init_range
    weights = [
        rng.uniform(low, high, size=(layer_sizes[l], layer_sizes[l + 1]))
        for l in range(len(layer_sizes) - 1)
    ]
    return Network(layer_sizes=list(layer_sizes), weights=weights,
                   activation=activation, window=window)


@dataclass
class ForwardTrace:
    """All intermediate values of one forward pass.

    ``delays[0]`` is the input vector; ``delays[l]`` for ``l >= 1`` is the
    activated output of layer ``l`` and ``nets[l - 1]`` its pre-activation
    average.  Arrays are 1-D for a single sample and 2-D ``(batch, size)``
    for batched propagation.
    """

    nets: list[np.ndarray] = field(default_factory=list)
    delays: list[np.ndarray] = field(default_factory=list)

    @property
    def outputs(self) -> np.ndarray:
        return self.delays[-1]


def adr_neuron(pre_delays: DelayVector, weights_column: np.ndarray,
               activation_kind: str = "special_relu", window: float = 0.0) -> float:
    """Output delay of a single neuron: activated mean of weighted input delays.

    With a nonzero ``window`` the neuron responds that many time units after
    the average-delay term, mirroring :class:`Network.window`.
    """
    col = np.asarray(weights_column, dtype=np.float64)
    n = len(pre_delays)
    if n == 0:
        raise StructureError("neuron has zero fan-in")
    if col.shape != (n,):
        raise StructureError(
            f"weight column shape {col.shape} does not match fan-in {n}"
        )
    net = float(pre_delays.delays @ col) / n
    return float(window) + float(activation(np.float64(net), activation_kind))


def forward(net: Network, input_delays: DelayVector) -> ForwardTrace:
    """Propagate one sample through every layer, recording nets and delays."""
    if len(input_delays) != net.layer_sizes[0]:
        raise StructureError(
            f"input length {len(input_delays)} does not match "
            f"input layer size {net.layer_sizes[0]}"
        )
    nets, delays = _forward_arrays(net, input_delays.delays[np.newaxis, :])
    return ForwardTrace(nets=[z[0] for z in nets], delays=[d[0] for d in delays])


def forward_batch(net: Network, delay_matrix: np.ndarray) -> ForwardTrace:
    """Propagate a ``(batch, input_size)`` delay matrix through every layer."""
    delay_matrix = np.asarray(delay_matrix, dtype=np.float64)
    if delay_matrix.ndim != 2 or delay_matrix.shape[1] != net.layer_sizes[0]:
        raise StructureError(
            f"expected a (batch, {net.layer_sizes[0]}) delay matrix, "
            f"got shape {delay_matrix.shape}"
        )
    nets, delays = _forward_arrays(net, delay_matrix)
    return ForwardTrace(nets=nets, delays=delays)


def _forward_arrays(net: Network, inputs: np.ndarray):
    nets: list[np.ndarray] = []
    delays: list[np.ndarray] = [inputs]
    x = inputs
    for w in net.weights:
        z = x @ w / w.shape[0]
        x = net.window + activation(z, net.activation)
        nets.append(z)
        delays.append(x)
    return nets, delays
