"""Single-spike temporal coding of numeric attributes and grayscale images.

Every input neuron emits at most one spike; the stimulus is carried by the
spike's delay on a grid of ``resolution`` slots of width ``unit`` spanning the
encoding window.  Strong stimuli fire early (delay 0), weak stimuli late
(delay up to the full window).  Three encoders are provided:

* :func:`encode_numeric` — one neuron per numeric attribute, delay inversely
  proportional to the min/max-normalized value.
* :func:`encode_pixels_1to1` — one neuron per pixel, delay inversely
  proportional to intensity; an exactly-zero pixel emits no spike.
* :func:`encode_conv_like` — one neuron per kernel position of a sliding
  square receptive field; delay counts the binarized zeros inside the field.
  Trades temporal resolution for a smaller input layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

__all__ = [
    "CodingParams",
    "DelayVector",
    "encode_numeric",
    "encode_pixels_1to1",
    "encode_conv_like",
    "neuron_count",
]


@dataclass(frozen=True)
class CodingParams:
    """Parameters of the time-coding grid.

    ``resolution = window / unit`` must be a whole number of slots.  For
    conv-like coding the kernel must satisfy ``kernel**2 == resolution`` so
    that the zero-count inside one kernel position lands exactly on the slot
    grid (``unit * kernel**2 == window``).
    """

    window: float = 16.0
    unit: float = 1.0
    kernel: int | None = None
    stride: int = 1
    binarize_threshold: float = 128.0
    pad: str = "zero"

    def __post_init__(self):
        if not (self.window > 0 and self.unit > 0):
            raise ConfigError("window and unit must be positive")
        ratio = self.window / self.unit
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError(
                f"window/unit must be a positive integer, got {ratio!r}"
            )
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.kernel is not None:
            if self.kernel < 1:
                raise ConfigError("kernel width must be >= 1")
            if self.kernel * self.kernel != self.resolution:
                raise ConfigError(
                    f"kernel**2 must equal the temporal resolution: "
                    f"{self.kernel}**2 != {self.resolution}"
                )
        if self.pad != "zero":
            raise ConfigError(f"unknown padding policy {self.pad!r}")
        if not self.binarize_threshold > 0:
            raise ConfigError("binarize_threshold must be positive")

    @property
    def resolution(self) -> int:
        """Number of delay slots in the encoding window."""
        return round(self.window / self.unit)


@dataclass
class DelayVector:
    """Per-neuron spike delays for one layer and one sample.

    ``fired[i]`` is False when neuron ``i`` emitted no spike; the encoders
    store the full window delay in ``delays[i]`` for such entries (weakest
    possible stimulus) so downstream averaging keeps a fixed fan-in, while
    spike counting skips them.
    """

    delays: np.ndarray
    fired: np.ndarray

    def __post_init__(self):
        self.delays = np.asarray(self.delays, dtype=np.float64)
        self.fired = np.asarray(self.fired, dtype=bool)
        if self.delays.shape != self.fired.shape or self.delays.ndim != 1:
            raise DataError("delays and fired must be 1-D arrays of equal length")

    def __len__(self) -> int:
        return self.delays.shape[0]

    @property
    def spike_count(self) -> int:
        """Number of spikes actually emitted."""
        return int(np.count_nonzero(self.fired))


def encode_numeric(
    values: np.ndarray,
    per_attribute_min_max: np.ndarray,
    p: CodingParams,
) -> DelayVector:
    """Encode numeric attributes as one spike delay per attribute.

    Each value is normalized against its attribute's ``(min, max)`` range and
    mapped to ``unit * round(resolution * (1 - normalized))``, clamped to the
    window.  Values outside the range (e.g. test samples encoded with ranges
    from a training split) clamp to the nearest window edge.  Every attribute
    fires.  Ties in the rounding follow numpy's round-half-to-even.
    """
    values = np.asarray(values, dtype=np.float64)
    ranges = np.asarray(per_attribute_min_max, dtype=np.float64)
    if ranges.shape != (values.shape[0], 2):
        raise ConfigError(
            f"expected {values.shape[0]}x2 min/max ranges, got shape {ranges.shape}"
        )
    if not np.all(np.isfinite(values)):
        raise DataError("attribute values must be finite")
    lo, hi = ranges[:, 0], ranges[:, 1]
    if not np.all(hi > lo):
        bad = int(np.argmin(hi - lo))
        raise ConfigError(f"degenerate range for attribute {bad}: max must exceed min")
    normalized = (values - lo) / (hi - lo)
    delays = p.unit * np.round(p.resolution * (1.0 - normalized))
    delays = np.clip(delays, 0.0, p.window)
    return DelayVector(delays=delays, fired=np.ones(values.shape[0], dtype=bool))


def encode_pixels_1to1(
    image: np.ndarray, p: CodingParams, p_max: float = 255.0
) -> DelayVector:
    """Encode a square grayscale image, one neuron per pixel.

    Delay is ``unit * round(resolution * (1 - intensity / p_max))``; a pixel
    with intensity exactly zero emits no spike (its delay entry is set to the
    full window).  Pixels are emitted row-major, so the output has one entry
    per pixel.
    """
    if p_max <= 0:
        raise ConfigError("p_max must be positive")
    grid = _square_image(image)
    flat = grid.reshape(-1)
    fired = flat > 0
    delays = p.unit * np.round(p.resolution * (1.0 - flat / p_max))
    delays = np.clip(delays, 0.0, p.window)
    delays[~fired] = p.window
    return DelayVector(delays=delays, fired=fired)


def encode_conv_like(image: np.ndarray, p: CodingParams) -> DelayVector:
    """Encode a square grayscale image with a sliding binarizing kernel.

    Pixels at or above ``binarize_threshold`` count as 1, the rest as 0.  For
    each kernel position the delay is ``unit`` times the number of 0s inside
    the kernel; since the kernel holds ``resolution`` cells, delays span the
    whole window.  The image is zero-padded on the right/bottom edges whenever
    the kernel grid would otherwise run past it, and every output neuron
    fires (an all-zero field simply fires at the full window delay).
    """
    if p.kernel is None:
        raise ConfigError("conv-like coding requires a kernel width")
    grid = _square_image(image)
    side = grid.shape[0]
    k, stride = p.kernel, p.stride
    if k > side:
        raise ConfigError(f"kernel width {k} exceeds image width {side}")
    positions = _grid_positions(side, k, stride)
    binary = (grid >= p.binarize_threshold).astype(np.int64)
    extent = (positions - 1) * stride + k
    if extent > side:
        padded = np.zeros((extent, extent), dtype=np.int64)
        padded[:side, :side] = binary
        binary = padded
    windows = np.lib.stride_tricks.sliding_window_view(binary, (k, k))
    ones = windows[::stride, ::stride].sum(axis=(2, 3))
    zeros = k * k - ones[:positions, :positions]
    delays = (p.unit * zeros).reshape(-1).astype(np.float64)
    return DelayVector(delays=delays, fired=np.ones(delays.shape[0], dtype=bool))


def neuron_count(image_width: int, kernel: int, stride: int) -> int:
    """Number of input neurons produced by conv-like coding.

    ``ceil((P - k + 1) / S) ** 2`` kernel positions for a P-wide image.
    """
    if kernel < 1 or kernel > image_width:
        raise ConfigError(
            f"kernel width must be in [1, {image_width}], got {kernel}"
        )
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    return _grid_positions(image_width, kernel, stride) ** 2


def _grid_positions(side: int, kernel: int, stride: int) -> int:
    return math.ceil((side - kernel + 1) / stride)


def _square_image(image: np.ndarray) -> np.ndarray:
    grid = np.asarray(image, dtype=np.float64)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise DataError(f"expected a square 2-D image, got shape {grid.shape}")
    return grid
