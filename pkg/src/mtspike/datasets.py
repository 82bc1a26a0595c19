"""Dataset loading, stratified splitting, and whole-dataset encoding.

Two on-disk formats are supported: the classic 5-column iris CSV (four
numeric attributes plus a class label, header optional) and IDX image/label
files as distributed for MNIST (big-endian, optionally gzipped).  Loaded
data lands in a :class:`RawDataset`; :func:`encode_dataset` turns one into
spike delays via an :class:`EncodingSpec`, which also knows how to snapshot
itself into a model file so evaluation reuses the exact training encoding.
"""

from __future__ import annotations

import gzip
import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from .coding import (
    CodingParams,
    DelayVector,
    encode_conv_like,
    encode_numeric,
    encode_pixels_1to1,
)
from .errors import ConfigError, DataError

__all__ = [
    "SCHEMES",
    "RawDataset",
    "EncodedDataset",
    "EncodingSpec",
    "load_iris",
    "load_mnist_idx",
    "save_mnist_idx",
    "attribute_ranges",
    "split_dataset",
    "stratified_subset",
    "encode_dataset",
]

log = logging.getLogger(__name__)

SCHEMES = ("numeric", "one_to_one", "conv")

IDX_IMAGE_MAGIC = 2051
IDX_LABEL_MAGIC = 2049


@dataclass
class RawDataset:
    """Unencoded samples: numeric rows (N, F) or grayscale images (N, H, W)."""

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...] | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1:
            raise DataError("labels must be a 1-D array")
        if self.features.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"{self.features.shape[0]} samples but {self.labels.shape[0]} labels"
            )
        if self.labels.size and self.labels.min() < 0:
            raise DataError("labels must be non-negative")

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def num_classes(self) -> int:
        if self.class_names is not None:
            return len(self.class_names)
        return int(self.labels.max()) + 1 if len(self) else 0


@dataclass
class EncodedDataset:
    """Spike-delay matrix (N, M) plus fired mask and labels."""

    delays: np.ndarray
    fired: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.delays.shape != self.fired.shape:
            raise DataError("delay and fired matrices must have the same shape")
        if self.delays.shape[0] != self.labels.shape[0]:
            raise DataError("sample count mismatch between delays and labels")

    def __len__(self) -> int:
        return self.labels.shape[0]

    def sample(self, i: int) -> tuple[DelayVector, int]:
        vec = DelayVector(delays=self.delays[i].copy(), fired=self.fired[i].copy())
        return vec, int(self.labels[i])


@dataclass(frozen=True, eq=False)
class EncodingSpec:
    """A coding scheme plus everything needed to reproduce it later.

    ``ranges`` (per-attribute min/max, shape (F, 2)) is required for numeric
    coding and is normally fitted on the training split, so test values
    outside the seen range clamp to the window edges.  ``p_max`` is the
    intensity ceiling for one-to-one pixel coding.
    """

    scheme: str
    params: CodingParams = field(default_factory=CodingParams)
    ranges: np.ndarray | None = None
    p_max: float = 255.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown coding scheme {self.scheme!r}")
        if self.scheme == "conv" and self.params.kernel is None:
            raise ConfigError("conv coding requires a kernel width")
        if self.ranges is not None:
            ranges = np.asarray(self.ranges, dtype=np.float64)
            if ranges.ndim != 2 or ranges.shape[1] != 2:
                raise ConfigError(
                    f"ranges must have shape (attributes, 2), got {ranges.shape}"
                )
            object.__setattr__(self, "ranges", ranges)

    def encode_sample(self, x: np.ndarray) -> DelayVector:
        if self.scheme == "numeric":
            if self.ranges is None:
                raise ConfigError("numeric coding needs fitted attribute ranges")
            return encode_numeric(x, self.ranges, self.params)
        if self.scheme == "one_to_one":
            return encode_pixels_1to1(x, self.params, self.p_max)
        return encode_conv_like(x, self.params)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "window": self.params.window,
            "unit": self.params.unit,
            "kernel": self.params.kernel,
            "stride": self.params.stride,
            "binarize_threshold": self.params.binarize_threshold,
            "pad": self.params.pad,
            "p_max": self.p_max,
            "ranges": None if self.ranges is None else self.ranges.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EncodingSpec":
        try:
            params = CodingParams(
                window=d["window"],
                unit=d["unit"],
                kernel=d["kernel"],
                stride=d["stride"],
                binarize_threshold=d["binarize_threshold"],
                pad=d["pad"],
            )
            ranges = d["ranges"]
            return cls(
                scheme=d["scheme"],
                params=params,
                ranges=None if ranges is None else np.asarray(ranges, dtype=np.float64),
                p_max=d["p_max"],
            )
        except KeyError as exc:
            raise ConfigError(f"coding snapshot is missing field {exc}") from exc


def load_iris(path) -> RawDataset:
    """Load a 5-column iris-style CSV: four numeric attributes, then a label.

    A header row is autodetected (first field not parseable as a number).
    Label strings are matched case-insensitively with any ``Iris-`` prefix
    stripped, and class indices follow the alphabetical order of the
    normalized names.  Malformed rows are reported with their line number.
    """
    rows: list[tuple[float, float, float, float]] = []
    names: list[str] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    first_data_line = True
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if first_data_line:
            first_data_line = False
            try:
                float(fields[0])
            except ValueError:
                continue  # header row
        if len(fields) != 5:
            raise DataError(
                f"{path}:{lineno}: expected 5 comma-separated fields, got {len(fields)}"
            )
        try:
            rows.append(tuple(float(f) for f in fields[:4]))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric attribute: {exc}") from exc
        name = fields[4].lower()
        if name.startswith("iris-"):
            name = name[len("iris-"):]
        if not name:
            raise DataError(f"{path}:{lineno}: empty class label")
        names.append(name)

    if not rows:
        raise DataError(f"{path}: no data rows found")
    class_names = tuple(sorted(set(names)))
    if len(class_names) != 3:
        log.warning("%s: found %d classes, expected 3", path, len(class_names))
    index = {name: i for i, name in enumerate(class_names)}
    labels = np.array([index[name] for name in names], dtype=np.int64)
    return RawDataset(
        features=np.asarray(rows, dtype=np.float64),
        labels=labels,
        class_names=class_names,
    )


def _read_file(path) -> bytes:
    """Read a file fully, transparently gunzipping if it starts with 1f 8b."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(2)
            fh.seek(0)
            if head == b"\x1f\x8b":
                with gzip.open(fh) as gz:
                    return gz.read()
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def load_mnist_idx(images_path, labels_path) -> RawDataset:
    """Load an IDX image file and its matching IDX label file.

    Both files may be gzipped.  Headers are big-endian; the image magic is
    2051 and the label magic 2049.  Image and label counts must agree.
    """
    raw = _read_file(images_path)
    if len(raw) < 16:
        raise DataError(f"{images_path}: truncated IDX image header")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise DataError(
            f"{images_path}: bad IDX image magic {magic}, expected {IDX_IMAGE_MAGIC}"
        )
    expected = 16 + count * rows * cols
    if len(raw) < expected:
        raise DataError(
            f"{images_path}: truncated image data ({len(raw)} bytes, expected {expected})"
        )
    if len(raw) > expected:
        raise DataError(f"{images_path}: {len(raw) - expected} trailing bytes")
    images = np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(count, rows, cols)

    raw = _read_file(labels_path)
    if len(raw) < 8:
        raise DataError(f"{labels_path}: truncated IDX label header")
    magic, label_count = struct.unpack(">II", raw[:8])
    if magic != IDX_LABEL_MAGIC:
        raise DataError(
            f"{labels_path}: bad IDX label magic {magic}, expected {IDX_LABEL_MAGIC}"
        )
    if len(raw) != 8 + label_count:
        raise DataError(f"{labels_path}: label data length mismatch")
    labels = np.frombuffer(raw, dtype=np.uint8, offset=8).astype(np.int64)

    if count != label_count:
        raise DataError(
            f"image count {count} does not match label count {label_count}"
        )
    return RawDataset(
        features=images.copy(),
        labels=labels,
        class_names=tuple(str(d) for d in range(10)),
    )


def save_mnist_idx(images: np.ndarray, labels: np.ndarray, images_path, labels_path):
    """Write images and labels back out in (uncompressed) IDX format.

    Writing then loading reproduces the arrays byte for byte, which keeps
    synthetic fixtures honest about the wire format.
    """
    images = np.asarray(images)
    labels = np.asarray(labels)
    if images.ndim != 3:
        raise DataError(f"expected (N, rows, cols) images, got shape {images.shape}")
    if labels.shape != (images.shape[0],):
        raise DataError("one label per image required")
    if images.min() < 0 or images.max() > 255 or labels.min() < 0 or labels.max() > 255:
        raise DataError("IDX stores unsigned bytes; values must lie in [0, 255]")
    n, rows, cols = images.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, n, rows, cols))
        fh.write(images.astype(np.uint8).tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABEL_MAGIC, n))
        fh.write(labels.astype(np.uint8).tobytes())


def attribute_ranges(features: np.ndarray) -> np.ndarray:
    """Per-attribute (min, max) pairs of a numeric feature matrix."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DataError(f"expected a 2-D feature matrix, got shape {features.shape}")
    return np.stack([features.min(axis=0), features.max(axis=0)], axis=1)


def _stratified_pick(labels: np.ndarray, target: int, rng: np.random.Generator):
    """Choose ``target`` indices, class proportions preserved.

    Per-class quotas use largest-remainder rounding, so quotas always sum to
    ``target`` exactly; ties go to the lower class index.  Within each class
    the picked samples are a seeded random draw.
    """
    n = labels.shape[0]
    classes = np.unique(labels)
    counts = np.array([np.sum(labels == c) for c in classes])
    exact = counts * (target / n)
    quotas = np.floor(exact).astype(np.int64)
    remainders = exact - quotas
    shortfall = target - int(quotas.sum())
    # stable sort keeps the lower class index first on equal remainders
    for pos in np.argsort(-remainders, kind="stable")[:shortfall]:
        quotas[pos] += 1
    picked = []
    rest = []
    for c, quota in zip(classes, quotas):
        members = rng.permutation(np.nonzero(labels == c)[0])
        picked.append(members[:quota])
        rest.append(members[quota:])
    return np.sort(np.concatenate(picked)), np.sort(np.concatenate(rest))


def split_dataset(
    ds: RawDataset, train_fraction: float, seed: int
) -> tuple[RawDataset, RawDataset]:
    """Deterministic stratified split into (train, test)."""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError("train_fraction must lie strictly between 0 and 1")
    if len(ds) < 2:
        raise ConfigError("cannot split a dataset with fewer than 2 samples")
    target = int(round(len(ds) * train_fraction))
    target = min(max(target, 1), len(ds) - 1)
    rng = np.random.default_rng(seed)
    train_idx, test_idx = _stratified_pick(ds.labels, target, rng)
    make = lambda idx: RawDataset(
        features=ds.features[idx], labels=ds.labels[idx], class_names=ds.class_names
    )
    return make(train_idx), make(test_idx)


def stratified_subset(ds: RawDataset, size: int, seed: int) -> RawDataset:
    """A seeded class-balanced subset of ``size`` samples."""
    if not 0 < size <= len(ds):
        raise ConfigError(f"subset size must lie in [1, {len(ds)}], got {size}")
    if size == len(ds):
        return ds
    rng = np.random.default_rng(seed)
    idx, _ = _stratified_pick(ds.labels, size, rng)
    return RawDataset(
        features=ds.features[idx], labels=ds.labels[idx], class_names=ds.class_names
    )


def encode_dataset(ds: RawDataset, spec: EncodingSpec) -> EncodedDataset:
    """Encode every sample of a dataset into one delay/fired matrix pair."""
    if len(ds) == 0:
        raise DataError("cannot encode an empty dataset")
    first = spec.encode_sample(ds.features[0])
    width = len(first)
    delays = np.empty((len(ds), width), dtype=np.float64)
    fired = np.empty((len(ds), width), dtype=bool)
    delays[0], fired[0] = first.delays, first.fired
    for i in range(1, len(ds)):
        vec = spec.encode_sample(ds.features[i])
        delays[i], fired[i] = vec.delays, vec.fired
    return EncodedDataset(delays=delays, fired=fired, labels=ds.labels.copy())
