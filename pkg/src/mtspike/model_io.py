"""Versioned on-disk model container.

Layout, in order:

* 8-byte magic ``MTSPIKE\\x00``
* version as little-endian uint32 (currently 1)
* header length in bytes as little-endian uint32
* UTF-8 JSON header (sorted keys, no whitespace): layer sizes, activation,
  response window, coding snapshot, target scheme, free-form training
  provenance
* weight matrices as little-endian float64, row-major, in layer order

Nothing else: a loader must land exactly at end-of-file after the last
weight.  The header is deterministic and the payload is raw bits, so two
identical training runs produce byte-identical files and a load always
returns bit-exact weights.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .datasets import EncodingSpec
from .errors import ModelIOError
from .network import Network
from .readout import TargetScheme

__all__ = ["MAGIC", "FORMAT_VERSION", "ModelFile", "save_model", "load_model"]

MAGIC = b"MTSPIKE\x00"
FORMAT_VERSION = 1


@dataclass
class ModelFile:
    """A trained network plus everything needed to use it again."""

    network: Network
    coding: EncodingSpec
    scheme: TargetScheme
    provenance: dict = field(default_factory=dict)


def _header_bytes(model: ModelFile) -> bytes:
    header = {
        "layer_sizes": list(model.network.layer_sizes),
        "activation": model.network.activation,
        "window": model.network.window,
        "coding": model.coding.to_dict(),
        "scheme": dataclasses.asdict(model.scheme),
        "provenance": model.provenance,
    }
    try:
        text = json.dumps(header, sort_keys=True, separators=(",", ":"))
    except (TypeError, ValueError) as exc:
        raise ModelIOError(f"model header is not JSON-serializable: {exc}") from exc
    return text.encode("utf-8")


def save_model(model: ModelFile, path):
    """Write the container; see the module docstring for the layout."""
    header = _header_bytes(model)
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
            fh.write(header)
            for w in model.network.weights:
                fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
    except OSError as exc:
        raise ModelIOError(f"cannot write model to {path}: {exc}") from exc


def load_model(path) -> ModelFile:
    """Read a container back; weights come out bit-exact.

    Raises :class:`ModelIOError` on a bad magic, an unsupported version, a
    malformed header, or a payload whose length does not match the declared
    layer sizes exactly.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ModelIOError(f"cannot read model from {path}: {exc}") from exc

    if len(raw) < len(MAGIC) + 8:
        raise ModelIOError(f"{path}: truncated model file")
    if raw[: len(MAGIC)] != MAGIC:
        raise ModelIOError(f"{path}: not a model file (bad magic)")
    version, header_len = struct.unpack_from("<II", raw, len(MAGIC))
    if version != FORMAT_VERSION:
        raise ModelIOError(
            f"{path}: unsupported model format version {version} "
            f"(this build reads version {FORMAT_VERSION})"
        )
    body_start = len(MAGIC) + 8
    if len(raw) < body_start + header_len:
        raise ModelIOError(f"{path}: truncated model header")
    try:
        header = json.loads(raw[body_start:body_start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelIOError(f"{path}: corrupt model header: {exc}") from exc

    try:
        layer_sizes = [int(s) for s in header["layer_sizes"]]
        activation = header["activation"]
        net_window = float(header["window"])
        coding = EncodingSpec.from_dict(header["coding"])
        s = header["scheme"]
        scheme = TargetScheme(
            mode=s["mode"],
            window=float(s["window"]),
            num_classes=int(s["num_classes"]),
            excitatory_offset=float(s["excitatory_offset"]),
            inhibitory_offset=float(s["inhibitory_offset"]),
        )
        provenance = header["provenance"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelIOError(f"{path}: model header is missing or malformed: {exc}") from exc

    expected_weights = sum(
        a * b for a, b in zip(layer_sizes[:-1], layer_sizes[1:])
    )
    payload = raw[body_start + header_len:]
    if len(payload) != 8 * expected_weights:
        kind = "truncated" if len(payload) < 8 * expected_weights else "oversized"
        raise ModelIOError(
            f"{path}: {kind} weight payload ({len(payload)} bytes, "
            f"expected {8 * expected_weights})"
        )
    flat = np.frombuffer(payload, dtype="<f8")
    weights = []
    offset = 0
    for a, b in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(flat[offset:offset + a * b].reshape(a, b).astype(np.float64))
        offset += a * b
    network = Network(layer_sizes=tuple(layer_sizes), weights=weights,
                      activation=activation, window=net_window)
    return ModelFile(network=network, coding=coding, scheme=scheme, provenance=provenance)
