"""Run configuration: JSON schema, validation, and shipped presets.

A run config bundles a dataset reference, a coding scheme, the layer sizes,
the readout scheme, and the training hyperparameters.  Configs load from a
JSON document (see ``CONFIG_SCHEMA`` below for the shape) or from a named
preset covering each benchmark network: iris with one hidden layer or a
bare single layer, and the MNIST-style variants with one output neuron, ten
output neurons (with and without the heuristic loss), and no hidden layer.

Dataset locations in presets resolve against ``MTSPIKE_DATA_DIR`` when set,
else ``./data``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .coding import CodingParams
from .datasets import SCHEMES, EncodingSpec
from .errors import ConfigError
from .learning import TrainConfig
from .readout import TargetScheme

__all__ = [
    "DatasetConfig",
    "RunConfig",
    "load_config",
    "config_from_dict",
    "preset",
    "preset_names",
    "default_data_dir",
]

CONFIG_SCHEMA = """\
{
  "name": "run label",
  "dataset": {
    "kind": "iris" | "mnist",
    "path": "iris CSV path (iris only)",
    "dir": "directory holding the four standard IDX files (mnist only)",
    "train_fraction": 0.8,          // iris only; mnist ships its own split
    "split_seed": 0,
    "train_subset": null | N,       // optional stratified subsample
    "test_subset": null | N,
    "subset_seed": 0
  },
  "coding": {
    "scheme": "numeric" | "one_to_one" | "conv",
    "window": 16.0, "unit": 1.0,
    "kernel": 4, "stride": 2,       // conv only
    "binarize_threshold": 128.0,    // conv only
    "p_max": 255.0                  // one_to_one only
  },
  "layers": [169, 500, 10],
  "readout": {
    "mode": "single_neuron" | "multi_neuron",
    "num_classes": 10,
    "excitatory_offset": 0.0,
    "inhibitory_offset": 4.0
  },
  "train": {
    "learning_rate": 0.01, "batch_size": 256, "epochs": 50, "seed": 0,
    "gradient_mode": "paper" | "exact",
    "heuristic": false,
    "update_gate": "always" | "on_misclassification",
    "batch_reduction": "sum" | "mean",
    "init_range": [0.0, 1.0]
  },
  "alpha": 1.0,                      // abstract energy units per spike
  "output": {
    "model": "where to write the trained model (optional)",
    "metrics": "where to write the per-epoch metrics CSV (optional)"
  }
}
"""

DATASET_KINDS = ("iris", "mnist")


def default_data_dir() -> Path:
    return Path(os.environ.get("MTSPIKE_DATA_DIR", "data"))


@dataclass
class DatasetConfig:
    kind: str
    path: str | None = None
    dir: str | None = None
    train_fraction: float = 0.8
    split_seed: int = 0
    train_subset: int | None = None
    test_subset: int | None = None
    subset_seed: int = 0

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ConfigError(f"unknown dataset kind {self.kind!r}")
        if self.kind == "iris" and not self.path:
            raise ConfigError("iris dataset needs a CSV path")
        if self.kind == "mnist" and not self.dir:
            raise ConfigError("mnist dataset needs a directory of IDX files")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie strictly between 0 and 1")
        for name in ("train_subset", "test_subset"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"{name} must be >= 1 when given")


@dataclass
class RunConfig:
    name: str
    dataset: DatasetConfig
    coding: EncodingSpec
    layer_sizes: tuple[int, ...]
    scheme: TargetScheme
    train: TrainConfig = field(default_factory=TrainConfig)
    alpha: float = 1.0
    model_path: str | None = None
    metrics_path: str | None = None

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) < 2:
            raise ConfigError("layers must list at least input and output sizes")
        if self.scheme.output_size != self.layer_sizes[-1]:
            raise ConfigError(
                f"readout produces {self.scheme.output_size} output delays but "
                f"the last layer has {self.layer_sizes[-1]} neurons"
            )
        if self.dataset.kind == "iris" and self.coding.scheme != "numeric":
            raise ConfigError("iris data uses numeric coding")
        if self.dataset.kind == "mnist" and self.coding.scheme == "numeric":
            raise ConfigError("image data needs one_to_one or conv coding")
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")


def _take(d: dict, cls, what: str) -> dict:
    """Keyword arguments for dataclass ``cls``, rejecting unknown keys."""
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown {what} option(s): {', '.join(sorted(unknown))}")
    return d


def _coding_from_dict(d: dict) -> EncodingSpec:
    d = dict(d)
    scheme = d.pop("scheme", None)
    if scheme not in SCHEMES:
        raise ConfigError(f"coding scheme must be one of {SCHEMES}, got {scheme!r}")
    p_max = d.pop("p_max", 255.0)
    params = CodingParams(**_take(d, CodingParams, "coding"))
    return EncodingSpec(scheme=scheme, params=params, p_max=p_max)


def config_from_dict(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("config root must be a JSON object")
    required = {"dataset", "coding", "layers", "readout"}
    missing = required - set(d)
    if missing:
        raise ConfigError(f"config is missing section(s): {', '.join(sorted(missing))}")
    unknown = set(d) - required - {"name", "train", "alpha", "output"}
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")
    output = dict(d.get("output", {}))
    if set(output) - {"model", "metrics"}:
        raise ConfigError("output section accepts only 'model' and 'metrics' paths")
    dataset = DatasetConfig(**_take(dict(d["dataset"]), DatasetConfig, "dataset"))
    coding = _coding_from_dict(dict(d["coding"]))
    readout = dict(d["readout"])
    readout.setdefault("window", coding.params.window)
    scheme = TargetScheme(**_take(readout, TargetScheme, "readout"))
    train_dict = dict(d.get("train", {}))
    if "init_range" in train_dict:
        train_dict["init_range"] = tuple(train_dict["init_range"])
    train = TrainConfig(**_take(train_dict, TrainConfig, "train"))
    return RunConfig(
        name=d.get("name", "run"),
        dataset=dataset,
        coding=coding,
        layer_sizes=tuple(d["layers"]),
        scheme=scheme,
        train=train,
        alpha=d.get("alpha", 1.0),
        model_path=output.get("model"),
        metrics_path=output.get("metrics"),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(document)


def _iris_dataset() -> DatasetConfig:
    return DatasetConfig(
        kind="iris",
        path=str(default_data_dir() / "iris.csv"),
        train_fraction=0.8,
        split_seed=0,
    )


def _mnist_dataset() -> DatasetConfig:
    return DatasetConfig(kind="mnist", dir=str(default_data_dir() / "mnist"))


def _numeric_coding() -> EncodingSpec:
    return EncodingSpec(scheme="numeric", params=CodingParams(window=16.0, unit=1.0))


def _conv_coding() -> EncodingSpec:
    return EncodingSpec(
        scheme="conv",
        params=CodingParams(window=16.0, unit=1.0, kernel=4, stride=2),
    )


def _preset_mt1_iris() -> RunConfig:
    return RunConfig(
        name="mt1_iris",
        dataset=_iris_dataset(),
        coding=_numeric_coding(),
        layer_sizes=(4, 25, 1),
        scheme=TargetScheme(
            mode="single_neuron", window=16.0, num_classes=3, excitatory_offset=3.0
        ),
        train=TrainConfig(
            learning_rate=0.01, batch_size=30, epochs=2000, seed=0,
            batch_reduction="mean",
        ),
    )


def _preset_slmt3_iris() -> RunConfig:
    return RunConfig(
        name="slmt3_iris",
        dataset=_iris_dataset(),
        coding=_numeric_coding(),
        layer_sizes=(4, 3),
        scheme=TargetScheme(
            mode="multi_neuron", window=16.0, num_classes=3,
            excitatory_offset=0.0, inhibitory_offset=4.0,
        ),
        train=TrainConfig(
            learning_rate=0.01, batch_size=30, epochs=2000, seed=0,
            batch_reduction="sum",
        ),
    )


def _preset_mt1_mnist() -> RunConfig:
    return RunConfig(
        name="mt1_mnist",
        dataset=_mnist_dataset(),
        coding=_conv_coding(),
        layer_sizes=(169, 500, 1),
        scheme=TargetScheme(
            mode="single_neuron", window=16.0, num_classes=10, excitatory_offset=1.0
        ),
        train=TrainConfig(
            learning_rate=1.0, batch_size=32, epochs=50, seed=0,
            gradient_mode="exact", batch_reduction="mean",
        ),
    )


def _preset_mt10_mnist(heuristic: bool) -> RunConfig:
    return RunConfig(
        name="mt10_mnist_heu" if heuristic else "mt10_mnist_noheu",
        dataset=_mnist_dataset(),
        coding=_conv_coding(),
        layer_sizes=(169, 500, 10),
        scheme=TargetScheme(
            mode="multi_neuron", window=16.0, num_classes=10,
            excitatory_offset=0.0, inhibitory_offset=4.0,
        ),
        train=TrainConfig(
            learning_rate=1.0, batch_size=32, epochs=50, seed=0,
            heuristic=heuristic, batch_reduction="mean",
        ),
    )


def _preset_slmt10_mnist(heuristic: bool) -> RunConfig:
    return RunConfig(
        name="slmt10_mnist_heu" if heuristic else "slmt10_mnist_noheu",
        dataset=_mnist_dataset(),
        coding=_conv_coding(),
        layer_sizes=(169, 10),
        scheme=TargetScheme(
            mode="multi_neuron", window=16.0, num_classes=10,
            excitatory_offset=0.0, inhibitory_offset=4.0,
        ),
        train=TrainConfig(
            learning_rate=1.0, batch_size=32, epochs=50, seed=0,
            heuristic=heuristic, batch_reduction="mean",
        ),
    )


_PRESETS = {
    "mt1_iris": _preset_mt1_iris,
    "slmt3_iris": _preset_slmt3_iris,
    "mt1_mnist": _preset_mt1_mnist,
    "mt10_mnist_heu": lambda: _preset_mt10_mnist(True),
    "mt10_mnist_noheu": lambda: _preset_mt10_mnist(False),
    "slmt10_mnist_heu": lambda: _preset_slmt10_mnist(True),
    "slmt10_mnist_noheu": lambda: _preset_slmt10_mnist(False),
}


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(_PRESETS))


def preset(name: str) -> RunConfig:
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
    return factory()
