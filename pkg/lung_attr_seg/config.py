"""
RunConfig: the merged configuration of one command.

Sections and their dataclasses::

    run        mode, n_samples, workers, data_dir, out_dir
    generator  GeneratorConfig
    model      ModelConfig
    train      TrainConfig (without weights)
    weights    LossWeights

Keys are written as ``section.field``.  A bare ``field`` sets that field
in every section that has it, so ``seed = 3`` seeds both the generator
and the training run and ``height = 64`` keeps generator and model sizes
in step.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from lung_attr_seg.data.synthetic import GeneratorConfig
from lung_attr_seg.errors import ConfigError
from lung_attr_seg.io.kv_config import apply_overrides, dataclass_items, dump_kv, load_kv_file
from lung_attr_seg.model.config import ModelConfig
from lung_attr_seg.training.config import TrainConfig, check_mode
from lung_attr_seg.training.losses import LossWeights

SECTIONS = ("run", "generator", "model", "train", "weights")
CONFIG_NAME = "config.txt"


@dataclass(frozen=True)
class RunSettings:
    mode: str = "transductive"
    n_samples: int = 200
    workers: int = 1
    data_dir: Optional[str] = None
    out_dir: Optional[str] = None

    def __post_init__(self) -> None:
        check_mode(self.mode)
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class RunConfig:
    run: RunSettings = field(default_factory=RunSettings)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self) -> None:
        g, m = self.generator, self.model
        if (g.height, g.width) != (m.height, m.width):
            raise ConfigError(
                f"generator size {g.height}x{g.width} differs from model size {m.height}x{m.width}"
            )

    @property
    def weights(self) -> LossWeights:
        return self.train.weights

    def _section(self, name: str):
        if name == "weights":
            return self.train.weights
        return getattr(self, name)

    def flat(self) -> Dict[str, Any]:
        """Every field as ``section.field -> value``, in a stable order."""
        out: Dict[str, Any] = {}
        for name in SECTIONS:
            for key, val in dataclass_items(self._section(name)):
                if name == "train" and key == "weights":
                    continue
                out[f"{name}.{key}"] = val
        return out

    def hyperparameters(self) -> Dict[str, Any]:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.flat().items()}

    def with_values(self, values: Mapping[str, str]) -> "RunConfig":
        """Apply string overrides (dotted or bare keys); validates the result."""
        routed: Dict[str, Dict[str, str]] = {name: {} for name in SECTIONS}
        for key, raw in values.items():
            targets = _route(key)
            if not targets:
                raise ConfigError(f"unknown config key {key!r}")
            for section, field_name in targets:
                routed[section][field_name] = raw

        weights = apply_overrides(self.train.weights, routed["weights"])
        train = apply_overrides(dataclasses.replace(self.train, weights=weights), routed["train"])
        return RunConfig(
            run=apply_overrides(self.run, routed["run"]),
            generator=apply_overrides(self.generator, routed["generator"]),
            model=apply_overrides(self.model, routed["model"]),
            train=train,
        )

    def to_text(self) -> str:
        return dump_kv(self.flat(), header="lung-attr-seg run configuration")

    def save(self, directory: str | Path) -> Path:
        path = Path(directory) / CONFIG_NAME
        path.write_text(self.to_text(), encoding="utf-8")
        return path

    @classmethod
    def from_file(cls, filepath: str | Path) -> "RunConfig":
        return cls().with_values(load_kv_file(filepath))


def _fields_of(section: str) -> List[str]:
    cls = {
        "run": RunSettings,
        "generator": GeneratorConfig,
        "model": ModelConfig,
        "train": TrainConfig,
        "weights": LossWeights,
    }[section]
    return [f.name for f in dataclasses.fields(cls) if f.init and not (section == "train" and f.name == "weights")]


def _route(key: str) -> List[tuple]:
    if "." in key:
        section, name = key.split(".", 1)
        if section in SECTIONS and name in _fields_of(section):
            return [(section, name)]
        return []
    return [(section, key) for section in SECTIONS if key in _fields_of(section)]
