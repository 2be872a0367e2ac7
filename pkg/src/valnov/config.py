"""Run configuration: one JSON-loadable document covering every stage.

Every field has a default, so an empty config is a valid desk-scale
setup; a resolved copy of whatever was loaded is echoed into each run
directory.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .contrastive import ContrastiveConfig
from .encoder import EncoderConfig
from .errors import ConfigurationError
from .evaluation import DEFAULT_COMBINED_METRIC
from .mtl import TrainConfig


@dataclass(frozen=True)
class DataSettings:
    train_path: str = "data/train.csv"
    dev_path: str = "data/dev.csv"
    test_path: str = "data/test.csv"
    column_map: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class PretrainedSettings:
    """Which encoder to load: the trainable reference encoder, or an
    external embedding service (inference only)."""

    kind: str = "reference"
    command: str | None = None
    endpoint: str | None = None


@dataclass(frozen=True)
class PromptSettings:
    provider: str = "replay-only"
    endpoint: str | None = None
    api_key_env: str = "COMPLETION_API_KEY"
    cache_dir: str = "cache/completions"
    model_id: str = "text-davinci-002"
    temperature: float = 0.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    max_tokens: int = 4
    parallelism: int = 1
    requests_per_second: float | None = None
    mock_reply: str = "yes"

    def decoding(self) -> dict[str, Any]:
        return {
            "model_id": self.model_id,
            "temperature": self.temperature,
            "frequency_penalty": self.frequency_penalty,
            "presence_penalty": self.presence_penalty,
            "max_tokens": self.max_tokens,
        }


@dataclass(frozen=True)
class BaselineSettings:
    c_validity: float = 0.09
    c_novelty: float = 4.7
    steps: int | None = None
    seed: int = 0


@dataclass(frozen=True)
class SweepSettings:
    runs: int = 3
    parallelism: int = 1


@dataclass(frozen=True)
class RunConfig:
    data: DataSettings = field(default_factory=DataSettings)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    pretrained: PretrainedSettings = field(default_factory=PretrainedSettings)
    profile: str = "clteaml-2"
    train_overrides: dict[str, Any] = field(default_factory=dict)
    contrastive: ContrastiveConfig = field(default_factory=ContrastiveConfig)
    prompting: PromptSettings = field(default_factory=PromptSettings)
    baseline: BaselineSettings = field(default_factory=BaselineSettings)
    combined_metric: str = DEFAULT_COMBINED_METRIC
    output_dir: str = "runs"
    seed: int = 0
    sweep: SweepSettings = field(default_factory=SweepSettings)

    def train_config(self, seed: int | None = None) -> TrainConfig:
        overrides: dict[str, Any] = dict(self.train_overrides)
        if "task_probabilities" in overrides:
            overrides["task_probabilities"] = tuple(overrides["task_probabilities"])
        overrides.setdefault("combined_metric", self.combined_metric)
        overrides["seed"] = self.seed if seed is None else seed
        return TrainConfig.from_profile(self.profile, **overrides)


_NESTED = {
    "data": DataSettings,
    "encoder": EncoderConfig,
    "pretrained": PretrainedSettings,
    "contrastive": ContrastiveConfig,
    "prompting": PromptSettings,
    "baseline": BaselineSettings,
    "sweep": SweepSettings,
}


def _build(cls: type, data: Mapping[str, Any], where: str) -> Any:
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigurationError(f"unknown config key(s) {unknown} under {where}")
    kwargs: dict[str, Any] = {}
    for name, value in data.items():
        nested = _NESTED.get(name)
        if nested is not None and cls is RunConfig:
            if not isinstance(value, Mapping):
                raise ConfigurationError(f"config key {name!r} must be an object")
            kwargs[name] = _build(nested, value, f"{where}.{name}")
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(f"bad config under {where}: {exc}") from exc


def load_config(path: str | Path | None = None) -> RunConfig:
    """RunConfig from a JSON file; None loads all defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    return _build(RunConfig, data, str(path))


def resolved_config_json(config: RunConfig) -> str:
    return json.dumps(dataclasses.asdict(config), indent=2, sort_keys=True)
