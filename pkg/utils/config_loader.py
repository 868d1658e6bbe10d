import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import yaml

from models.embedding import TrainConfig
from utils.exceptions import ConfigurationError

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "base_config.yaml"


def load_config(path=DEFAULT_CONFIG_PATH):
    # safe_load also reads the JSON documents the CLI writes
    with open(path, "r") as file:
        config = yaml.safe_load(file)
    return config or {}


@dataclass
class DataSettings:
    comments_path: Optional[str] = None
    videos_path: Optional[str] = None
    corpus_paths: List[str] = field(default_factory=list)
    channels: List[str] = field(default_factory=list)
    period_start: Optional[str] = None
    period_end: Optional[str] = None
    include_replies: bool = False
    user_filter: bool = True


@dataclass
class BalanceSettings:
    seed: Optional[int] = None
    tolerance: float = 0.005


@dataclass
class VocabSettings:
    source_size: int = 5000
    target_size: int = 10000
    trigram: bool = False


@dataclass
class AlignmentSettings:
    mode: str = "nn"
    csls_k: int = 10
    alternatives: int = 10


@dataclass
class EvaluationSettings:
    neighborhood: bool = True
    neighborhood_k: int = 10
    runs: int = 1
    sweep_sizes: List[int] = field(default_factory=lambda: [1000, 2000, 3000, 4000, 5000])
    max_snippets: int = 5


@dataclass
class EngagementSettings:
    min_videos: int = 10


_SECTIONS = {
    "data": DataSettings,
    "balance": BalanceSettings,
    "training": TrainConfig,
    "vocab": VocabSettings,
    "alignment": AlignmentSettings,
    "evaluation": EvaluationSettings,
    "engagement": EngagementSettings,
}


def _build_section(cls, values, section):
    if values is None:
        return cls()
    if not isinstance(values, dict):
        raise ConfigurationError(f"section '{section}' must be a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigurationError(f"unknown keys in section '{section}': {', '.join(unknown)}")
    return cls(**values)


@dataclass
class PipelineConfig:
    data: DataSettings = field(default_factory=DataSettings)
    balance: BalanceSettings = field(default_factory=BalanceSettings)
    training: TrainConfig = field(default_factory=TrainConfig)
    vocab: VocabSettings = field(default_factory=VocabSettings)
    alignment: AlignmentSettings = field(default_factory=AlignmentSettings)
    evaluation: EvaluationSettings = field(default_factory=EvaluationSettings)
    engagement: EngagementSettings = field(default_factory=EngagementSettings)
    output_dir: str = "results"
    random_seed: int = 42

    def __post_init__(self):
        if self.vocab.source_size > self.vocab.target_size:
            raise ConfigurationError("vocab.source_size must not exceed vocab.target_size")
        if self.alignment.mode not in ("nn", "csls"):
            raise ConfigurationError(f"unknown retrieval mode '{self.alignment.mode}'")
        if self.evaluation.runs < 1:
            raise ConfigurationError("evaluation.runs must be at least 1")

    @property
    def balance_seed(self):
        return self.random_seed if self.balance.seed is None else self.balance.seed

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw or {})
        kwargs = {}
        for name, section_cls in _SECTIONS.items():
            kwargs[name] = _build_section(section_cls, raw.pop(name, None), name)
        for scalar in ("output_dir", "random_seed"):
            if scalar in raw:
                kwargs[scalar] = raw.pop(scalar)
        if raw:
            raise ConfigurationError(f"unknown top-level config keys: {', '.join(sorted(raw))}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        return cls.from_dict(load_config(path))

    def to_dict(self):
        return dataclasses.asdict(self)

    def save(self, path):
        path = Path(path)
        with open(path, "w") as file:
            if path.suffix == ".json":
                json.dump(self.to_dict(), file, indent=2, sort_keys=True)
                file.write("\n")
            else:
                yaml.safe_dump(self.to_dict(), file, sort_keys=True)

    def fingerprint(self):
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def with_seed(self, seed):
        clone = PipelineConfig.from_dict(self.to_dict())
        clone.random_seed = seed
        return clone
