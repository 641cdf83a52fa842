"""Pipeline configuration: one JSON document drives every subcommand.

A persisted config plus the same inputs reproduces a run bit-identically;
all randomness flows from `seed` through named sub-seeds.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .data import DEFAULT_SCHEMA
from .errors import ConfigError


def derive_seed(root_seed: int, name: str) -> int:
    """Stable per-module sub-seed from the root seed."""
    digest = hashlib.sha256(f"{root_seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "little") % (2**31 - 1)


def _from_dict(cls, d: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown keys for {cls.__name__}: {sorted(unknown)}")
    return cls(**d)


@dataclass
class TrainSection:
    learning_rate: float = 1e-5
    max_epochs: int = 50
    early_stop_patience: int = 5
    batch_size: int = 1024
    divergence_factor: float = 10.0


@dataclass
class EmbedSection:
    k_breakpoints: int = 100
    embed_dim: int = 16
    hidden: list[int] = field(default_factory=lambda: [64, 64, 64])
    cohort_kind: str = "user_cluster_x_durationbin"
    min_cohort_size: int = 1


@dataclass
class ModelSection:
    embed_dim: int = 16
    hidden: list[int] = field(default_factory=lambda: [64, 64, 64])


@dataclass
class ClusterSection:
    k: int = 10
    max_iter: int = 100


@dataclass
class FusionSection:
    policy: str = "equal"
    alpha: float = 1.0
    beta: float = 1.0


@dataclass
class SynthSection:
    n_users: int = 2000
    n_videos: int = 1000
    n_interactions: int = 1_000_000
    noise_scale: float = 1500.0
    duration_effect: float = 3000.0
    popularity_effect: float = 2000.0
    activeness_effect: float = 2000.0
    preference_rank: int = 8
    preference_scale: float = 2000.0
    truncate_at_duration: bool = True


@dataclass
class PipelineConfig:
    out_dir: str = "out"
    seed: int = 0
    threads: int = 1

    # ingestion
    data_path: Optional[str] = None
    schema: dict = field(default_factory=lambda: dict(DEFAULT_SCHEMA))
    feature_columns: list[str] = field(default_factory=list)
    delimiter: str = ","

    # split + binning
    train_end: Optional[int] = None
    validation_end: Optional[int] = None
    duration_bins: int = 4

    # labeling
    label_kinds: list[str] = field(default_factory=lambda: ["rad_v", "rad_u", "d2q", "pcr", "raw"])
    cdf_source: str = "empirical"  # or "learned"
    tie_rule: str = "midrank"

    fusion: FusionSection = field(default_factory=FusionSection)
    stage1_training: TrainSection = field(default_factory=lambda: TrainSection())
    stage2_training: TrainSection = field(default_factory=lambda: TrainSection())
    embed: EmbedSection = field(default_factory=EmbedSection)
    model: ModelSection = field(default_factory=ModelSection)
    cluster: ClusterSection = field(default_factory=ClusterSection)
    synth: SynthSection = field(default_factory=SynthSection)

    _SECTIONS = {
        "fusion": FusionSection,
        "stage1_training": TrainSection,
        "stage2_training": TrainSection,
        "embed": EmbedSection,
        "model": ModelSection,
        "cluster": ClusterSection,
        "synth": SynthSection,
    }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        kwargs = {}
        for name, section_cls in cls._SECTIONS.items():
            if name in d:
                kwargs[name] = _from_dict(section_cls, d.pop(name))
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs.update(d)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            return cls.from_dict(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def section(self, name: str) -> dict:
        return dataclasses.asdict(getattr(self, name))
