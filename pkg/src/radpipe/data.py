"""Interaction log ingestion, chronological splitting, and duration binning."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, IngestError

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("user_id", "video_id", "watch_time", "duration", "timestamp")

#: logical column name -> physical column name in the file
DEFAULT_SCHEMA = {name: name for name in REQUIRED_COLUMNS}


@dataclass(slots=True)
class InteractionRecord:
    """One (user, video) watch event. Times are milliseconds."""

    user_id: int
    video_id: int
    watch_time: float
    duration: float
    timestamp: int
    user_features: Optional[tuple[int, ...]] = None

    def valid(self) -> bool:
        return self.watch_time >= 0 and self.duration > 0


@dataclass(slots=True)
class SplitSpec:
    """Timestamp cut-offs: train <= train_end < validation <= validation_end < test."""

    train_end: int
    validation_end: int

    def __post_init__(self):
        if self.validation_end <= self.train_end:
            raise ConfigError("validation_end must be greater than train_end")


@dataclass
class SplitResult:
    train: list[InteractionRecord]
    validation: list[InteractionRecord]
    test: list[InteractionRecord]
    report: dict


def _detect_format(path: Path) -> str:
    if path.suffix.lower() in (".jsonl", ".ndjson", ".json"):
        return "jsonl"
    return "csv"


def _parse_row(get, feature_cols: Sequence[str]) -> InteractionRecord:
    features = None
    if feature_cols:
        features = tuple(int(get(c)) for c in feature_cols)
    rec = InteractionRecord(
        user_id=int(get("user_id")),
        video_id=int(get("video_id")),
        watch_time=float(get("watch_time")),
        duration=float(get("duration")),
        timestamp=int(get("timestamp")),
        user_features=features,
    )
    if not rec.valid():
        raise ValueError("invariant violation: watch_time >= 0 and duration > 0")
    return rec


def ingest(
    path: str | Path,
    schema: Optional[dict[str, str]] = None,
    feature_columns: Sequence[str] = (),
    delimiter: str = ",",
    fmt: Optional[str] = None,
) -> list[InteractionRecord]:
    """Read a CSV (with header) or JSON-lines log into validated records.

    Malformed rows are skipped and counted; more than 50% malformed rows
    aborts with a diagnostics summary.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"input file not found: {path}")
    schema = dict(DEFAULT_SCHEMA if schema is None else schema)
    fmt = fmt or _detect_format(path)

    records: list[InteractionRecord] = []
    malformed = 0
    total = 0

    if fmt == "csv":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh, delimiter=delimiter)
            header = reader.fieldnames or []
            missing = [schema[c] for c in REQUIRED_COLUMNS if schema[c] not in header]
            if header and missing:
                raise IngestError(f"schema columns missing from header: {missing}")
            for row in reader:
                total += 1
                try:
                    records.append(
                        _parse_row(lambda c, r=row: r[schema.get(c, c)], feature_columns)
                    )
                except (ValueError, KeyError, TypeError):
                    malformed += 1
    elif fmt == "jsonl":
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                total += 1
                try:
                    obj = json.loads(line)
                    records.append(
                        _parse_row(lambda c, o=obj: o[schema.get(c, c)], feature_columns)
                    )
                except (ValueError, KeyError, TypeError):
                    malformed += 1
    else:
        raise ConfigError(f"unknown log format: {fmt}")

    if total == 0:
        logger.warning("ingested empty file %s", path)
    if total > 0 and malformed / total > 0.5:
        raise IngestError(
            f"{malformed}/{total} rows malformed in {path}; "
            f"first valid count {len(records)}; check the schema mapping"
        )
    if malformed:
        logger.warning("skipped %d/%d malformed rows in %s", malformed, total, path)
    return records


def chrono_split(records: Sequence[InteractionRecord], spec: SplitSpec) -> SplitResult:
    """Partition by timestamp and filter validation/test to ids seen in train.

    Records whose user_id or video_id never appears in the training
    partition are dropped from validation/test, with counts reported.
    """
    if not records:
        raise IngestError("cannot split an empty record set")

    train = [r for r in records if r.timestamp <= spec.train_end]
    val_raw = [r for r in records if spec.train_end < r.timestamp <= spec.validation_end]
    test_raw = [r for r in records if r.timestamp > spec.validation_end]
    if not train:
        raise IngestError("empty training partition after split")
    if not val_raw and not test_raw:
        logger.warning("all records fall before train_end; validation and test empty")

    seen_users = {r.user_id for r in train}
    seen_videos = {r.video_id for r in train}

    def _filter(part):
        kept = [r for r in part if r.user_id in seen_users and r.video_id in seen_videos]
        return kept, len(part) - len(kept)

    validation, dropped_val = _filter(val_raw)
    test, dropped_test = _filter(test_raw)

    n = len(records)
    report = {
        "total": n,
        "train": {"retained": len(train), "dropped": 0, "fraction": len(train) / n},
        "validation": {
            "retained": len(validation),
            "dropped": dropped_val,
            "fraction": len(validation) / n,
        },
        "test": {"retained": len(test), "dropped": dropped_test, "fraction": len(test) / n},
        "time_ranges": {
            "train": _time_range(train),
            "validation": _time_range(validation),
            "test": _time_range(test),
        },
    }
    return SplitResult(train=train, validation=validation, test=test, report=report)


def _time_range(part: Sequence[InteractionRecord]):
    if not part:
        return None
    ts = [r.timestamp for r in part]
    return [min(ts), max(ts)]


def _midpoint_quantile(sorted_x: np.ndarray, p: float) -> float:
    """Type-2 quantile: midpoint between order statistics when p*n is integral."""
    n = len(sorted_x)
    h = p * n
    k = int(round(h))
    if abs(h - k) < 1e-9 and 1 <= k < n:
        return 0.5 * (float(sorted_x[k - 1]) + float(sorted_x[k]))
    idx = min(max(int(np.ceil(h - 1e-9)) - 1, 0), n - 1)
    return float(sorted_x[idx])


@dataclass
class DurationBinner:
    """Near-equal-mass duration bins; `boundaries` are the D-1 inner thresholds."""

    boundaries: np.ndarray
    D: int
    masses: list[float] = field(default_factory=list)

    def bin_of(self, duration):
        """Bin index in [0, D); ties on a boundary go to the lower bin."""
        return np.searchsorted(self.boundaries, duration, side="left")


def fit_duration_binner(train: Sequence[InteractionRecord], D: int) -> DurationBinner:
    """Fit boundaries at the (1/D, ..., (D-1)/D) training duration quantiles."""
    if D < 1:
        raise ConfigError(f"bin count must be >= 1, got {D}")
    if not train:
        raise IngestError("cannot fit a duration binner on an empty partition")
    durations = np.sort(np.array([r.duration for r in train], dtype=float))
    boundaries = np.array(
        [_midpoint_quantile(durations, k / D) for k in range(1, D)], dtype=float
    )
    if len(boundaries) > 1 and not np.all(np.diff(boundaries) > 0):
        raise ConfigError(
            f"duration quantiles are not strictly ascending for D={D}; "
            "too many tied durations — lower D"
        )
    binner = DurationBinner(boundaries=boundaries, D=D)
    bins = binner.bin_of(durations)
    counts = np.bincount(bins, minlength=D)
    binner.masses = (counts / len(durations)).tolist()
    return binner
