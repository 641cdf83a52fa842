"""Per-cohort empirical watch-time distributions and quantile labels.

Cohorts are keyed by an umbrella factor (video id, user id crossed with a
duration bin, the duration bin itself, or a user cluster crossed with a
duration bin). Watch times are mapped to their empirical quantile within
the cohort; quantiles can be mapped back to watch times by interpolating
the order statistics.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .data import DurationBinner, InteractionRecord
from .errors import ConfigError

COHORT_KINDS = (
    "video",
    "user_x_durationbin",
    "duration_bin",
    "user_cluster_x_durationbin",
)

_BINNED_KINDS = frozenset(
    {"user_x_durationbin", "duration_bin", "user_cluster_x_durationbin"}
)

#: tie rules for the empirical quantile; midrank is the default, the other
#: two are the literal "<=" / "<" counting variants kept for fidelity runs.
TIE_RULES = ("midrank", "leq", "strict")


@dataclass(frozen=True, slots=True)
class CohortKey:
    kind: str
    id: int
    bin: Optional[int] = None

    def __post_init__(self):
        if self.kind not in COHORT_KINDS:
            raise ConfigError(f"unknown cohort kind: {self.kind}")
        if (self.bin is not None) != (self.kind in _BINNED_KINDS):
            raise ConfigError(f"bin must be present iff kind uses duration bins: {self}")


@dataclass
class EmpiricalCdf:
    """Sorted watch-time samples for one cohort with rank/inverse-rank queries."""

    cohort: CohortKey
    samples: np.ndarray  # sorted ascending
    n: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or len(self.samples) == 0:
            raise ConfigError("an EmpiricalCdf needs at least one sample")
        if not np.all(np.diff(self.samples) >= 0):
            self.samples = np.sort(self.samples)
        self.n = len(self.samples)

    def quantile_of(self, s, tie_rule: str = "midrank"):
        """Empirical quantile of watch time(s) `s`, clamped inside (0, 1).

        midrank: (#less + 0.5 * #equal) / n. The clamp to
        [1/(2n), 1 - 1/(2n)] keeps the probit transform finite.
        """
        s = np.asarray(s, dtype=float)
        less = np.searchsorted(self.samples, s, side="left")
        leq = np.searchsorted(self.samples, s, side="right")
        if tie_rule == "midrank":
            q = (less + 0.5 * (leq - less)) / self.n
        elif tie_rule == "leq":
            q = leq / self.n
        elif tie_rule == "strict":
            q = less / self.n
        else:
            raise ConfigError(f"unknown tie rule: {tie_rule}")
        lo = 1.0 / (2 * self.n)
        out = np.clip(q, lo, 1.0 - lo)
        return float(out) if out.ndim == 0 else out

    def inverse_quantile(self, q):
        """Watch time at quantile `q` via linear interpolation of the order
        statistics at plotting positions (k - 0.5)/n; floors/ceils at the
        sample range."""
        q = np.asarray(q, dtype=float)
        if np.any(q <= 0) or np.any(q >= 1):
            raise ConfigError("inverse_quantile requires 0 < q < 1")
        positions = (np.arange(self.n) + 0.5) / self.n
        out = np.interp(q, positions, self.samples)
        return float(out) if out.ndim == 0 else out


@dataclass
class QuantileLabelSet:
    """Per-record labels; quantile-kind labels are strictly inside (0, 1)."""

    q_video: np.ndarray
    q_user: np.ndarray
    q_d2q: np.ndarray
    pcr: np.ndarray
    raw: np.ndarray
    fallback_video: np.ndarray  # bool; cohort absent, label defaulted to 0.5
    fallback_user: np.ndarray
    fallback_d2q: np.ndarray
    user_support: np.ndarray  # cohort sample counts, for support-weighted fusion
    video_support: np.ndarray

    KINDS = ("rad_v", "rad_u", "d2q", "pcr", "raw")

    def labels_for(self, kind: str) -> np.ndarray:
        try:
            return {
                "rad_v": self.q_video,
                "rad_u": self.q_user,
                "d2q": self.q_d2q,
                "pcr": self.pcr,
                "raw": self.raw,
                "raw_log": self.raw,
            }[kind]
        except KeyError:
            raise ConfigError(f"unknown label kind: {kind}") from None


def cohort_key_for(
    record: InteractionRecord,
    kind: str,
    binner: Optional[DurationBinner] = None,
    clusters: Optional[Mapping[int, int]] = None,
) -> CohortKey:
    if kind == "video":
        return CohortKey("video", record.video_id)
    if binner is None:
        raise ConfigError(f"cohort kind {kind!r} requires a duration binner")
    b = int(binner.bin_of(record.duration))
    if kind == "user_x_durationbin":
        return CohortKey(kind, record.user_id, b)
    if kind == "duration_bin":
        return CohortKey(kind, b, b)
    if kind == "user_cluster_x_durationbin":
        if clusters is None:
            raise ConfigError("user_cluster cohorts require a cluster assignment")
        return CohortKey(kind, int(clusters[record.user_id]), b)
    raise ConfigError(f"unknown cohort kind: {kind}")


def build_cdfs(
    train: Sequence[InteractionRecord],
    kind: str,
    binner: Optional[DurationBinner] = None,
    clusters: Optional[Mapping[int, int]] = None,
) -> dict[CohortKey, EmpiricalCdf]:
    """Group training watch times by cohort and build one ECDF per cohort."""
    if not train:
        raise ConfigError("cannot build CDFs from an empty partition")
    groups: dict[CohortKey, list[float]] = defaultdict(list)
    for r in train:
        groups[cohort_key_for(r, kind, binner, clusters)].append(r.watch_time)
    return {
        key: EmpiricalCdf(cohort=key, samples=np.sort(np.array(vals)))
        for key, vals in groups.items()
    }


def build_all_cdf_tables(
    train: Sequence[InteractionRecord],
    binner: DurationBinner,
    clusters: Optional[Mapping[int, int]] = None,
) -> dict[str, dict[CohortKey, EmpiricalCdf]]:
    tables = {
        "video": build_cdfs(train, "video"),
        "user_x_durationbin": build_cdfs(train, "user_x_durationbin", binner),
        "duration_bin": build_cdfs(train, "duration_bin", binner),
    }
    if clusters is not None:
        tables["user_cluster_x_durationbin"] = build_cdfs(
            train, "user_cluster_x_durationbin", binner, clusters
        )
    return tables


def _label_one_kind(records, keys, table, tie_rule):
    n = len(records)
    q = np.full(n, 0.5)
    fallback = np.zeros(n, dtype=bool)
    support = np.zeros(n, dtype=int)
    by_cohort: dict[CohortKey, list[int]] = defaultdict(list)
    for i, key in enumerate(keys):
        by_cohort[key].append(i)
    for key, idx in by_cohort.items():
        cdf = table.get(key)
        if cdf is None:
            fallback[idx] = True  # cold cohort: uninformative prior 0.5
            continue
        s = np.array([records[i].watch_time for i in idx])
        q[idx] = cdf.quantile_of(s, tie_rule=tie_rule)
        support[idx] = cdf.n
    return q, fallback, support


def label_records(
    records: Sequence[InteractionRecord],
    cdf_tables: Mapping[str, Mapping[CohortKey, EmpiricalCdf]],
    binner: DurationBinner,
    clusters: Optional[Mapping[int, int]] = None,
    tie_rule: str = "midrank",
    clip_pcr: bool = True,
    user_kind: str = "user_x_durationbin",
) -> QuantileLabelSet:
    """Attach RAD-V, RAD-U, D2Q, PCR, and raw labels to every record.

    Cohort tables must be built from training data only. Records whose
    cohort is absent get the fallback label 0.5 with a flag set.
    """
    if user_kind not in ("user_x_durationbin", "user_cluster_x_durationbin"):
        raise ConfigError(f"invalid user-side cohort kind: {user_kind}")

    video_keys = [cohort_key_for(r, "video") for r in records]
    user_keys = [cohort_key_for(r, user_kind, binner, clusters) for r in records]
    d2q_keys = [cohort_key_for(r, "duration_bin", binner) for r in records]

    q_video, fb_video, sup_video = _label_one_kind(
        records, video_keys, cdf_tables["video"], tie_rule
    )
    q_user, fb_user, sup_user = _label_one_kind(
        records, user_keys, cdf_tables[user_kind], tie_rule
    )
    q_d2q, fb_d2q, _ = _label_one_kind(
        records, d2q_keys, cdf_tables["duration_bin"], tie_rule
    )

    raw = np.array([r.watch_time for r in records], dtype=float)
    durations = np.array([r.duration for r in records], dtype=float)
    pcr = raw / durations
    if clip_pcr:
        pcr = np.minimum(pcr, 1.0)

    return QuantileLabelSet(
        q_video=q_video,
        q_user=q_user,
        q_d2q=q_d2q,
        pcr=pcr,
        raw=raw,
        fallback_video=fb_video,
        fallback_user=fb_user,
        fallback_d2q=fb_d2q,
        user_support=sup_user,
        video_support=sup_video,
    )
