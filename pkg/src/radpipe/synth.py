"""Synthetic watch-time generator with known confounders and preferences.

Watch time decomposes as S = C + P + eps: C aggregates confounders that
are deterministic functions of the video id (log-duration, popularity)
and the user id (activeness), P is a low-rank latent preference, and eps
is noise. Truncation at the video duration is on by default so the
completion-tie pathology of real logs is reproduced. The module also
verifies the variance-monotonicity and quantile-uniformity properties the
pipeline relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data import InteractionRecord
from .errors import ConfigError


@dataclass
class SyntheticSpec:
    n_users: int = 2000
    n_videos: int = 1000
    n_interactions: int = 1_000_000
    # durations ~ lognormal(log_duration_mean, log_duration_sigma), ms
    log_duration_mean: float = np.log(20_000.0)
    log_duration_sigma: float = 0.8
    duration_min: float = 1_000.0
    duration_max: float = 300_000.0
    base_watch_time: float = 8_000.0
    duration_effect: float = 3_000.0  # coefficient on standardized log duration
    popularity_effect: float = 2_000.0
    activeness_effect: float = 2_000.0
    preference_rank: int = 8
    preference_scale: float = 2_000.0
    noise_scale: float = 1_500.0
    truncate_at_duration: bool = True
    timestamp_start: int = 1_600_000_000_000
    timestamp_span: int = 30 * 24 * 3600 * 1000
    n_user_features: int = 5
    seed: int = 0

    def __post_init__(self):
        if min(self.n_users, self.n_videos, self.n_interactions) < 1:
            raise ConfigError("population sizes must be positive")
        if self.preference_rank < 1:
            raise ConfigError("preference rank must be positive")


@dataclass
class GroundTruth:
    """Lossless sidecar: per-record latent components and entity confounders."""

    user_ids: np.ndarray
    video_ids: np.ndarray
    preference: np.ndarray  # P per record
    confounder: np.ndarray  # C per record
    noise: np.ndarray
    durations: np.ndarray  # per video
    popularity_z: np.ndarray  # per video
    activeness_z: np.ndarray  # per user
    user_factors: np.ndarray
    video_factors: np.ndarray


def _standardize(x: np.ndarray) -> np.ndarray:
    return (x - x.mean()) / x.std()


def generate(spec: SyntheticSpec) -> tuple[list[InteractionRecord], GroundTruth]:
    """Draw records in the standard log schema plus a ground-truth sidecar.

    Every video-side confounder is a deterministic function of the video id
    and every user-side confounder of the user id, so umbrella sufficiency
    holds by construction. Bit-identical for a fixed spec."""
    rng = np.random.default_rng(spec.seed)

    durations = np.clip(
        np.exp(rng.normal(spec.log_duration_mean, spec.log_duration_sigma, spec.n_videos)),
        spec.duration_min,
        spec.duration_max,
    )
    popularity_z = _standardize(rng.lognormal(0.0, 1.0, spec.n_videos))
    activeness_z = _standardize(rng.lognormal(0.0, 1.0, spec.n_users))
    log_dur_z = _standardize(np.log(durations))

    r = spec.preference_rank
    user_factors = rng.standard_normal((spec.n_users, r))
    video_factors = rng.standard_normal((spec.n_videos, r))

    n = spec.n_interactions
    u = rng.integers(0, spec.n_users, n)
    v = rng.integers(0, spec.n_videos, n)

    preference = spec.preference_scale * np.einsum(
        "ij,ij->i", user_factors[u], video_factors[v]
    ) / np.sqrt(r)
    confounder = (
        spec.duration_effect * log_dur_z[v]
        + spec.popularity_effect * popularity_z[v]
        + spec.activeness_effect * activeness_z[u]
    )
    noise = rng.normal(0.0, spec.noise_scale, n) if spec.noise_scale > 0 else np.zeros(n)

    s = np.maximum(spec.base_watch_time + confounder + preference + noise, 0.0)
    if spec.truncate_at_duration:
        s = np.minimum(s, durations[v])

    timestamps = spec.timestamp_start + rng.integers(0, spec.timestamp_span, n)

    features = _user_features(activeness_z, spec, rng)

    records = [
        InteractionRecord(
            user_id=int(ui),
            video_id=int(vi),
            watch_time=float(si),
            duration=float(durations[vi]),
            timestamp=int(ti),
            user_features=tuple(features[ui]),
        )
        for ui, vi, si, ti in zip(u, v, s, timestamps)
    ]
    truth = GroundTruth(
        user_ids=u,
        video_ids=v,
        preference=preference,
        confounder=confounder,
        noise=noise,
        durations=durations,
        popularity_z=popularity_z,
        activeness_z=activeness_z,
        user_factors=user_factors,
        video_factors=video_factors,
    )
    return records, truth


def _user_features(activeness_z: np.ndarray, spec: SyntheticSpec, rng) -> np.ndarray:
    """Categorical user features: an activeness bucket plus random codes."""
    n_users = len(activeness_z)
    cols = [np.digitize(activeness_z, [-1.0, -0.3, 0.3, 1.0])]
    for _ in range(max(spec.n_user_features - 1, 0)):
        cols.append(rng.integers(0, 6, n_users))
    return np.stack(cols, axis=1).astype(int)


def _weighted_group_mean_variance(values: np.ndarray, codes: np.ndarray) -> float:
    """Var(E[S | group]) over the empirical record distribution."""
    counts = np.bincount(codes)
    sums = np.bincount(codes, weights=values)
    nonzero = counts > 0
    means = sums[nonzero] / counts[nonzero]
    weights = counts[nonzero] / len(values)
    mu = float(np.average(means, weights=weights))
    return float(np.average((means - mu) ** 2, weights=weights))


@dataclass
class VarianceMonotonicityReport:
    var_given_id: float
    var_given_confounder: dict[str, float]
    slack: dict[str, float]
    passed: bool
    details: dict = field(default_factory=dict)


def check_variance_monotonicity(
    records: Sequence[InteractionRecord],
    truth: GroundTruth,
    n_confounder_bins: int = 10,
    n_bootstrap: int = 30,
    seed: int = 0,
) -> VarianceMonotonicityReport:
    """Verify Var(E[S|video id]) >= Var(E[S|confounder]) for each video-side
    confounder, with bootstrap slack (3 standard errors); the confounder =
    video-id case must hold with equality exactly."""
    s = np.array([r.watch_time for r in records])
    v = truth.video_ids
    if len(s) / (v.max() + 1) < 20:
        raise ConfigError("need >= 20 samples per video on average")

    def decile_codes(entity_values: np.ndarray) -> np.ndarray:
        edges = np.quantile(
            entity_values, np.linspace(0, 1, n_confounder_bins + 1)[1:-1]
        )
        return np.searchsorted(edges, entity_values[v], side="left")

    groupings = {
        "duration_bin": decile_codes(truth.durations),
        "popularity_decile": decile_codes(truth.popularity_z),
    }

    var_id = _weighted_group_mean_variance(s, v)
    var_conf = {name: _weighted_group_mean_variance(s, c) for name, c in groupings.items()}

    rng = np.random.default_rng(seed)
    slack = {}
    passed = True
    for name, codes in groupings.items():
        diffs = np.empty(n_bootstrap)
        for b in range(n_bootstrap):
            idx = rng.integers(0, len(s), len(s))
            diffs[b] = _weighted_group_mean_variance(
                s[idx], v[idx]
            ) - _weighted_group_mean_variance(s[idx], codes[idx])
        slack[name] = 3.0 * float(diffs.std())
        if var_id - var_conf[name] < -slack[name]:
            passed = False

    # sigma-algebra identity: conditioning on the id itself changes nothing
    var_self = _weighted_group_mean_variance(s, v)
    equality_ok = var_self == var_id
    return VarianceMonotonicityReport(
        var_given_id=var_id,
        var_given_confounder=var_conf,
        slack=slack,
        passed=passed and equality_ok,
        details={"var_given_video_id_as_confounder": var_self},
    )


@dataclass
class UniformityReport:
    cohorts_checked: int
    mean_violations: int
    pooled_variance: float
    variance_ok: bool
    correlations: dict[str, float]
    correlations_ok: bool
    passed: bool


def check_quantile_uniformity(
    labels: np.ndarray,
    cohort_codes: np.ndarray,
    confounders: Optional[dict[str, np.ndarray]] = None,
    min_cohort_size: int = 100,
    variance_tolerance: float = 0.20,
    correlation_tolerance: float = 0.02,
    min_pairs_for_correlation: int = 100_000,
) -> UniformityReport:
    """Per-cohort mean in 0.5 +/- 3*sqrt(1/(12n)), pooled variance within
    +/- 20% of 1/12, and near-zero correlation with cohort-level confounders."""
    labels = np.asarray(labels, dtype=float)
    cohort_codes = np.asarray(cohort_codes)

    _, codes = np.unique(cohort_codes, return_inverse=True)
    counts = np.bincount(codes)
    sums = np.bincount(codes, weights=labels)
    big = counts >= min_cohort_size
    if not np.any(big):
        raise ConfigError(f"no cohort reaches n >= {min_cohort_size}")

    means = sums[big] / counts[big]
    bands = 3.0 * np.sqrt(1.0 / (12.0 * counts[big]))
    mean_violations = int(np.sum(np.abs(means - 0.5) > bands))

    in_big = big[codes]
    pooled_variance = float(labels[in_big].var())
    variance_ok = abs(pooled_variance - 1.0 / 12.0) <= variance_tolerance / 12.0

    correlations = {}
    correlations_ok = True
    for name, values in (confounders or {}).items():
        values = np.asarray(values, dtype=float)
        if len(values) >= min_pairs_for_correlation:
            rho = float(np.corrcoef(labels, values)[0, 1])
            correlations[name] = rho
            if abs(rho) > correlation_tolerance:
                correlations_ok = False

    passed = mean_violations == 0 and variance_ok and correlations_ok
    return UniformityReport(
        cohorts_checked=int(big.sum()),
        mean_violations=mean_violations,
        pooled_variance=pooled_variance,
        variance_ok=variance_ok,
        correlations=correlations,
        correlations_ok=correlations_ok,
        passed=passed,
    )
