"""Error and ranking metrics: MAE, XAUC, grouped XAUC, 1-Wasserstein.

XAUC scores all pairs with distinct truths: concordant pairs count 1,
prediction-tied pairs 0.5, discordant 0. Computed exactly in O(n log n)
with a Fenwick tree over prediction ranks; pairs with tied truths are
excluded from the total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .errors import MetricError


def mae(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.size == 0:
        raise MetricError("mae requires equal-length, non-empty inputs")
    return float(np.mean(np.abs(pred - truth)))


def _count_inversions(ranks: np.ndarray, size: int) -> int:
    """Strict inversions (ranks[i] > ranks[j] for i < j) via a Fenwick tree."""
    tree = [0] * (size + 1)
    inversions = 0
    for seen, r in enumerate(ranks):
        i = int(r)
        leq = 0
        while i > 0:
            leq += tree[i]
            i -= i & -i
        inversions += seen - leq
        i = int(r)
        while i <= size:
            tree[i] += 1
            i += i & -i
    return inversions


def _tied_pairs(values: np.ndarray) -> int:
    _, counts = np.unique(values, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def xauc(pred, truth) -> float:
    """Concordance of predicted ordering with true watch-time ordering."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    n = len(pred)
    if n != len(truth) or n < 2:
        raise MetricError("xauc requires >= 2 paired records")

    n_all = n * (n - 1) // 2
    tied_truth = _tied_pairs(truth)
    valid = n_all - tied_truth
    if valid == 0:
        raise MetricError("xauc undefined: no pair with distinct truths")

    # Sort by (truth, pred): strict pred inversions in this order are exactly
    # the discordant pairs; equal-truth pairs cannot invert (pred ascending
    # within truth ties).
    order = np.lexsort((pred, truth))
    p_sorted = pred[order]
    _, ranks = np.unique(p_sorted, return_inverse=True)
    discordant = _count_inversions(ranks + 1, int(ranks.max()) + 1)

    tied_pred = _tied_pairs(pred)
    tied_both = _tied_pairs(truth + 1j * pred)  # pairs tied in both coordinates
    concordant = valid - (tied_pred - tied_both) - discordant
    return float((concordant + 0.5 * (tied_pred - tied_both)) / valid)


@dataclass
class GroupXaucResult:
    value: float
    pair_count: int
    groups_used: int
    groups_skipped: int
    unweighted_value: float = float("nan")
    per_group: dict = field(default_factory=dict)


def xgauc(pred, truth, groups, weighted: bool = True, keep_per_group: bool = False) -> GroupXaucResult:
    """XAUC within each group, averaged across groups.

    Weighted by each group's valid-pair count by default; the unweighted
    mean is also reported. Groups without a valid pair are skipped and
    counted.
    """
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    groups = np.asarray(groups)
    if not (len(pred) == len(truth) == len(groups)):
        raise MetricError("xgauc requires aligned pred/truth/group arrays")

    order = np.argsort(groups, kind="stable")
    g_sorted = groups[order]
    boundaries = np.flatnonzero(g_sorted[1:] != g_sorted[:-1]) + 1
    values, weights, skipped = [], [], 0
    per_group = {}
    for idx in np.split(order, boundaries):
        sub_t = truth[idx]
        n = len(idx)
        pairs = n * (n - 1) // 2 - _tied_pairs(sub_t)
        if pairs == 0:
            skipped += 1
            continue
        v = xauc(pred[idx], sub_t)
        values.append(v)
        weights.append(pairs)
        if keep_per_group:
            per_group[groups[idx[0]].item()] = (v, pairs)
    if not values:
        raise MetricError("xgauc undefined: no group has a valid pair")

    values = np.array(values)
    weights = np.array(weights, dtype=float)
    weighted_value = float(np.average(values, weights=weights))
    unweighted_value = float(np.mean(values))
    return GroupXaucResult(
        value=weighted_value if weighted else unweighted_value,
        pair_count=int(weights.sum()),
        groups_used=len(values),
        groups_skipped=skipped,
        unweighted_value=unweighted_value,
        per_group=per_group,
    )


def group_xauc_cdf(pred_quantiles, truth_watch_times, groups, **kw) -> GroupXaucResult:
    """Grouped XAUC of quantile-space predictions against raw watch times.

    Group by user to score video-side predictions (User Group XAUC) and by
    video to score user-side predictions (Video Group XAUC); each side is
    evaluated on the opposite grouping.
    """
    return xgauc(pred_quantiles, truth_watch_times, groups, **kw)


def wasserstein1(samples_a, samples_b) -> float:
    """1-Wasserstein distance between two empirical distributions.

    Exact integral of |F_a - F_b| over the merged support; for equal sizes
    this equals the mean absolute difference of the sorted samples.
    """
    a = np.sort(np.asarray(samples_a, dtype=float))
    b = np.sort(np.asarray(samples_b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise MetricError("wasserstein1 requires non-empty samples")
    support = np.sort(np.concatenate([a, b]))
    deltas = np.diff(support)
    f_a = np.searchsorted(a, support[:-1], side="right") / len(a)
    f_b = np.searchsorted(b, support[:-1], side="right") / len(b)
    return float(np.sum(np.abs(f_a - f_b) * deltas))


@dataclass
class MetricsReport:
    """Flat metric bundle for one (label kind, model) column."""

    mae: float
    xauc: float
    xgauc: float
    user_group_xauc: float = float("nan")
    video_group_xauc: float = float("nan")
    wasserstein: Optional[float] = None
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "mae": self.mae,
            "xauc": self.xauc,
            "xgauc": self.xgauc,
            "user_group_xauc": self.user_group_xauc,
            "video_group_xauc": self.video_group_xauc,
        }
        if self.wasserstein is not None:
            out["wasserstein"] = self.wasserstein
        out.update(self.detail)
        return out
