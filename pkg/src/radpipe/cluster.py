"""K-modes clustering of users on categorical features.

Groups sparse users into a small number of clusters so user-side quantile
cohorts have enough statistical support. Dissimilarity is Hamming
(attribute mismatch count); modes are per-attribute majorities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


def bucketize_numeric(values, boundaries) -> np.ndarray:
    """Map numeric values to range codes; out-of-range clamps to end buckets."""
    boundaries = np.asarray(boundaries, dtype=float)
    if boundaries.size == 0:
        raise ConfigError("bucket spec must not be empty")
    if np.any(np.diff(boundaries) <= 0):
        raise ConfigError("bucket boundaries must be strictly ascending")
    values = np.asarray(values, dtype=float)
    codes = np.searchsorted(boundaries, values, side="right") - 1
    return np.clip(codes, 0, len(boundaries) - 1).astype(int)


def _hamming(x: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """(n, k) mismatch counts between records and modes."""
    return (x[:, None, :] != modes[None, :, :]).sum(axis=2)


def _column_mode(column: np.ndarray) -> int:
    values, counts = np.unique(column, return_counts=True)
    return int(values[np.argmax(counts)])  # ties: smallest value


@dataclass
class KModesModel:
    k: int
    modes: np.ndarray  # (k, n_features)
    assignment: dict[int, int]
    iterations: int
    cost: float
    cost_history: list[float] = field(default_factory=list)

    def cluster_of(self, user_id: int) -> int:
        return self.assignment[user_id]


def assign(model: KModesModel, features) -> int:
    """Nearest mode by Hamming distance; ties resolve to the lowest cluster id.

    Unseen category codes simply mismatch every mode on that attribute."""
    x = np.atleast_2d(np.asarray(features, dtype=int))
    if x.shape[1] != model.modes.shape[1]:
        raise ConfigError(
            f"feature arity mismatch: got {x.shape[1]}, model has {model.modes.shape[1]}"
        )
    ids = np.argmin(_hamming(x, model.modes), axis=1)
    return int(ids[0]) if len(ids) == 1 else ids


def fit_kmodes(
    user_ids,
    features,
    k: int = 10,
    seed: int = 0,
    max_iter: int = 100,
) -> KModesModel:
    """Lloyd-style k-modes: assign to nearest mode, recompute per-attribute
    majorities, repeat until no reassignment. Deterministic for a fixed seed;
    initial modes are sampled from distinct feature rows."""
    x = np.asarray(features, dtype=int)
    user_ids = list(user_ids)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ConfigError("need at least one categorical feature")
    if len(user_ids) != len(x):
        raise ConfigError("user_ids and features must align")

    distinct = np.unique(x, axis=0)
    if k > len(distinct):
        raise ConfigError(
            f"k={k} exceeds the number of distinct feature rows ({len(distinct)})"
        )
    rng = np.random.default_rng(seed)
    modes = distinct[rng.choice(len(distinct), size=k, replace=False)].copy()

    labels = np.full(len(x), -1)
    cost_history: list[float] = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        dist = _hamming(x, modes)
        new_labels = np.argmin(dist, axis=1)

        # re-seed any empty cluster with the record farthest from its mode
        for c in range(k):
            if not np.any(new_labels == c):
                per_record = dist[np.arange(len(x)), new_labels]
                farthest = int(np.argmax(per_record))
                modes[c] = x[farthest]
                new_labels[farthest] = c

        cost = float(_hamming(x, modes)[np.arange(len(x)), new_labels].sum())
        cost_history.append(cost)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = x[labels == c]
            modes[c] = [_column_mode(members[:, j]) for j in range(x.shape[1])]

    final_cost = float(_hamming(x, modes)[np.arange(len(x)), labels].sum())
    return KModesModel(
        k=k,
        modes=modes,
        assignment={uid: int(c) for uid, c in zip(user_ids, labels)},
        iterations=iterations,
        cost=final_cost,
        cost_history=cost_history,
    )
