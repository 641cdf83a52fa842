"""Learned monotone quantile functions per cohort (distribution embeddings).

Each cohort id maps to a learned embedding; a shared MLP turns it into K
raw logits whose softplus is cumulatively summed, giving strictly
increasing positive breakpoints b_1 < ... < b_K. b_k estimates the
k/(K+1) watch-time quantile and the model is trained with pinball loss,
so a trained model replaces the cohort's stored watch-time history.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .ecdf import CohortKey
from .errors import ConfigError, DivergenceError
from .nn import Adam, Mlp, sigmoid, softplus


@dataclass(slots=True)
class TrainingConfig:
    """Shared optimizer settings for both training stages."""

    learning_rate: float = 1e-5
    max_epochs: int = 50
    early_stop_patience: int = 5
    batch_size: int = 1024
    seed: int = 0
    divergence_factor: float = 10.0

    def __post_init__(self):
        if min(self.learning_rate, self.max_epochs, self.early_stop_patience,
               self.batch_size, self.divergence_factor) <= 0:
            raise ConfigError("all training-config fields must be positive")


def quantile_grid(k_breakpoints: int) -> np.ndarray:
    """Target levels tau_k = k/(K+1), k = 1..K."""
    return np.arange(1, k_breakpoints + 1, dtype=float) / (k_breakpoints + 1)


def pinball_loss(breakpoints, y) -> float:
    """Mean over k of tau_k*(y - b_k)+ + (1 - tau_k)*(b_k - y)+.

    `breakpoints` may be (K,) with scalar y, or (B, K) with y of shape (B,),
    in which case the batch mean is returned.
    """
    b = np.atleast_2d(np.asarray(breakpoints, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    tau = quantile_grid(b.shape[1])
    diff = y - b
    per_k = tau * np.maximum(diff, 0.0) + (1.0 - tau) * np.maximum(-diff, 0.0)
    return float(per_k.mean())


def pinball_grad(breakpoints: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d(mean-over-k pinball)/d b, per sample; shape matches `breakpoints`."""
    b = np.atleast_2d(breakpoints)
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    tau = quantile_grid(b.shape[1])
    g = (-tau * (y > b) + (1.0 - tau) * (b > y)) / b.shape[1]
    return g.reshape(np.shape(breakpoints))


class MultiquantileModel:
    """Embedding table + shared MLP emitting K monotone breakpoints."""

    VERSION = 1

    def __init__(
        self,
        cohorts: Sequence,
        k_breakpoints: int = 100,
        embed_dim: int = 16,
        hidden: Sequence[int] = (64, 64, 64),
        seed: int = 0,
    ):
        if k_breakpoints < 1:
            raise ConfigError("need at least one breakpoint")
        self.cohorts = list(cohorts)
        self.cohort_index = {c: i for i, c in enumerate(self.cohorts)}
        self.K = k_breakpoints
        self.embed_dim = embed_dim
        self.hidden = tuple(hidden)
        rng = np.random.default_rng(seed)
        self.embedding = rng.standard_normal((len(self.cohorts), embed_dim)) * 0.1
        self.mlp = Mlp([embed_dim, *hidden, k_breakpoints], rng)

    @property
    def params(self) -> list[np.ndarray]:
        return [self.embedding] + self.mlp.params

    def _rows_of(self, cohort) -> int:
        try:
            return self.cohort_index[cohort]
        except KeyError:
            raise ConfigError(f"unknown cohort: {cohort!r}") from None

    def _forward_rows(self, rows: np.ndarray):
        x = self.embedding[rows]
        logits, cache = self.mlp.forward(x)
        deltas = softplus(logits)
        bp = np.cumsum(deltas, axis=1)
        return bp, logits, cache

    def breakpoints(self, cohort) -> np.ndarray:
        """Strictly increasing positive breakpoints for one cohort."""
        bp, _, _ = self._forward_rows(np.array([self._rows_of(cohort)]))
        return bp[0]

    def quantile_of_learned(
        self, cohort, s, rule: str = "grid", interpolate: bool = False
    ):
        """Quantile of watch time(s) `s` under the learned breakpoints.

        Q = k/(K+1) with k = min{j : s <= b_j}; watch times above every
        breakpoint clamp to 1 - 1/(2(K+1)). rule="literal" uses the raw
        k/K labeling instead, clamped inside (0, 1).
        """
        b = self.breakpoints(cohort)
        s = np.asarray(s, dtype=float)
        eps = 1.0 / (2.0 * (self.K + 1))
        if interpolate:
            q = np.interp(s, b, quantile_grid(self.K))
            out = np.clip(q, eps, 1.0 - eps)
            return float(out) if out.ndim == 0 else out
        k = np.searchsorted(b, s, side="left") + 1  # min j with s <= b_j
        if rule == "grid":
            q = k / (self.K + 1.0)
        elif rule == "literal":
            q = k / float(self.K)
        else:
            raise ConfigError(f"unknown labeling rule: {rule}")
        out = np.where(k > self.K, 1.0 - eps, np.clip(q, eps, 1.0 - eps))
        return float(out) if out.ndim == 0 else out

    def save(self, path):
        keys = [
            {"kind": c.kind, "id": c.id, "bin": c.bin} if isinstance(c, CohortKey) else c
            for c in self.cohorts
        ]
        meta = {
            "version": self.VERSION,
            "K": self.K,
            "embed_dim": self.embed_dim,
            "hidden": list(self.hidden),
            "cohorts": keys,
        }
        arrays = {"embedding": self.embedding}
        for i, w in enumerate(self.mlp.weights):
            arrays[f"w{i}"] = w
        for i, b in enumerate(self.mlp.biases):
            arrays[f"b{i}"] = b
        np.savez(path, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
                 **arrays)

    @classmethod
    def load(cls, path) -> "MultiquantileModel":
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            if meta.get("version") != cls.VERSION:
                raise ConfigError(f"unsupported model file version: {meta.get('version')}")
            cohorts = [
                CohortKey(c["kind"], c["id"], c["bin"]) if isinstance(c, dict) else c
                for c in meta["cohorts"]
            ]
            model = cls(
                cohorts,
                k_breakpoints=meta["K"],
                embed_dim=meta["embed_dim"],
                hidden=meta["hidden"],
            )
            model.embedding = data["embedding"]
            n_layers = len(model.mlp.weights)
            model.mlp.weights = [data[f"w{i}"] for i in range(n_layers)]
            model.mlp.biases = [data[f"b{i}"] for i in range(n_layers)]
        return model


@dataclass
class TrainResult:
    model: MultiquantileModel
    train_curve: list[float] = field(default_factory=list)
    val_curve: list[float] = field(default_factory=list)
    best_epoch: int = 0


def _flatten(samples_by_cohort: Mapping, index: Mapping) -> tuple[np.ndarray, np.ndarray]:
    rows, ys = [], []
    for cohort, samples in samples_by_cohort.items():
        samples = np.asarray(samples, dtype=float)
        rows.append(np.full(len(samples), index[cohort], dtype=int))
        ys.append(samples)
    return np.concatenate(rows), np.concatenate(ys)


def batch_loss_and_grads(model: MultiquantileModel, rows: np.ndarray, y: np.ndarray):
    """Pinball loss of a batch and gradients ordered like `model.params`."""
    bp, logits, cache = model._forward_rows(rows)
    loss = pinball_loss(bp, y)
    dbp = pinball_grad(bp, y) / len(y)
    # d/d delta_j = sum_{k >= j} d/d b_k (cumsum transpose)
    ddeltas = np.cumsum(dbp[:, ::-1], axis=1)[:, ::-1]
    dlogits = ddeltas * sigmoid(logits)
    dx, mlp_grads = model.mlp.backward(cache, dlogits)
    demb = np.zeros_like(model.embedding)
    np.add.at(demb, rows, dx)
    return loss, [demb] + mlp_grads


def _dataset_loss(model, rows, y, batch_size=65536) -> float:
    total = 0.0
    for start in range(0, len(y), batch_size):
        sl = slice(start, start + batch_size)
        bp, _, _ = model._forward_rows(rows[sl])
        total += pinball_loss(bp, y[sl]) * (min(start + batch_size, len(y)) - start)
    return total / len(y)


def train(
    model: MultiquantileModel,
    train_by_cohort: Mapping,
    cfg: TrainingConfig,
    validation_by_cohort: Optional[Mapping] = None,
) -> TrainResult:
    """Mini-batch pinball training with early stopping on validation loss.

    Raises DivergenceError when the running loss exceeds
    `cfg.divergence_factor` times the initial loss.
    """
    rows, y = _flatten(train_by_cohort, model.cohort_index)
    if validation_by_cohort is not None:
        val_rows, val_y = _flatten(validation_by_cohort, model.cohort_index)
    else:
        val_rows, val_y = rows, y

    rng = np.random.default_rng(cfg.seed)
    optimizer = Adam(lr=cfg.learning_rate)
    result = TrainResult(model=model)

    initial_loss = _dataset_loss(model, rows, y)
    best_val = np.inf
    best_params = [p.copy() for p in model.params]
    patience_left = cfg.early_stop_patience

    for epoch in range(cfg.max_epochs):
        order = rng.permutation(len(y))
        epoch_loss = 0.0
        for start in range(0, len(y), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = batch_loss_and_grads(model, rows[idx], y[idx])
            optimizer.step(model.params, grads)
            epoch_loss += loss * len(idx)
        epoch_loss /= len(y)
        if not np.isfinite(epoch_loss) or epoch_loss > cfg.divergence_factor * initial_loss:
            raise DivergenceError(
                f"pinball loss diverged at epoch {epoch}: "
                f"{epoch_loss:.6g} vs initial {initial_loss:.6g}"
            )
        val_loss = _dataset_loss(model, val_rows, val_y)
        result.train_curve.append(float(epoch_loss))
        result.val_curve.append(float(val_loss))
        if val_loss < best_val:
            best_val = val_loss
            best_params = [p.copy() for p in model.params]
            result.best_epoch = epoch
            patience_left = cfg.early_stop_patience
        else:
            patience_left -= 1
            if patience_left <= 0:
                break

    model.embedding[...] = best_params[0]
    for p, best in zip(model.mlp.params, best_params[1:]):
        p[...] = best
    return result
