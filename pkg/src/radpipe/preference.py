"""Stage-2 preference model: MLP regressor on (user, video) id embeddings.

One regressor is trained per label kind (rad_v, rad_u, d2q, pcr, raw,
raw_log) with MSE loss. Predicted quantiles are mapped back to watch
times through the training-set inverse CDFs; user- and video-side
predictions are combined either by averaging mapped watch times or by
probit-space fusion of the predicted quantiles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import fusion
from .data import InteractionRecord
from .distembed import TrainingConfig
from .ecdf import CohortKey, EmpiricalCdf, QuantileLabelSet
from .errors import ConfigError, DivergenceError
from .nn import Adam, Mlp

QUANTILE_KINDS = ("rad_v", "rad_u", "d2q")
LABEL_KINDS = QUANTILE_KINDS + ("pcr", "raw", "raw_log")


@dataclass
class LabeledData:
    """Dense-coded training rows for the regressor."""

    user_rows: np.ndarray
    video_rows: np.ndarray
    targets: np.ndarray


def build_id_maps(records: Sequence[InteractionRecord]):
    users = sorted({r.user_id for r in records})
    videos = sorted({r.video_id for r in records})
    return {u: i for i, u in enumerate(users)}, {v: i for i, v in enumerate(videos)}


def prepare(
    records: Sequence[InteractionRecord],
    labels: QuantileLabelSet,
    kind: str,
    user_index: Mapping[int, int],
    video_index: Mapping[int, int],
) -> LabeledData:
    if kind not in LABEL_KINDS:
        raise ConfigError(f"unknown label kind: {kind}")
    targets = np.asarray(labels.labels_for(kind), dtype=float)
    if kind == "raw_log":
        targets = np.log1p(targets)
    return LabeledData(
        user_rows=np.array([user_index[r.user_id] for r in records], dtype=int),
        video_rows=np.array([video_index[r.video_id] for r in records], dtype=int),
        targets=targets,
    )


class MlpRegressor:
    """Id-embedding MLP mapping (user, video) to a scalar label."""

    VERSION = 1

    def __init__(
        self,
        user_index: Mapping[int, int],
        video_index: Mapping[int, int],
        label_kind: str,
        embed_dim: int = 16,
        hidden: Sequence[int] = (64, 64, 64),
        seed: int = 0,
    ):
        if label_kind not in LABEL_KINDS:
            raise ConfigError(f"unknown label kind: {label_kind}")
        self.user_index = dict(user_index)
        self.video_index = dict(video_index)
        self.label_kind = label_kind
        self.embed_dim = embed_dim
        self.hidden = tuple(hidden)
        rng = np.random.default_rng(seed)
        self.user_emb = rng.standard_normal((len(self.user_index), embed_dim)) * 0.1
        self.video_emb = rng.standard_normal((len(self.video_index), embed_dim)) * 0.1
        self.mlp = Mlp([2 * embed_dim, *hidden, 1], rng)

    @property
    def params(self) -> list[np.ndarray]:
        return [self.user_emb, self.video_emb] + self.mlp.params

    @property
    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params))

    def _forward(self, user_rows, video_rows):
        x = np.concatenate([self.user_emb[user_rows], self.video_emb[video_rows]], axis=1)
        out, cache = self.mlp.forward(x)
        return out[:, 0], cache

    def predict_rows(self, user_rows, video_rows) -> np.ndarray:
        out, _ = self._forward(np.asarray(user_rows), np.asarray(video_rows))
        return out

    def predict(self, user_ids, video_ids) -> np.ndarray:
        u = np.array([self.user_index[int(i)] for i in np.atleast_1d(user_ids)])
        v = np.array([self.video_index[int(i)] for i in np.atleast_1d(video_ids)])
        return self.predict_rows(u, v)

    def save(self, path):
        meta = {
            "version": self.VERSION,
            "label_kind": self.label_kind,
            "embed_dim": self.embed_dim,
            "hidden": list(self.hidden),
            "user_ids": list(self.user_index.keys()),
            "video_ids": list(self.video_index.keys()),
        }
        arrays = {"user_emb": self.user_emb, "video_emb": self.video_emb}
        for i, w in enumerate(self.mlp.weights):
            arrays[f"w{i}"] = w
        for i, b in enumerate(self.mlp.biases):
            arrays[f"b{i}"] = b
        np.savez(path, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
                 **arrays)

    @classmethod
    def load(cls, path) -> "MlpRegressor":
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            if meta.get("version") != cls.VERSION:
                raise ConfigError(f"unsupported model file version: {meta.get('version')}")
            model = cls(
                {int(u): i for i, u in enumerate(meta["user_ids"])},
                {int(v): i for i, v in enumerate(meta["video_ids"])},
                meta["label_kind"],
                embed_dim=meta["embed_dim"],
                hidden=meta["hidden"],
            )
            model.user_emb = data["user_emb"]
            model.video_emb = data["video_emb"]
            n_layers = len(model.mlp.weights)
            model.mlp.weights = [data[f"w{i}"] for i in range(n_layers)]
            model.mlp.biases = [data[f"b{i}"] for i in range(n_layers)]
        return model


def mse_loss_and_grads(model: MlpRegressor, data: LabeledData, idx=None):
    """MSE of a batch and gradients ordered like `model.params`."""
    if idx is None:
        idx = np.arange(len(data.targets))
    u, v, y = data.user_rows[idx], data.video_rows[idx], data.targets[idx]
    pred, cache = model._forward(u, v)
    err = pred - y
    loss = float(np.mean(err**2))
    dout = (2.0 * err / len(y))[:, None]
    dx, mlp_grads = model.mlp.backward(cache, dout)
    du = np.zeros_like(model.user_emb)
    dv = np.zeros_like(model.video_emb)
    np.add.at(du, u, dx[:, : model.embed_dim])
    np.add.at(dv, v, dx[:, model.embed_dim :])
    return loss, [du, dv] + mlp_grads


def _dataset_mse(model, data: LabeledData, batch_size=65536) -> float:
    total = 0.0
    n = len(data.targets)
    for start in range(0, n, batch_size):
        idx = np.arange(start, min(start + batch_size, n))
        pred, _ = model._forward(data.user_rows[idx], data.video_rows[idx])
        total += float(np.sum((pred - data.targets[idx]) ** 2))
    return total / n


@dataclass
class RegressorTrainResult:
    model: MlpRegressor
    train_curve: list[float] = field(default_factory=list)
    val_curve: list[float] = field(default_factory=list)
    best_epoch: int = 0


def train_regressor(
    model: MlpRegressor,
    train_data: LabeledData,
    validation_data: Optional[LabeledData],
    cfg: TrainingConfig,
) -> RegressorTrainResult:
    """MSE training with early stopping on validation loss."""
    val = validation_data if validation_data is not None else train_data
    rng = np.random.default_rng(cfg.seed)
    optimizer = Adam(lr=cfg.learning_rate)
    result = RegressorTrainResult(model=model)

    n = len(train_data.targets)
    initial_loss = _dataset_mse(model, train_data)
    best_val = np.inf
    best_params = [p.copy() for p in model.params]
    patience_left = cfg.early_stop_patience

    for epoch in range(cfg.max_epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = mse_loss_and_grads(model, train_data, idx)
            optimizer.step(model.params, grads)
            epoch_loss += loss * len(idx)
        epoch_loss /= n
        if not np.isfinite(epoch_loss) or epoch_loss > cfg.divergence_factor * max(
            initial_loss, 1e-12
        ):
            raise DivergenceError(
                f"MSE diverged at epoch {epoch}: "
                f"{epoch_loss:.6g} vs initial {initial_loss:.6g}"
            )
        val_loss = _dataset_mse(model, val)
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

    for p, best in zip(model.params, best_params):
        p[...] = best
    return result


def predict_watch_time(
    quantile_pred,
    cohort_cdf: Optional[EmpiricalCdf],
    global_cdf: Optional[EmpiricalCdf] = None,
    eps: float = 1e-4,
):
    """Map a predicted quantile back to the watch-time domain.

    Falls back to the global training CDF when the record's cohort CDF is
    unavailable; callers flag that case. Model outputs outside (0, 1) are
    clamped to (eps, 1 - eps) before the inverse-CDF lookup.
    """
    cdf = cohort_cdf if cohort_cdf is not None else global_cdf
    if cdf is None:
        raise ConfigError("no CDF available for inverse mapping")
    q = np.clip(np.asarray(quantile_pred, dtype=float), eps, 1.0 - eps)
    return cdf.inverse_quantile(q)


def raw_prediction_to_watch_time(pred, label_kind: str):
    """Identity for raw targets; expm1 for the log1p-transformed variant."""
    pred = np.asarray(pred, dtype=float)
    if label_kind == "raw_log":
        out = np.expm1(pred)
    elif label_kind == "raw":
        out = pred
    else:
        raise ConfigError(f"not a raw label kind: {label_kind}")
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def combine_uv_watch_time(pred_u=None, pred_v=None):
    """Arithmetic mean of the two mapped watch-time predictions.

    If one side is missing, the present side is returned with a flag
    (cold-start fallback)."""
    if pred_u is None and pred_v is None:
        raise ConfigError("at least one prediction is required")
    if pred_u is None:
        return pred_v, True
    if pred_v is None:
        return pred_u, True
    u = np.asarray(pred_u, dtype=float)
    v = np.asarray(pred_v, dtype=float)
    out = 0.5 * (u + v)
    return (float(out) if out.ndim == 0 else out), False


def combine_uv_quantile(q_user, q_video, weights: Optional[fusion.FusionWeights] = None):
    """Probit-space fusion of model-predicted quantiles."""
    w = weights or fusion.FusionWeights()
    q_user = np.clip(np.asarray(q_user, dtype=float), 1e-6, 1.0 - 1e-6)
    q_video = np.clip(np.asarray(q_video, dtype=float), 1e-6, 1.0 - 1e-6)
    out = fusion.fuse_arrays(q_user, q_video, w.alpha, w.beta)
    return float(out) if np.ndim(out) == 0 else out
