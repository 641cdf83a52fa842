"""Command-line orchestration of the debiasing pipeline.

Subcommands (run in order): simulate, split, cluster, build-cdfs,
train-embed, label, train-model, evaluate, report. Each writes versioned
artifacts plus a manifest recording the hash of every input artifact and
the config section that produced it.

Exit codes: 0 success, 2 config error, 3 missing dependency, 4 numeric
divergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import cluster as cluster_mod
from . import distembed, ecdf, fusion, metrics, preference, synth
from .config import PipelineConfig, derive_seed
from .data import (
    DurationBinner,
    InteractionRecord,
    SplitSpec,
    chrono_split,
    fit_duration_binner,
    ingest,
)
from .distembed import MultiquantileModel, TrainingConfig
from .ecdf import CohortKey, EmpiricalCdf, QuantileLabelSet
from .errors import ConfigError, DependencyError, DivergenceError, RadpipeError

logger = logging.getLogger(__name__)

PARTS = ("train", "validation", "test")


# ---------------------------------------------------------------------------
# artifact plumbing


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    return path


def _require(path: Path, produced_by: str) -> Path:
    if not path.exists():
        raise DependencyError(str(path), produced_by)
    return path


def _write_manifest(out_dir: Path, step: str, inputs: list[Path], outputs: list[Path],
                    config_section: dict):
    manifest = {
        "step": step,
        "inputs": {p.name: _sha256(p) for p in inputs},
        "outputs": {p.name: _sha256(p) for p in outputs},
        "config": config_section,
    }
    _write_json(out_dir / f"manifest_{step.replace('-', '_')}.json", manifest)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_records_csv(path: Path, records, n_features: int) -> Path:
    header = ["user_id", "video_id", "watch_time", "duration", "timestamp"]
    header += [f"feature_{i}" for i in range(n_features)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in records:
            row = [r.user_id, r.video_id, _fmt(r.watch_time), _fmt(r.duration), r.timestamp]
            if n_features:
                row += list(r.user_features or ())
            w.writerow(row)
    return path


def _read_records_csv(path: Path):
    with open(path, newline="") as fh:
        header = csv.reader(fh).__next__()
    feature_cols = [c for c in header if c.startswith("feature_")]
    return ingest(path, feature_columns=feature_cols)


def _n_features(records) -> int:
    for r in records:
        if r.user_features is not None:
            return len(r.user_features)
    return 0


# ---------------------------------------------------------------------------
# CDF store (single versioned JSON artifact mapping CohortKey -> samples)

CDF_STORE_VERSION = 1


def _save_cdf_store(path: Path, tables: dict, global_samples: np.ndarray) -> Path:
    payload = {"version": CDF_STORE_VERSION, "tables": {}}
    for kind, table in tables.items():
        payload["tables"][kind] = [
            {"id": key.id, "bin": key.bin, "samples": cdf.samples.tolist()}
            for key, cdf in sorted(table.items(), key=lambda kv: (kv[0].id, kv[0].bin or 0))
        ]
    payload["global_samples"] = np.sort(global_samples).tolist()
    return _write_json(path, payload)


def _load_cdf_store(path: Path):
    payload = json.loads(path.read_text())
    if payload.get("version") != CDF_STORE_VERSION:
        raise ConfigError(f"unsupported CDF store version in {path}")
    tables = {}
    for kind, entries in payload["tables"].items():
        table = {}
        for e in entries:
            key = CohortKey(kind, e["id"], e["bin"])
            table[key] = EmpiricalCdf(cohort=key, samples=np.array(e["samples"]))
        tables[kind] = table
    global_key = CohortKey("video", -1)
    global_cdf = EmpiricalCdf(cohort=global_key, samples=np.array(payload["global_samples"]))
    return tables, global_cdf


def _save_binner(path: Path, binner: DurationBinner) -> Path:
    return _write_json(
        path, {"boundaries": binner.boundaries.tolist(), "D": binner.D, "masses": binner.masses}
    )


def _load_binner(path: Path) -> DurationBinner:
    obj = json.loads(path.read_text())
    return DurationBinner(
        boundaries=np.array(obj["boundaries"], dtype=float), D=obj["D"], masses=obj["masses"]
    )


def _load_clusters(path: Path) -> dict[int, int]:
    clusters = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            clusters[int(row["user_id"])] = int(row["cluster_id"])
    return clusters


LABEL_COLUMNS = (
    "q_video", "q_user", "q_d2q", "pcr", "raw",
    "fallback_video", "fallback_user", "fallback_d2q",
    "user_support", "video_support",
)


def _write_labels_csv(path: Path, records, labels: QuantileLabelSet) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "video_id", "watch_time", "duration", "timestamp",
                    *LABEL_COLUMNS])
        for i, r in enumerate(records):
            w.writerow([
                r.user_id, r.video_id, _fmt(r.watch_time), _fmt(r.duration), r.timestamp,
                _fmt(float(labels.q_video[i])), _fmt(float(labels.q_user[i])),
                _fmt(float(labels.q_d2q[i])), _fmt(float(labels.pcr[i])),
                _fmt(float(labels.raw[i])),
                int(labels.fallback_video[i]), int(labels.fallback_user[i]),
                int(labels.fallback_d2q[i]),
                int(labels.user_support[i]), int(labels.video_support[i]),
            ])
    return path


def _read_labels_csv(path: Path):
    records, cols = [], {c: [] for c in LABEL_COLUMNS}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(InteractionRecord(
                user_id=int(row["user_id"]), video_id=int(row["video_id"]),
                watch_time=float(row["watch_time"]), duration=float(row["duration"]),
                timestamp=int(row["timestamp"]),
            ))
            for c in cols:
                cols[c].append(float(row[c]))
    labels = QuantileLabelSet(
        q_video=np.array(cols["q_video"]), q_user=np.array(cols["q_user"]),
        q_d2q=np.array(cols["q_d2q"]), pcr=np.array(cols["pcr"]),
        raw=np.array(cols["raw"]),
        fallback_video=np.array(cols["fallback_video"], dtype=bool),
        fallback_user=np.array(cols["fallback_user"], dtype=bool),
        fallback_d2q=np.array(cols["fallback_d2q"], dtype=bool),
        user_support=np.array(cols["user_support"], dtype=int),
        video_support=np.array(cols["video_support"], dtype=int),
    )
    return records, labels


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg: PipelineConfig, out: Path):
    spec = synth.SyntheticSpec(
        seed=derive_seed(cfg.seed, "synth"), **cfg.section("synth")
    )
    records, truth = synth.generate(spec)
    data_path = _write_records_csv(out / "data.csv", records, _n_features(records))
    truth_path = out / "truth.csv"
    with open(truth_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "video_id", "preference", "confounder", "noise"])
        for i in range(len(records)):
            w.writerow([
                int(truth.user_ids[i]), int(truth.video_ids[i]),
                _fmt(float(truth.preference[i])), _fmt(float(truth.confounder[i])),
                _fmt(float(truth.noise[i])),
            ])
    _write_manifest(out, "simulate", [], [data_path, truth_path], cfg.section("synth"))


def cmd_split(cfg: PipelineConfig, out: Path):
    if cfg.data_path:
        data_path = Path(cfg.data_path)
        if not data_path.exists():
            raise ConfigError(f"data_path does not exist: {data_path}")
    else:
        data_path = _require(out / "data.csv", "simulate")
    if cfg.train_end is None or cfg.validation_end is None:
        raise ConfigError("split requires train_end and validation_end")
    records = ingest(data_path, schema=cfg.schema,
                     feature_columns=cfg.feature_columns or _csv_feature_columns(data_path),
                     delimiter=cfg.delimiter)
    result = chrono_split(records, SplitSpec(cfg.train_end, cfg.validation_end))
    outputs = []
    n_feat = _n_features(records)
    for part in PARTS:
        outputs.append(_write_records_csv(out / f"{part}.csv", getattr(result, part), n_feat))
    outputs.append(_write_json(out / "split_report.json", result.report))
    binner = fit_duration_binner(result.train, cfg.duration_bins)
    outputs.append(_save_binner(out / "binner.json", binner))
    _write_manifest(out, "split", [data_path], outputs,
                    {"train_end": cfg.train_end, "validation_end": cfg.validation_end,
                     "duration_bins": cfg.duration_bins})


def _csv_feature_columns(path: Path) -> list[str]:
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    return [c for c in header if c.startswith("feature_")]


def cmd_cluster(cfg: PipelineConfig, out: Path):
    train_path = _require(out / "train.csv", "split")
    records = _read_records_csv(train_path)
    by_user = {}
    for r in records:
        if r.user_features is None:
            raise ConfigError("cluster requires user feature columns in the log")
        by_user.setdefault(r.user_id, r.user_features)
    user_ids = sorted(by_user)
    model = cluster_mod.fit_kmodes(
        user_ids, np.array([by_user[u] for u in user_ids]),
        k=cfg.cluster.k, seed=derive_seed(cfg.seed, "cluster"),
        max_iter=cfg.cluster.max_iter,
    )
    path = out / "clusters.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "cluster_id"])
        for u in user_ids:
            w.writerow([u, model.assignment[u]])
    _write_manifest(out, "cluster", [train_path], [path], cfg.section("cluster"))


def _load_partitions(out: Path):
    parts = {}
    for part in PARTS:
        parts[part] = _read_records_csv(_require(out / f"{part}.csv", "split"))
    return parts


def cmd_build_cdfs(cfg: PipelineConfig, out: Path):
    train_path = _require(out / "train.csv", "split")
    binner = _load_binner(_require(out / "binner.json", "split"))
    train = _read_records_csv(train_path)
    clusters = None
    inputs = [train_path]
    if (out / "clusters.csv").exists():
        clusters = _load_clusters(out / "clusters.csv")
        inputs.append(out / "clusters.csv")
    tables = ecdf.build_all_cdf_tables(train, binner, clusters)
    path = _save_cdf_store(out / "cdfs.json", tables,
                           np.array([r.watch_time for r in train]))
    _write_manifest(out, "build-cdfs", inputs, [path],
                    {"duration_bins": cfg.duration_bins, "tie_rule": cfg.tie_rule})


def cmd_train_embed(cfg: PipelineConfig, out: Path):
    binner = _load_binner(_require(out / "binner.json", "split"))
    parts = {p: _read_records_csv(_require(out / f"{p}.csv", "split"))
             for p in ("train", "validation")}
    kind = cfg.embed.cohort_kind
    clusters = None
    inputs = [out / "train.csv", out / "validation.csv"]
    if kind == "user_cluster_x_durationbin":
        clusters = _load_clusters(_require(out / "clusters.csv", "cluster"))
        inputs.append(out / "clusters.csv")

    def by_cohort(records):
        groups = {}
        for r in records:
            key = ecdf.cohort_key_for(r, kind, binner, clusters)
            groups.setdefault(key, []).append(r.watch_time)
        return {k: np.array(v) for k, v in groups.items()}

    train_groups = {k: v for k, v in by_cohort(parts["train"]).items()
                    if len(v) >= cfg.embed.min_cohort_size}
    val_groups = {k: v for k, v in by_cohort(parts["validation"]).items()
                  if k in train_groups}
    model = MultiquantileModel(
        sorted(train_groups, key=lambda c: (c.id, c.bin or 0)),
        k_breakpoints=cfg.embed.k_breakpoints, embed_dim=cfg.embed.embed_dim,
        hidden=cfg.embed.hidden, seed=derive_seed(cfg.seed, "embed"),
    )
    tcfg = TrainingConfig(seed=derive_seed(cfg.seed, "embed-train"),
                          **cfg.section("stage1_training"))
    result = distembed.train(model, train_groups, tcfg, val_groups or None)
    model_path = out / "embed_model.npz"
    model.save(model_path)
    curve_path = _write_json(out / "embed_curves.json", {
        "train": result.train_curve, "validation": result.val_curve,
        "best_epoch": result.best_epoch, "cohort_kind": kind,
    })
    _write_manifest(out, "train-embed", inputs, [model_path, curve_path],
                    {**cfg.section("embed"), **cfg.section("stage1_training")})


def cmd_label(cfg: PipelineConfig, out: Path):
    binner = _load_binner(_require(out / "binner.json", "split"))
    tables, _ = _load_cdf_store(_require(out / "cdfs.json", "build-cdfs"))
    clusters = _load_clusters(out / "clusters.csv") if (out / "clusters.csv").exists() else None
    inputs = [out / "cdfs.json", out / "binner.json"]

    embed_model = None
    if cfg.cdf_source == "learned":
        embed_model = MultiquantileModel.load(_require(out / "embed_model.npz", "train-embed"))
        embed_kind = json.loads((out / "embed_curves.json").read_text())["cohort_kind"]
        inputs.append(out / "embed_model.npz")
    elif cfg.cdf_source != "empirical":
        raise ConfigError(f"unknown cdf_source: {cfg.cdf_source}")

    outputs = []
    for part in PARTS:
        part_path = _require(out / f"{part}.csv", "split")
        records = _read_records_csv(part_path)
        labels = ecdf.label_records(records, tables, binner, clusters,
                                    tie_rule=cfg.tie_rule)
        if embed_model is not None:
            q_user = np.empty(len(records))
            for i, r in enumerate(records):
                key = ecdf.cohort_key_for(r, embed_kind, binner, clusters)
                if key in embed_model.cohort_index:
                    q_user[i] = embed_model.quantile_of_learned(key, r.watch_time)
                else:
                    q_user[i] = 0.5
                    labels.fallback_user[i] = True
            labels.q_user = q_user
        outputs.append(_write_labels_csv(out / f"labels_{part}.csv", records, labels))
    _write_manifest(out, "label", inputs, outputs,
                    {"tie_rule": cfg.tie_rule, "cdf_source": cfg.cdf_source})


def cmd_train_model(cfg: PipelineConfig, out: Path):
    train_records, train_labels = _read_labels_csv(_require(out / "labels_train.csv", "label"))
    val_records, val_labels = _read_labels_csv(_require(out / "labels_validation.csv", "label"))
    user_index, video_index = preference.build_id_maps(train_records)
    outputs = []
    for kind in cfg.label_kinds:
        model = preference.MlpRegressor(
            user_index, video_index, kind,
            embed_dim=cfg.model.embed_dim, hidden=cfg.model.hidden,
            seed=derive_seed(cfg.seed, f"model:{kind}"),
        )
        tcfg = TrainingConfig(seed=derive_seed(cfg.seed, f"model-train:{kind}"),
                              **cfg.section("stage2_training"))
        train_data = preference.prepare(train_records, train_labels, kind,
                                        user_index, video_index)
        val_data = (preference.prepare(val_records, val_labels, kind,
                                       user_index, video_index)
                    if val_records else None)
        result = preference.train_regressor(model, train_data, val_data, tcfg)
        model_path = out / f"model_{kind}.npz"
        model.save(model_path)
        outputs.append(model_path)
        outputs.append(_write_json(out / f"curves_{kind}.json", {
            "train": result.train_curve, "validation": result.val_curve,
            "best_epoch": result.best_epoch,
            "parameter_count": model.parameter_count,
        }))
    _write_manifest(out, "train-model",
                    [out / "labels_train.csv", out / "labels_validation.csv"],
                    outputs, {"label_kinds": cfg.label_kinds,
                              **cfg.section("stage2_training")})


def _mapped_watch_time(kind, preds, records, tables, global_cdf, binner, clusters):
    """Map label-space predictions to the watch-time domain per record."""
    if kind in ("raw", "raw_log"):
        return preference.raw_prediction_to_watch_time(preds, kind)
    if kind == "pcr":
        durations = np.array([r.duration for r in records])
        return np.clip(preds, 0.0, 1.0) * durations
    cohort_kind = {"rad_v": "video", "rad_u": "user_x_durationbin",
                   "d2q": "duration_bin"}[kind]
    table = tables.get(cohort_kind, {})
    out_wt = np.empty(len(records))
    for i, r in enumerate(records):
        key = ecdf.cohort_key_for(r, cohort_kind, binner, clusters)
        out_wt[i] = preference.predict_watch_time(preds[i], table.get(key), global_cdf)
    return out_wt


def cmd_evaluate(cfg: PipelineConfig, out: Path):
    records, labels = _read_labels_csv(_require(out / "labels_test.csv", "label"))
    tables, global_cdf = _load_cdf_store(_require(out / "cdfs.json", "build-cdfs"))
    binner = _load_binner(_require(out / "binner.json", "split"))
    clusters = _load_clusters(out / "clusters.csv") if (out / "clusters.csv").exists() else None

    truth_wt = np.array([r.watch_time for r in records])
    user_groups = np.array([r.user_id for r in records])
    video_groups = np.array([r.video_id for r in records])
    inputs = [out / "labels_test.csv", out / "cdfs.json"]

    report: dict[str, dict] = {}
    preds_by_kind = {}
    mapped_by_kind = {}
    for kind in cfg.label_kinds:
        model_path = _require(out / f"model_{kind}.npz", "train-model")
        inputs.append(model_path)
        model = preference.MlpRegressor.load(model_path)
        preds = model.predict([r.user_id for r in records], [r.video_id for r in records])
        mapped = _mapped_watch_time(kind, preds, records, tables, global_cdf,
                                    binner, clusters)
        preds_by_kind[kind] = preds
        mapped_by_kind[kind] = mapped
        report[kind] = metrics.MetricsReport(
            mae=metrics.mae(mapped, truth_wt),
            xauc=metrics.xauc(mapped, truth_wt),
            xgauc=metrics.xgauc(mapped, truth_wt, user_groups).value,
            user_group_xauc=metrics.group_xauc_cdf(preds, truth_wt, user_groups).value,
            video_group_xauc=metrics.group_xauc_cdf(preds, truth_wt, video_groups).value,
        ).as_dict()

    if "rad_u" in preds_by_kind and "rad_v" in preds_by_kind:
        mapped_uv, _ = preference.combine_uv_watch_time(
            mapped_by_kind["rad_u"], mapped_by_kind["rad_v"])
        if cfg.fusion.policy == "support_proportional":
            alpha = labels.user_support.astype(float)
            beta = labels.video_support.astype(float)
            alpha = np.where(alpha + beta == 0, 1.0, alpha)
        else:
            alpha, beta = cfg.fusion.alpha, cfg.fusion.beta
        fused_q = preference.combine_uv_quantile(
            preds_by_kind["rad_u"], preds_by_kind["rad_v"],
            fusion.FusionWeights(1.0, 1.0, "equal"),
        ) if cfg.fusion.policy == "equal" else fusion.fuse_arrays(
            np.clip(preds_by_kind["rad_u"], 1e-6, 1 - 1e-6),
            np.clip(preds_by_kind["rad_v"], 1e-6, 1 - 1e-6), alpha, beta)
        report["rad_uv"] = metrics.MetricsReport(
            mae=metrics.mae(mapped_uv, truth_wt),
            xauc=metrics.xauc(mapped_uv, truth_wt),
            xgauc=metrics.xgauc(mapped_uv, truth_wt, user_groups).value,
            user_group_xauc=metrics.group_xauc_cdf(fused_q, truth_wt, user_groups).value,
            video_group_xauc=metrics.group_xauc_cdf(fused_q, truth_wt, video_groups).value,
        ).as_dict()

    if (out / "embed_model.npz").exists():
        report["multiquantile_fit"] = _embed_wasserstein(out, records, binner, clusters)
        inputs.append(out / "embed_model.npz")

    json_path = _write_json(out / "metrics.json", report)
    csv_path = out / "metrics.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "metric", "value"])
        for method in sorted(report):
            for metric_name in sorted(report[method]):
                w.writerow([method, metric_name, _fmt(report[method][metric_name])])
    _write_manifest(out, "evaluate", inputs, [json_path, csv_path],
                    {"label_kinds": cfg.label_kinds, "fusion": cfg.section("fusion")})


def _embed_wasserstein(out: Path, test_records, binner, clusters):
    """Mean W1 of learned breakpoints vs held-out cohort samples, with the
    train-ECDF floor for comparison."""
    model = MultiquantileModel.load(out / "embed_model.npz")
    kind = json.loads((out / "embed_curves.json").read_text())["cohort_kind"]
    train = _read_records_csv(out / "train.csv")

    def group(records):
        groups = {}
        for r in records:
            key = ecdf.cohort_key_for(r, kind, binner, clusters)
            groups.setdefault(key, []).append(r.watch_time)
        return groups

    train_groups, test_groups = group(train), group(test_records)
    learned, floor = [], []
    for key, held_out in test_groups.items():
        if key not in model.cohort_index or key not in train_groups:
            continue
        learned.append(metrics.wasserstein1(model.breakpoints(key), held_out))
        floor.append(metrics.wasserstein1(train_groups[key], held_out))
    if not learned:
        return {"cohorts": 0}
    return {
        "cohorts": len(learned),
        "mean_wasserstein_learned": float(np.mean(learned)),
        "mean_wasserstein_train_ecdf_floor": float(np.mean(floor)),
    }


def cmd_report(cfg: PipelineConfig, out: Path):
    metrics_path = _require(out / "metrics.json", "evaluate")
    report = json.loads(metrics_path.read_text())
    methods = [m for m in sorted(report) if m != "multiquantile_fit"]
    metric_names = sorted({name for m in methods for name in report[m]})
    tables_path = out / "report_tables.csv"
    with open(tables_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", *methods])
        for name in metric_names:
            w.writerow([name, *[_fmt(report[m].get(name, "")) for m in methods]])

    # per-cohort density data: sorted samples and learned breakpoints
    density_path = out / "report_density.csv"
    tables, _ = _load_cdf_store(_require(out / "cdfs.json", "build-cdfs"))
    embed_model = None
    if (out / "embed_model.npz").exists():
        embed_model = MultiquantileModel.load(out / "embed_model.npz")
    with open(density_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "cohort_id", "bin", "source", "position", "value"])
        for kind, table in tables.items():
            biggest = sorted(table.values(), key=lambda c: -c.n)[:20]
            for cdf in biggest:
                for j, s in enumerate(cdf.samples):
                    w.writerow([kind, cdf.cohort.id, cdf.cohort.bin, "empirical", j, _fmt(float(s))])
                if embed_model is not None and cdf.cohort in embed_model.cohort_index:
                    for j, b in enumerate(embed_model.breakpoints(cdf.cohort)):
                        w.writerow([kind, cdf.cohort.id, cdf.cohort.bin, "learned", j, _fmt(float(b))])
    _write_manifest(out, "report", [metrics_path], [tables_path, density_path], {})


COMMANDS = {
    "simulate": cmd_simulate,
    "split": cmd_split,
    "cluster": cmd_cluster,
    "build-cdfs": cmd_build_cdfs,
    "train-embed": cmd_train_embed,
    "label": cmd_label,
    "train-model": cmd_train_model,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def run(subcommand: str, cfg: PipelineConfig) -> int:
    """Run one subcommand; returns the process exit code."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        COMMANDS[subcommand](cfg, out)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return 2
    except DependencyError as exc:
        logger.error("dependency error: %s", exc)
        return 3
    except DivergenceError as exc:
        logger.error("divergence: %s", exc)
        return 4
    except RadpipeError as exc:
        logger.error("%s", exc)
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="radpipe",
                                     description="watch-time debiasing pipeline")
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON pipeline config")
    parser.add_argument("--out", help="override the configured output directory")
    parser.add_argument("--seed", type=int, help="override the configured root seed")
    parser.add_argument("--fusion-policy", choices=["equal", "support_proportional"])
    parser.add_argument("--alpha", type=float, help="explicit user-side fusion weight")
    parser.add_argument("--beta", type=float, help="explicit video-side fusion weight")
    parser.add_argument("--threads", type=int, help="worker cap (single-threaded default)")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = PipelineConfig.from_json(args.config)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return 2
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.fusion_policy:
        cfg.fusion.policy = args.fusion_policy
    if args.alpha is not None:
        cfg.fusion.alpha = args.alpha
    if args.beta is not None:
        cfg.fusion.beta = args.beta
    if args.threads is not None:
        cfg.threads = args.threads
    return run(args.subcommand, cfg)


if __name__ == "__main__":
    sys.exit(main())
