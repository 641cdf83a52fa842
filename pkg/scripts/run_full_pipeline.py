"""Run every pipeline step end to end on a small simulated log.

Usage: python3 scripts/run_full_pipeline.py [out_dir] [seed]
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from radpipe.cli import main

STEPS = ("simulate", "split", "cluster", "build-cdfs", "train-embed",
         "label", "train-model", "evaluate", "report")

CONFIG = {
    "train_end": 1_602_073_600_000,
    "validation_end": 1_602_332_800_000,
    "duration_bins": 4,
    "label_kinds": ["rad_v", "rad_u", "d2q", "pcr", "raw_log"],
    "synth": {"n_users": 500, "n_videos": 250, "n_interactions": 100_000},
    "cluster": {"k": 8},
    "stage1_training": {"learning_rate": 0.01, "max_epochs": 30,
                        "early_stop_patience": 10, "batch_size": 2048},
    "stage2_training": {"learning_rate": 0.005, "max_epochs": 15,
                        "early_stop_patience": 5, "batch_size": 2048},
}


def run(out_dir: Path, seed: int) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg_path = out_dir / "config.json"
    cfg_path.write_text(json.dumps(
        {**CONFIG, "out_dir": str(out_dir), "seed": seed}, indent=2
    ))
    for step in STEPS:
        print(f"==> {step}")
        code = main([step, "--config", str(cfg_path)])
        if code != 0:
            print(f"{step} failed with exit code {code}")
            return code
    metrics = json.loads((out_dir / "metrics.json").read_text())
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    print(f"output directory: {out}")
    sys.exit(run(out, seed))
