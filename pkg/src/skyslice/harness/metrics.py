"""Per-episode CSV emission and per-suite JSON summaries.

Wall-clock time is deliberately kept out of the CSV so that two runs with the
same seed produce byte-identical files.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

CSV_HEADER = (
    "episode", "slice_id", "reward", "sat_sum", "sat_mean", "op_cost", "vio_cost",
    "band_frac", "beam_frac", "comp_frac", "unpaired",
)


def _fmt(x: float) -> str:
    return repr(float(x))


def metric_rows(records):
    for rec in records:
        for q in range(len(rec.reward)):
            yield (
                rec.episode, q, _fmt(rec.reward[q]), _fmt(rec.sat_sum[q]), _fmt(rec.sat_mean[q]),
                _fmt(rec.op_cost[q]), _fmt(rec.vio_cost[q]),
                _fmt(rec.consumption[q, 0]), _fmt(rec.consumption[q, 1]), _fmt(rec.consumption[q, 2]),
                rec.unpaired,
            )


def emit_metrics(path, records) -> Path:
    """Write one row per (episode, slice) and return the path written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(metric_rows(records))
    return path


def read_metrics(path) -> dict[str, np.ndarray]:
    """Columns of a metrics CSV as arrays, keyed by header name."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in CSV_HEADER}


def episode_totals(records) -> np.ndarray:
    """System reward per episode: the sum over slices."""
    return np.array([float(np.sum(r.reward)) for r in records])


def converged(values, tail: float = 0.25) -> float:
    """Mean over the final ``tail`` fraction of a training curve (at least one episode)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty training curve")
    k = max(1, int(round(tail * values.size)))
    return float(values[-k:].mean())


def summarize(records, tail: float = 0.25) -> dict:
    """Converged per-episode aggregates of one run."""
    k = max(1, int(round(tail * len(records))))
    last = records[-k:]
    return {
        "episodes": len(records),
        "reward": float(np.mean([r.reward.sum() for r in last])),
        "sat_sum": float(np.mean([r.sat_sum.sum() for r in last])),
        "sat_mean": float(np.mean([r.sat_mean.mean() for r in last])),
        "op_cost": float(np.mean([r.op_cost.sum() for r in last])),
        "vio_cost": float(np.mean([r.vio_cost.sum() + r.unpaired_vio for r in last])),
        "cost": float(np.mean([r.op_cost.sum() + r.vio_cost.sum() + r.unpaired_vio for r in last])),
        "consumption": float(np.mean([r.consumption.sum() for r in last])),
        "unpaired": float(np.mean([r.unpaired for r in last])),
    }


def write_summary(path, summary: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path
