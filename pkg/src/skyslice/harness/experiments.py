"""Experiment suites: algorithm comparison and the three ablations.

Every run trains from scratch on its own seed and writes one metrics CSV; a
suite additionally writes ``summary.json`` with the converged aggregates the
acceptance checks read.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..marl.training import ALGORITHMS, train
from .config import ScenarioConfig
from .metrics import emit_metrics, summarize, write_summary

SUITES = ("compare_algorithms", "pairing_ablation", "preassess_ablation", "velocity_sweep")

PREASSESS_SCALES = (1, 2, 5)
VELOCITY_PAIRS = ((10.0, 20.0), (30.0, 40.0), (50.0, 60.0))
FIXED_LOW_SPEED = 20.0
FIXED_LOW_HIGHS = (30.0, 50.0, 70.0)


@dataclass
class RunSpec:
    """One training run: a label, an algorithm and config overrides."""

    label: str
    algorithm: str = "maddpg"
    overrides: dict = field(default_factory=dict)


def _speeds(cfg: ScenarioConfig, v_low: float, v_high: float) -> dict:
    low, high = cfg.scenario.layers[0], cfg.scenario.layers[1]
    return {"scenario.layers": [
        {"altitude": low.altitude, "speed": v_low},
        {"altitude": high.altitude, "speed": v_high},
    ]}


def suite_runs(suite: str, cfg: ScenarioConfig) -> list[RunSpec]:
    if suite == "compare_algorithms":
        return [RunSpec(alg, alg) for alg in ALGORITHMS]
    if suite == "pairing_ablation":
        return [RunSpec(mode, overrides={"admission.pairing": mode}) for mode in ("priority", "random")]
    if suite == "preassess_ablation":
        return [
            RunSpec(f"scale{k}_{'with' if on else 'without'}",
                    overrides={"pool.scale": float(k), "admission.preassess": on})
            for k in PREASSESS_SCALES for on in (True, False)
        ]
    if suite == "velocity_sweep":
        runs = [RunSpec(f"pair_{lo:g}_{hi:g}", overrides=_speeds(cfg, lo, hi)) for lo, hi in VELOCITY_PAIRS]
        runs += [RunSpec(f"fixedlow_{FIXED_LOW_SPEED:g}_{hi:g}", overrides=_speeds(cfg, FIXED_LOW_SPEED, hi))
                 for hi in FIXED_LOW_HIGHS]
        return runs
    raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")


def run_one(cfg: ScenarioConfig, spec: RunSpec, seed: int, out_dir: Path) -> dict:
    run_cfg = cfg.replace(**spec.overrides) if spec.overrides else cfg
    _, records = train(run_cfg, spec.algorithm, seed)
    csv_path = emit_metrics(out_dir / f"{spec.label}_seed{seed}.csv", records)
    summary = summarize(records)
    summary.update(label=spec.label, algorithm=spec.algorithm, seed=seed, metrics=csv_path.name)
    return summary


def run_experiment(suite: str, cfg: ScenarioConfig, out=None, seeds=None, progress=None) -> dict:
    """Run every (variant, seed) of ``suite`` and return the suite summary.

    ``summary["runs"][label][str(seed)]`` holds the converged aggregates of
    that run.
    """
    specs = suite_runs(suite, cfg)
    seeds = list(cfg.seeds if seeds is None else seeds)
    out_dir = Path(cfg.output_dir if out is None else out) / suite
    runs: dict = {}
    for seed in seeds:
        for spec in specs:
            res = run_one(cfg, spec, seed, out_dir)
            runs.setdefault(spec.label, {})[str(seed)] = res
            if progress is not None:
                progress(res)
    summary = {
        "suite": suite,
        "seeds": seeds,
        "episodes": cfg.learner.episodes,
        "steps": cfg.learner.steps,
        "runs": runs,
    }
    write_summary(out_dir / "summary.json", summary)
    return summary
