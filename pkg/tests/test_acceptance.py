"""Acceptance checks, one test per criterion; each prints a PASS/FAIL line.

The training-based criteria (6-9) run full desk-preset suites and are marked
``slow``.  Set ``SKYSLICE_ACCEPTANCE_DIR`` to keep their outputs; a suite whose
``summary.json`` already exists there is reused instead of re-trained.
"""
import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

import test_admission
import test_env
import test_kernels
import test_neuro
import test_radio
import test_workload
from conftest import report
from skyslice.harness.config import default_config
from skyslice.harness.metrics import emit_metrics
from skyslice.marl.training import ALGORITHMS, train

SUITE_BUDGET_S = 15 * 60


@pytest.fixture(scope="session")
def suite_dir(tmp_path_factory):
    env = os.environ.get("SKYSLICE_ACCEPTANCE_DIR")
    return Path(env) if env else tmp_path_factory.mktemp("acceptance")


_cache: dict = {}


def run_suite(name: str, out: Path) -> tuple[dict, float]:
    """Summary of a desk-preset suite over its three seeds, and its wall-clock seconds."""
    if name in _cache:
        return _cache[name]
    from skyslice.harness.experiments import run_experiment

    path = out / name / "summary.json"
    if path.is_file():
        result = (json.loads(path.read_text()), float("nan"))
    else:
        t0 = time.perf_counter()
        summary = run_experiment(name, default_config("desk"), out=out)
        result = (json.loads(json.dumps(summary)), time.perf_counter() - t0)
    _cache[name] = result
    return result


def per_seed(summary: dict, label: str, key: str) -> np.ndarray:
    runs = summary["runs"][label]
    return np.array([runs[str(s)][key] for s in summary["seeds"]])


def aggregate(summary: dict, label: str, key: str) -> float:
    return float(per_seed(summary, label, key).mean())


# ----------------------------------------------------------------- fast criteria


def test_criterion_01_gradient_suite():
    worst, seconds = test_neuro.run_gradient_suite()
    ok = worst < 1e-4 and seconds < 30
    report(1, ok, f"worst relative error {worst:.2e} (< 1e-4), {seconds:.1f} s (< 30 s)")
    assert ok


ORACLES = [
    ("sinr", test_radio.test_sinr_matches_literal_quotient_with_per_link_gains),
    ("rate", test_radio.test_rate_matches_literal_transcription),
    ("beam gain", test_radio.test_beam_gain_matches_literal_pattern),
    ("peak gain", test_radio.test_peak_gain_matches_closed_form),
    ("delays", test_workload.test_delay_oracles_on_random_instances),
    ("satisfaction", test_workload.test_satisfaction_matches_literal_sigmoid),
    ("operation cost", test_workload.test_operation_cost_oracle),
    ("slice reward", test_kernels.test_evaluate_slices_matches_scalar_functions),
    ("link quality", test_kernels.test_link_quality_matches_scalar_functions),
    ("priority", test_admission.test_priority_matches_literal_formula),
]


def test_criterion_02_equation_oracles():
    failed = []
    for name, check in ORACLES:
        try:
            check()
        except AssertionError:
            failed.append(name)
    report(2, not failed, f"{len(ORACLES) - len(failed)}/{len(ORACLES)} oracle families within 1e-12"
           + (f"; failing: {', '.join(failed)}" if failed else ""))
    assert not failed


def test_criterion_03_beamwidth_optimality():
    try:
        test_radio.test_beamwidth_scan_attains_the_peak_gain()
        ok, detail = True, "scan peak equals closed-form gain on 20 geometries"
    except AssertionError as exc:
        ok, detail = False, f"scan disagrees: {exc}"
    report(3, ok, detail)
    assert ok


def test_criterion_04_constraint_projection():
    try:
        test_env.test_random_actions_keep_allocations_feasible()
        ok, detail = True, "1e4 fuzzed steps, column sums <= 1+1e-9, fractions in [0,1]"
    except AssertionError as exc:
        ok, detail = False, str(exc)
    report(4, ok, detail)
    assert ok


def test_criterion_05_admission():
    checks = [
        test_admission.test_pairing_never_exceeds_capacity,
        test_admission.test_pre_assess_matches_exhaustive_scan,
        test_admission.test_infeasible_workload_falls_back_to_full_pool,
    ]
    failed = []
    for check in checks:
        try:
            check()
        except AssertionError:
            failed.append(check.__name__)
    report(5, not failed, "caps respected, oracle-minimal level on 100 workloads, infeasible -> (10, false)"
           if not failed else f"failing: {', '.join(failed)}")
    assert not failed


def test_criterion_10_determinism(tmp_path):
    cfg = default_config("desk").replace(**{"learner.episodes": 4, "learner.steps": 25})
    same = []
    for alg in ALGORITHMS:
        files = []
        for k in range(2):
            _, records = train(cfg, alg, seed=11)
            files.append(emit_metrics(tmp_path / f"{alg}_{k}.csv", records).read_bytes())
        same.append(files[0] == files[1])
    ok = all(same)
    report(10, ok, "byte-identical metric files for " + ", ".join(
        f"{a}={'yes' if s else 'no'}" for a, s in zip(ALGORITHMS, same)))
    assert ok


# ------------------------------------------------------------- training criteria


@pytest.mark.slow
def test_criterion_06_algorithm_ordering(suite_dir):
    s, seconds = run_suite("compare_algorithms", suite_dir)
    m, g, q = (per_seed(s, alg, "reward") for alg in ("maddpg", "greedy", "madqn"))
    ordered = int(np.sum((m > g) & (g > q)))
    r_m, r_g = m.mean(), g.mean()
    gain = (r_m - r_g) / abs(r_g)
    in_time = not (seconds > SUITE_BUDGET_S)
    ok = ordered >= 2 and gain >= 0.10 and in_time
    report(6, ok, f"MADDPG>greedy>MADQN on {ordered}/3 seeds; aggregate gain {gain:+.1%} (>= +10%); "
           f"MADDPG {np.round(m, 1).tolist()} greedy {np.round(g, 1).tolist()} MADQN {np.round(q, 1).tolist()}; "
           f"{seconds:.0f} s")
    assert ok


@pytest.mark.slow
def test_criterion_07_pairing_ablation(suite_dir):
    s, _ = run_suite("pairing_ablation", suite_dir)
    pri, rnd = per_seed(s, "priority", "reward"), per_seed(s, "random", "reward")
    ok = bool(np.all(pri > rnd))
    report(7, ok, f"priority {np.round(pri, 1).tolist()} vs random {np.round(rnd, 1).tolist()}")
    assert ok


@pytest.mark.slow
def test_criterion_08_preassess_ablation(suite_dir):
    s, _ = run_suite("preassess_ablation", suite_dir)
    savings, parity, lower = [], [], []
    for k in (1, 2, 5):
        w, wo = f"scale{k}_with", f"scale{k}_without"
        c_w, c_wo = aggregate(s, w, "consumption"), aggregate(s, wo, "consumption")
        savings.append((c_wo - c_w) / c_wo)
        if k in (2, 5):
            lower.append(c_w < c_wo)
        for key in ("op_cost", "vio_cost"):
            a, b = aggregate(s, w, key), aggregate(s, wo, key)
            parity.append(abs(a - b) <= 0.10 * max(abs(b), 1e-12))
    monotone = all(x < y for x, y in zip(savings, savings[1:]))
    ok = all(lower) and monotone and all(parity)
    report(8, ok, "consumption saving at scales 1/2/5: " + ", ".join(f"{v:+.1%}" for v in savings)
           + f"; lower at 2,5: {all(lower)}; monotone: {monotone}; op/vio within 10%: {sum(parity)}/6")
    assert ok


def _non_increasing(x):
    return all(b <= a for a, b in zip(x, x[1:]))


@pytest.mark.slow
def test_criterion_09_velocity_monotonicity(suite_dir):
    s, _ = run_suite("velocity_sweep", suite_dir)
    pairs = ["pair_10_20", "pair_30_40", "pair_50_60"]
    fixed = ["fixedlow_20_30", "fixedlow_20_50", "fixedlow_20_70"]
    verdicts = []
    parts = []
    for name, labels in (("pairs", pairs), ("fixed-low", fixed)):
        reward = [aggregate(s, lab, "reward") for lab in labels]
        sat = [aggregate(s, lab, "sat_sum") for lab in labels]
        cost = [aggregate(s, lab, "cost") for lab in labels]
        good = _non_increasing(reward) and _non_increasing(sat) and _non_increasing([-c for c in cost])
        verdicts.append(good)
        parts.append(f"{name}: reward {np.round(reward, 1).tolist()} sat {np.round(sat, 3).tolist()} "
                     f"cost {np.round(cost, 1).tolist()}")
    ok = all(verdicts)
    report(9, ok, "; ".join(parts))
    assert ok
