"""Time the compiled kernels against the NumPy reference on one step's workload.

    python3 benchmarks/bench_kernels.py [--repeat 2000]

Prints microseconds per call for each kernel and backend, plus the speed-up.
The inputs come from a live environment, so the sizes match what training
actually feeds the kernels.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from skyslice import kernels
from skyslice.harness.config import default_config
from skyslice.marl.baselines import action_grid
from skyslice.marl.env import SliceEnv


def workload(seed: int = 0):
    env = SliceEnv(default_config("desk"), seed)
    env.reset()
    rng = np.random.default_rng(seed)
    for _ in range(15):
        env.step(rng.uniform(-1, 1, (env.n_agents, 3)))
    r, w = env.cfg.radio, env.weights
    lq_args = (env.positions, env.bs_pos, env.pair_bs, env.power, env.h2, r.noise_power, env.min_az,
               r.reference_distance)
    eval_args = (env.fractions, env.available, env.pair_slice, env.has_task.astype(np.uint8), env.lq,
                 env.w, env.f, env.t_ask, w.eta, w.omega_v, env.op_w, w.omega_1, w.omega_2)
    scan_args = (env.fractions, 0, action_grid([-1, 0, 1]), env.cfg.slices.step_scale) + eval_args[1:]
    return {"link_quality": lq_args, "evaluate_slices": eval_args, "scan_actions": scan_args}


def _contiguous(args):
    out = []
    for a in args:
        if isinstance(a, np.ndarray):
            a = np.ascontiguousarray(a, dtype=np.int64 if a.dtype.kind in "iu" and a.dtype != np.uint8 else a.dtype)
        out.append(a)
    return tuple(out)


def bench(repeat: int) -> list[tuple[str, float, float]]:
    py = kernels.backend_module("python")
    try:
        cy = kernels.backend_module("cython")
    except ImportError:
        cy = None
    rows = []
    for name, args in workload().items():
        args = _contiguous(args)
        t_py = min(timeit.repeat(lambda: getattr(py, name)(*args), number=repeat, repeat=3)) / repeat
        t_cy = float("nan")
        if cy is not None:
            t_cy = min(timeit.repeat(lambda: getattr(cy, name)(*args), number=repeat, repeat=3)) / repeat
        rows.append((name, t_py * 1e6, t_cy * 1e6))
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    print(f"{'kernel':<18}{'python us':>12}{'cython us':>12}{'speed-up':>10}")
    for name, t_py, t_cy in bench(args.repeat):
        print(f"{name:<18}{t_py:12.2f}{t_cy:12.2f}{t_py / t_cy:10.1f}x")


if __name__ == "__main__":
    main()
