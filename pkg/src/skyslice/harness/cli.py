"""Command-line entry point.

Every invocation ends with exactly one JSON line on stdout (success) or
stderr (failure), so scripts can parse the outcome without scraping logs.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import SkysliceError
from ..neuro import load_networks, save_networks
from .config import PRESETS, default_config, dump_config, load_config
from .experiments import SUITES, run_experiment
from .metrics import emit_metrics, summarize

EXIT_USAGE = 2
EXIT_FAILURE = 1


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int = EXIT_FAILURE):
        super().__init__(message)
        self.kind = kind
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, EXIT_USAGE)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML scenario file")
    p.add_argument("--preset", choices=sorted(PRESETS), help="named preset applied under the config file")
    p.add_argument("--seed", type=int, help="run seed (default: the config's seed list / seed)")
    p.add_argument("--episodes", type=int, help="episodes per run")
    p.add_argument("--steps", type=int, help="steps per episode")
    p.add_argument("--out", type=Path, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skyslice", description="Network-slice orchestration for layered eVTOL airspace.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run an experiment suite")
    run.add_argument("suite", choices=SUITES)
    _common(run)
    tr = sub.add_parser("train", help="train one learner and save a checkpoint")
    tr.add_argument("--algorithm", choices=("maddpg", "greedy", "madqn"), default="maddpg")
    _common(tr)
    ev = sub.add_parser("evaluate", help="run a saved policy without exploration")
    ev.add_argument("checkpoint", type=Path)
    _common(ev)
    return parser


def _positive(name, value):
    if value is not None and value < 1:
        raise CliError("usage", f"--{name} must be a positive integer", EXIT_USAGE)


def _config(args, fallback: Path | None = None):
    path = args.config if args.config is not None else fallback
    cfg = load_config(path, args.preset) if path is not None else default_config(args.preset)
    changes = {}
    if args.episodes is not None:
        changes["learner.episodes"] = args.episodes
    if args.steps is not None:
        changes["learner.steps"] = args.steps
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output_dir"] = str(args.out)
    return cfg.replace(**changes) if changes else cfg


def cmd_run(args) -> dict:
    cfg = _config(args)
    seeds = [args.seed] if args.seed is not None else None
    summary = run_experiment(args.suite, cfg, seeds=seeds)
    out = Path(cfg.output_dir) / args.suite
    return {"suite": args.suite, "summary": str(out / "summary.json"), "runs": sum(len(v) for v in summary["runs"].values())}


def cmd_train(args) -> dict:
    from ..marl.training import train

    cfg = _config(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.algorithm}_seed{cfg.seed}"
    learner, records = train(cfg, args.algorithm, cfg.seed)
    result = {"algorithm": args.algorithm, "seed": cfg.seed,
              "metrics": str(emit_metrics(out / f"{stem}.csv", records)), **summarize(records)}
    dump_config(cfg, out / f"{stem}.yaml")
    nets = learner.networks() if hasattr(learner, "networks") else {}
    if nets:
        save_networks(out / f"{stem}.npz", nets)
        result["checkpoint"] = str(out / f"{stem}.npz")
    return result


def cmd_evaluate(args) -> dict:
    from ..marl.env import SliceEnv
    from ..marl.training import algorithm_of, build_learner, evaluate, restore_networks, seed_streams

    if not args.checkpoint.is_file():
        raise CliError("not_found", f"checkpoint {str(args.checkpoint)!r} does not exist")
    sidecar = args.checkpoint.with_suffix(".yaml")
    cfg = _config(args, sidecar if sidecar.is_file() else None)
    try:
        nets = load_networks(args.checkpoint)
        algorithm = algorithm_of(nets)
    except (OSError, KeyError, ValueError) as exc:
        raise CliError("bad_checkpoint", str(exc)) from exc
    env_seed, rng = seed_streams(cfg.seed)
    learner = build_learner(algorithm, cfg, SliceEnv(cfg, env_seed), rng)
    try:
        restore_networks(learner, nets)
    except ValueError as exc:
        raise CliError("bad_checkpoint", str(exc)) from exc
    records = evaluate(cfg, learner, cfg.seed)
    out = Path(cfg.output_dir)
    path = emit_metrics(out / f"eval_{args.checkpoint.stem}_seed{cfg.seed}.csv", records)
    return {"algorithm": algorithm, "seed": cfg.seed, "metrics": str(path), **summarize(records, tail=1.0)}


COMMANDS = {"run": cmd_run, "train": cmd_train, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _positive("episodes", args.episodes)
        _positive("steps", args.steps)
        if args.seed is not None and args.seed < 0:
            raise CliError("usage", "--seed must be non-negative", EXIT_USAGE)
        result = COMMANDS[args.command](args)
    except CliError as exc:
        print(json.dumps({"status": "error", "kind": exc.kind, "message": str(exc)}), file=sys.stderr)
        return exc.code
    except (SkysliceError, ValueError, OSError) as exc:
        print(json.dumps({"status": "error", "kind": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_FAILURE
    print(json.dumps({"status": "ok", "command": args.command, **result}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
