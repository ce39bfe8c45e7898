import json

import numpy as np
import pytest

from skyslice.errors import ConfigurationError
from skyslice.harness.cli import main
from skyslice.harness.config import default_config, dumps, load_config, loads
from skyslice.harness.experiments import SUITES, run_experiment, suite_runs
from skyslice.harness.metrics import (
    CSV_HEADER,
    converged,
    emit_metrics,
    episode_totals,
    read_metrics,
    summarize,
)
from skyslice.marl.training import EpisodeRecord

# config -------------------------------------------------------------------------


def test_presets():
    full, desk = default_config("table1"), default_config("desk")
    assert (full.learner.episodes, full.learner.steps) == (800, 300)
    assert (desk.learner.episodes, desk.learner.steps) == (200, 100)
    assert full.learner.critic_lr == 1e-5 and full.learner.actor_lr == 2e-5
    assert full.learner.tau == 0.01 and full.learner.buffer_size == 15000
    assert full.n_evtols == 6 and len(full.scenario.base_stations) == 3
    with pytest.raises(ConfigurationError):
        default_config("laptop")


def test_unknown_key_reports_its_line():
    text = "seed: 3\nradio:\n  tx_power: 0.2\n  colour: blue\n"
    with pytest.raises(ConfigurationError, match=r"radio\.colour.*line 4"):
        loads(text)
    with pytest.raises(ConfigurationError, match="line 1"):
        loads("speed_of_light: 3\n")


def test_validation_rejects_bad_values():
    with pytest.raises(ConfigurationError, match="gamma_match"):
        loads("admission:\n  gamma_match: 1.5\n")
    with pytest.raises(ConfigurationError, match="line 2"):
        loads("radio:\n  tx_power: -1\n")
    with pytest.raises(ConfigurationError):
        loads("scenario:\n  layers:\n    - {altitude: 100, speed: 30}\n    - {altitude: 250, speed: 50}\n")
    with pytest.raises(ConfigurationError, match="parse"):
        loads("radio: [unclosed\n")
    with pytest.raises(ConfigurationError):
        default_config().replace(**{"learner.warp": 1})


def test_round_trip_and_overlay(tmp_path):
    cfg = default_config("desk").replace(**{"pool.scale": 2.0, "seed": 7})
    path = tmp_path / "c.yaml"
    path.write_text(dumps(cfg))
    assert load_config(path) == cfg
    assert loads("learner:\n  steps: 5\n", preset="desk").learner.episodes == 200
    with pytest.raises(ConfigurationError, match="not found"):
        load_config(tmp_path / "missing.yaml")


def test_shipped_config_files_load():
    from pathlib import Path

    root = Path(__file__).resolve().parent.parent / "configs"
    assert load_config(root / "desk.yaml") == default_config("desk")
    assert load_config(root / "table1.yaml") == default_config("table1")


# metrics ------------------------------------------------------------------------


def record(ep, reward, unpaired=0, unpaired_vio=0.0):
    n = len(reward)
    return EpisodeRecord(ep, np.array(reward, float), np.ones(n), np.full(n, 0.5), np.full(n, 2.0),
                         np.full(n, 1.0), np.full((n, 3), 0.25), unpaired, 0.123, unpaired_vio)


def test_800_episodes_of_three_slices_give_2400_rows(tmp_path):
    path = emit_metrics(tmp_path / "m.csv", [record(e, [1.0, 2.0, 3.0]) for e in range(800)])
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 2401
    cols = read_metrics(path)
    assert cols["reward"].sum() == 800 * 6.0


def test_empty_run_is_header_only(tmp_path):
    assert (emit_metrics(tmp_path / "e.csv", [])).read_text() == ",".join(CSV_HEADER) + "\n"


def test_emission_is_byte_identical_and_lossless(tmp_path):
    recs = [record(e, np.random.default_rng(e).normal(size=3)) for e in range(5)]
    a = emit_metrics(tmp_path / "a.csv", recs).read_bytes()
    b = emit_metrics(tmp_path / "b.csv", recs).read_bytes()
    assert a == b
    assert np.array_equal(read_metrics(tmp_path / "a.csv")["reward"], np.concatenate([r.reward for r in recs]))


def test_summary_uses_the_final_quarter_and_counts_unpaired_violations():
    recs = [record(e, [float(e), 0.0], unpaired_vio=4.0) for e in range(8)]
    s = summarize(recs)
    assert s["reward"] == pytest.approx(6.5)
    assert s["vio_cost"] == pytest.approx(2 * 1.0 + 4.0)
    assert s["cost"] == pytest.approx(2 * 2.0 + 2 * 1.0 + 4.0)
    assert converged(episode_totals(recs)) == pytest.approx(6.5)
    with pytest.raises(ValueError):
        converged([])


# experiments --------------------------------------------------------------------


def test_suite_variants():
    cfg = default_config("desk")
    assert [r.algorithm for r in suite_runs("compare_algorithms", cfg)] == ["maddpg", "greedy", "madqn"]
    assert len(suite_runs("preassess_ablation", cfg)) == 6
    labels = [r.label for r in suite_runs("velocity_sweep", cfg)]
    assert "pair_10_20" in labels and "fixedlow_20_70" in labels
    for suite in SUITES:
        for spec in suite_runs(suite, cfg):
            cfg.replace(**spec.overrides)  # every override is a valid config
    with pytest.raises(ValueError):
        suite_runs("everything", cfg)


def test_run_experiment_writes_summary(tmp_path):
    cfg = default_config("desk").replace(**{"learner.episodes": 2, "learner.steps": 3})
    summary = run_experiment("pairing_ablation", cfg, out=tmp_path, seeds=[0, 1])
    on_disk = json.loads((tmp_path / "pairing_ablation" / "summary.json").read_text())
    assert on_disk == json.loads(json.dumps(summary))
    assert set(on_disk["runs"]) == {"priority", "random"}
    assert set(on_disk["runs"]["random"]) == {"0", "1"}
    assert (tmp_path / "pairing_ablation" / "random_seed1.csv").is_file()


# CLI ----------------------------------------------------------------------------


def last_json(text):
    return json.loads(text.strip().splitlines()[-1])


def test_cli_train_then_evaluate(tmp_path, capsys):
    rc = main(["train", "--preset", "desk", "--episodes", "2", "--steps", "4", "--seed", "1",
               "--out", str(tmp_path)])
    out = last_json(capsys.readouterr().out)
    assert rc == 0 and out["status"] == "ok" and out["seed"] == 1
    ckpt = tmp_path / "maddpg_seed1.npz"
    assert ckpt.is_file() and (tmp_path / "maddpg_seed1.csv").is_file()
    rc = main(["evaluate", str(ckpt), "--episodes", "1", "--out", str(tmp_path)])
    out = last_json(capsys.readouterr().out)
    assert rc == 0 and out["algorithm"] == "maddpg" and out["episodes"] == 1


def test_cli_run_suite(tmp_path, capsys):
    rc = main(["run", "pairing_ablation", "--preset", "desk", "--episodes", "1", "--steps", "2",
               "--seed", "0", "--out", str(tmp_path)])
    out = last_json(capsys.readouterr().out)
    assert rc == 0 and out["runs"] == 2
    assert (tmp_path / "pairing_ablation" / "summary.json").is_file()


@pytest.mark.parametrize("argv,code,kind", [
    (["run", "everything"], 2, "usage"),
    (["train", "--episodes", "0"], 2, "usage"),
    (["train", "--seed", "-3"], 2, "usage"),
    ([], 2, "usage"),
    (["evaluate", "/nonexistent/ck.npz"], 1, "not_found"),
    (["train", "--config", "/nonexistent/c.yaml"], 1, "ConfigurationError"),
])
def test_cli_errors_are_machine_readable(argv, code, kind, capsys):
    assert main(argv) == code
    err = last_json(capsys.readouterr().err)
    assert err["status"] == "error" and err["kind"] == kind and err["message"]


def test_cli_rejects_a_corrupt_checkpoint(tmp_path, capsys):
    bad = tmp_path / "bad.npz"
    bad.write_bytes(b"not a zip")
    assert main(["evaluate", str(bad), "--out", str(tmp_path)]) == 1
    assert last_json(capsys.readouterr().err)["kind"] == "bad_checkpoint"


def test_cli_runs_are_reproducible(tmp_path, capsys):
    for name in ("a", "b"):
        assert main(["train", "--algorithm", "madqn", "--episodes", "2", "--steps", "5", "--seed", "4",
                     "--out", str(tmp_path / name)]) == 0
    capsys.readouterr()
    assert (tmp_path / "a" / "madqn_seed4.csv").read_bytes() == (tmp_path / "b" / "madqn_seed4.csv").read_bytes()
