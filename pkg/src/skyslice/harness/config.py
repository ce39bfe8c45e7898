"""Scenario configuration: defaults, YAML loading with line-aware validation, dumping."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from ..errors import ConfigurationError

DEFAULT_BS = [[-1500.0, 4000.0, 0.0], [0.0, 4000.0, 0.0], [1500.0, 4000.0, 0.0]]


@dataclass
class Layer:
    altitude: float
    speed: float


@dataclass
class ScenarioSection:
    base_stations: list = field(default_factory=lambda: [list(b) for b in DEFAULT_BS])
    bs_max_attachments: int = 3
    layers: list = field(default_factory=lambda: [Layer(100.0, 30.0), Layer(200.0, 50.0)])
    evtols_per_layer: int = 3
    # (x, y) launch point of each eVTOL, low layer first
    start_positions: list = field(
        default_factory=lambda: [
            [-1500.0, 3900.0], [0.0, 3900.0], [1500.0, 3900.0],
            [-1300.0, 3900.0], [200.0, 3900.0], [1700.0, 3900.0],
        ]
    )
    layer_separation: float = 100.0
    climb_rate: float = 10.0
    dt: float = 1.0
    landing_step: int | None = None


@dataclass
class RadioSection:
    tx_power: float = 0.1
    noise_power: float = 1e-9
    beamwidth_3db: float = 0.2
    reference_distance: float = 5000.0
    channel: str = "fixed"


@dataclass
class PoolSection:
    s_band: float = 100.0
    s_beam: float = 1.0
    s_comp: float = 100.0
    scale: float = 1.0


@dataclass
class SliceSection:
    count: int = 3
    max_attachments: int = 2
    step_scale: float = 0.1
    preset: list | None = None


@dataclass
class CostSection:
    omega_v: float = 2.0
    omega_band: float | None = None
    omega_beam: float | None = None
    omega_comp: float | None = None
    eta: float = 0.1
    alpha: float = 1.0
    beta: float = 1.0
    omega_1: float = 10.0
    omega_2: float = 1.0


@dataclass
class TaskSection:
    w_range: list = field(default_factory=lambda: [5.0, 20.0])
    f_range: list = field(default_factory=lambda: [10.0, 50.0])
    t_range: list = field(default_factory=lambda: [1.0, 5.0])


@dataclass
class AdmissionSection:
    gamma_match: float = 0.5
    l_max: int = 10
    epoch: int = 10
    pairing: str = "priority"
    preassess: bool = False


@dataclass
class LearnerSection:
    episodes: int = 800
    steps: int = 300
    actor_lr: float = 2e-5
    critic_lr: float = 1e-5
    tau: float = 0.01
    gamma: float = 0.5
    buffer_size: int = 15000
    batch_size: int = 64
    warmup_batches: int = 10
    hidden: list = field(default_factory=lambda: [64, 64])
    noise_start: float = 0.3
    noise_end: float = 0.02
    action_reg: float = 1e-3
    final_init: float | None = 3e-3  # output-layer init bound; None = fan-in rule
    reward_scale: float = 1.0  # applied to stored rewards only
    greedy_epsilon: float = 0.1
    greedy_grid: list = field(default_factory=lambda: [-1.0, 0.0, 1.0])
    greedy_lookahead: str = "reveal"  # step a cloned env; "forecast" keeps last observed draws
    dqn_lr: float = 1e-4
    dqn_grid: list = field(default_factory=lambda: [-1.0, -0.5, 0.0, 0.5, 1.0])
    dqn_eps_start: float = 1.0
    dqn_eps_end: float = 0.05


@dataclass
class ScenarioConfig:
    seed: int = 0
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    output_dir: str = "runs"
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    radio: RadioSection = field(default_factory=RadioSection)
    pool: PoolSection = field(default_factory=PoolSection)
    slices: SliceSection = field(default_factory=SliceSection)
    costs: CostSection = field(default_factory=CostSection)
    tasks: TaskSection = field(default_factory=TaskSection)
    admission: AdmissionSection = field(default_factory=AdmissionSection)
    learner: LearnerSection = field(default_factory=LearnerSection)

    @property
    def n_evtols(self) -> int:
        return self.scenario.evtols_per_layer * len(self.scenario.layers)

    def replace(self, **changes) -> ScenarioConfig:
        """Copy with dotted-path overrides, e.g. ``replace(**{"pool.scale": 2})``."""
        data = to_dict(self)
        for path, value in changes.items():
            node = data
            *parents, leaf = path.split(".")
            for p in parents:
                node = node[p]
            if leaf not in node:
                raise ConfigurationError(f"unknown key {path!r}")
            node[leaf] = value
        return from_dict(data)


_SECTIONS = {
    "scenario": ScenarioSection,
    "radio": RadioSection,
    "pool": PoolSection,
    "slices": SliceSection,
    "costs": CostSection,
    "tasks": TaskSection,
    "admission": AdmissionSection,
    "learner": LearnerSection,
}

PRESETS = {
    "table1": {},
    "desk": {"learner": {"episodes": 200, "steps": 100}},
}


def to_dict(cfg: ScenarioConfig) -> dict:
    return dataclasses.asdict(cfg)


def _line(lines: dict, path: tuple) -> str:
    ln = lines.get(path)
    return f" (line {ln})" if ln is not None else ""


def from_dict(data: dict | None, lines: dict | None = None) -> ScenarioConfig:
    """Build and validate a config; unknown keys are rejected with their source line."""
    data = {} if data is None else data
    lines = lines or {}
    if not isinstance(data, dict):
        raise ConfigurationError("configuration root must be a mapping")
    top = {f.name for f in fields(ScenarioConfig)}
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key not in top:
            raise ConfigurationError(f"unknown key {key!r}{_line(lines, (key,))}")
        if key in _SECTIONS:
            kwargs[key] = _section(key, value, lines)
        else:
            kwargs[key] = value
    cfg = ScenarioConfig(**kwargs)
    validate(cfg, lines)
    return cfg


def _section(name: str, value, lines: dict):
    cls = _SECTIONS[name]
    if value is None:
        return cls()
    if not isinstance(value, dict):
        raise ConfigurationError(f"section {name!r} must be a mapping{_line(lines, (name,))}")
    known = {f.name for f in fields(cls)}
    for key in value:
        if key not in known:
            raise ConfigurationError(f"unknown key '{name}.{key}'{_line(lines, (name, key))}")
    value = dict(value)
    if name == "scenario" and "layers" in value:
        layers = []
        for k, layer in enumerate(value["layers"]):
            if isinstance(layer, Layer):
                layers.append(layer)
                continue
            if not isinstance(layer, dict) or set(layer) != {"altitude", "speed"}:
                raise ConfigurationError(
                    f"scenario.layers[{k}] needs exactly 'altitude' and 'speed'"
                    f"{_line(lines, ('scenario', 'layers'))}"
                )
            layers.append(Layer(float(layer["altitude"]), float(layer["speed"])))
        value["layers"] = layers
    return cls(**value)


def _require(cond: bool, msg: str, lines: dict, path: tuple) -> None:
    if not cond:
        raise ConfigurationError(msg + _line(lines, path))


def _pos(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x > 0


def validate(cfg: ScenarioConfig, lines: dict | None = None) -> None:
    lines = lines or {}
    sc = cfg.scenario
    _require(len(sc.base_stations) >= 1, "need at least one base station", lines, ("scenario", "base_stations"))
    for b in sc.base_stations:
        _require(len(b) == 3 and b[2] == 0, f"base station {b} must be [x, y, 0]", lines, ("scenario", "base_stations"))
    _require(sc.bs_max_attachments >= 1, "bs_max_attachments must be >= 1", lines, ("scenario", "bs_max_attachments"))
    _require(len(sc.layers) >= 1, "need at least one layer", lines, ("scenario", "layers"))
    for lo, hi in zip(sc.layers, sc.layers[1:]):
        _require(
            math.isclose(hi.altitude - lo.altitude, sc.layer_separation),
            f"layers {lo.altitude} m and {hi.altitude} m must be {sc.layer_separation} m apart",
            lines, ("scenario", "layers"),
        )
    for layer in sc.layers:
        _require(_pos(layer.altitude) and _pos(layer.speed), "layer altitude and speed must be > 0",
                 lines, ("scenario", "layers"))
    _require(sc.evtols_per_layer >= 1, "evtols_per_layer must be >= 1", lines, ("scenario", "evtols_per_layer"))
    _require(
        len(sc.start_positions) == cfg.n_evtols and all(len(p) == 2 for p in sc.start_positions),
        f"start_positions needs {cfg.n_evtols} [x, y] entries",
        lines, ("scenario", "start_positions"),
    )
    _require(_pos(sc.climb_rate) and _pos(sc.dt), "climb_rate and dt must be > 0", lines, ("scenario", "dt"))
    r = cfg.radio
    for name in ("tx_power", "noise_power", "beamwidth_3db", "reference_distance"):
        _require(_pos(getattr(r, name)), f"radio.{name} must be > 0", lines, ("radio", name))
    _require(r.channel in ("fixed", "rayleigh"), "radio.channel must be 'fixed' or 'rayleigh'", lines, ("radio", "channel"))
    for name in ("s_band", "s_beam", "s_comp", "scale"):
        _require(_pos(getattr(cfg.pool, name)), f"pool.{name} must be > 0", lines, ("pool", name))
    s = cfg.slices
    _require(s.count >= 1 and s.max_attachments >= 1, "slices.count and max_attachments must be >= 1",
             lines, ("slices", "count"))
    _require(_pos(s.step_scale), "slices.step_scale must be > 0", lines, ("slices", "step_scale"))
    if s.preset is not None:
        _require(len(s.preset) == 3 and all(0 <= v <= 1 for v in s.preset),
                 "slices.preset must be three fractions in [0, 1]", lines, ("slices", "preset"))
    c = cfg.costs
    for f_ in fields(c):
        v = getattr(c, f_.name)
        _require(v is None or v >= 0, f"costs.{f_.name} must be >= 0", lines, ("costs", f_.name))
    _require(c.eta > 0, "costs.eta must be > 0", lines, ("costs", "eta"))
    for name in ("w_range", "f_range", "t_range"):
        lo_hi = getattr(cfg.tasks, name)
        _require(len(lo_hi) == 2 and 0 < lo_hi[0] <= lo_hi[1], f"tasks.{name} must be [lo, hi] with 0 < lo <= hi",
                 lines, ("tasks", name))
    a = cfg.admission
    _require(0 <= a.gamma_match <= 1, "admission.gamma_match must lie in [0, 1]", lines, ("admission", "gamma_match"))
    _require(a.l_max >= 1 and a.epoch >= 1, "admission.l_max and epoch must be >= 1", lines, ("admission", "l_max"))
    _require(a.pairing in ("priority", "random"), "admission.pairing must be 'priority' or 'random'",
             lines, ("admission", "pairing"))
    ln = cfg.learner
    _require(ln.episodes >= 1 and ln.steps >= 1, "learner.episodes and steps must be >= 1", lines, ("learner", "episodes"))
    _require(ln.batch_size >= 1 and ln.buffer_size >= ln.batch_size, "learner.buffer_size must be >= batch_size",
             lines, ("learner", "buffer_size"))
    _require(0 <= ln.tau <= 1 and 0 <= ln.gamma <= 1, "learner.tau and gamma must lie in [0, 1]", lines, ("learner", "tau"))
    _require(len(ln.greedy_grid) >= 1 and len(ln.dqn_grid) >= 1, "action grids must be non-empty",
             lines, ("learner", "greedy_grid"))
    _require(0 <= ln.greedy_epsilon <= 1, "learner.greedy_epsilon must lie in [0, 1]", lines, ("learner", "greedy_epsilon"))
    _require(ln.greedy_lookahead in ("forecast", "reveal"), "learner.greedy_lookahead must be 'forecast' or 'reveal'",
             lines, ("learner", "greedy_lookahead"))
    _require(_pos(ln.reward_scale), "learner.reward_scale must be > 0", lines, ("learner", "reward_scale"))
    _require(ln.final_init is None or _pos(ln.final_init), "learner.final_init must be > 0 or null",
             lines, ("learner", "final_init"))
    _require(ln.action_reg >= 0, "learner.action_reg must be >= 0", lines, ("learner", "action_reg"))


def _key_lines(text: str) -> dict:
    """Map key paths to 1-based source lines using the YAML node tree."""
    out: dict = {}
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return out

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = prefix + (k.value,)
                out[path] = k.start_mark.line + 1
                walk(v, path)

    if root is not None:
        walk(root, ())
    return out


def loads(text: str, preset: str | None = None) -> ScenarioConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1})" if mark is not None else ""
        raise ConfigurationError(f"cannot parse configuration{where}: {exc}") from exc
    data = data or {}
    if preset is not None:
        data = _merge(PRESETS[preset] if preset in PRESETS else _bad_preset(preset), data)
    return from_dict(data, _key_lines(text))


def _bad_preset(name):
    raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")


def _merge(base: dict, over: dict) -> dict:
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path, preset: str | None = None) -> ScenarioConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"configuration file not found: {p}")
    return loads(p.read_text(), preset)


def default_config(preset: str | None = None) -> ScenarioConfig:
    return loads("", preset)


def dumps(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False)


def dump_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(dumps(cfg))
