"""Slice-orchestration environment: one agent per slice, one step per second of flight."""
from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..admission import Candidate, PairingResult, pair_all, pre_assess, random_pairing
from ..airspace import LayerConfig, advance, begin_landing, launch
from ..errors import ContractViolation
from ..harness.config import ScenarioConfig
from ..slices import (
    ResourcePool,
    ScalingDiagnostics,
    SliceState,
    apply_scaling,
    dispose_slice,
    initialize_slice,
    project_allocations,
)
from ..workload import CostWeights, TaskGenConfig, generate_tasks

OBS_DIM = 5
ACTION_DIM = 3


@dataclass
class StepMetrics:
    """Per-slice outcome of one step (arrays have one entry per slice)."""

    reward: np.ndarray
    sat_sum: np.ndarray
    sat_mean: np.ndarray
    op_cost: np.ndarray
    vio_cost: np.ndarray
    consumption: np.ndarray  # (n_slices, 3) absolute share of the nominal pool
    users: np.ndarray
    late: np.ndarray
    unpaired: int
    level: int
    unpaired_vio: float = 0.0  # omega_v per unpaired task; belongs to no slice


def cost_weights(cfg: ScenarioConfig) -> CostWeights:
    c, p = cfg.costs, cfg.pool
    return CostWeights(
        omega_v=c.omega_v,
        omega_band=c.omega_band if c.omega_band is not None else 1.0 / p.s_band,
        omega_beam=c.omega_beam if c.omega_beam is not None else 1.0 / p.s_beam,
        omega_comp=c.omega_comp if c.omega_comp is not None else 1.0 / p.s_comp,
        eta=c.eta,
        alpha=c.alpha,
        beta=c.beta,
        omega_1=c.omega_1,
        omega_2=c.omega_2,
        gamma_match=cfg.admission.gamma_match,
    )


class SliceEnv:
    """Layered-airspace offloading world driven by joint slice-scaling actions.

    Step order: scale and project allocations, fly one ``dt``, draw fresh
    tasks, re-run admission control on epoch boundaries, then evaluate every
    served task and price every slice.
    """

    def __init__(self, cfg: ScenarioConfig, seed: int = 0):
        self.cfg = cfg
        sc = cfg.scenario
        self.layers = [LayerConfig(l.altitude, l.speed) for l in sc.layers]
        self.bs_pos = np.array(sc.base_stations, dtype=float)
        self.n_bs = len(self.bs_pos)
        self.n_evtols = cfg.n_evtols
        self.n_agents = cfg.slices.count
        self.pool = ResourcePool(cfg.pool.s_band, cfg.pool.s_beam, cfg.pool.s_comp, cfg.pool.scale)
        self.weights = cost_weights(cfg)
        self.taskgen = TaskGenConfig(tuple(cfg.tasks.w_range), tuple(cfg.tasks.f_range), tuple(cfg.tasks.t_range))
        self.op_w = np.array([
            self.weights.omega_band * self.pool.s_band,
            self.weights.omega_beam * self.pool.s_beam,
            self.weights.omega_comp * self.pool.s_comp,
        ])
        self.power = np.full(self.n_evtols, cfg.radio.tx_power)
        self.min_az = cfg.radio.beamwidth_3db / np.sqrt(8.0 * np.log(2.0))
        preset = cfg.slices.preset
        self.preset = tuple(preset) if preset is not None else (1.0 / self.n_agents,) * 3
        self.bs_caps = {j: sc.bs_max_attachments for j in range(self.n_bs)}
        self.slice_caps = {q: cfg.slices.max_attachments for q in range(self.n_agents)}
        self.diagnostics = ScalingDiagnostics()
        self.rng = np.random.default_rng(seed)
        self.evtols = []
        self.slices: list[SliceState] = []
        self.t = 0

    @property
    def obs_dim(self) -> int:
        return OBS_DIM

    @property
    def state_dim(self) -> int:
        return OBS_DIM * self.n_agents

    @property
    def action_dim(self) -> int:
        return ACTION_DIM

    def clone(self) -> SliceEnv:
        """Independent snapshot, random stream included.

        Config, layers and frozen world objects are shared; everything the step
        mutates is copied.
        """
        c = copy.copy(self)
        c.rng = copy.deepcopy(self.rng)
        c.diagnostics = copy.deepcopy(self.diagnostics)
        for name in ("evtols", "slices", "unpaired", "tasks"):
            if hasattr(self, name):
                setattr(c, name, list(getattr(self, name)))
        for name in ("pair_bs", "pair_slice", "h2", "has_task", "w", "f", "t_ask", "lq"):
            if hasattr(self, name):
                setattr(c, name, getattr(self, name).copy())
        return c

    # ------------------------------------------------------------------ state

    def reset(self) -> np.ndarray:
        sc = self.cfg.scenario
        self.t = 0
        self.evtols = []
        k = 0
        for layer_idx in range(len(self.layers)):
            for _ in range(sc.evtols_per_layer):
                x, y = sc.start_positions[k]
                self.evtols.append(launch(k, x, y, layer_idx, self.layers, sc.climb_rate))
                k += 1
        self.slices = [
            SliceState(q, max_attachments=self.cfg.slices.max_attachments) for q in range(self.n_agents)
        ]
        self.pair_bs = np.full(self.n_evtols, -1, dtype=np.int64)
        self.pair_slice = np.full(self.n_evtols, -1, dtype=np.int64)
        self.unpaired: list[int] = []
        self.level = self.cfg.admission.l_max
        self._draw_channel()
        self._draw_tasks()
        self._admission()
        self.last = self._evaluate()
        return self.observations()

    def _draw_channel(self) -> None:
        if self.cfg.radio.channel == "rayleigh":
            self.h2 = self.rng.exponential(1.0, size=(self.n_evtols, self.n_bs))
        else:
            self.h2 = np.ones((self.n_evtols, self.n_bs))

    def _draw_tasks(self) -> None:
        self.tasks = generate_tasks(self.rng, self.evtols, self.taskgen)
        n = self.n_evtols
        self.has_task = np.zeros(n, dtype=bool)
        self.w = np.zeros(n)
        self.f = np.zeros(n)
        self.t_ask = np.zeros(n)
        for task in self.tasks:
            i = task.owner
            self.has_task[i] = True
            self.w[i], self.f[i], self.t_ask[i] = task.w_ask, task.f_ask, task.t_ask

    @property
    def positions(self) -> np.ndarray:
        return np.array([e.position.as_tuple() for e in self.evtols])

    @property
    def fractions(self) -> np.ndarray:
        return np.array([s.fractions for s in self.slices])

    @property
    def available(self) -> np.ndarray:
        """Absolute resources released to the orchestrator at the current level."""
        share = self.level / self.cfg.admission.l_max if self.cfg.admission.preassess else 1.0
        return np.array(self.pool.scaled_totals) * share

    # -------------------------------------------------------------- admission

    def _estimated_quality(self, pos: np.ndarray) -> np.ndarray:
        """(n, m) link quality before pairing: interference from the other
        airborne eVTOLs, weighted by the chance they use another BS."""
        r = self.cfg.radio
        airborne = self.has_task
        out = np.zeros((self.n_evtols, self.n_bs))
        spread = (self.n_bs - 1) / self.n_bs
        for j in range(self.n_bs):
            rx = self.power * self.h2[:, j] * airborne
            interference = (rx.sum() - rx) * spread
            sinr = self.power * self.h2[:, j] / (interference + r.noise_power)
            diff = pos - self.bs_pos[j]
            d = np.sqrt((diff * diff).sum(axis=1))
            az = np.maximum(np.arccos(np.clip(diff[:, 2] / np.maximum(d, 1e-300), -1, 1)), self.min_az)
            dn = np.maximum(d, 1e-300) / r.reference_distance
            out[:, j] = np.where(d > 0, np.log2(1 + sinr) * (kernels._kernels_py.GAIN_CONST / az) / (dn * dn), 0.0)
        return out

    def _pairing(self) -> PairingResult:
        owners = [i for i in range(self.n_evtols) if self.has_task[i]]
        if self.cfg.admission.pairing == "random":
            return random_pairing(self.rng, owners, self.bs_caps, self.slice_caps)
        pos = self.positions
        lq = self._estimated_quality(pos)
        avail = self.available
        candidates, t_ask = {}, {}
        for i in owners:
            cands = []
            for j in range(self.n_bs):
                d = float(np.linalg.norm(pos[i] - self.bs_pos[j]))
                for q, s in enumerate(self.slices):
                    vb, vm, vc = s.fractions if s.active else self.preset
                    rate = vb * avail[0] * lq[i, j] * vm * avail[1]
                    cap = vc * avail[2]
                    delay = (self.w[i] / rate if rate > 0 else np.inf) + (self.f[i] / cap if cap > 0 else np.inf)
                    cands.append(Candidate(j, q, delay, max(d, 1e-9)))
            candidates[i] = cands
            t_ask[i] = self.t_ask[i]
        return pair_all(candidates, t_ask, self.bs_caps, self.slice_caps, self.weights.gamma_match)

    def _admission(self) -> None:
        result = self._pairing()
        self.pair_bs[:] = -1
        self.pair_slice[:] = -1
        attached = {q: set() for q in range(self.n_agents)}
        for p in result.pairs:
            self.pair_bs[p.evtol] = p.bs
            self.pair_slice[p.evtol] = p.slice
            attached[p.slice].add(p.evtol)
        self.unpaired = result.unpaired
        slices = []
        for s in self.slices:
            users = frozenset(attached[s.id])
            if users and not s.active:
                s = initialize_slice(s, self.preset)
            elif not users and s.active:
                s = dispose_slice(s)
            slices.append(SliceState(s.id, s.v_band, s.v_beam, s.v_comp, s.phase, users, s.max_attachments))
        self.slices = project_allocations(slices)
        if self.cfg.admission.preassess:
            self.level = self._pre_assess().level
        else:
            self.level = self.cfg.admission.l_max

    def _pre_assess(self):
        lq = self.link_quality()
        served = np.flatnonzero(self.pair_bs >= 0)
        n_active = max(1, sum(1 for s in self.slices if s.active))
        full = np.array(self.pool.scaled_totals)
        share_each = 1.0 / n_active

        def delay_at(share, w, f):
            a = full * share * share_each
            rate = a[0] * lq[served] * a[1]
            with np.errstate(divide="ignore"):
                return np.where(rate > 0, w / np.where(rate > 0, rate, 1.0), np.inf) + f / a[2]

        return pre_assess(self.tasks, self.cfg.admission.l_max, delay_at)

    # -------------------------------------------------------------- stepping

    def link_quality(self) -> np.ndarray:
        r = self.cfg.radio
        return kernels.link_quality(
            self.positions, self.bs_pos, self.pair_bs, self.power, self.h2,
            r.noise_power, self.min_az, r.reference_distance,
        )

    def _evaluate(self) -> StepMetrics:
        self.lq = self.link_quality()
        w = self.weights
        fr = self.fractions
        avail = self.available
        _, _, sat_sum, users, late, op, reward = kernels.evaluate_slices(
            fr, avail, self.pair_slice, self.has_task, self.lq, self.w, self.f, self.t_ask,
            w.eta, w.omega_v, self.op_w, w.omega_1, w.omega_2,
        )
        sat_mean = np.where(users > 0, sat_sum / np.maximum(users, 1), 0.5)
        vio = w.omega_v * late
        consumption = fr * (avail / np.array(self.pool.totals))
        unpaired = int(sum(1 for i in self.unpaired if self.has_task[i]))
        return StepMetrics(reward, sat_sum, sat_mean, op, vio.astype(float), consumption, users, late,
                           unpaired, self.level, w.omega_v * unpaired)

    def observations(self) -> np.ndarray:
        """(n_agents, 5): own fractions, total cost and summed satisfaction."""
        m = self.last
        obs = np.zeros((self.n_agents, OBS_DIM))
        for q, s in enumerate(self.slices):
            if not s.active:
                continue
            obs[q, :3] = s.fractions
            obs[q, 3] = m.op_cost[q] + m.vio_cost[q]
            obs[q, 4] = m.sat_sum[q]
        return obs

    def state(self) -> np.ndarray:
        return self.observations().reshape(-1)

    def step(self, joint_action) -> tuple[np.ndarray, np.ndarray, StepMetrics]:
        a = np.asarray(joint_action, dtype=float).reshape(self.n_agents, ACTION_DIM)
        if not np.all(np.isfinite(a)):
            raise ContractViolation("joint action contains non-finite values")
        step_scale = self.cfg.slices.step_scale
        scaled = [
            apply_scaling(s, a[q], step_scale, self.diagnostics) if s.active else s
            for q, s in enumerate(self.slices)
        ]
        self.slices = project_allocations(scaled)
        sc = self.cfg.scenario
        self.t += 1
        if sc.landing_step is not None and self.t == sc.landing_step:
            self.evtols = [begin_landing(e, sc.climb_rate) for e in self.evtols]
        self.evtols = [advance(e, sc.dt, self.layers, sc.climb_rate) for e in self.evtols]
        self._draw_channel()
        self._draw_tasks()
        if self.t % self.cfg.admission.epoch == 0:
            self._admission()
        else:
            # a grounded eVTOL stops transmitting and frees nothing else mid-epoch
            idle = ~self.has_task
            self.pair_bs[idle] = -1
            self.pair_slice[idle] = -1
        self.last = self._evaluate()
        return self.observations(), self.last.reward.copy(), self.last

    # ------------------------------------------------------------- lookahead

    def snapshot_next(self, reveal: bool = False) -> SliceEnv:
        """A clone advanced one step with every slice holding its allocation.

        By default only the deterministic part of the step is simulated: the
        eVTOLs fly one ``dt`` while the channel, tasks and pairing stay at their
        last observed values, i.e. what a controller can know when it acts.
        ``reveal=True`` steps the clone for real, random draws included, so
        the snapshot shows the exact next world (mid-epoch, positions,
        channel, tasks and pairing do not depend on the action).
        """
        snap = self.clone()
        if reveal:
            snap.step(np.zeros((self.n_agents, ACTION_DIM)))
            return snap
        sc = self.cfg.scenario
        snap.t += 1
        evtols = snap.evtols
        if sc.landing_step is not None and snap.t == sc.landing_step:
            evtols = [begin_landing(e, sc.climb_rate) for e in evtols]
        snap.evtols = [advance(e, sc.dt, self.layers, sc.climb_rate) for e in evtols]
        snap.lq = snap.link_quality()
        return snap

    def scan_actions(self, agent: int, candidates: np.ndarray, world: SliceEnv | None = None) -> np.ndarray:
        """One-step reward of each candidate for ``agent`` (others hold still).

        Scaling is applied to the current allocation and the result is priced
        in ``world``, normally :meth:`snapshot_next`; with a revealed snapshot
        this is exactly the reward the real step would return off admission
        epochs.  Without ``world`` the current step's world is used.
        """
        world = self if world is None else world
        if not (self.slices[agent].active and world.slices[agent].active):
            return np.zeros(len(candidates))
        w = self.weights
        return kernels.scan_actions(
            self.fractions, agent, candidates, self.cfg.slices.step_scale, world.available,
            world.pair_slice, world.has_task, world.lq, world.w, world.f, world.t_ask,
            w.eta, w.omega_v, self.op_w, w.omega_1, w.omega_2,
        )
