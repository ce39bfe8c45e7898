"""Episode loop shared by every orchestrator, plus learner construction from a config."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..harness.config import ScenarioConfig
from .baselines import DqnHyper, EpsilonGreedy, Madqn
from .maddpg import Maddpg, MaddpgHyper

ALGORITHMS = ("maddpg", "greedy", "madqn")


@dataclass
class EpisodeRecord:
    episode: int
    reward: np.ndarray  # per slice, summed over steps
    sat_sum: np.ndarray  # per slice, step average
    sat_mean: np.ndarray
    op_cost: np.ndarray  # per slice, summed over steps
    vio_cost: np.ndarray
    consumption: np.ndarray  # (n_slices, 3), step average
    unpaired: int
    wall_clock: float
    unpaired_vio: float = 0.0  # violation cost of tasks no slice admitted, summed over steps


def run_episodes(env, learner, episodes: int, steps: int, explore: bool = True, train: bool = True,
                 callback=None) -> list[EpisodeRecord]:
    records = []
    n = env.n_agents
    for ep in range(episodes):
        t0 = time.perf_counter()
        obs = env.reset()
        reward = np.zeros(n)
        sat_sum = np.zeros(n)
        sat_mean = np.zeros(n)
        op = np.zeros(n)
        vio = np.zeros(n)
        cons = np.zeros((n, 3))
        unpaired = 0
        unpaired_vio = 0.0
        for _ in range(steps):
            action = learner.act(obs, env, explore)
            next_obs, r, m = env.step(action)
            if train:
                learner.observe(obs, action, r, next_obs)
            obs = next_obs
            reward += r
            if m is not None:
                sat_sum += m.sat_sum
                sat_mean += m.sat_mean
                op += m.op_cost
                vio += m.vio_cost
                cons += m.consumption
                unpaired += m.unpaired
                unpaired_vio += m.unpaired_vio
        rec = EpisodeRecord(ep, reward, sat_sum / steps, sat_mean / steps, op, vio, cons / steps, unpaired,
                            time.perf_counter() - t0, unpaired_vio)
        records.append(rec)
        if callback is not None:
            callback(rec)
    return records


def maddpg_hyper(cfg: ScenarioConfig) -> MaddpgHyper:
    ln = cfg.learner
    return MaddpgHyper(ln.actor_lr, ln.critic_lr, ln.tau, ln.gamma, ln.buffer_size, ln.batch_size,
                       ln.warmup_batches, tuple(ln.hidden), ln.noise_start, ln.noise_end, ln.action_reg,
                       ln.reward_scale, ln.final_init)


def dqn_hyper(cfg: ScenarioConfig) -> DqnHyper:
    ln = cfg.learner
    return DqnHyper(ln.dqn_lr, ln.gamma, ln.tau, ln.buffer_size, ln.batch_size, ln.warmup_batches,
                    tuple(ln.hidden), ln.dqn_eps_start, ln.dqn_eps_end, reward_scale=ln.reward_scale)


def build_learner(name: str, cfg: ScenarioConfig, env, rng: np.random.Generator):
    total = cfg.learner.episodes * cfg.learner.steps
    if name == "maddpg":
        return Maddpg(env.n_agents, env.obs_dim, env.action_dim, maddpg_hyper(cfg), rng, total)
    if name == "greedy":
        return EpsilonGreedy(env.n_agents, cfg.learner.greedy_grid, cfg.learner.greedy_epsilon, rng,
                             reveal=cfg.learner.greedy_lookahead == "reveal")
    if name == "madqn":
        return Madqn(env.n_agents, env.obs_dim, cfg.learner.dqn_grid, dqn_hyper(cfg), rng, total)
    raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")


def seed_streams(seed: int) -> tuple[int, np.random.Generator]:
    """Environment seed and learner generator derived from one run seed."""
    env_ss, learner_ss = np.random.SeedSequence(seed).spawn(2)
    return int(env_ss.generate_state(1)[0]), np.random.default_rng(learner_ss)


def train(cfg: ScenarioConfig, algorithm: str, seed: int | None = None, callback=None):
    from .env import SliceEnv

    seed = cfg.seed if seed is None else seed
    env_seed, rng = seed_streams(seed)
    env = SliceEnv(cfg, env_seed)
    learner = build_learner(algorithm, cfg, env, rng)
    records = run_episodes(env, learner, cfg.learner.episodes, cfg.learner.steps, callback=callback)
    return learner, records


def algorithm_of(names) -> str:
    """Infer the learner family from checkpoint network names."""
    names = set(names)
    if "agent0.actor" in names:
        return "maddpg"
    if "agent0.q" in names:
        return "madqn"
    raise ValueError("checkpoint holds neither actor nor Q networks")


def restore_networks(learner, nets: dict) -> None:
    """Copy checkpointed parameters into a freshly built learner, by name."""
    own = learner.networks()
    missing = sorted(set(own) - set(nets))
    if missing:
        raise ValueError(f"checkpoint lacks networks {missing}")
    for name, net in own.items():
        if tuple(nets[name].sizes) != tuple(net.sizes) or nets[name].output != net.output:
            raise ValueError(f"network {name!r} shape {nets[name].sizes} does not match {net.sizes}")
        net.params[:] = nets[name].params


def evaluate(cfg: ScenarioConfig, learner, seed: int | None = None, episodes: int | None = None,
             steps: int | None = None) -> list[EpisodeRecord]:
    """Run a fixed policy: no exploration, no learning."""
    from .env import SliceEnv

    seed = cfg.seed if seed is None else seed
    env_seed, _ = seed_streams(seed)
    env = SliceEnv(cfg, env_seed)
    return run_episodes(env, learner, episodes or cfg.learner.episodes, steps or cfg.learner.steps,
                        explore=False, train=False)
