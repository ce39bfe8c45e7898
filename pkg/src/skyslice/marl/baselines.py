"""Comparison orchestrators: exhaustive one-step traversal and multi-agent DQN."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation
from ..neuro import Adam, Mlp, ReplayBuffer, soft_update


def action_grid(levels, dims: int = 3) -> np.ndarray:
    """Cartesian product of per-dimension levels, in lexicographic order."""
    levels = sorted(float(v) for v in levels)
    if not levels:
        raise ContractViolation("empty action grid")
    return np.array(list(itertools.product(levels, repeat=dims)))


def epsilon_greedy_policy(env, grid: np.ndarray, reveal: bool = False) -> np.ndarray:
    """Per agent, the grid action with the best one-step reward (first wins ties).

    Every candidate is priced in a cloned snapshot of the environment advanced
    by one step (see ``SliceEnv.snapshot_next``), the other agents holding
    their allocation.
    """
    if len(grid) == 0:
        raise ContractViolation("empty action grid")
    world = env.snapshot_next(reveal)
    return np.array([grid[int(np.argmax(env.scan_actions(q, grid, world)))] for q in range(env.n_agents)])


class EpsilonGreedy:
    """Traversal baseline: greedy over the full grid, a uniform grid action with probability epsilon."""

    def __init__(self, n_agents: int, levels, epsilon: float, rng: np.random.Generator, reveal: bool = False):
        self.n_agents = n_agents
        self.reveal = reveal
        self.grid = action_grid(levels)
        self.epsilon = epsilon
        self.rng = rng
        self.evaluations = 0

    def act(self, obs, env, explore: bool = True) -> np.ndarray:
        greedy = epsilon_greedy_policy(env, self.grid, self.reveal)
        self.evaluations += len(self.grid) * self.n_agents
        if explore and self.epsilon > 0:
            flip = self.rng.random(self.n_agents) < self.epsilon
            picks = self.rng.integers(len(self.grid), size=self.n_agents)
            greedy[flip] = self.grid[picks[flip]]
        return greedy

    def observe(self, obs, action, rewards, next_obs) -> None:
        pass


@dataclass
class DqnHyper:
    lr: float = 1e-4
    gamma: float = 0.5
    tau: float = 0.01
    buffer_size: int = 15000
    batch_size: int = 64
    warmup_batches: int = 10
    hidden: tuple = (64, 64)
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_fraction: float = 0.5
    reward_scale: float = 1.0


class Madqn:
    """Independent DQN per slice over a discretised action product set."""

    def __init__(self, n_agents, obs_dim, levels, hyper: DqnHyper, rng: np.random.Generator, total_steps: int = 1):
        self.n_agents = n_agents
        self.obs_dim = obs_dim
        self.grid = action_grid(levels)
        self.hyper = hyper
        self.rng = rng
        n_actions = len(self.grid)
        hidden = list(hyper.hidden)
        self.q = [Mlp([obs_dim, *hidden, n_actions], "identity", rng) for _ in range(n_agents)]
        self.q_target = [net.clone() for net in self.q]
        self.opt = [Adam(net.params.size, hyper.lr) for net in self.q]
        self.buffer = ReplayBuffer(hyper.buffer_size, obs_dim * n_agents, n_agents, n_agents)
        self.total_steps = max(1, total_steps)
        self.steps_done = 0
        self.skipped = 0

    @property
    def epsilon(self) -> float:
        h = self.hyper
        frac = min(1.0, self.steps_done / (h.eps_decay_fraction * self.total_steps))
        return h.eps_start + (h.eps_end - h.eps_start) * frac

    def greedy_indices(self, obs: np.ndarray) -> np.ndarray:
        return np.array([int(np.argmax(net.predict(obs[q]))) for q, net in enumerate(self.q)])

    def select_indices(self, obs: np.ndarray, epsilon: float) -> np.ndarray:
        idx = self.greedy_indices(obs)
        flip = self.rng.random(self.n_agents) < epsilon
        rand = self.rng.integers(len(self.grid), size=self.n_agents)
        return np.where(flip, rand, idx)

    def act(self, obs, env=None, explore: bool = True) -> np.ndarray:
        idx = self.select_indices(obs, self.epsilon if explore else 0.0)
        self._last = idx
        return self.grid[idx]

    def observe(self, obs, action, rewards, next_obs) -> None:
        idx = getattr(self, "_last", None)
        if idx is None:
            idx = np.array([int(np.argmin(np.abs(self.grid - a).sum(axis=1))) for a in np.asarray(action)])
        self.buffer.push(obs.reshape(-1), idx, self.hyper.reward_scale * np.asarray(rewards, dtype=float),
                         next_obs.reshape(-1))
        self._last = None
        self.steps_done += 1
        h = self.hyper
        if self.buffer.ready(h.warmup_batches * h.batch_size):
            self.update(self.buffer.sample(self.rng, h.batch_size))

    def update(self, batch) -> None:
        h = self.hyper
        k = len(batch.state)
        obs = batch.state.reshape(k, self.n_agents, self.obs_dim)
        nxt = batch.next_state.reshape(k, self.n_agents, self.obs_dim)
        rows = np.arange(k)
        for m in range(self.n_agents):
            y = batch.rewards[:, m] + h.gamma * self.q_target[m].predict(nxt[:, m]).max(axis=1)
            q = self.q[m].forward(obs[:, m])
            taken = batch.action[:, m].astype(np.int64)
            td = q[rows, taken] - y
            if not np.all(np.isfinite(td)):
                self.skipped += 1
                continue
            upstream = np.zeros_like(q)
            upstream[rows, taken] = (2.0 / k) * td
            grad, _ = self.q[m].backward(upstream)
            self.opt[m].step(self.q[m].params, grad)
            soft_update(self.q_target[m], self.q[m], h.tau)

    def networks(self) -> dict:
        out = {}
        for q in range(self.n_agents):
            out[f"agent{q}.q"] = self.q[q]
            out[f"agent{q}.q_target"] = self.q_target[q]
        return out
