"""Multi-agent DDPG: decentralised tanh actors, centralised critics over (state, joint action)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..neuro import Adam, Mlp, ReplayBuffer, Transition, soft_update


@dataclass
class AgentNets:
    actor: Mlp
    target_actor: Mlp
    critic: Mlp
    target_critic: Mlp
    actor_opt: Adam
    critic_opt: Adam


@dataclass
class UpdateStats:
    critic_loss: list = field(default_factory=list)
    skipped: int = 0


@dataclass
class MaddpgHyper:
    actor_lr: float = 2e-5
    critic_lr: float = 1e-5
    tau: float = 0.01
    gamma: float = 0.5
    buffer_size: int = 15000
    batch_size: int = 64
    warmup_batches: int = 10
    hidden: tuple = (64, 64)
    noise_start: float = 0.3
    noise_end: float = 0.02
    action_reg: float = 1e-3
    reward_scale: float = 1.0
    final_init: float | None = 3e-3


def make_agent(obs_dim, state_dim, action_dim, n_agents, hyper: MaddpgHyper, rng) -> AgentNets:
    hidden = list(hyper.hidden)
    actor = Mlp([obs_dim, *hidden, action_dim], "tanh", rng, hyper.final_init)
    critic = Mlp([state_dim + action_dim * n_agents, *hidden, 1], "identity", rng, hyper.final_init)
    return AgentNets(
        actor, actor.clone(), critic, critic.clone(),
        Adam(actor.params.size, hyper.actor_lr), Adam(critic.params.size, hyper.critic_lr),
    )


def critic_loss(nets: AgentNets, batch: Transition, agent: int, target_actions: np.ndarray, gamma: float):
    """Mean squared TD error of one agent's critic and the TD errors themselves."""
    q_next = nets.target_critic.predict(np.concatenate([batch.next_state, target_actions], axis=1))[:, 0]
    y = batch.rewards[:, agent] + gamma * q_next
    q = nets.critic.forward(np.concatenate([batch.state, batch.action], axis=1))[:, 0]
    td = q - y
    return float(np.mean(td * td)), td


def actor_gradient(nets: AgentNets, batch: Transition, agent: int, obs_dim: int, action_dim: int,
                   action_reg: float = 0.0) -> np.ndarray:
    """Flat gradient of -mean Q(s, a | a_agent = mu(o_agent)) w.r.t. the actor parameters.

    ``action_reg`` adds ``action_reg * mean(z**2)`` over the actor's pre-tanh
    outputs ``z``, which keeps the squashing from saturating for good.
    """
    k = len(batch.state)
    n_agents = batch.state.shape[1] // obs_dim
    obs = batch.state.reshape(k, n_agents, obs_dim)[:, agent]
    mu = nets.actor.forward(obs)
    joint = batch.action.copy()
    lo = agent * action_dim
    joint[:, lo : lo + action_dim] = mu
    nets.critic.forward(np.concatenate([batch.state, joint], axis=1))
    _, g_in = nets.critic.backward(np.full((k, 1), -1.0 / k))
    off = batch.state.shape[1] + lo
    pre_up = None
    if action_reg > 0.0:
        z = nets.actor.pre_activation
        pre_up = (2.0 * action_reg / z.size) * z
    grad, _ = nets.actor.backward(g_in[:, off : off + action_dim], pre_upstream=pre_up)
    return grad


class Maddpg:
    def __init__(self, n_agents, obs_dim, action_dim, hyper: MaddpgHyper, rng: np.random.Generator,
                 total_steps: int = 1):
        self.n_agents = n_agents
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.state_dim = obs_dim * n_agents
        self.hyper = hyper
        self.rng = rng
        self.agents = [make_agent(obs_dim, self.state_dim, action_dim, n_agents, hyper, rng) for _ in range(n_agents)]
        self.buffer = ReplayBuffer(hyper.buffer_size, self.state_dim, action_dim * n_agents, n_agents)
        self.stats = UpdateStats()
        self.total_steps = max(1, total_steps)
        self.steps_done = 0

    @property
    def noise_scale(self) -> float:
        h = self.hyper
        frac = min(1.0, self.steps_done / self.total_steps)
        return h.noise_start + (h.noise_end - h.noise_start) * frac

    def act(self, obs: np.ndarray, env=None, explore: bool = True) -> np.ndarray:
        a = np.array([ag.actor.predict(obs[q]) for q, ag in enumerate(self.agents)])
        if explore:
            a = a + self.rng.normal(0.0, self.noise_scale, size=a.shape)
        return np.clip(a, -1.0, 1.0)

    def observe(self, obs, action, rewards, next_obs) -> None:
        self.buffer.push(obs.reshape(-1), np.asarray(action).reshape(-1),
                         self.hyper.reward_scale * np.asarray(rewards, dtype=float), next_obs.reshape(-1))
        self.steps_done += 1
        if self.buffer.ready(self.hyper.warmup_batches * self.hyper.batch_size):
            self.update(self.buffer.sample(self.rng, self.hyper.batch_size))

    def target_actions(self, next_state: np.ndarray) -> np.ndarray:
        k = len(next_state)
        obs = next_state.reshape(k, self.n_agents, self.obs_dim)
        return np.concatenate([ag.target_actor.predict(obs[:, q]) for q, ag in enumerate(self.agents)], axis=1)

    def update(self, batch: Transition) -> None:
        h = self.hyper
        a_next = self.target_actions(batch.next_state)
        for m, ag in enumerate(self.agents):
            loss, td = critic_loss(ag, batch, m, a_next, h.gamma)
            if not np.isfinite(loss):
                self.stats.skipped += 1
                continue
            self.stats.critic_loss.append(loss)
            grad, _ = ag.critic.backward((2.0 / len(td)) * td[:, None])
            ag.critic_opt.step(ag.critic.params, grad)
            ag.actor_opt.step(ag.actor.params, actor_gradient(ag, batch, m, self.obs_dim, self.action_dim, h.action_reg))
            soft_update(ag.target_critic, ag.critic, h.tau)
            soft_update(ag.target_actor, ag.actor, h.tau)

    def networks(self) -> dict:
        out = {}
        for q, ag in enumerate(self.agents):
            out.update({f"agent{q}.actor": ag.actor, f"agent{q}.critic": ag.critic,
                        f"agent{q}.target_actor": ag.target_actor, f"agent{q}.target_critic": ag.target_critic})
        return out
