"""Small fully connected networks with hand-written backprop, Adam, soft updates and replay.

Parameters of a network live in one flat float64 vector; per-layer weight and
bias arrays are views into it, so optimiser steps and target blending are
single vector operations.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import BufferNotReady, ContractViolation, StaleCacheError

CHECKPOINT_VERSION = 1
OUTPUT_ACTIVATIONS = ("identity", "tanh")


class Mlp:
    """ReLU hidden layers, identity or tanh-squashed output. Weights are (in, out)."""

    def __init__(
        self,
        sizes: Sequence[int],
        output: str = "identity",
        rng: np.random.Generator | None = None,
        final_init: float | None = None,
    ):
        """Uniform fan-in init (``±1/sqrt(fan_in)``); ``final_init`` overrides the
        bound of the output layer, so a fresh network starts near-zero output."""
        if len(sizes) < 2 or any(int(s) < 1 for s in sizes):
            raise ContractViolation(f"bad layer sizes {sizes}")
        if output not in OUTPUT_ACTIVATIONS:
            raise ContractViolation(f"unknown output activation {output!r}")
        self.sizes = tuple(int(s) for s in sizes)
        self.output = output
        n = sum(i * o + o for i, o in zip(self.sizes, self.sizes[1:]))
        self.params = np.zeros(n)
        self.grad = np.zeros(n)
        self.weights, self.biases = self._views(self.params)
        self._grad_w, self._grad_b = self._views(self.grad)
        if rng is not None:
            last = len(self.weights) - 1
            for k, (w, b) in enumerate(zip(self.weights, self.biases)):
                bound = final_init if k == last and final_init is not None else 1.0 / np.sqrt(w.shape[0])
                w[...] = rng.uniform(-bound, bound, size=w.shape)
                b[...] = rng.uniform(-bound, bound, size=b.shape)
        self._cache = None

    def _views(self, flat):
        ws, bs, k = [], [], 0
        for i, o in zip(self.sizes, self.sizes[1:]):
            ws.append(flat[k : k + i * o].reshape(i, o))
            k += i * o
            bs.append(flat[k : k + o])
            k += o
        return ws, bs

    @property
    def n_inputs(self) -> int:
        return self.sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.sizes[-1]

    def clone(self) -> Mlp:
        other = Mlp(self.sizes, self.output)
        other.params[:] = self.params
        return other

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.sizes[0]:
            raise ContractViolation(f"expected {self.sizes[0]} inputs, got {x.shape[-1]}")
        acts = [x]
        a = x
        z = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            if k < last:
                a = np.maximum(z, 0.0)
            else:
                a = np.tanh(z) if self.output == "tanh" else z
            acts.append(a)
        self._cache = acts
        self._pre = z
        return a

    @property
    def pre_activation(self) -> np.ndarray:
        """Output-layer pre-activation of the cached forward pass."""
        if self._cache is None:
            raise StaleCacheError("no cached forward pass")
        return self._pre

    def predict(self, x) -> np.ndarray:
        """Forward pass that leaves the backprop cache untouched."""
        cache, pre = self._cache, getattr(self, "_pre", None)
        try:
            return self.forward(x)
        finally:
            self._cache, self._pre = cache, pre

    def backward(self, upstream, x=None, pre_upstream=None) -> tuple[np.ndarray, np.ndarray]:
        """Gradients of ``sum(output * upstream)``, plus ``sum(pre * pre_upstream)``
        on the output pre-activation when given.

        Returns ``(param_grad, input_grad)``; ``param_grad`` is the network's
        own flat gradient buffer and is overwritten by the next call.
        """
        acts = self._cache
        if acts is None:
            raise StaleCacheError("backward called before forward")
        if x is not None and not np.array_equal(np.asarray(x, dtype=float), acts[0]):
            raise StaleCacheError("cached forward pass was for a different input")
        g = np.asarray(upstream, dtype=float)
        if g.shape != acts[-1].shape:
            raise ContractViolation(f"upstream shape {g.shape} != output shape {acts[-1].shape}")
        if self.output == "tanh":
            g = g * (1.0 - acts[-1] * acts[-1])
        if pre_upstream is not None:
            g = g + np.asarray(pre_upstream, dtype=float)
        for k in range(len(self.weights) - 1, -1, -1):
            a_in = acts[k]
            if a_in.ndim == 1:
                np.outer(a_in, g, out=self._grad_w[k])
                self._grad_b[k][...] = g
            else:
                np.matmul(a_in.T, g, out=self._grad_w[k])
                g.sum(axis=0, out=self._grad_b[k])
            g = g @ self.weights[k].T
            if k > 0:
                g = g * (acts[k] > 0.0)
        return self.grad, g


class Adam:
    """Adaptive-moment optimiser with bias correction over a flat parameter vector."""

    def __init__(self, n: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0
        self.skipped = 0

    def step(self, params: np.ndarray, grads: np.ndarray, lr: float | None = None) -> bool:
        """Update ``params`` in place; returns False (and counts it) on a non-finite gradient."""
        if params.shape != grads.shape or params.shape != self.m.shape:
            raise ContractViolation("parameter / gradient / state shapes disagree")
        if not np.all(np.isfinite(grads)):
            self.skipped += 1
            return False
        lr = self.lr if lr is None else lr
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        self.m *= b1
        self.m += (1.0 - b1) * grads
        self.v *= b2
        self.v += (1.0 - b2) * grads * grads
        step = lr * np.sqrt(1.0 - b2**self.t) / (1.0 - b1**self.t)
        params -= step * self.m / (np.sqrt(self.v) + self.eps)
        return True


def soft_update(target: Mlp, source: Mlp, tau: float) -> Mlp:
    if target.sizes != source.sizes:
        raise ContractViolation(f"shape mismatch {target.sizes} vs {source.sizes}")
    if not 0.0 <= tau <= 1.0:
        raise ContractViolation(f"tau must lie in [0, 1], got {tau}")
    target.params *= 1.0 - tau
    target.params += tau * source.params
    return target


@dataclass
class Transition:
    """A single transition, or a batch of them when arrays carry a leading axis."""

    state: np.ndarray
    action: np.ndarray
    rewards: np.ndarray
    next_state: np.ndarray


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest transition is overwritten when full."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int, n_agents: int):
        if capacity < 1:
            raise ContractViolation("capacity must be >= 1")
        self.capacity = capacity
        self.state = np.zeros((capacity, state_dim))
        self.action = np.zeros((capacity, action_dim))
        self.rewards = np.zeros((capacity, n_agents))
        self.next_state = np.zeros((capacity, state_dim))
        self.cursor = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def push(self, state, action, rewards, next_state) -> None:
        k = self.cursor
        self.state[k] = state
        self.action[k] = action
        self.rewards[k] = rewards
        self.next_state[k] = next_state
        self.cursor = (k + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def ready(self, batch: int) -> bool:
        return self.size >= batch

    def sample_indices(self, rng: np.random.Generator, batch: int) -> np.ndarray:
        if not self.ready(batch):
            raise BufferNotReady(f"buffer holds {self.size} < {batch} transitions")
        return rng.integers(0, self.size, size=batch)

    def sample(self, rng: np.random.Generator, batch: int) -> Transition:
        idx = self.sample_indices(rng, batch)
        return Transition(self.state[idx], self.action[idx], self.rewards[idx], self.next_state[idx])


def save_networks(path, nets: Mapping[str, Mlp]) -> None:
    """Write networks as layer sizes + flat row-major parameters (``.npz``)."""
    arrays = {"format_version": np.array(CHECKPOINT_VERSION), "names": np.array(sorted(nets))}
    for name, net in nets.items():
        arrays[f"{name}.sizes"] = np.array(net.sizes, dtype=np.int64)
        arrays[f"{name}.output"] = np.array(net.output)
        arrays[f"{name}.params"] = net.params
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_networks(path) -> dict[str, Mlp]:
    with np.load(Path(path), allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != CHECKPOINT_VERSION:
            raise ContractViolation(f"unsupported checkpoint version {version}")
        nets = {}
        for name in data["names"].tolist():
            net = Mlp(data[f"{name}.sizes"].tolist(), str(data[f"{name}.output"]))
            net.params[:] = data[f"{name}.params"]
            nets[name] = net
        return nets
