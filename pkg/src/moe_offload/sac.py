"""Discrete-action soft actor-critic with twin critics and learned temperature."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import SacConfig
from .env import Transition
from .errors import NotEnoughData, ShapeError
from .nn import Mlp, make_optimizer


class ActionMode(enum.Enum):
    SAMPLE = "sample"
    GREEDY = "greedy"


@dataclass(frozen=True)
class LossReport:
    critic1_loss: float
    critic2_loss: float
    actor_loss: float
    alpha_loss: float
    alpha: float


@dataclass(frozen=True)
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray

    def __len__(self):
        return len(self.actions)

    @classmethod
    def from_transitions(cls, transitions: list[Transition]) -> "Batch":
        return cls(
            np.array([t.state for t in transitions], dtype=float),
            np.array([t.action for t in transitions], dtype=np.int64),
            np.array([t.reward for t in transitions], dtype=float),
            np.array([t.next_state for t in transitions], dtype=float),
            np.array([t.done for t in transitions], dtype=float),
        )


class ReplayBuffer:
    """FIFO ring of transitions with uniform sampling (with replacement)."""

    def __init__(self, capacity: int, state_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.next_states = np.zeros((capacity, state_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.size = 0
        self._head = 0  # next write slot; also the oldest entry once full

    def __len__(self):
        return self.size

    def push(self, t: Transition) -> None:
        i = self._head
        self.states[i] = t.state
        self.actions[i] = t.action
        self.rewards[i] = t.reward
        self.next_states[i] = t.next_state
        self.dones[i] = float(t.done)
        self._head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def __getitem__(self, k: int) -> Transition:
        """k-th oldest stored transition."""
        if not 0 <= k < self.size:
            raise IndexError(k)
        i = (self._head - self.size + k) % self.capacity
        return Transition(
            self.states[i].copy(), int(self.actions[i]), float(self.rewards[i]),
            self.next_states[i].copy(), bool(self.dones[i]),
        )

    def sample_indices(self, rng: np.random.Generator, batch_size: int) -> np.ndarray:
        if self.size < batch_size or self.size == 0:
            raise NotEnoughData(f"buffer holds {self.size} transitions, need {batch_size}")
        return rng.integers(0, self.size, batch_size)

    def sample(self, rng: np.random.Generator, batch_size: int) -> Batch:
        idx = self.sample_indices(rng, batch_size)
        return Batch(
            self.states[idx], self.actions[idx], self.rewards[idx],
            self.next_states[idx], self.dones[idx],
        )


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def select_from_probs(probs: np.ndarray, mode: ActionMode, rng: Optional[np.random.Generator]) -> int:
    if mode is ActionMode.GREEDY:
        return int(np.argmax(probs))
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), len(probs) - 1)


class SacAgent:
    def __init__(
        self,
        state_dim: int,
        n_actions: int,
        config: Optional[SacConfig] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        self.config = config or SacConfig()
        self.state_dim = state_dim
        self.n_actions = n_actions
        rng = rng if rng is not None else np.random.default_rng(0)
        sizes = [state_dim, *self.config.hidden, n_actions]
        self.actor = Mlp(sizes, rng)
        self.critic1 = Mlp(sizes, rng)
        self.critic2 = Mlp(sizes, rng)
        self.target1 = self.critic1.copy()
        self.target2 = self.critic2.copy()
        self.log_alpha = np.array([self.config.init_log_alpha])
        self.target_entropy = self.config.target_entropy_ratio * math.log(n_actions)
        self.meta: dict = {}
        self._make_optimizers()

    def _make_optimizers(self):
        c = self.config
        self.actor_opt = make_optimizer(c.optimizer, self.actor.params, c.actor_lr)
        self.critic1_opt = make_optimizer(c.optimizer, self.critic1.params, c.critic_lr)
        self.critic2_opt = make_optimizer(c.optimizer, self.critic2.params, c.critic_lr)
        self.alpha_opt = make_optimizer(c.optimizer, [self.log_alpha], c.alpha_lr)

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha[0]))

    @property
    def networks(self) -> dict[str, Mlp]:
        return {
            "actor": self.actor,
            "critic1": self.critic1,
            "critic2": self.critic2,
            "target1": self.target1,
            "target2": self.target2,
        }

    def _check_state(self, state):
        state = np.asarray(state, dtype=float)
        if state.shape[-1] != self.state_dim:
            raise ShapeError(f"state width {state.shape[-1]} != {self.state_dim}")
        return state

    def policy(self, state: np.ndarray) -> np.ndarray:
        return softmax(self.actor.forward(self._check_state(state)))

    def select_action(
        self,
        state: np.ndarray,
        mode: ActionMode = ActionMode.SAMPLE,
        rng: Optional[np.random.Generator] = None,
    ) -> int:
        return select_from_probs(self.policy(state), mode, rng)

    def critic_target(self, batch: Batch) -> np.ndarray:
        """Soft Bellman target: r + gamma (1 - done) E_pi[min Qtarget - alpha log pi]."""
        logits = self.actor.forward(batch.next_states)
        logp = log_softmax(logits)
        p = np.exp(logp)
        q_min = np.minimum(self.target1.forward(batch.next_states), self.target2.forward(batch.next_states))
        v_next = (p * (q_min - self.alpha * logp)).sum(axis=1)
        return batch.rewards + self.config.gamma * (1.0 - batch.dones) * v_next

    def update(self, buffer: ReplayBuffer, rng: np.random.Generator) -> LossReport:
        batch = buffer.sample(rng, self.config.batch_size)
        return self.update_on_batch(batch)

    def update_on_batch(self, batch: Batch) -> LossReport:
        n = len(batch)
        rows = np.arange(n)
        y = self.critic_target(batch)

        critic_losses = []
        for critic, opt in ((self.critic1, self.critic1_opt), (self.critic2, self.critic2_opt)):
            q = critic.forward(batch.states)
            diff = q[rows, batch.actions] - y
            critic_losses.append(float(np.mean(diff**2)))
            g = np.zeros_like(q)
            g[rows, batch.actions] = 2.0 * diff / n
            opt.step(critic.backward(g))

        q_min = np.minimum(self.critic1.forward(batch.states), self.critic2.forward(batch.states))
        logp = log_softmax(self.actor.forward(batch.states))
        p = np.exp(logp)
        alpha = self.alpha
        inner = alpha * logp - q_min
        per_state = (p * inner).sum(axis=1)
        actor_loss = float(per_state.mean())
        g_logits = p * (inner - per_state[:, None]) / n
        self.actor_opt.step(self.actor.backward(g_logits))

        # log_alpha is the only free variable here; pi is treated as fixed
        ent_gap = (p * (logp + self.target_entropy)).sum(axis=1)
        alpha_loss = float(np.mean(-self.log_alpha[0] * ent_gap))
        self.alpha_opt.step([np.array([-ent_gap.mean()])])

        self.polyak_update(self.config.tau)
        return LossReport(critic_losses[0], critic_losses[1], actor_loss, alpha_loss, self.alpha)

    def polyak_update(self, tau: Optional[float] = None) -> None:
        tau = self.config.tau if tau is None else tau
        if not 0 < tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        for online, target in ((self.critic1, self.target1), (self.critic2, self.target2)):
            for src, dst in zip(online.params, target.params):
                dst *= 1.0 - tau
                dst += tau * src

    def frozen_actor(self) -> Mlp:
        """Independent copy of the actor, safe to hand to another thread for evaluation."""
        return self.actor.copy()
