"""Offloading MDP: state encoding, reward breakdown, and the reset/step loop.

One episode is one task. Each step assigns the next designated offload subtask
to an edge device; the final step also adds the locally generated subtasks, so
the episode return is total content quality minus weighted costs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .config import RewardConfig
from .cost import ShannonCostModel
from .errors import EpisodeOver, InvalidAction
from .quality import Placement, aggregate_quality, gating_weights, subtask_quality
from .scenario import (
    ChannelState,
    Scenario,
    Task,
    linear_to_config_units,
    resample_channels,
    sample_task,
)

USER_FEATURES = 3
DEVICE_FEATURES = 5

# Per-subtask placement: an int is an edge device index, None means abandoned.
Assignment = Union[int, Placement, None]


@dataclass(frozen=True)
class RewardBreakdown:
    quality_total: float
    comm_energy_j: float
    compute_cost: float
    reward: float

    @classmethod
    def from_terms(cls, quality, comm_energy_j, compute_cost, reward_cfg: RewardConfig):
        reward = (
            quality
            - reward_cfg.lambda_energy * comm_energy_j
            - reward_cfg.lambda_compute * compute_cost
        )
        return cls(float(quality), float(comm_energy_j), float(compute_cost), float(reward))


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


def state_dim(n_devices: int) -> int:
    return USER_FEATURES + DEVICE_FEATURES * n_devices


def _norm(x: float, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    return min(max((x - lo) / (hi - lo), 0.0), 1.0)


def encode_state(
    task: Task,
    scenario: Scenario,
    step: int = 0,
    cost_model: Optional[ShannonCostModel] = None,
) -> np.ndarray:
    """Flatten (task, scenario) into a vector of length 3 + 5N with entries in [0, 1].

    User block: required compute, topic index, prompt transfer energy (estimated
    on a mid-range channel). Device block, per device: available compute,
    specialty index, specialty match flag, SNR, round-trip energy estimate.
    Every feature is min-max scaled with ranges taken from the scenario config.
    """
    cost_model = cost_model or ShannonCostModel()
    cfg = scenario.config
    sub = task.subtasks[task.offload_indices[step]]
    t_hi = scenario.n_topics - 1

    def topic_norm(t):
        return t / t_hi if t_hi > 0 else 0.0

    def channel_at(snr_cfg_units):
        lin = 10.0 ** (snr_cfg_units / 10.0) if cfg.snr_in_db else snr_cfg_units
        return ChannelState(lin, cfg.bandwidth_hz, cfg.tx_power_w)

    best, worst = channel_at(cfg.snr_max), channel_at(cfg.snr_min)
    mid = channel_at(0.5 * (cfg.snr_min + cfg.snr_max))

    out = np.empty(state_dim(scenario.n_devices))
    out[0] = _norm(sub.compute_units, cfg.kappa_u * cfg.output_bits_min, cfg.kappa_u * cfg.output_bits_max)
    out[1] = topic_norm(sub.topic)
    out[2] = _norm(
        cost_model.transfer(mid, sub.prompt_bits).energy_j,
        cost_model.transfer(mid, cfg.prompt_bits_min).energy_j,
        cost_model.transfer(mid, cfg.prompt_bits_max).energy_j,
    )
    rt_lo = cost_model.transfer(best, cfg.prompt_bits_min + cfg.output_bits_min).energy_j
    rt_hi = cost_model.transfer(worst, cfg.prompt_bits_max + cfg.output_bits_max).energy_j
    for i, dev in enumerate(scenario.devices):
        base = USER_FEATURES + DEVICE_FEATURES * i
        snr = linear_to_config_units(dev.channel.snr_linear, cfg.snr_in_db)
        out[base] = _norm(dev.avail_compute_units, cfg.avail_compute_min, cfg.avail_compute_max)
        out[base + 1] = topic_norm(dev.expert.specialty)
        out[base + 2] = 1.0 if dev.expert.specialty == sub.topic else 0.0
        out[base + 3] = _norm(snr, cfg.snr_min, cfg.snr_max)
        out[base + 4] = _norm(cost_model.round_trip(dev.channel, sub).energy_j, rt_lo, rt_hi)
    return out


def score_subtasks(
    task: Task,
    scenario: Scenario,
    assignment: Sequence[Assignment],
    sigma: float,
    rng: Optional[np.random.Generator],
) -> np.ndarray:
    """Quality score of every subtask under ``assignment``.

    Draws one noise sample per subtask, in index order, whatever the placement;
    policies fed generators with the same seed therefore see the same noise.
    ``rng=None`` scores noise-free. Abandoned subtasks and subtasks sent to a
    device without enough compute score 0.
    """
    if rng is None:
        rng, sigma = np.random.default_rng(0), 0.0
    delta = scenario.user.local_q_bonus
    scores = np.zeros(task.k_total)
    for i, (sub, where) in enumerate(zip(task.subtasks, assignment)):
        if where is None or where is Placement.LOCAL:
            expert, placement = scenario.local_expert(sub.topic), Placement.LOCAL
        else:
            expert, placement = scenario.devices[where].expert, Placement.EDGE
        q = subtask_quality(expert, sub, placement, delta, rng, sigma)
        if where is None:
            continue
        if placement is Placement.EDGE and not is_feasible(scenario, where, sub):
            continue
        scores[i] = q
    return scores


def is_feasible(scenario: Scenario, device: int, subtask) -> bool:
    return scenario.devices[device].avail_compute_units >= subtask.compute_units


def step_breakdown(
    task: Task,
    scenario: Scenario,
    reward_cfg: RewardConfig,
    step: int,
    device: int,
    rng: Optional[np.random.Generator],
    cost_model: Optional[ShannonCostModel] = None,
) -> RewardBreakdown:
    """Reward terms of sending offload subtask number ``step`` to ``device``.

    On the last step the locally generated subtasks (quality and local compute)
    are added as well.
    """
    cost_model = cost_model or ShannonCostModel(reward_cfg.kappa_c)
    offload = task.offload_indices
    target = offload[step]
    assignment: list[Assignment] = [
        None if i in offload else Placement.LOCAL for i in range(task.k_total)
    ]
    assignment[target] = device
    scores = score_subtasks(task, scenario, assignment, reward_cfg.sigma, rng)
    weights = gating_weights(task, reward_cfg.gating)

    sub = task.subtasks[target]
    channel = scenario.devices[device].channel
    mask = np.zeros(task.k_total)
    mask[target] = 1.0
    if is_feasible(scenario, device, sub):
        comm = cost_model.round_trip(channel, sub).energy_j
        compute = reward_cfg.edge_compute_mult * cost_model.compute(sub.output_bits)
    else:
        comm = cost_model.transfer(channel, sub.prompt_bits).energy_j
        compute = 0.0
    if step == len(offload) - 1:
        local = [i for i in range(task.k_total) if i not in offload]
        mask[local] = 1.0
        compute += reward_cfg.local_compute_mult * sum(
            cost_model.compute(task.subtasks[i].output_bits) for i in local
        )
    quality = aggregate_quality(scores * mask, weights, reward_cfg.scale)
    return RewardBreakdown.from_terms(quality, comm, compute, reward_cfg)


class OffloadEnv:
    """Single-owner environment over a fixed set of edge devices.

    Device specialties and compute stay fixed; every reset draws a new task and
    fresh channel states.
    """

    def __init__(
        self,
        scenario: Scenario,
        reward: Optional[RewardConfig] = None,
        cost_model: Optional[ShannonCostModel] = None,
    ):
        self.scenario = scenario
        self.reward_cfg = reward or RewardConfig()
        self.cost_model = cost_model or ShannonCostModel(self.reward_cfg.kappa_c)
        self.task: Optional[Task] = None
        self.step_count = 0
        self.done = True

    @property
    def n_actions(self) -> int:
        return self.scenario.n_devices

    @property
    def state_dim(self) -> int:
        return state_dim(self.scenario.n_devices)

    @property
    def decisions(self) -> int:
        return len(self.task.offload_indices) if self.task else self.scenario.config.k_offload

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        task = sample_task(self.scenario, rng)
        scenario = resample_channels(self.scenario, rng)
        return self.load(task, scenario)

    def load(self, task: Task, scenario: Optional[Scenario] = None) -> np.ndarray:
        """Start an episode on a given task (and optionally given channel states)."""
        if scenario is not None:
            self.scenario = scenario
        self.task = task
        self.step_count = 0
        self.done = False
        return self.observe()

    def observe(self) -> np.ndarray:
        step = min(self.step_count, len(self.task.offload_indices) - 1)
        return encode_state(self.task, self.scenario, step, self.cost_model)

    def step(self, action: int, rng: Optional[np.random.Generator]):
        """Returns ``(breakdown, next_state, done)``."""
        if self.task is None or self.done:
            raise EpisodeOver("step called on a finished episode; call reset first")
        if isinstance(action, (bool, np.bool_)) or not 0 <= int(action) < self.n_actions:
            raise InvalidAction(f"device index {action!r} outside [0, {self.n_actions})")
        breakdown = step_breakdown(
            self.task, self.scenario, self.reward_cfg, self.step_count, int(action), rng, self.cost_model
        )
        self.step_count += 1
        self.done = self.step_count >= len(self.task.offload_indices)
        return breakdown, self.observe(), self.done


def episode_reward(transitions: Sequence[Transition]) -> float:
    if not transitions:
        raise ValueError("episode_reward needs at least one transition")
    if not transitions[-1].done:
        raise ValueError("episode does not end with a terminal transition")
    return float(sum(t.reward for t in transitions))
