"""Reference policies: random selection, drop-one benchmark, local upper bound, oracle."""

from __future__ import annotations

import enum
from typing import Optional

import numpy as np

from .config import RewardConfig
from .cost import ShannonCostModel
from .env import RewardBreakdown, score_subtasks, step_breakdown
from .quality import Placement, aggregate_quality, gating_weights
from .scenario import Scenario, Task


class PolicyKind(enum.Enum):
    SAC = "Sac"
    RANDOM = "Random"
    BENCHMARK = "Benchmark"
    UPPER_BOUND = "UpperBound"
    ORACLE = "Oracle"


def random_policy(n_devices: int, rng: np.random.Generator) -> int:
    return int(rng.integers(0, n_devices))


def _local_breakdown(task, scenario, reward_cfg, rng, cost_model, abandon):
    cost_model = cost_model or ShannonCostModel(reward_cfg.kappa_c)
    dropped = set(task.offload_indices) if abandon else set()
    assignment = [None if i in dropped else Placement.LOCAL for i in range(task.k_total)]
    scores = score_subtasks(task, scenario, assignment, reward_cfg.sigma, rng)
    quality = aggregate_quality(scores, gating_weights(task, reward_cfg.gating), reward_cfg.scale)
    compute = reward_cfg.local_compute_mult * sum(
        cost_model.compute(s.output_bits) for i, s in enumerate(task.subtasks) if i not in dropped
    )
    return RewardBreakdown.from_terms(quality, 0.0, compute, reward_cfg)


def benchmark_reward(
    task: Task,
    scenario: Scenario,
    reward_cfg: Optional[RewardConfig] = None,
    rng: Optional[np.random.Generator] = None,
    cost_model: Optional[ShannonCostModel] = None,
) -> RewardBreakdown:
    """User device abandons the offload subtask(s) and finishes the rest locally.

    The abandoned subtask keeps its gating weight and costs nothing.
    ``rng=None`` evaluates without quality noise.
    """
    return _local_breakdown(task, scenario, reward_cfg or RewardConfig(), rng, cost_model, True)


def upper_bound_reward(
    task: Task,
    scenario: Scenario,
    reward_cfg: Optional[RewardConfig] = None,
    rng: Optional[np.random.Generator] = None,
    cost_model: Optional[ShannonCostModel] = None,
) -> RewardBreakdown:
    """User device has the resources to run every subtask locally."""
    return _local_breakdown(task, scenario, reward_cfg or RewardConfig(), rng, cost_model, False)


def device_rewards(
    task: Task,
    scenario: Scenario,
    reward_cfg: Optional[RewardConfig] = None,
    step: int = 0,
    cost_model: Optional[ShannonCostModel] = None,
) -> list[RewardBreakdown]:
    """Noise-free breakdown for every device choice at decision ``step``."""
    reward_cfg = reward_cfg or RewardConfig()
    return [
        step_breakdown(task, scenario, reward_cfg, step, d, None, cost_model)
        for d in range(scenario.n_devices)
    ]


def oracle_select(
    task: Task,
    scenario: Scenario,
    reward_cfg: Optional[RewardConfig] = None,
    step: int = 0,
    cost_model: Optional[ShannonCostModel] = None,
) -> tuple[int, RewardBreakdown]:
    """Exhaustive argmax over devices of the noise-free step reward; ties go to the lowest index.

    Step rewards do not depend on other steps' choices, so applying this at
    every step of a multi-offload task is also the episode optimum.
    """
    options = device_rewards(task, scenario, reward_cfg, step, cost_model)
    best = int(np.argmax([b.reward for b in options]))
    return best, options[best]
