"""Synthetic content-quality model standing in for an external text scorer.

Each subtask gets a score in [0, 10] from the expert that ran it; the gating
network's weights combine the scores into one content score.
"""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .scenario import ExpertProfile, Subtask, Task

MAX_SCORE = 10.0


class Placement(enum.Enum):
    LOCAL = "local"
    EDGE = "edge"


class GatingMode(enum.Enum):
    UNIFORM = "uniform"
    SIZE_PROPORTIONAL = "size_proportional"


def subtask_quality(
    expert: ExpertProfile,
    subtask: Subtask,
    where: Placement,
    delta: float,
    rng: np.random.Generator,
    sigma: float = 0.5,
) -> float:
    """Score one subtask; always consumes exactly one normal draw from ``rng``."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    base = expert.q_match if subtask.topic == expert.specialty else expert.q_off
    if where is Placement.LOCAL:
        base += delta
    noise = rng.normal(0.0, sigma)
    return float(min(max(base + noise, 0.0), MAX_SCORE))


def gating_weights(task: Task, mode: GatingMode | str = GatingMode.UNIFORM) -> np.ndarray:
    mode = GatingMode(mode)
    k = task.k_total
    if mode is GatingMode.UNIFORM:
        return np.full(k, 1.0 / k)
    sizes = np.array([s.output_bits for s in task.subtasks], dtype=float)
    return sizes / sizes.sum()


def aggregate_quality(scores: Sequence[float], weights: Sequence[float], scale: float = 5.0) -> float:
    """``scale`` times the gating-weighted sum of scores.

    Weights are used as given: a dropped subtask (score 0) keeps its weight and
    so lowers the total.
    """
    scores = np.asarray(scores, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if scores.shape != weights.shape or scores.ndim != 1:
        raise ShapeError(f"{scores.shape[0] if scores.ndim else 0} scores vs {weights.size} weights")
    return float(scale * np.dot(weights, scores))
