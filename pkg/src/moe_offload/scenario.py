"""Simulated world: topics, subtasks, expert profiles, edge devices and the user device.

All types are frozen; operations return new values. Randomness comes only from
caller-supplied ``numpy.random.Generator`` instances.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import ScenarioConfig


@dataclass(frozen=True)
class Subtask:
    id: int
    topic: int
    prompt_bits: int
    output_bits: int
    compute_units: float

    def __post_init__(self):
        if self.prompt_bits < 1 or self.output_bits < 1:
            raise ValueError("payload sizes must be at least one bit")
        if not self.compute_units > 0:
            raise ValueError("compute_units must be positive")


@dataclass(frozen=True)
class Task:
    subtasks: tuple[Subtask, ...]
    offload_indices: tuple[int, ...]

    def __post_init__(self):
        k = len(self.subtasks)
        if k < 1:
            raise ValueError("a task needs at least one subtask")
        if not self.offload_indices:
            raise ValueError("a task needs at least one offload subtask")
        if len(set(self.offload_indices)) != len(self.offload_indices):
            raise ValueError("offload indices must be distinct")
        if any(not 0 <= i < k for i in self.offload_indices):
            raise ValueError("offload index out of range")

    @property
    def offload_index(self) -> int:
        return self.offload_indices[0]

    @property
    def k_total(self) -> int:
        return len(self.subtasks)


@dataclass(frozen=True)
class ExpertProfile:
    specialty: int
    q_match: float = 8.0
    q_off: float = 4.0

    def __post_init__(self):
        if not 0 <= self.q_off < self.q_match <= 10:
            raise ValueError("need 0 <= q_off < q_match <= 10")


@dataclass(frozen=True)
class ChannelState:
    snr_linear: float
    bandwidth_hz: float = 1000.0
    tx_power_w: float = 0.1

    def __post_init__(self):
        if self.snr_linear < 0:
            raise ValueError("snr_linear must be nonnegative")
        if not (self.bandwidth_hz > 0 and self.tx_power_w > 0):
            raise ValueError("bandwidth and transmit power must be positive")


@dataclass(frozen=True)
class EdgeDevice:
    id: int
    expert: ExpertProfile
    avail_compute_units: float
    channel: ChannelState


@dataclass(frozen=True)
class UserDevice:
    local_q_bonus: float = 1.0
    local_compute_budget: float = 3.0

    def __post_init__(self):
        if self.local_q_bonus < 0:
            raise ValueError("local_q_bonus must be nonnegative")


@dataclass(frozen=True)
class Scenario:
    user: UserDevice
    devices: tuple[EdgeDevice, ...]
    topics: tuple[str, ...]
    seed: int
    config: ScenarioConfig

    def __post_init__(self):
        if not self.devices:
            raise ValueError("a scenario needs at least one edge device")
        ids = [d.id for d in self.devices]
        if len(set(ids)) != len(ids):
            raise ValueError("device ids must be unique")
        if any(not 0 <= d.expert.specialty < len(self.topics) for d in self.devices):
            raise ValueError("expert specialty outside the topic catalog")

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    @property
    def n_topics(self) -> int:
        return len(self.topics)

    def local_expert(self, topic: int) -> ExpertProfile:
        """The user's jointly-trained expert for ``topic``; always on-specialty."""
        return ExpertProfile(topic, self.config.q_match, self.config.q_off)


def snr_to_linear(snr: np.ndarray | float, in_db: bool) -> np.ndarray | float:
    """Linear ratio from config units (dB when ``in_db``)."""
    return 10.0 ** (np.asarray(snr) / 10.0) if in_db else snr


def linear_to_config_units(snr_linear: float, in_db: bool) -> float:
    """Inverse of ``snr_to_linear``: dB when the config range is in dB."""
    if not in_db:
        return snr_linear
    return float(10.0 * np.log10(snr_linear)) if snr_linear > 0 else float("-inf")


def _draw_channels(config: ScenarioConfig, rng: np.random.Generator, n: int) -> list[ChannelState]:
    draws = snr_to_linear(rng.uniform(config.snr_min, config.snr_max, n), config.snr_in_db)
    return [
        ChannelState(float(s), config.bandwidth_hz, config.tx_power_w) for s in draws
    ]


def build_scenario(config: Optional[ScenarioConfig] = None, seed: int = 0) -> Scenario:
    """Draw a scenario: specialties, channels, then compute availability, in that order."""
    config = config or ScenarioConfig()
    config.validate()  # rejects N=0, T=0 and inverted snr ranges with ConfigError

    rng = np.random.default_rng(seed)
    n = config.n_devices
    specialties = rng.integers(0, config.n_topics, n)
    channels = _draw_channels(config, rng, n)
    avail = rng.uniform(config.avail_compute_min, config.avail_compute_max, n)
    devices = tuple(
        EdgeDevice(
            id=i,
            expert=ExpertProfile(int(specialties[i]), config.q_match, config.q_off),
            avail_compute_units=float(avail[i]),
            channel=channels[i],
        )
        for i in range(n)
    )
    user = UserDevice(config.local_q_bonus, config.local_compute_budget)
    return Scenario(user, devices, config.topic_names, int(seed), config)


def sample_task(scenario: Scenario, rng: np.random.Generator) -> Task:
    config = scenario.config
    k = config.k_total
    topics = rng.integers(0, scenario.n_topics, k)
    prompts = rng.integers(config.prompt_bits_min, config.prompt_bits_max, k, endpoint=True)
    outputs = rng.integers(config.output_bits_min, config.output_bits_max, k, endpoint=True)
    subtasks = tuple(
        Subtask(
            id=i,
            topic=int(topics[i]),
            prompt_bits=int(prompts[i]),
            output_bits=int(outputs[i]),
            compute_units=config.kappa_u * int(outputs[i]),
        )
        for i in range(k)
    )
    if config.k_offload == 1:
        offload = (int(rng.integers(0, k)),)
    else:
        offload = tuple(int(i) for i in rng.choice(k, size=config.k_offload, replace=False))
    return Task(subtasks, offload)


def resample_channels(scenario: Scenario, rng: np.random.Generator) -> Scenario:
    channels = _draw_channels(scenario.config, rng, scenario.n_devices)
    devices = tuple(
        dataclasses.replace(d, channel=c) for d, c in zip(scenario.devices, channels)
    )
    return dataclasses.replace(scenario, devices=devices)
