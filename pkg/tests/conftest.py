import numpy as np
import pytest

from moe_offload.config import ScenarioConfig
from moe_offload.scenario import (
    ChannelState,
    EdgeDevice,
    ExpertProfile,
    Scenario,
    Subtask,
    Task,
    UserDevice,
)


def make_scenario(devices, n_topics=6, config=None):
    """Hand-built scenario; ``devices`` is a list of (specialty, snr_linear, avail_compute)."""
    config = config or ScenarioConfig(n_devices=len(devices), n_topics=n_topics)
    edge = tuple(
        EdgeDevice(
            i,
            ExpertProfile(spec, config.q_match, config.q_off),
            avail,
            ChannelState(snr, config.bandwidth_hz, config.tx_power_w),
        )
        for i, (spec, snr, avail) in enumerate(devices)
    )
    user = UserDevice(config.local_q_bonus, config.local_compute_budget)
    return Scenario(user, edge, config.topic_names, 0, config)


def make_task(specs, offload=(0,), kappa_u=2.5e-5):
    """``specs`` is a list of (topic, prompt_bits, output_bits)."""
    subtasks = tuple(
        Subtask(i, topic, prompt, out, kappa_u * out) for i, (topic, prompt, out) in enumerate(specs)
    )
    return Task(subtasks, tuple(offload))


@pytest.fixture
def case_task():
    # offloaded subtask: topic 0, 4000-bit prompt, 40000-bit output (1.0 compute units);
    # three local subtasks of 16000 output bits (0.4 compute units each)
    return make_task([(0, 4000, 40000), (1, 3000, 16000), (2, 3000, 16000), (3, 3000, 16000)])


@pytest.fixture
def three_devices():
    # matching at snr 15, non-matching at snr 20, matching but without enough compute
    return make_scenario([(0, 15.0, 2.0), (1, 20.0, 2.0), (0, 20.0, 0.5)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
