import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_scenario, make_task
from moe_offload.config import RewardConfig, ScenarioConfig
from moe_offload.env import (
    OffloadEnv,
    RewardBreakdown,
    Transition,
    encode_state,
    episode_reward,
    step_breakdown,
)
from moe_offload.errors import EpisodeOver, InvalidAction
from moe_offload.scenario import build_scenario

NOISELESS = RewardConfig(sigma=0.0)


def test_reset_determinism_and_shape():
    env = OffloadEnv(build_scenario(ScenarioConfig(), 0))
    a = env.reset(np.random.default_rng(5))
    b = env.reset(np.random.default_rng(5))
    assert np.array_equal(a, b)
    assert a.shape == (153,)
    assert a.min() >= 0 and a.max() <= 1
    assert env.step_count == 0


def test_encode_snr_normalisation():
    task = make_task([(0, 4000, 40000)])
    s = make_scenario([(0, 15.0, 1.0), (3, 5.0, 1.0), (0, 20.0, 1.0)])
    v = encode_state(task, s)
    snr_feats = v[3 + 3 :: 5]
    assert snr_feats[0] == pytest.approx(2 / 3, rel=1e-15)
    assert snr_feats[1] == 0.0 and snr_feats[2] == 1.0
    match = v[3 + 2 :: 5]
    assert list(match) == [1.0, 0.0, 1.0]
    specialty = v[3 + 1 :: 5]
    assert list(specialty) == [0.0, 3 / 5, 0.0]


def test_encode_single_topic_index_is_zero():
    task = make_task([(0, 4000, 40000)])
    s = make_scenario([(0, 10.0, 1.0)], n_topics=1)
    v = encode_state(task, s)
    assert v[1] == 0.0 and v[4] == 0.0


def test_case_study_step(case_task, three_devices):
    env = OffloadEnv(three_devices, NOISELESS)
    env.load(case_task)
    bd, _, done = env.step(0, np.random.default_rng(0))
    assert done
    assert bd.quality_total == pytest.approx(43.75, abs=1e-12)
    assert bd.comm_energy_j == pytest.approx(1.1, rel=1e-14)
    assert bd.compute_cost == pytest.approx(2.2, rel=1e-14)
    assert bd.reward == pytest.approx(40.45, abs=1e-12)


def test_infeasible_device(case_task, three_devices):
    bd = step_breakdown(case_task, three_devices, NOISELESS, 0, 2, None)
    assert bd.quality_total == pytest.approx(33.75, abs=1e-12)
    # prompt-only transfer energy, no edge compute
    assert bd.comm_energy_j == pytest.approx(0.0910680994787811991928, rel=1e-13)
    assert bd.compute_cost == pytest.approx(1.2, rel=1e-14)


def test_zero_lambdas_reward_is_quality(case_task, three_devices):
    cfg = RewardConfig(sigma=0.0, lambda_energy=0.0, lambda_compute=0.0)
    for d in range(3):
        bd = step_breakdown(case_task, three_devices, cfg, 0, d, None)
        assert bd.reward == bd.quality_total


def test_step_errors(case_task, three_devices):
    env = OffloadEnv(three_devices, NOISELESS)
    with pytest.raises(EpisodeOver):
        env.step(0, None)
    env.load(case_task)
    with pytest.raises(InvalidAction):
        env.step(3, None)
    with pytest.raises(InvalidAction):
        env.step(-1, None)
    env.step(1, None)
    with pytest.raises(EpisodeOver):
        env.step(0, None)


def test_episode_reward():
    s = np.zeros(3)
    t1 = Transition(s, 0, 1.5, s, False)
    t2 = Transition(s, 0, 2.5, s, True)
    assert episode_reward([t2]) == 2.5
    assert episode_reward([t1, t2]) == 4.0
    with pytest.raises(ValueError):
        episode_reward([])
    with pytest.raises(ValueError):
        episode_reward([t1])


def test_multi_offload_episode_sums_to_full_quality():
    cfg = ScenarioConfig(n_devices=3, k_total=4, k_offload=2)
    s = make_scenario([(0, 15.0, 2.0), (1, 20.0, 2.0), (0, 20.0, 0.5)], config=cfg)
    task = make_task([(0, 4000, 40000), (1, 3000, 16000), (2, 3000, 16000), (3, 3000, 16000)], offload=(0, 1))
    env = OffloadEnv(s, NOISELESS)
    env.load(task)
    b1, _, done1 = env.step(0, None)
    b2, _, done2 = env.step(1, None)
    assert not done1 and done2
    # both offloads matched on the edge (8), two locals at 9
    assert b1.quality_total + b2.quality_total == pytest.approx(5 * (0.5 * 8 + 0.5 * 9), abs=1e-12)


def test_matching_never_worse_than_mismatch():
    # same channel and feasibility, only the specialty differs
    task = make_task([(0, 4000, 40000), (1, 3000, 30000)])
    s = make_scenario([(0, 12.0, 2.0), (4, 12.0, 2.0)])
    a = step_breakdown(task, s, NOISELESS, 0, 0, None)
    b = step_breakdown(task, s, NOISELESS, 0, 1, None)
    assert a.quality_total > b.quality_total
    assert a.reward > b.reward


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 2.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_reward_identity_and_replay(seed, sigma, le, lc):
    cfg = RewardConfig(sigma=sigma, lambda_energy=le, lambda_compute=lc)
    env = OffloadEnv(build_scenario(ScenarioConfig(), seed % 1000), cfg)
    env.reset(np.random.default_rng(seed))
    task, scen = env.task, env.scenario
    action = seed % 30
    bd, _, _ = env.step(action, np.random.default_rng(seed + 1))
    assert bd.reward == bd.quality_total - le * bd.comm_energy_j - lc * bd.compute_cost
    assert np.isfinite(bd.reward)
    env.load(task, scen)
    again, _, _ = env.step(action, np.random.default_rng(seed + 1))
    assert again == bd


def test_state_features_in_unit_interval_over_many_episodes():
    rng = np.random.default_rng(0)
    for cfg in (ScenarioConfig(), ScenarioConfig(snr_in_db=True), ScenarioConfig(n_topics=1, n_devices=4)):
        env = OffloadEnv(build_scenario(cfg, 1))
        for _ in range(10_000 if cfg == ScenarioConfig() else 500):
            v = env.reset(rng)
            assert v.min() >= 0.0 and v.max() <= 1.0
            assert len(v) == 3 + 5 * cfg.n_devices


def test_breakdown_from_terms():
    bd = RewardBreakdown.from_terms(10.0, 1.0, 2.0, RewardConfig(lambda_energy=2.0, lambda_compute=0.5))
    assert bd.reward == 7.0
