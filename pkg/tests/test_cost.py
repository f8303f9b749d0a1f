import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moe_offload.cost import (
    CommCost,
    ShannonCostModel,
    compute_cost,
    round_trip_energy,
    transfer_energy,
    transmission_rate,
)
from moe_offload.errors import InfeasibleChannel
from moe_offload.scenario import ChannelState, Subtask

# 1000 * log2(11) and 0.1 * 8000 / that, evaluated with mpmath at 30 digits
RATE_SNR10 = 3459.43161863729725619936
ENERGY_SNR10_8000 = 0.231251861054310287413


def ch(snr, b=1000.0, p=0.1):
    return ChannelState(snr, b, p)


def test_rate_examples():
    assert transmission_rate(ch(15)) == 4000.0
    assert transmission_rate(ch(0)) == 0.0
    assert transmission_rate(ch(10)) == pytest.approx(RATE_SNR10, rel=1e-14)


def test_transfer_energy_examples():
    c = transfer_energy(ch(15), 8000)
    assert c.duration_s == 2.0
    assert c.energy_j == pytest.approx(0.2, rel=1e-15)
    assert transfer_energy(ch(10), 8000).energy_j == pytest.approx(ENERGY_SNR10_8000, rel=1e-14)


def test_transfer_energy_zero_rate():
    with pytest.raises(InfeasibleChannel):
        transfer_energy(ch(0), 100)


def test_payload_doubling_doubles_energy():
    c = ch(7.3)
    assert transfer_energy(c, 2 * 12345).energy_j == pytest.approx(2 * transfer_energy(c, 12345).energy_j, rel=1e-15)


def test_round_trip_examples():
    assert round_trip_energy(ch(15), Subtask(0, 0, 8000, 8000, 0.2)).energy_j == pytest.approx(0.4, rel=1e-15)
    assert round_trip_energy(ch(15), Subtask(0, 0, 4000, 40000, 1.0)).energy_j == pytest.approx(1.1, rel=1e-15)
    prompt_only = transfer_energy(ch(15), 4000).energy_j
    assert round_trip_energy(ch(15), Subtask(0, 0, 4000, 1, 2.5e-5)).energy_j > prompt_only


def test_compute_cost_examples():
    assert compute_cost(40000, 2.5e-5) == 1.0
    assert compute_cost(1, 1.0) == 1.0
    assert compute_cost(60000, 2.5e-5) == pytest.approx(1.5, rel=1e-15)
    with pytest.raises(ValueError):
        compute_cost(10, 0.0)


def test_comm_cost_addition():
    assert CommCost(1.0, 2.0) + CommCost(0.5, 0.25) == CommCost(1.5, 2.25)


def test_cost_model_delegates():
    m = ShannonCostModel(kappa_c=2.5e-5)
    assert m.rate(ch(15)) == 4000.0
    assert m.compute(40000) == 1.0
    assert m.transfer(ch(15), 8000) == transfer_energy(ch(15), 8000)


snr = st.floats(0.01, 1000.0, allow_nan=False)
bits = st.integers(1, 10**6)


@settings(max_examples=300, deadline=None)
@given(snr, snr, bits, st.floats(1.0, 1e6), st.floats(1e-3, 10.0))
def test_monotone_in_snr(a, b, payload, bw, power):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert transmission_rate(ch(lo, bw, power)) < transmission_rate(ch(hi, bw, power))
    assert transfer_energy(ch(lo, bw, power), payload).energy_j > transfer_energy(ch(hi, bw, power), payload).energy_j


@settings(max_examples=300, deadline=None)
@given(snr, bits, bits)
def test_power_consistency_and_additivity(s, p, o):
    c = ch(s)
    e = transfer_energy(c, p)
    assert e.energy_j / e.duration_s == pytest.approx(c.tx_power_w, rel=1e-12)
    rt = round_trip_energy(c, Subtask(0, 0, p, o, 1.0))
    assert rt.energy_j == transfer_energy(c, p).energy_j + transfer_energy(c, o).energy_j
    assert rt.duration_s == transfer_energy(c, p).duration_s + transfer_energy(c, o).duration_s
