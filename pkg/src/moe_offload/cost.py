"""Communication energy and compute cost of moving and running a subtask."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleChannel
from .scenario import ChannelState, Subtask


@dataclass(frozen=True)
class CommCost:
    energy_j: float
    duration_s: float

    def __add__(self, other: "CommCost") -> "CommCost":
        return CommCost(self.energy_j + other.energy_j, self.duration_s + other.duration_s)


ZERO_COMM = CommCost(0.0, 0.0)


def transmission_rate(channel: ChannelState) -> float:
    """Shannon capacity in bits/s."""
    return channel.bandwidth_hz * math.log2(1.0 + channel.snr_linear)


def transfer_energy(channel: ChannelState, payload_bits: int) -> CommCost:
    rate = transmission_rate(channel)
    if rate <= 0:
        raise InfeasibleChannel(f"zero transmission rate at snr={channel.snr_linear}")
    duration = payload_bits / rate
    return CommCost(channel.tx_power_w * duration, duration)


def round_trip_energy(channel: ChannelState, subtask: Subtask) -> CommCost:
    """Prompt sent to the edge device plus generated output uploaded back, same channel."""
    return transfer_energy(channel, subtask.prompt_bits) + transfer_energy(
        channel, subtask.output_bits
    )


def compute_cost(output_bits: int, kappa_c: float) -> float:
    if not kappa_c > 0:
        raise ValueError("kappa_c must be positive")
    return kappa_c * output_bits


class ShannonCostModel:
    """Default cost model; subclass and override methods to swap rate or cost forms.

    The environment and baselines only talk to a cost model through these four
    methods, so any monotone alternative can be plugged in.
    """

    def __init__(self, kappa_c: float = 2.5e-5):
        self.kappa_c = kappa_c

    def rate(self, channel: ChannelState) -> float:
        return transmission_rate(channel)

    def transfer(self, channel: ChannelState, payload_bits: int) -> CommCost:
        return transfer_energy(channel, payload_bits)

    def round_trip(self, channel: ChannelState, subtask: Subtask) -> CommCost:
        return round_trip_energy(channel, subtask)

    def compute(self, output_bits: int) -> float:
        return compute_cost(output_bits, self.kappa_c)
