import numpy as np
import pytest

from moe_offload.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from moe_offload.config import SacConfig
from moe_offload.errors import CheckpointFormatError
from moe_offload.sac import SacAgent


@pytest.fixture
def agent():
    a = SacAgent(13, 4, SacConfig(hidden=(8, 6), tau=0.01), np.random.default_rng(3))
    a.log_alpha[0] = -0.123456789
    a.meta = {"seed": 42, "n_devices": 4}
    return a


def test_round_trip_is_bit_exact(agent, tmp_path):
    path = save_checkpoint(agent, tmp_path / "a.moesac")
    assert path.read_bytes().startswith(MAGIC)
    loaded = load_checkpoint(path)
    assert loaded.config == agent.config
    assert loaded.meta == agent.meta
    assert loaded.log_alpha.tobytes() == agent.log_alpha.tobytes()
    for name, net in agent.networks.items():
        other = loaded.networks[name]
        assert other.layer_sizes == net.layer_sizes
        for a, b in zip(net.params, other.params):
            assert a.tobytes() == b.tobytes()
    again = save_checkpoint(loaded, tmp_path / "b.moesac")
    assert again.read_bytes() == path.read_bytes()


def test_loaded_agent_acts_identically(agent, tmp_path):
    loaded = load_checkpoint(save_checkpoint(agent, tmp_path / "a.moesac"))
    x = np.random.default_rng(0).random((5, 13))
    assert np.array_equal(agent.policy(x), loaded.policy(x))


@pytest.mark.parametrize(
    "mangle",
    [
        lambda b: b"NOTSAC1\n" + b[8:],
        lambda b: b[:-8],
        lambda b: b + b"\x00",
        lambda b: b[:12] + b"X" + b[13:],
    ],
)
def test_corrupt_files_rejected(agent, tmp_path, mangle):
    path = save_checkpoint(agent, tmp_path / "a.moesac")
    path.write_bytes(mangle(path.read_bytes()))
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)
