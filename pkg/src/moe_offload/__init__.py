"""Edge offloading of mixture-of-experts content generation, with a discrete SAC selector."""

from .config import RunConfig, load_config
from .scenario import build_scenario, resample_channels, sample_task
from .env import OffloadEnv, encode_state, episode_reward
from .sac import SacAgent, ReplayBuffer
from .harness import emit_plot_data, evaluate, sweep, train

__version__ = "0.1.0"
