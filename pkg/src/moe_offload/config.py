"""Run configuration: dataclasses with documented defaults and a strict TOML loader.

Every key is optional; omitted keys take the defaults below. Unknown keys are
rejected. Layout of a config file::

    seed = 0                 # 64-bit run seed
    out_dir = "runs/default" # output directory for train/eval artefacts

    [scenario]               # world description
    [reward]                 # quality model and reward weights
    [sac]                    # agent hyperparameters
    [train]                  # training length
    [eval]                   # evaluation protocol
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

DEFAULT_TOPICS = (
    "character appearance",
    "landscapes",
    "weather",
    "architecture",
    "cuisine",
    "wildlife",
)


@dataclass(frozen=True)
class ScenarioConfig:
    n_devices: int = 30
    n_topics: int = 6
    snr_min: float = 5.0  # linear ratio, or dB when snr_in_db
    snr_max: float = 20.0
    snr_in_db: bool = False
    bandwidth_hz: float = 1000.0
    tx_power_w: float = 0.1
    q_match: float = 8.0  # expert quality on its specialty, [0, 10]
    q_off: float = 4.0  # expert quality off its specialty
    local_q_bonus: float = 1.0  # quality bonus of the user's jointly-trained experts
    local_compute_budget: float = 3.0  # compute units available on the user device
    avail_compute_min: float = 0.5  # edge device compute availability, compute units
    avail_compute_max: float = 2.0
    k_total: int = 4  # subtasks per task
    k_offload: int = 1  # subtasks offloaded per task (= decisions per episode)
    prompt_bits_min: int = 2000
    prompt_bits_max: int = 8000
    output_bits_min: int = 20000
    output_bits_max: int = 60000
    kappa_u: float = 2.5e-5  # compute units per generated bit

    @property
    def topic_names(self) -> tuple[str, ...]:
        names = list(DEFAULT_TOPICS[: self.n_topics])
        names += [f"topic {i}" for i in range(len(names), self.n_topics)]
        return tuple(names)

    def validate(self) -> None:
        p = "scenario"
        if self.n_devices < 1:
            raise ConfigError(f"{p}.n_devices", f"must be >= 1, got {self.n_devices}")
        if self.n_topics < 1:
            raise ConfigError(f"{p}.n_topics", f"must be >= 1, got {self.n_topics}")
        if self.snr_min > self.snr_max:
            raise ConfigError(
                f"{p}.snr_min/snr_max",
                f"snr_min ({self.snr_min}) exceeds snr_max ({self.snr_max})",
            )
        if not self.snr_in_db and self.snr_min <= 0:
            raise ConfigError(f"{p}.snr_min", "linear snr range must be strictly positive")
        _positive(f"{p}.bandwidth_hz", self.bandwidth_hz)
        _positive(f"{p}.tx_power_w", self.tx_power_w)
        if not 0 <= self.q_off < self.q_match <= 10:
            raise ConfigError(f"{p}.q_match/q_off", "need 0 <= q_off < q_match <= 10")
        _nonneg(f"{p}.local_q_bonus", self.local_q_bonus)
        _nonneg(f"{p}.local_compute_budget", self.local_compute_budget)
        _nonneg(f"{p}.avail_compute_min", self.avail_compute_min)
        if self.avail_compute_min > self.avail_compute_max:
            raise ConfigError(f"{p}.avail_compute_min/avail_compute_max", "inverted range")
        if self.k_total < 1:
            raise ConfigError(f"{p}.k_total", "must be >= 1")
        if not 1 <= self.k_offload <= self.k_total:
            raise ConfigError(f"{p}.k_offload", "must lie in [1, k_total]")
        if not 1 <= self.prompt_bits_min <= self.prompt_bits_max:
            raise ConfigError(f"{p}.prompt_bits_min/prompt_bits_max", "need 1 <= min <= max")
        if not 1 <= self.output_bits_min <= self.output_bits_max:
            raise ConfigError(f"{p}.output_bits_min/output_bits_max", "need 1 <= min <= max")
        _positive(f"{p}.kappa_u", self.kappa_u)


@dataclass(frozen=True)
class RewardConfig:
    kappa_c: float = 2.5e-5  # compute cost per generated bit
    edge_compute_mult: float = 1.0
    local_compute_mult: float = 1.0
    sigma: float = 0.5  # std of quality noise
    scale: float = 5.0  # multiplier applied to the weighted mean quality
    lambda_energy: float = 1.0  # reward weight of communication energy (per J)
    lambda_compute: float = 1.0
    gating: str = "uniform"  # "uniform" or "size_proportional"

    def validate(self) -> None:
        p = "reward"
        _positive(f"{p}.kappa_c", self.kappa_c)
        _nonneg(f"{p}.edge_compute_mult", self.edge_compute_mult)
        _nonneg(f"{p}.local_compute_mult", self.local_compute_mult)
        _nonneg(f"{p}.sigma", self.sigma)
        _positive(f"{p}.scale", self.scale)
        _nonneg(f"{p}.lambda_energy", self.lambda_energy)
        _nonneg(f"{p}.lambda_compute", self.lambda_compute)
        if self.gating not in ("uniform", "size_proportional"):
            raise ConfigError(f"{p}.gating", f"unknown mode {self.gating!r}")


@dataclass(frozen=True)
class SacConfig:
    hidden: tuple[int, ...] = (128, 128)
    gamma: float = 0.99
    tau: float = 0.005
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    alpha_lr: float = 3e-4
    batch_size: int = 128
    buffer_capacity: int = 50000
    target_entropy_ratio: float = 0.6  # target entropy = ratio * ln(n_devices)
    init_log_alpha: float = 0.0
    optimizer: str = "sgd"  # "sgd" or "adam"

    def validate(self) -> None:
        p = "sac"
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise ConfigError(f"{p}.hidden", "need at least one positive layer width")
        if not 0 <= self.gamma <= 1:
            raise ConfigError(f"{p}.gamma", "must lie in [0, 1]")
        if not 0 < self.tau <= 1:
            raise ConfigError(f"{p}.tau", "must lie in (0, 1]")
        for name in ("actor_lr", "critic_lr", "alpha_lr"):
            _positive(f"{p}.{name}", getattr(self, name))
        if self.batch_size < 1:
            raise ConfigError(f"{p}.batch_size", "must be >= 1")
        if self.buffer_capacity < self.batch_size:
            raise ConfigError(f"{p}.buffer_capacity", "must be >= batch_size")
        _nonneg(f"{p}.target_entropy_ratio", self.target_entropy_ratio)
        _finite(f"{p}.init_log_alpha", self.init_log_alpha)
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"{p}.optimizer", f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    episodes_per_epoch: int = 50

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigError("train.epochs", "must be >= 1")
        if self.episodes_per_epoch < 1:
            raise ConfigError("train.episodes_per_epoch", "must be >= 1")


@dataclass(frozen=True)
class EvalConfig:
    episodes: int = 1000
    final_window: float = 0.1  # trailing fraction of episodes/epochs for "final" means
    sigma: Optional[float] = None  # overrides reward.sigma during evaluation

    def validate(self) -> None:
        if self.episodes < 1:
            raise ConfigError("eval.episodes", "must be >= 1")
        if not 0 < self.final_window <= 1:
            raise ConfigError("eval.final_window", "must lie in (0, 1]")
        if self.sigma is not None:
            _nonneg("eval.sigma", self.sigma)


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    sac: SacConfig = field(default_factory=SacConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    seed: int = 0
    out_dir: str = "runs/default"

    def validate(self) -> "RunConfig":
        self.scenario.validate()
        self.reward.validate()
        self.sac.validate()
        self.train.validate()
        self.eval.validate()
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        return self

    def replace(self, **changes: Any) -> "RunConfig":
        """Copy with top-level fields or ``section__key`` fields overridden."""
        top = {}
        sections: dict[str, dict[str, Any]] = {}
        for key, value in changes.items():
            if "__" in key:
                section, sub = key.split("__", 1)
                sections.setdefault(section, {})[sub] = value
            else:
                top[key] = value
        for section, subs in sections.items():
            top[section] = dataclasses.replace(getattr(self, section), **subs)
        return dataclasses.replace(self, **top).validate()

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["sac"]["hidden"] = list(d["sac"]["hidden"])
        if d["eval"]["sigma"] is None:
            del d["eval"]["sigma"]
        return d


_SECTIONS = {
    "scenario": ScenarioConfig,
    "reward": RewardConfig,
    "sac": SacConfig,
    "train": TrainConfig,
    "eval": EvalConfig,
}


def _positive(key, value):
    _finite(key, value)
    if value <= 0:
        raise ConfigError(key, f"must be > 0, got {value}")


def _nonneg(key, value):
    _finite(key, value)
    if value < 0:
        raise ConfigError(key, f"must be >= 0, got {value}")


def _finite(key, value):
    if not math.isfinite(value):
        raise ConfigError(key, f"must be finite, got {value}")


def _coerce(key: str, value: Any, default: Any, annotation: str) -> Any:
    if isinstance(default, bool) or annotation == "bool":
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected a boolean, got {value!r}")
        return value
    if "tuple" in annotation:
        if not isinstance(value, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(key, f"expected a list of integers, got {value!r}")
        return tuple(value)
    if isinstance(default, int) and annotation == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if "float" in annotation:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    return value


def _build_section(name: str, cls: type, raw: Any) -> Any:
    if not isinstance(raw, dict):
        raise ConfigError(name, "expected a table")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigError(name, f"unknown key(s): {', '.join(unknown)}")
    defaults = cls()
    kwargs = {
        k: _coerce(f"{name}.{k}", v, getattr(defaults, k), str(fields[k].type))
        for k, v in raw.items()
    }
    return cls(**kwargs)


def config_from_dict(raw: dict[str, Any]) -> RunConfig:
    """Build and validate a RunConfig from a parsed mapping."""
    allowed = set(_SECTIONS) | {"seed", "out_dir"}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError("<root>", f"unknown key(s): {', '.join(unknown)}")
    kwargs: dict[str, Any] = {
        name: _build_section(name, cls, raw[name])
        for name, cls in _SECTIONS.items()
        if name in raw
    }
    if "seed" in raw:
        seed = raw["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("seed", f"expected an integer, got {seed!r}")
        kwargs["seed"] = seed
    if "out_dir" in raw:
        if not isinstance(raw["out_dir"], str):
            raise ConfigError("out_dir", "expected a string")
        kwargs["out_dir"] = raw["out_dir"]
    return RunConfig(**kwargs).validate()


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(str(path), "config file not found") from None
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config file: {exc}") from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"parse error: {exc}") from exc
    return config_from_dict(raw)


def dump_config(config: RunConfig) -> str:
    """Serialise to TOML text that load_config reads back unchanged."""
    d = config.to_dict()
    lines = [f"seed = {d['seed']}", f"out_dir = {_toml_value(d['out_dir'])}"]
    for section in _SECTIONS:
        lines.append("")
        lines.append(f"[{section}]")
        for k, v in d[section].items():
            lines.append(f"{k} = {_toml_value(v)}")
    return "\n".join(lines) + "\n"


def _toml_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return str(v)
