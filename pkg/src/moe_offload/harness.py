"""Seeded training and evaluation loops, metrics persistence and plot-data emission."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .baselines import PolicyKind, benchmark_reward, oracle_select, random_policy, upper_bound_reward
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, dump_config
from .env import OffloadEnv, Transition, state_dim
from .errors import CheckpointMismatch, NumericalFailure, PlotDataError
from .sac import ActionMode, ReplayBuffer, SacAgent, select_from_probs, softmax
from .scenario import build_scenario

log = logging.getLogger(__name__)

METRICS_HEADER = (
    "epoch,mean_reward,mean_quality,mean_comm_energy_j,mean_compute_cost,"
    "critic1_loss,critic2_loss,actor_loss,alpha_loss,alpha,"
    "ref_upper,ref_benchmark,ref_random"
).split(",")

# SeedSequence children of the run seed, one per independent random stream
_ENV, _INIT, _AGENT, _REFS, _EVAL = range(5)


def _streams(seed: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(5)]


def _episode_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63))


@dataclass
class MetricsRecord:
    epoch: int
    mean_reward: float
    mean_quality: float
    mean_comm_energy_j: float
    mean_compute_cost: float
    critic1_loss: float
    critic2_loss: float
    actor_loss: float
    alpha_loss: float
    alpha: float
    ref_upper: float
    ref_benchmark: float
    ref_random: float

    def values(self) -> list:
        return [getattr(self, name) for name in METRICS_HEADER]


@dataclass
class TrainResult:
    checkpoint_path: Path
    metrics_path: Path
    records: list[MetricsRecord]
    seconds: float


def _run_episode(env: OffloadEnv, choose: Callable[[np.ndarray, int], int], noise_seed: int):
    """Play the loaded episode; returns the list of (state, action, breakdown, next_state, done)."""
    noise = np.random.default_rng(noise_seed)
    state = env.observe()
    steps = []
    done = False
    while not done:
        action = choose(state, env.step_count)
        breakdown, next_state, done = env.step(action, noise)
        steps.append((state, action, breakdown, next_state, done))
        state = next_state
    return steps


def _sum_terms(steps):
    return (
        sum(s[2].reward for s in steps),
        sum(s[2].quality_total for s in steps),
        sum(s[2].comm_energy_j for s in steps),
        sum(s[2].compute_cost for s in steps),
    )


def train(
    config: RunConfig,
    seed: Optional[int] = None,
    out_dir: Optional[str | Path] = None,
) -> TrainResult:
    """Train one agent; writes ``metrics.csv``, ``checkpoint.moesac`` and ``config.toml``."""
    if seed is not None:
        config = config.replace(seed=seed)
    seed = config.seed
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    rng = _streams(seed)
    scenario = build_scenario(config.scenario, seed)
    env = OffloadEnv(scenario, config.reward)
    ref_env = OffloadEnv(scenario, config.reward)
    n = scenario.n_devices
    agent = SacAgent(env.state_dim, n, config.sac, rng[_INIT])
    agent.meta = {"seed": seed, "n_devices": n, "n_topics": scenario.n_topics}
    buffer = ReplayBuffer(config.sac.buffer_capacity, env.state_dim)

    records = []
    for epoch in range(config.train.epochs):
        ep_terms, refs, losses = [], [], []
        for _ in range(config.train.episodes_per_epoch):
            noise_seed = _episode_seed(rng[_ENV])
            env.reset(rng[_ENV])
            steps = _run_episode(
                env, lambda s, _: agent.select_action(s, ActionMode.SAMPLE, rng[_AGENT]), noise_seed
            )
            for state, action, bd, next_state, done in steps:
                buffer.push(Transition(state, action, bd.reward, next_state, done))
                if len(buffer) >= config.sac.batch_size:
                    losses.append(agent.update(buffer, rng[_AGENT]))
            ep_terms.append(_sum_terms(steps))

            task, scen = env.task, env.scenario
            ub = upper_bound_reward(task, scen, config.reward, np.random.default_rng(noise_seed))
            bm = benchmark_reward(task, scen, config.reward, np.random.default_rng(noise_seed))
            ref_env.load(task, scen)
            rnd = _run_episode(ref_env, lambda s, _: random_policy(n, rng[_REFS]), noise_seed)
            refs.append((ub.reward, bm.reward, _sum_terms(rnd)[0]))

        terms = np.mean(ep_terms, axis=0)
        ref_means = np.mean(refs, axis=0)
        if losses:
            loss_means = [float(np.mean([getattr(l, f) for l in losses])) for f in
                          ("critic1_loss", "critic2_loss", "actor_loss", "alpha_loss")]
        else:
            loss_means = [0.0, 0.0, 0.0, 0.0]  # no update yet: buffer below batch size
        record = MetricsRecord(
            epoch, *map(float, terms), *loss_means, agent.alpha, *map(float, ref_means)
        )
        _check_finite(record.values(), f"epoch {epoch}")
        records.append(record)
        log.info("epoch %d reward %.3f alpha %.4f", epoch, record.mean_reward, record.alpha)

    metrics_path = out / "metrics.csv"
    write_metrics(records, metrics_path)
    for name, net in agent.networks.items():
        _check_finite([float(np.sum(p)) for p in net.params], f"{name} parameters")
    ckpt = save_checkpoint(agent, out / "checkpoint.moesac")
    (out / "config.toml").write_text(dump_config(config), encoding="utf-8")
    return TrainResult(ckpt, metrics_path, records, time.perf_counter() - started)


def _check_finite(values, where):
    if not all(math.isfinite(v) for v in values if not isinstance(v, int)):
        raise NumericalFailure(f"non-finite value at {where}")


def _fmt(v) -> str:
    return str(v) if isinstance(v, int) else repr(float(v))


def write_metrics(records: list[MetricsRecord], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for r in records:
            w.writerow([_fmt(v) for v in r.values()])


def read_metrics(path: str | Path) -> list[MetricsRecord]:
    """Parse a metrics CSV; raises PlotDataError naming the offending row."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise PlotDataError(f"{path}: {exc}") from exc
    records = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != METRICS_HEADER:
            raise PlotDataError(f"{path}: row 1: unexpected header {header}")
        for rowno, row in enumerate(reader, start=2):
            if len(row) != len(METRICS_HEADER):
                raise PlotDataError(f"{path}: row {rowno}: expected {len(METRICS_HEADER)} fields, got {len(row)}")
            try:
                values = [int(row[0])] + [float(x) for x in row[1:]]
            except ValueError as exc:
                raise PlotDataError(f"{path}: row {rowno}: {exc}") from exc
            records.append(MetricsRecord(*values))
    return records


@dataclass
class PolicyStats:
    mean: float
    final: float


@dataclass
class EvalReport:
    seed: int
    episodes: int
    sigma: float
    policies: dict[str, PolicyStats]
    oracle_agreement: float  # fraction of decisions where Sac picked the oracle's device
    rewards: dict[str, list[float]] = field(default_factory=dict, repr=False)

    def mean(self, kind: PolicyKind) -> float:
        return self.policies[kind.value].mean

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        del d["rewards"]
        return d


def _final_mean(values, window: float) -> float:
    k = max(1, math.ceil(window * len(values)))
    return float(np.mean(values[-k:]))


def evaluate(
    checkpoint: str | Path | SacAgent,
    config: RunConfig,
    out_dir: Optional[str | Path] = None,
) -> EvalReport:
    """Greedy evaluation of the agent against every reference policy on shared draws.

    The scenario is rebuilt from the seed recorded in the checkpoint. Each
    episode's task and channels are shared by all five policies, and each
    policy's quality noise comes from a generator seeded identically.
    """
    agent = checkpoint if isinstance(checkpoint, SacAgent) else load_checkpoint(checkpoint)
    n = config.scenario.n_devices
    if agent.n_actions != n or agent.state_dim != state_dim(n):
        raise CheckpointMismatch(
            f"checkpoint is for {agent.n_actions} devices / state width {agent.state_dim}; "
            f"config has {n} devices / state width {state_dim(n)}"
        )
    seed = int(agent.meta.get("seed", config.seed))
    reward_cfg = config.reward
    if config.eval.sigma is not None:
        reward_cfg = dataclasses.replace(reward_cfg, sigma=config.eval.sigma)

    rng = _streams(seed)
    eval_rng = rng[_EVAL]
    rand_rng = np.random.default_rng(eval_rng.integers(0, 2**63))
    scenario = build_scenario(config.scenario, seed)
    env = OffloadEnv(scenario, reward_cfg)
    actor = agent.frozen_actor()

    def sac_choice(state, _step):
        return select_from_probs(softmax(actor.forward(state)), ActionMode.GREEDY, None)

    rewards = {k.value: [] for k in PolicyKind}
    agree = decisions = 0
    for _ in range(config.eval.episodes):
        noise_seed = _episode_seed(eval_rng)
        env.reset(eval_rng)
        task, scen = env.task, env.scenario
        oracle_actions = [
            oracle_select(task, scen, reward_cfg, j, env.cost_model)[0]
            for j in range(len(task.offload_indices))
        ]
        sac_steps = _run_episode(env, sac_choice, noise_seed)
        agree += sum(s[1] == a for s, a in zip(sac_steps, oracle_actions))
        decisions += len(sac_steps)
        rewards["Sac"].append(_sum_terms(sac_steps)[0])
        env.load(task, scen)
        rewards["Oracle"].append(_sum_terms(_run_episode(env, lambda s, j: oracle_actions[j], noise_seed))[0])
        env.load(task, scen)
        rewards["Random"].append(
            _sum_terms(_run_episode(env, lambda s, j: random_policy(n, rand_rng), noise_seed))[0]
        )
        rewards["Benchmark"].append(
            benchmark_reward(task, scen, reward_cfg, np.random.default_rng(noise_seed)).reward
        )
        rewards["UpperBound"].append(
            upper_bound_reward(task, scen, reward_cfg, np.random.default_rng(noise_seed)).reward
        )

    policies = {
        name: PolicyStats(float(np.mean(v)), _final_mean(v, config.eval.final_window))
        for name, v in rewards.items()
    }
    report = EvalReport(seed, config.eval.episodes, reward_cfg.sigma, policies, agree / decisions, rewards)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval_report.json").write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
        with open(out / "eval_episodes.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            names = list(rewards)
            w.writerow(["episode", *names])
            for i in range(config.eval.episodes):
                w.writerow([i, *(_fmt(rewards[k][i]) for k in names)])
    return report


def load_eval_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


@dataclass
class SeedOutcome:
    seed: int
    train_seconds: float
    report: EvalReport
    records: list[MetricsRecord]


def run_seed(config: RunConfig, seed: int, out_dir: str | Path) -> SeedOutcome:
    out = Path(out_dir)
    result = train(config, seed=seed, out_dir=out)
    report = evaluate(result.checkpoint_path, config, out)
    return SeedOutcome(seed, result.seconds, report, result.records)


def sweep(
    config: RunConfig,
    n_seeds: int,
    out_dir: Optional[str | Path] = None,
    workers: int = 1,
) -> list[SeedOutcome]:
    """Train and evaluate seeds ``config.seed .. config.seed + n_seeds - 1``, one directory each."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    seeds = [config.seed + i for i in range(n_seeds)]
    dirs = [out / f"seed_{s}" for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_seed, [config] * n_seeds, seeds, dirs))
    else:
        outcomes = [run_seed(config, s, d) for s, d in zip(seeds, dirs)]

    out.mkdir(parents=True, exist_ok=True)
    names = [k.value for k in PolicyKind]
    with open(out / "sweep_summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "train_seconds", *(f"{k}_mean" for k in names), "oracle_agreement"])
        for o in outcomes:
            w.writerow([
                o.seed, f"{o.train_seconds:.2f}",
                *(_fmt(o.report.policies[k].mean) for k in names),
                _fmt(o.report.oracle_agreement),
            ])
    return outcomes


def emit_plot_data(
    metrics_path: str | Path,
    out_dir: str | Path,
    eval_report: Optional[str | Path | EvalReport] = None,
    final_window: float = 0.1,
) -> tuple[Path, Path]:
    """Write ``reward_curve.csv`` (reward vs epoch with reference lines) and ``bar_table.csv``.

    Bar-table averages and finals come from the training metrics; the Oracle
    row needs an evaluation report and is left blank without one.
    """
    records = read_metrics(metrics_path)
    if not records:
        raise PlotDataError(f"{metrics_path}: no data rows")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    curve = out / "reward_curve.csv"
    with open(curve, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "sac", "upper_bound", "benchmark", "random"])
        for r in records:
            w.writerow([r.epoch, *(_fmt(v) for v in (r.mean_reward, r.ref_upper, r.ref_benchmark, r.ref_random))])

    columns = {
        "Sac": [r.mean_reward for r in records],
        "Random": [r.ref_random for r in records],
        "Benchmark": [r.ref_benchmark for r in records],
        "UpperBound": [r.ref_upper for r in records],
    }
    oracle = None
    if isinstance(eval_report, EvalReport):
        oracle = eval_report.policies["Oracle"]
    elif eval_report is not None:
        stats = load_eval_report(eval_report)["policies"]["Oracle"]
        oracle = PolicyStats(stats["mean"], stats["final"])

    bars = out / "bar_table.csv"
    with open(bars, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["policy", "average", "final"])
        for kind in PolicyKind:
            if kind is PolicyKind.ORACLE:
                w.writerow([kind.value, *(("", "") if oracle is None else (_fmt(oracle.mean), _fmt(oracle.final)))])
            else:
                v = columns[kind.value]
                w.writerow([kind.value, _fmt(np.mean(v)), _fmt(_final_mean(v, final_window))])
    return curve, bars
