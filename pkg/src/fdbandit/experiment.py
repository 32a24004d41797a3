"""Seeded single runs, ensembles and exploration-exponent sweeps.

Replication ``r`` draws environment randomness from ``RandomStream(seed, r, "env")``
and policy randomness from ``RandomStream(seed, r, "policy")``. The environment
stream is laid out as a reward table indexed by (pull number, arm), so every
configuration run with the same seed sees the same reward for the n-th pull of
a given arm (common random numbers).

Replications are simulated in vectorised batches. Batching and worker count
never change results: every per-replication quantity is elementwise, and
aggregation runs over the full replication-ordered choice matrix.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .core import (
    ArmDistribution,
    ArmStatistics,
    BanditInstance,
    ConfigError,
    RandomStream,
    gaps,
    stable_hash,
)
from .env import reward_table
from .policy import (
    EPSILON_GREEDY,
    FD_ADAPTIVE_UCB,
    GENERALIZED_UCB,
    GREEDY,
    UCB_KINDS,
    UNIFORM_RANDOM,
    PolicyConfig,
    energy_closed_form,
    gain_denominators,
    select_batch,
)
from .regret import pull_count_bound
from .spectral import (
    SpectralComponent,
    SpectralSnapshot,
    energy_from_choices,
    frequency,
    ideal_spectrum,
)

RANDOMISED_KINDS = (EPSILON_GREEDY, GREEDY, UNIFORM_RANDOM)
DEFAULT_BATCH = 128
_AGG_BLOCK = 256
Z95 = 1.959963984540054


def default_stride(horizon: int) -> int:
    return 1 if horizon <= 10_000 else 10


@dataclass(frozen=True)
class ExperimentConfig:
    instance: BanditInstance
    policy: PolicyConfig
    horizon: int
    replications: int = 1
    master_seed: int = 0
    record_spectral: bool = False
    snapshot_stride: int | None = None

    def __post_init__(self):
        if self.snapshot_stride is None:
            object.__setattr__(self, "snapshot_stride", default_stride(self.horizon))
        if not isinstance(self.horizon, int) or self.horizon < self.instance.n_arms:
            raise ConfigError("horizon", f"must be an integer >= K={self.instance.n_arms}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError("replications", "must be an integer >= 1")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed", "must be a 64-bit unsigned integer")
        if not isinstance(self.snapshot_stride, int) or self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride", "must be an integer >= 1")
        if self.horizon % self.snapshot_stride:
            raise ConfigError("snapshot_stride", f"must divide horizon {self.horizon}")

    @property
    def n_arms(self) -> int:
        return self.instance.n_arms

    @property
    def grid(self) -> np.ndarray:
        """Reporting times ``stride, 2*stride, ..., horizon``."""
        s = self.snapshot_stride
        return np.arange(s, self.horizon + 1, s)

    def replace(self, **changes) -> "ExperimentConfig":
        fields = {f: getattr(self, f) for f in self.__dataclass_fields__}
        return ExperimentConfig(**{**fields, **changes})

    def to_dict(self) -> dict:
        return {
            "instance": self.instance.to_dict(),
            "policy": self.policy.to_dict(),
            "horizon": self.horizon,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "record_spectral": self.record_spectral,
            "snapshot_stride": self.snapshot_stride,
        }

    def digest(self) -> str:
        return stable_hash(self.to_dict())

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        """Build a config from plain data, rejecting unknown or missing keys."""
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "config must be a mapping")
        top = {"instance", "policy", "horizon", "replications", "master_seed",
               "record_spectral", "snapshot_stride"}
        _reject_unknown(raw, top, "")
        for key in ("instance", "policy", "horizon"):
            if key not in raw:
                raise ConfigError(key, "missing required key")
        instance = _instance_from_dict(raw["instance"])
        policy = _policy_from_dict(raw["policy"])
        kwargs = {}
        for key, kind in (("horizon", int), ("replications", int), ("master_seed", int),
                          ("record_spectral", bool), ("snapshot_stride", int)):
            if key in raw and raw[key] is not None:
                value = raw[key]
                if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
                    raise ConfigError(key, f"expected an integer, got {value!r}")
                if kind is bool and not isinstance(value, bool):
                    raise ConfigError(key, f"expected true/false, got {value!r}")
                kwargs[key] = value
        return cls(instance=instance, policy=policy, **kwargs)


def _reject_unknown(raw: dict, allowed: set, prefix: str):
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"{prefix}{key}", "unknown key")


def _number(raw: dict, key: str, prefix: str) -> float:
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{prefix}{key}", f"expected a number, got {value!r}")
    return float(value)


def _instance_from_dict(raw) -> BanditInstance:
    if not isinstance(raw, dict):
        raise ConfigError("instance", "expected a mapping with an 'arms' list")
    _reject_unknown(raw, {"arms"}, "instance.")
    arms_raw = raw.get("arms")
    if not isinstance(arms_raw, list):
        raise ConfigError("instance.arms", "expected a list of arms")
    arms = []
    for i, arm in enumerate(arms_raw):
        prefix = f"instance.arms[{i}]."
        if not isinstance(arm, dict) or "kind" not in arm:
            raise ConfigError(f"instance.arms[{i}]", "each arm needs a 'kind'")
        try:
            if arm["kind"] == "bernoulli":
                _reject_unknown(arm, {"kind", "p"}, prefix)
                if "p" not in arm:
                    raise ConfigError(f"{prefix}p", "missing required key")
                arms.append(ArmDistribution.bernoulli(_number(arm, "p", prefix)))
            elif arm["kind"] == "gaussian":
                _reject_unknown(arm, {"kind", "mean", "stddev"}, prefix)
                for key in ("mean", "stddev"):
                    if key not in arm:
                        raise ConfigError(f"{prefix}{key}", "missing required key")
                arms.append(ArmDistribution.gaussian(_number(arm, "mean", prefix),
                                                     _number(arm, "stddev", prefix)))
            else:
                raise ConfigError(f"{prefix}kind", f"unknown arm kind {arm['kind']!r}")
        except ConfigError as err:
            if err.field.startswith("instance."):
                raise
            raise ConfigError(prefix + err.field, str(err).split(": ", 1)[-1]) from None
    try:
        return BanditInstance(tuple(arms))
    except ConfigError as err:
        raise ConfigError("instance." + err.field, str(err).split(": ", 1)[-1]) from None


def _policy_from_dict(raw) -> PolicyConfig:
    if not isinstance(raw, dict):
        raise ConfigError("policy", "expected a mapping")
    allowed = set(PolicyConfig.__dataclass_fields__)
    _reject_unknown(raw, allowed, "policy.")
    kwargs = {}
    for key, value in raw.items():
        if key == "kind":
            kwargs[key] = value
        elif value is None:
            continue
        else:
            kwargs[key] = _number(raw, key, "policy.")
    try:
        return PolicyConfig(**kwargs)
    except ConfigError as err:
        raise ConfigError("policy." + err.field, str(err).split(": ", 1)[-1]) from None


@dataclass
class RunTrace:
    """Per-step record of one run; row ``t-1`` describes step ``t``.

    ``pulls``, ``sums`` and ``means`` hold every arm's statistics after the
    step's update (``means`` is NaN for arms not yet pulled).
    """

    arms: np.ndarray
    rewards: np.ndarray
    pulls: np.ndarray
    sums: np.ndarray
    snapshots: list[SpectralSnapshot] | None = None

    @property
    def means(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.pulls > 0, self.sums / np.maximum(self.pulls, 1), np.nan)

    @property
    def horizon(self) -> int:
        return len(self.arms)

    @property
    def n_arms(self) -> int:
        return self.pulls.shape[1]

    def stats_at(self, t: int) -> list[ArmStatistics]:
        """Arm statistics after step ``t`` (``t = 0`` gives the empty start state)."""
        if t == 0:
            return [ArmStatistics() for _ in range(self.n_arms)]
        return [ArmStatistics(int(n), float(s)) for n, s in zip(self.pulls[t - 1], self.sums[t - 1])]


def _simulate_batch(config: ExperimentConfig, replications: Sequence[int],
                    keep_rewards: bool = False):
    """Run the interaction loop for a batch; returns chosen arms and rewards ``(B, T)``."""
    T, K = config.horizon, config.n_arms
    B = len(replications)
    table = np.stack([
        reward_table(config.instance, RandomStream(config.master_seed, r, "env"), T)
        for r in replications
    ])
    policy = config.policy
    u_policy = None
    if policy.kind in RANDOMISED_KINDS:
        u_policy = np.stack([
            RandomStream(config.master_seed, r, "policy").uniform((T, 2)) for r in replications
        ])
    denominators = None
    if policy.kind in UCB_KINDS and policy.alpha_exp != 0.5:
        denominators = gain_denominators(policy.alpha_exp, T)

    pulls = np.zeros((B, K), dtype=np.int64)
    sums = np.zeros((B, K))
    choices = np.empty((B, T), dtype=np.int16)
    rewards = np.empty((B, T)) if keep_rewards else None
    rows = np.arange(B)
    for t in range(1, T + 1):
        if t <= K:
            arm = np.full(B, t - 1, dtype=np.int64)
        else:
            u = u_policy[:, t - 1] if u_policy is not None else None
            arm = select_batch(policy, pulls, sums, t, u, denominators)
        reward = table[rows, pulls[rows, arm], arm]
        pulls[rows, arm] += 1
        sums[rows, arm] += reward
        choices[:, t - 1] = arm
        if keep_rewards:
            rewards[:, t - 1] = reward
    return choices, rewards


def run_single(config: ExperimentConfig, replication: int = 0) -> RunTrace:
    choices, rewards = _simulate_batch(config, [replication], keep_rewards=True)
    arms = choices[0].astype(np.int64)
    rewards = rewards[0]
    K = config.n_arms
    onehot = arms[:, None] == np.arange(K)[None, :]
    pulls = np.cumsum(onehot, axis=0)
    sums = np.cumsum(np.where(onehot, rewards[:, None], 0.0), axis=0)
    trace = RunTrace(arms, rewards, pulls, sums)
    if config.record_spectral:
        trace.snapshots = [trace_snapshot(trace, config.policy, int(t)) for t in config.grid]
    return trace


def stats_snapshot(stats: Sequence[ArmStatistics], t: int, energy) -> SpectralSnapshot:
    """Like :func:`spectral.snapshot` but tolerates unpulled arms (NaN amplitude, inf frequency)."""
    comps = []
    for s, e in zip(stats, energy):
        if s.pulls:
            comps.append(SpectralComponent(s.mean, frequency(s.pulls), float(e)))
        else:
            comps.append(SpectralComponent(math.nan, math.inf, float(e)))
    return SpectralSnapshot(t, tuple(comps))


def trace_snapshot(trace: RunTrace, policy: PolicyConfig, t: int, energy=None) -> SpectralSnapshot:
    """Snapshot at step ``t``: statistics after the step, energy of the step's choice.

    Without an explicit ``energy`` the policy's exact selection distribution
    given the history before step ``t`` is used.
    """
    if energy is None:
        energy = energy_closed_form(policy, trace.stats_at(t - 1), t)
    return stats_snapshot(trace.stats_at(t), t, energy)


@dataclass
class EnsembleResult:
    config: ExperimentConfig
    choices: np.ndarray = field(repr=False)
    regret_mean: np.ndarray = field(repr=False)
    regret_std: np.ndarray = field(repr=False)
    final_pulls: np.ndarray = field(repr=False)
    energies: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)
    v_onehot: np.ndarray = field(repr=False)
    v_ensemble: np.ndarray = field(repr=False)

    @property
    def replications(self) -> int:
        return self.choices.shape[0]

    @property
    def mean_pulls(self) -> np.ndarray:
        return self.final_pulls.mean(axis=0)

    def pulls_at(self, t: int) -> np.ndarray:
        """Per-replication pull counts after step ``t``, shape ``(R, K)``."""
        head = self.choices[:, :t]
        return np.stack([(head == i).sum(axis=1) for i in range(self.config.n_arms)], axis=1)

    def mean_pulls_at(self, t: int) -> np.ndarray:
        return self.pulls_at(t).mean(axis=0)

    def final_regret(self) -> np.ndarray:
        """Per-replication pseudo-regret at the horizon."""
        return _regret_block(self.choices, self.config.instance)[:, -1]

    def final_regret_ci(self) -> tuple[float, float]:
        """Mean final regret and its normal-approximation 95% half-width."""
        return float(self.regret_mean[-1]), Z95 * float(self.regret_std[-1]) / math.sqrt(self.replications)

    def v_at(self, t: int, mode: str = "ensemble") -> float:
        series = self.v_ensemble if mode == "ensemble" else self.v_onehot
        idx = int(np.searchsorted(self.grid, t))
        if idx >= len(self.grid) or self.grid[idx] != t:
            raise ValueError(f"t={t} is not on the reporting grid")
        return float(series[idx])

    def metadata(self) -> dict:
        return {
            "tool_version": __version__,
            "config_hash": self.config.digest(),
            "instance_hash": self.config.instance.digest(),
            "master_seed": self.config.master_seed,
            "replications": self.replications,
            "v_modes": {
                "onehot": "mean over runs of sum_t |onehot(I_t) - ideal|^2",
                "ensemble": "sum over reporting grid of stride * |E_hat(t) - ideal|^2",
            },
        }

    def to_json_dict(self) -> dict:
        mean, half = self.final_regret_ci()
        sigma = self.config.policy.sigma or self.config.instance.sigma
        bound = None
        if self.config.horizon >= 2 and sigma > 0:
            bound = [None if math.isinf(b) else b
                     for b in pull_count_bound(self.config.instance, sigma, self.config.horizon)]
        return {
            "metadata": self.metadata(),
            "config": self.config.to_dict(),
            "final_regret": {"mean": mean, "ci_half_width": half,
                             "std": float(self.regret_std[-1])},
            "mean_pulls": self.mean_pulls.tolist(),
            "pull_count_bound": bound,
            "grid": self.grid.tolist(),
            "v_onehot": self.v_onehot.tolist(),
            "v_ensemble": self.v_ensemble.tolist(),
        }


def _regret_block(choices: np.ndarray, instance: BanditInstance) -> np.ndarray:
    return np.cumsum(np.asarray(gaps(instance))[choices], axis=1)


def _batches(n: int, size: int) -> list[list[int]]:
    return [list(range(s, min(s + size, n))) for s in range(0, n, size)]


def simulate_choices(config: ExperimentConfig, workers: int = 1,
                     batch_size: int = DEFAULT_BATCH) -> np.ndarray:
    """Chosen arms of replications ``0..R-1`` as an ``(R, T)`` array."""
    batches = _batches(config.replications, batch_size)
    if workers > 1 and len(batches) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_choices_only, [config] * len(batches), batches))
    else:
        parts = [_choices_only(config, b) for b in batches]
    return np.concatenate(parts, axis=0)


def _choices_only(config, batch):
    return _simulate_batch(config, batch)[0]


def run_ensemble(config: ExperimentConfig, workers: int = 1,
                 batch_size: int = DEFAULT_BATCH) -> EnsembleResult:
    return aggregate(config, simulate_choices(config, workers, batch_size))


def aggregate(config: ExperimentConfig, choices: np.ndarray) -> EnsembleResult:
    """Reduce a replication-ordered choice matrix to ensemble statistics."""
    R, T = choices.shape
    K = config.n_arms
    instance = config.instance

    # two-pass mean/std over fixed replication blocks
    total = np.zeros(T)
    for start in range(0, R, _AGG_BLOCK):
        total += _regret_block(choices[start:start + _AGG_BLOCK], instance).sum(axis=0)
    regret_mean = total / R
    sq = np.zeros(T)
    for start in range(0, R, _AGG_BLOCK):
        dev = _regret_block(choices[start:start + _AGG_BLOCK], instance) - regret_mean
        sq += (dev * dev).sum(axis=0)
    regret_std = np.sqrt(sq / (R - 1)) if R > 1 else np.zeros(T)

    final_pulls = np.stack([(choices == i).sum(axis=1) for i in range(K)], axis=1)
    energies_all = energy_from_choices(choices, K)
    ideal = ideal_spectrum(instance)
    grid = config.grid
    stride = config.snapshot_stride

    opt = instance.optimal_arm
    subopt_counts = np.cumsum((choices != opt).sum(axis=0))  # summed over replications
    v_onehot = 2.0 * subopt_counts[grid - 1] / R

    dev = energies_all[grid - 1] - ideal
    per_point = dev[:, 0] * dev[:, 0]
    for i in range(1, K):
        per_point = per_point + dev[:, i] * dev[:, i]
    v_ensemble = stride * np.cumsum(per_point)

    return EnsembleResult(config, choices, regret_mean, regret_std, final_pulls,
                          energies_all[grid - 1], grid, v_onehot, v_ensemble)


def ensemble_energy_at(result: EnsembleResult, t: int) -> np.ndarray:
    K = result.config.n_arms
    return np.bincount(result.choices[:, t - 1].astype(np.int64), minlength=K) / result.replications


def ensemble_variation(choices: np.ndarray, instance: BanditInstance, t: int,
                       weights: np.ndarray | None = None) -> np.ndarray:
    """Ensemble-mode V(t) over every step ``1..t``, optionally for many resampling weightings.

    ``weights`` has shape ``(n, R)`` (replication multiplicities of each
    bootstrap resample); the return value then has shape ``(n,)``.
    """
    R = choices.shape[0]
    if weights is None:
        weights = np.ones((1, R))
    weights = np.asarray(weights, dtype=float)
    ideal = ideal_spectrum(instance)
    head = choices[:, :t]
    out = np.zeros(weights.shape[0])
    for i in range(instance.n_arms):
        energy = weights @ (head == i).astype(float) / weights.sum(axis=1, keepdims=True)
        out += ((energy - ideal[i]) ** 2).sum(axis=1)
    return out


def bootstrap_variation_ratio(choices: np.ndarray, instance: BanditInstance,
                              t_small: int, t_large: int, n_boot: int = 1000,
                              seed: int = 0, level: float = 0.95, chunk: int = 100):
    """Ratio ``[V(t_large)/ln t_large] / [V(t_small)/ln t_small]`` with a percentile bootstrap CI.

    Resamples replications with replacement. Returns ``(point, lo, hi)``.
    """
    R = choices.shape[0]

    def ratio(v_small, v_large):
        return (v_large / math.log(t_large)) / (v_small / math.log(t_small))

    point = ratio(ensemble_variation(choices, instance, t_small)[0],
                  ensemble_variation(choices, instance, t_large)[0])
    stream = RandomStream(seed, 0, "bootstrap")
    ratios = []
    for start in range(0, n_boot, chunk):
        n = min(chunk, n_boot - start)
        idx = np.minimum((stream.uniform((n, R)) * R).astype(np.int64), R - 1)
        w = np.stack([np.bincount(row, minlength=R) for row in idx])
        ratios.append(ratio(ensemble_variation(choices, instance, t_small, w),
                            ensemble_variation(choices, instance, t_large, w)))
    ratios = np.concatenate(ratios)
    tail = (1.0 - level) / 2
    lo, hi = np.quantile(ratios, [tail, 1.0 - tail])
    return float(point), float(lo), float(hi)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    mean_regret: float
    ci_half_width: float
    v_of_T: float
    mean_pulls: tuple[float, ...]


def sweep_policy(config: ExperimentConfig, alpha: float) -> PolicyConfig:
    policy = config.policy
    if policy.kind not in UCB_KINDS:
        raise ConfigError("policy.kind", "an alpha sweep needs a UCB-family policy")
    kind = FD_ADAPTIVE_UCB if policy.kind == FD_ADAPTIVE_UCB else GENERALIZED_UCB
    return policy.replace(kind=kind, alpha_exp=float(alpha))


def sweep_alpha(config: ExperimentConfig, alphas: Sequence[float], workers: int = 1,
                batch_size: int = DEFAULT_BATCH) -> list[SweepRow]:
    """One ensemble per decay exponent, all sharing the configured seed."""
    if len(alphas) == 0:
        raise ConfigError("alphas", "need at least one alpha")
    rows = []
    for alpha in alphas:
        if not 0.0 < alpha <= 1.0:
            raise ConfigError("alphas", f"alpha must lie in (0, 1], got {alpha}")
        cfg = config.replace(policy=sweep_policy(config, alpha))
        result = run_ensemble(cfg, workers, batch_size)
        mean, half = result.final_regret_ci()
        rows.append(SweepRow(float(alpha), mean, half, float(result.v_ensemble[-1]),
                             tuple(result.mean_pulls.tolist())))
    return rows
