"""Arm-selection rules.

Scalar functions (``ucb_gain``, ``select_ucb`` ...) operate on a list of
:class:`ArmStatistics` and are the readable reference. :func:`select_batch`
applies the same rules to a stack of independent replications at once and is
what the experiment runner uses; the two paths produce identical choices.

Every selection consumes two policy uniforms ``(u1, u2)``: ``u1`` decides
whether an epsilon-greedy step explores and ``u2`` picks the uniform arm as
``floor(u2 * K)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .core import ArmStatistics, ConfigError, MisuseError, RandomStream
from .spectral import frequency, spectral_flatness

UCB1 = "ucb1"
GENERALIZED_UCB = "generalized_ucb"
EPSILON_GREEDY = "epsilon_greedy"
GREEDY = "greedy"
UNIFORM_RANDOM = "uniform_random"
FD_ADAPTIVE_UCB = "fd_adaptive_ucb"

POLICY_KINDS = (UCB1, GENERALIZED_UCB, EPSILON_GREEDY, GREEDY, UNIFORM_RANDOM, FD_ADAPTIVE_UCB)
UCB_KINDS = (UCB1, GENERALIZED_UCB, FD_ADAPTIVE_UCB)


@dataclass(frozen=True)
class PolicyConfig:
    kind: str = UCB1
    c: float = 1.0
    alpha_exp: float = 0.5
    epsilon: float = 0.1
    c_min: float | None = None
    c_max: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError("kind", f"unknown policy {self.kind!r}; expected one of {POLICY_KINDS}")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ConfigError("c", f"exploration constant must be > 0, got {self.c}")
        if not 0.0 < self.alpha_exp <= 1.0:
            raise ConfigError("alpha_exp", f"must lie in (0, 1], got {self.alpha_exp}")
        if self.kind == UCB1 and self.alpha_exp != 0.5:
            raise ConfigError("alpha_exp", "UCB1 fixes alpha_exp = 0.5; use generalized_ucb")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon", f"must lie in [0, 1], got {self.epsilon}")
        if self.sigma is not None and not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigError("sigma", f"must be > 0, got {self.sigma}")
        if self.kind == FD_ADAPTIVE_UCB:
            if self.c_min is None or self.c_max is None:
                raise ConfigError("c_min", "fd_adaptive_ucb needs both c_min and c_max")
            if self.c_min <= 0:
                raise ConfigError("c_min", f"must be > 0, got {self.c_min}")
            if self.c_min > self.c_max:
                raise ConfigError("c_max", f"c_min={self.c_min} exceeds c_max={self.c_max}")

    def replace(self, **changes) -> "PolicyConfig":
        return PolicyConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)


def ucb_gain(pulls: int, t: int, c: float, alpha_exp: float = 0.5) -> float:
    """Exploration bonus ``c * sqrt(ln t) / pulls**alpha_exp``.

    For ``alpha_exp == 0.5`` this is evaluated as ``c * sqrt(ln t / pulls)``,
    the textbook UCB1 radius, so the two coincide to the last bit.
    """
    if pulls < 1:
        raise MisuseError("gain undefined for an unpulled arm; initialise every arm first")
    if t < 1:
        raise MisuseError(f"time must be >= 1, got {t}")
    if alpha_exp == 0.5:
        return c * math.sqrt(math.log(t) / pulls)
    return c * math.sqrt(math.log(t)) / pulls**alpha_exp


def ucb_score(stats: ArmStatistics, t: int, config: PolicyConfig, c: float | None = None):
    """Return ``(baseband, gain, total)`` for one arm."""
    baseband = stats.mean
    gain = ucb_gain(stats.pulls, t, config.c if c is None else c, config.alpha_exp)
    return baseband, gain, baseband + gain


def _first_unpulled(all_stats: Sequence[ArmStatistics]) -> int | None:
    for i, s in enumerate(all_stats):
        if s.pulls == 0:
            return i
    return None


def _argmax(values: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def _check_nonempty(all_stats):
    if len(all_stats) == 0:
        raise MisuseError("no arms to select from")


def select_ucb(all_stats: Sequence[ArmStatistics], t: int, config: PolicyConfig,
               c: float | None = None) -> int:
    _check_nonempty(all_stats)
    unpulled = _first_unpulled(all_stats)
    if unpulled is not None:
        return unpulled
    return _argmax([ucb_score(s, t, config, c)[2] for s in all_stats])


def effective_c(config: PolicyConfig, flatness: float) -> float:
    """Exploration constant used by the adaptive policy at a given flatness."""
    if config.c_min > config.c_max:
        raise ConfigError("c_max", f"c_min={config.c_min} exceeds c_max={config.c_max}")
    if not 0.0 <= flatness <= 1.0:
        raise MisuseError(f"flatness must lie in [0, 1], got {flatness}")
    return config.c_min + (config.c_max - config.c_min) * flatness


def frequency_flatness(all_stats: Sequence[ArmStatistics]) -> float:
    return spectral_flatness([frequency(s.pulls) for s in all_stats])


def select_fd_adaptive(all_stats: Sequence[ArmStatistics], t: int, config: PolicyConfig,
                       flatness: float) -> int:
    return select_ucb(all_stats, t, config, c=effective_c(config, flatness))


def greedy_arm(all_stats: Sequence[ArmStatistics]) -> int:
    return _argmax([s.mean for s in all_stats])


def select_epsilon_greedy(all_stats: Sequence[ArmStatistics], epsilon: float,
                          stream: RandomStream) -> int:
    _check_nonempty(all_stats)
    u1, u2 = stream.uniform(2)
    unpulled = _first_unpulled(all_stats)
    if unpulled is not None:
        return unpulled
    if u1 < epsilon:
        return _uniform_index(u2, len(all_stats))
    return greedy_arm(all_stats)


def _uniform_index(u, k: int):
    return np.minimum((np.asarray(u) * k).astype(np.int64), k - 1)


def select(config: PolicyConfig, all_stats: Sequence[ArmStatistics], t: int,
           stream: RandomStream) -> int:
    """Single-step dispatch over every policy kind; always consumes two uniforms."""
    _check_nonempty(all_stats)
    if config.kind == EPSILON_GREEDY:
        return int(select_epsilon_greedy(all_stats, config.epsilon, stream))
    if config.kind == GREEDY:
        return int(select_epsilon_greedy(all_stats, 0.0, stream))
    if config.kind == UNIFORM_RANDOM:
        return int(select_epsilon_greedy(all_stats, 1.0, stream))
    stream.uniform(2)
    if config.kind == FD_ADAPTIVE_UCB and _first_unpulled(all_stats) is None:
        return select_fd_adaptive(all_stats, t, config, frequency_flatness(all_stats))
    return select_ucb(all_stats, t, config)


def energy_closed_form(config: PolicyConfig, all_stats: Sequence[ArmStatistics], t: int) -> np.ndarray:
    """Exact selection probabilities of the next step given the current statistics.

    During initialisation (some arm unpulled) every policy is deterministic.
    """
    _check_nonempty(all_stats)
    k = len(all_stats)
    energy = np.zeros(k)
    unpulled = _first_unpulled(all_stats)
    if unpulled is not None:
        energy[unpulled] = 1.0
        return energy
    if config.kind == UNIFORM_RANDOM:
        return np.full(k, 1.0 / k)
    if config.kind == EPSILON_GREEDY:
        energy[:] = config.epsilon / k
        energy[greedy_arm(all_stats)] += 1.0 - config.epsilon
        return energy
    if config.kind == GREEDY:
        energy[greedy_arm(all_stats)] = 1.0
    elif config.kind == FD_ADAPTIVE_UCB:
        energy[select_fd_adaptive(all_stats, t, config, frequency_flatness(all_stats))] = 1.0
    else:
        energy[select_ucb(all_stats, t, config)] = 1.0
    return energy


def gain_denominators(alpha_exp: float, max_pulls: int) -> np.ndarray:
    """``n**alpha_exp`` for ``n = 0..max_pulls`` (entry 0 unused), via Python floats."""
    return np.array([0.0] + [n**alpha_exp for n in range(1, max_pulls + 1)])


def select_batch(config: PolicyConfig, pulls: np.ndarray, sums: np.ndarray, t: int,
                 u: np.ndarray, denominators: np.ndarray | None = None) -> np.ndarray:
    """Vectorised selection for ``B`` replications after initialisation.

    ``pulls`` and ``sums`` have shape ``(B, K)`` with every pull count >= 1;
    ``u`` holds the step's policy uniforms with shape ``(B, 2)``.
    """
    k = pulls.shape[1]
    means = sums / pulls
    kind = config.kind
    if kind in (EPSILON_GREEDY, GREEDY, UNIFORM_RANDOM):
        eps = {EPSILON_GREEDY: config.epsilon, GREEDY: 0.0, UNIFORM_RANDOM: 1.0}[kind]
        explore = u[:, 0] < eps
        return np.where(explore, _uniform_index(u[:, 1], k), np.argmax(means, axis=1))

    log_t = math.log(t)
    if kind == FD_ADAPTIVE_UCB:
        flat = spectral_flatness(1.0 / np.sqrt(pulls))
        c = (config.c_min + (config.c_max - config.c_min) * flat)[:, None]
    else:
        c = config.c
    if config.alpha_exp == 0.5:
        gain = c * np.sqrt(log_t / pulls)
    else:
        if denominators is None:
            denominators = gain_denominators(config.alpha_exp, int(pulls.max()))
        gain = c * math.sqrt(log_t) / denominators[pulls]
    return np.argmax(means + gain, axis=1)
