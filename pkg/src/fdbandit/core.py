"""Problem instances, per-arm statistics and the seeded random-stream contract."""

from __future__ import annotations

import hashlib
import json
import math
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

BERNOULLI = "bernoulli"
GAUSSIAN = "gaussian"

_SEED_LIMIT = 2**64


class MisuseError(ValueError):
    """An operation was called with arguments outside its contract."""


class ConfigError(ValueError):
    """A configuration value is invalid. ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ArmDistribution:
    kind: str
    mean: float
    stddev: float = 0.0

    def __post_init__(self):
        if self.kind == BERNOULLI:
            if not 0.0 <= self.mean <= 1.0:
                raise ConfigError("p", f"Bernoulli probability must lie in [0, 1], got {self.mean}")
        elif self.kind == GAUSSIAN:
            if not math.isfinite(self.mean):
                raise ConfigError("mean", "Gaussian mean must be finite")
            if not (self.stddev >= 0.0 and math.isfinite(self.stddev)):
                raise ConfigError("stddev", f"must be finite and >= 0, got {self.stddev}")
        else:
            raise ConfigError("kind", f"unknown arm kind {self.kind!r}")

    @classmethod
    def bernoulli(cls, p: float) -> "ArmDistribution":
        return cls(BERNOULLI, float(p))

    @classmethod
    def gaussian(cls, mean: float, stddev: float) -> "ArmDistribution":
        return cls(GAUSSIAN, float(mean), float(stddev))

    @property
    def sigma(self) -> float:
        """Sub-Gaussian scale: 1/2 for Bernoulli (Hoeffding), the stddev for Gaussian."""
        return 0.5 if self.kind == BERNOULLI else self.stddev

    def to_dict(self) -> dict:
        if self.kind == BERNOULLI:
            return {"kind": BERNOULLI, "p": self.mean}
        return {"kind": GAUSSIAN, "mean": self.mean, "stddev": self.stddev}


@dataclass(frozen=True)
class BanditInstance:
    arms: tuple[ArmDistribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) < 2:
            raise ConfigError("arms", "a bandit instance needs at least 2 arms")

    @classmethod
    def gaussian(cls, means: Sequence[float], stddev: float) -> "BanditInstance":
        return cls(tuple(ArmDistribution.gaussian(m, stddev) for m in means))

    @classmethod
    def bernoulli(cls, ps: Sequence[float]) -> "BanditInstance":
        return cls(tuple(ArmDistribution.bernoulli(p) for p in ps))

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> np.ndarray:
        return np.array([a.mean for a in self.arms], dtype=float)

    @property
    def optimal_arm(self) -> int:
        # np.argmax returns the first maximiser, i.e. the lowest index on ties
        return int(np.argmax(self.means))

    @property
    def best_mean(self) -> float:
        return float(self.means.max())

    @property
    def sigma(self) -> float:
        """Largest per-arm sub-Gaussian scale."""
        return max(a.sigma for a in self.arms)

    def to_dict(self) -> dict:
        return {"arms": [a.to_dict() for a in self.arms]}

    def digest(self) -> str:
        return stable_hash(self.to_dict())


def gaps(instance: BanditInstance) -> list[float]:
    """Suboptimality gap of every arm; the canonical optimal arm gets exactly 0."""
    best = instance.best_mean
    return [best - m for m in instance.means.tolist()]


@dataclass(frozen=True)
class ArmStatistics:
    pulls: int = 0
    reward_sum: float = 0.0

    @property
    def mean(self) -> float:
        if self.pulls < 1:
            raise MisuseError("empirical mean is undefined for an unpulled arm")
        return self.reward_sum / self.pulls


def update_arm(stats: ArmStatistics, reward: float) -> ArmStatistics:
    return ArmStatistics(stats.pulls + 1, stats.reward_sum + reward)


def _purpose_code(purpose: str | int) -> int:
    if isinstance(purpose, int):
        return purpose
    return zlib.crc32(purpose.encode("utf-8"))


@dataclass
class RandomStream:
    """Deterministic uniform source keyed by ``(master_seed, replication, purpose)``.

    Backed by numpy's PCG64 bit generator seeded through
    ``SeedSequence(master_seed, spawn_key=(replication, crc32(purpose)))``.
    Uniform doubles come from ``Generator.random``.
    """

    master_seed: int
    replication: int = 0
    purpose: str | int = "env"
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.master_seed < _SEED_LIMIT:
            raise ConfigError("master_seed", "must be a 64-bit unsigned integer")
        if self.replication < 0:
            raise MisuseError("replication index must be >= 0")
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.replication, _purpose_code(self.purpose))
        )
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)


def stable_hash(obj) -> str:
    """Short sha256 digest of a JSON-serialisable object with sorted keys."""
    payload = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
