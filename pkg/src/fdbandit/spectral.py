"""Per-arm spectral observables and policy-spectrum summaries.

An arm with ``N`` pulls and empirical mean ``m`` is described by the triple
(amplitude ``m``, frequency ``1/sqrt(N)``, energy ``P(next pick = arm)``).
The policy spectrum is the sequence of energy vectors over time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ArmStatistics, BanditInstance, MisuseError

FLATNESS_FLOOR = 1e-12


class UndefinedFrequencyError(MisuseError):
    pass


def frequency(pulls: int) -> float:
    if pulls < 1:
        raise UndefinedFrequencyError("frequency is undefined before an arm's first pull")
    return 1.0 / math.sqrt(pulls)


@dataclass(frozen=True)
class SpectralComponent:
    amplitude: float
    frequency: float
    energy: float


@dataclass(frozen=True)
class SpectralSnapshot:
    t: int
    components: tuple[SpectralComponent, ...]

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([c.amplitude for c in self.components])

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([c.frequency for c in self.components])

    @property
    def energies(self) -> np.ndarray:
        return np.array([c.energy for c in self.components])


def snapshot(all_stats: Sequence[ArmStatistics], t: int, energy: Sequence[float]) -> SpectralSnapshot:
    if len(all_stats) != len(energy):
        raise MisuseError(f"{len(all_stats)} arms but {len(energy)} energies")
    check_probability_vector(energy, tol=1e-9)
    return SpectralSnapshot(
        t,
        tuple(SpectralComponent(s.mean, frequency(s.pulls), float(e)) for s, e in zip(all_stats, energy)),
    )


def check_probability_vector(p, tol: float = 1e-12) -> None:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise MisuseError("probability vector must be a non-empty 1-D sequence")
    if (p < 0).any() or abs(p.sum() - 1.0) > tol:
        raise MisuseError(f"not a probability vector: {p.tolist()}")


def estimate_energy_ensemble(traces, t: int) -> np.ndarray:
    """Fraction of runs whose step-``t`` choice was each arm.

    ``traces`` is a sequence of objects with ``arms`` (chosen arm per step,
    step ``t`` at index ``t-1``) and ``n_arms``.
    """
    if len(traces) == 0:
        raise MisuseError("cannot estimate energies from zero traces")
    k = traces[0].n_arms
    counts = np.zeros(k, dtype=np.int64)
    for trace in traces:
        counts[trace.arms[t - 1]] += 1
    return counts / len(traces)


def energy_from_choices(choices: np.ndarray, n_arms: int) -> np.ndarray:
    """Ensemble energies from a ``(R, T)`` array of chosen arms; returns ``(T, K)``."""
    counts = np.stack([(choices == i).sum(axis=0) for i in range(n_arms)], axis=1)
    return counts / choices.shape[0]


def ideal_spectrum(instance: BanditInstance) -> np.ndarray:
    ideal = np.zeros(instance.n_arms)
    ideal[instance.optimal_arm] = 1.0
    return ideal


def spectral_energy_variation(energies, ideal, T: int | None = None) -> float:
    """Summed squared deviation of the first ``T`` energy vectors from ``ideal``."""
    energies = np.asarray(energies, dtype=float)
    if T is None:
        T = energies.shape[0]
    if T > energies.shape[0]:
        raise MisuseError(f"T={T} exceeds spectrum length {energies.shape[0]}")
    return float(variation_series(energies[:T], ideal)[-1]) if T > 0 else 0.0


def variation_series(energies, ideal) -> np.ndarray:
    """Running V(t) for t = 1..len(energies)."""
    dev = np.asarray(energies, dtype=float) - np.asarray(ideal, dtype=float)
    return np.cumsum(_row_sum(dev * dev))


def _row_sum(v: np.ndarray) -> np.ndarray:
    # fixed left-to-right order so 1-D and batched inputs round identically
    total = v[..., 0]
    for i in range(1, v.shape[-1]):
        total = total + v[..., i]
    return total


def spectral_flatness(values):
    """Geometric over arithmetic mean after flooring at 1e-12.

    A 2-D input is treated as one vector per row. Returns a value in [0, 1],
    exactly 1 when all entries are equal.
    """
    v = np.asarray(values, dtype=float)
    if v.shape[-1] == 0:
        raise MisuseError("flatness of an empty vector")
    if (v < 0).any() or not np.isfinite(v).all():
        raise MisuseError("flatness needs finite non-negative values")
    if (v.max(axis=-1) <= 0).any():
        raise MisuseError("flatness needs at least one strictly positive value")
    v = np.maximum(v, FLATNESS_FLOOR)
    k = v.shape[-1]
    geo = np.exp(_row_sum(np.log(v)) / k)
    arith = _row_sum(v) / k
    flat = np.clip(geo / arith, 0.0, 1.0)
    flat = np.where(v.max(axis=-1) == v.min(axis=-1), 1.0, flat)
    return float(flat) if flat.ndim == 0 else flat
