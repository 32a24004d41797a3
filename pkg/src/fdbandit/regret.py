"""Pseudo-regret accounting, UCB pull-count bounds and log-T regression."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import BanditInstance, MisuseError, gaps

DEFAULT_BOUND_CONSTANT = 8.0


def cumulative_regret(arms: Sequence[int], instance: BanditInstance) -> np.ndarray:
    """Pseudo-regret curve ``R(t) = sum_{s<=t} gap[arm_s]`` for a sequence of choices.

    Accepts either a plain sequence of arm indices or anything with an ``arms``
    attribute (a :class:`~fdbandit.experiment.RunTrace`).
    """
    arms = np.asarray(getattr(arms, "arms", arms), dtype=np.int64)
    if arms.size and (arms.min() < 0 or arms.max() >= instance.n_arms):
        raise MisuseError("trace contains arm indices outside the instance")
    return np.cumsum(np.asarray(gaps(instance))[arms])


def regret_from_pulls(pulls: Sequence[int], instance: BanditInstance) -> float:
    """``sum_i N_i * gap_i`` from final pull counts."""
    return float(np.dot(np.asarray(pulls, dtype=float), gaps(instance)))


def pull_count_bound(instance: BanditInstance, sigma: float, T: float,
                     C: float = DEFAULT_BOUND_CONSTANT) -> list[float]:
    """``C * sigma**2 * ln T / gap**2`` per arm; ``inf`` where the gap is zero."""
    if T < 2:
        raise MisuseError(f"bound needs T >= 2, got {T}")
    if C <= 0:
        raise MisuseError("bound constant must be > 0")
    log_t = math.log(T)
    out = []
    for gap in gaps(instance):
        out.append(math.inf if gap == 0 else C * sigma**2 * log_t / gap**2)
    return out


def fit_log_slope(series: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares fit of ``value = slope * ln T + intercept``.

    Returns ``(slope, intercept, r_squared)``; a constant series has r² = 0.
    """
    if len(series) < 3:
        raise MisuseError("need at least 3 points for a log-slope fit")
    ts = np.array([p[0] for p in series], dtype=float)
    ys = np.array([p[1] for p in series], dtype=float)
    if len(set(ts.tolist())) != len(ts) or (ts < 2).any():
        raise MisuseError("T values must be distinct and >= 2")
    x = np.log(ts)
    slope, intercept = np.polyfit(x, ys, 1)
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return 0.0, float(ys.mean()), 0.0
    ss_res = float(((ys - (slope * x + intercept)) ** 2).sum())
    return float(slope), float(intercept), 1.0 - ss_res / ss_tot
