"""Reward sampling.

Every reward consumes exactly two uniforms ``(u1, u2)`` from the stream, whatever
the arm family, so the draw layout never depends on which arm is pulled:

* Bernoulli(p): ``1.0 if u1 < p else 0.0`` (``u2`` is discarded).
* Gaussian(m, s): ``m + s * z`` with the Box-Muller cosine branch
  ``z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.
"""

from __future__ import annotations

import numpy as np

from .core import BERNOULLI, BanditInstance, MisuseError, RandomStream

DRAWS_PER_REWARD = 2


def box_muller(u1, u2):
    # 1 - u1 lies in (0, 1], so the log is finite
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def _transform(instance: BanditInstance, u: np.ndarray) -> np.ndarray:
    """Map uniforms of shape ``(..., K, 2)`` to rewards of shape ``(..., K)``."""
    out = np.empty(u.shape[:-1], dtype=float)
    for i, arm in enumerate(instance.arms):
        u1 = u[..., i, 0]
        if arm.kind == BERNOULLI:
            out[..., i] = (u1 < arm.mean).astype(float)
        else:
            out[..., i] = arm.mean + arm.stddev * box_muller(u1, u[..., i, 1])
    return out


def sample_reward(instance: BanditInstance, arm: int, stream: RandomStream) -> float:
    if not 0 <= arm < instance.n_arms:
        raise MisuseError(f"arm index {arm} out of range for K={instance.n_arms}")
    u = stream.uniform(DRAWS_PER_REWARD)
    # place the draw in the arm's column so both paths share one transform
    cells = np.zeros((instance.n_arms, DRAWS_PER_REWARD))
    cells[arm] = u
    return float(_transform(instance, cells)[arm])


def reward_table(instance: BanditInstance, stream: RandomStream, n_pulls: int) -> np.ndarray:
    """Rewards for the first ``n_pulls`` pulls of every arm, shape ``(n_pulls, K)``.

    Entry ``[n, i]`` is the reward the ``(n+1)``-th pull of arm ``i`` yields. The
    table consumes the stream in the same order as calling :func:`sample_reward`
    for ``n`` in ``range(n_pulls)`` and, inside that, every arm in index order.
    """
    u = stream.uniform((n_pulls, instance.n_arms, DRAWS_PER_REWARD))
    return _transform(instance, u)
