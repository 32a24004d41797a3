import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdbandit.core import (
    ArmDistribution,
    ArmStatistics,
    BanditInstance,
    ConfigError,
    MisuseError,
    RandomStream,
    gaps,
    update_arm,
)


@pytest.mark.parametrize(
    "pulls, total, reward, exp_pulls, exp_mean",
    [(0, 0.0, 0.7, 1, 0.7), (1, 0.7, 0.3, 2, 0.5), (9, 4.5, 1.0, 10, 0.55)],
)
def test_update_arm_examples(pulls, total, reward, exp_pulls, exp_mean):
    out = update_arm(ArmStatistics(pulls, total), reward)
    assert out.pulls == exp_pulls
    assert out.mean == pytest.approx(exp_mean, rel=1e-15)


def test_mean_of_unpulled_arm_is_an_error():
    with pytest.raises(MisuseError):
        ArmStatistics().mean


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=500))
def test_empirical_mean_matches_arithmetic_mean(rewards):
    stats = ArmStatistics()
    for r in rewards:
        prev = stats.pulls
        stats = update_arm(stats, r)
        assert stats.pulls == prev + 1
    expected = math.fsum(rewards) / len(rewards)
    scale = max(1.0, max(abs(r) for r in rewards))
    assert abs(stats.mean - expected) <= 1e-12 * scale


@pytest.mark.parametrize(
    "means, expected",
    [([0.9, 0.6, 0.6], [0.0, 0.3, 0.3]), ([0.5, 0.5], [0.0, 0.0]), ([0.1, 0.9], [0.8, 0.0])],
)
def test_gaps_examples(means, expected):
    assert gaps(BanditInstance.bernoulli(means)) == pytest.approx(expected, abs=1e-15)


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=8))
def test_gap_zero_at_canonical_optimal(means):
    inst = BanditInstance.gaussian(means, 1.0)
    g = gaps(inst)
    assert min(g) == 0.0
    assert g[inst.optimal_arm] == 0.0
    assert inst.optimal_arm == min(i for i, m in enumerate(means) if m == max(means))
    assert all(x >= 0 for x in g)


def test_instance_validation():
    with pytest.raises(ConfigError):
        BanditInstance.bernoulli([0.5])
    with pytest.raises(ConfigError):
        ArmDistribution.bernoulli(1.2)
    with pytest.raises(ConfigError):
        ArmDistribution.gaussian(0.0, -1.0)


def test_sub_gaussian_scales():
    assert ArmDistribution.bernoulli(0.3).sigma == 0.5
    assert ArmDistribution.gaussian(0.0, 0.7).sigma == 0.7


def test_streams_reproduce_bit_identically():
    a = RandomStream(123, 4, "env").uniform(1000)
    b = RandomStream(123, 4, "env").uniform(1000)
    assert a.tobytes() == b.tobytes()


def test_distinct_streams_look_independent():
    n = 20_000
    a = RandomStream(123, 0, "env").uniform(n)
    for other in (RandomStream(123, 1, "env"), RandomStream(123, 0, "policy"), RandomStream(124, 0, "env")):
        b = other.uniform(n)
        assert not np.array_equal(a, b)
        # correlation of independent uniforms has standard error 1/sqrt(n)
        assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(n)


def test_seed_must_fit_64_bits():
    with pytest.raises(ConfigError):
        RandomStream(2**64)
