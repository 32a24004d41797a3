import numpy as np
import pytest

from fdbandit.core import BanditInstance, ConfigError
from fdbandit.experiment import (
    ExperimentConfig,
    run_ensemble,
    run_single,
    simulate_choices,
    sweep_alpha,
)
from fdbandit.policy import (
    EPSILON_GREEDY,
    FD_ADAPTIVE_UCB,
    GENERALIZED_UCB,
    GREEDY,
    UCB1,
    UNIFORM_RANDOM,
    PolicyConfig,
)
from fdbandit.regret import cumulative_regret, regret_from_pulls
from fdbandit.spectral import frequency

FOUR = BanditInstance.gaussian([0.9, 0.8, 0.7, 0.6], 0.5)

POLICIES = [
    PolicyConfig(UCB1),
    PolicyConfig(GENERALIZED_UCB, alpha_exp=0.3),
    PolicyConfig(EPSILON_GREEDY, epsilon=0.2),
    PolicyConfig(GREEDY),
    PolicyConfig(UNIFORM_RANDOM),
    PolicyConfig(FD_ADAPTIVE_UCB, c_min=0.3, c_max=2.0),
]


def cfg(policy=PolicyConfig(), instance=FOUR, horizon=300, replications=1, seed=11, **kw):
    return ExperimentConfig(instance, policy, horizon, replications, seed, **kw)


@pytest.mark.parametrize("policy", POLICIES, ids=lambda p: p.kind)
def test_run_single_is_deterministic(policy):
    a, b = run_single(cfg(policy), 3), run_single(cfg(policy), 3)
    for field in ("arms", "rewards", "pulls", "sums"):
        assert getattr(a, field).tobytes() == getattr(b, field).tobytes()


@pytest.mark.parametrize("policy", POLICIES, ids=lambda p: p.kind)
def test_pull_counts_sum_to_t(policy):
    trace = run_single(cfg(policy, horizon=500), 0)
    assert len(trace.arms) == 500
    assert trace.pulls.sum(axis=1).tolist() == list(range(1, 501))
    assert trace.arms[:4].tolist() == [0, 1, 2, 3]


def test_horizon_equal_to_k_is_pure_initialisation():
    trace = run_single(cfg(instance=BanditInstance.gaussian([0.9, 0.6], 0.5), horizon=2))
    assert trace.arms.tolist() == [0, 1]


def test_greedy_on_deterministic_arms():
    inst = BanditInstance.gaussian([0.9, 0.6], 0.0)
    trace = run_single(cfg(PolicyConfig(GREEDY), inst, horizon=100))
    assert trace.pulls[-1].tolist() == [99, 1]


@pytest.mark.parametrize("policy", POLICIES, ids=lambda p: p.kind)
def test_single_run_matches_ensemble_row(policy):
    config = cfg(policy, replications=9)
    choices = simulate_choices(config, batch_size=4)
    for r in (0, 5, 8):
        assert np.array_equal(run_single(config, r).arms, choices[r])


@pytest.mark.parametrize("policy", POLICIES, ids=lambda p: p.kind)
def test_ensemble_invariant_to_batching_and_workers(policy):
    config = cfg(policy, replications=10)
    ref = run_ensemble(config)
    for kwargs in ({"batch_size": 3}, {"batch_size": 1}, {"workers": 2, "batch_size": 4}):
        other = run_ensemble(config, **kwargs)
        assert other.choices.tobytes() == ref.choices.tobytes()
        assert other.regret_mean.tobytes() == ref.regret_mean.tobytes()
        assert other.regret_std.tobytes() == ref.regret_std.tobytes()
        assert other.v_ensemble.tobytes() == ref.v_ensemble.tobytes()


def test_single_replication_ensemble_equals_trace():
    config = cfg(PolicyConfig(EPSILON_GREEDY, epsilon=0.1))
    trace = run_single(config, 0)
    result = run_ensemble(config)
    assert result.regret_mean.tolist() == cumulative_regret(trace, FOUR).tolist()
    assert result.regret_std.tolist() == [0.0] * 300
    assert result.mean_pulls.tolist() == trace.pulls[-1].tolist()
    assert np.array_equal(result.energies, np.eye(4)[trace.arms])


def test_uniform_random_ensemble_energy():
    inst = BanditInstance.bernoulli([0.7, 0.2])
    result = run_ensemble(cfg(PolicyConfig(UNIFORM_RANDOM), inst, horizon=12, replications=10_000))
    for t in (3, 7, 12):
        assert np.all(np.abs(result.energies[t - 1] - 0.5) <= 0.015)
    assert result.energies[0].tolist() == [1.0, 0.0]


def test_ensemble_probability_vectors_and_v_modes():
    result = run_ensemble(cfg(PolicyConfig(EPSILON_GREEDY, epsilon=0.3), replications=50))
    assert np.allclose(result.energies.sum(axis=1), 1.0, atol=1e-12)
    assert (result.energies >= 0).all()
    # one-hot V is twice the mean number of suboptimal picks
    subopt = (result.choices != FOUR.optimal_arm).sum(axis=1).mean()
    assert result.v_onehot[-1] == pytest.approx(2 * subopt, rel=1e-12)
    assert (np.diff(result.v_ensemble) >= 0).all()


def test_pseudo_regret_equals_gap_weighted_pulls():
    config = cfg(replications=20)
    result = run_ensemble(config)
    per_rep = result.final_regret()
    for r in range(20):
        assert per_rep[r] == pytest.approx(regret_from_pulls(result.final_pulls[r], FOUR), rel=1e-12)


def test_strided_grid():
    result = run_ensemble(cfg(horizon=300, replications=4, snapshot_stride=30))
    assert result.grid.tolist() == list(range(30, 301, 30))
    assert len(result.v_ensemble) == 10
    with pytest.raises(ConfigError):
        cfg(horizon=300, snapshot_stride=7)


def test_recorded_snapshots():
    config = cfg(PolicyConfig(EPSILON_GREEDY, epsilon=0.2), horizon=200, record_spectral=True,
                 snapshot_stride=20)
    trace = run_single(config, 1)
    assert [s.t for s in trace.snapshots] == list(range(20, 201, 20))
    for snap in trace.snapshots:
        assert snap.energies.sum() == pytest.approx(1.0, abs=1e-12)
        assert snap.frequencies.tolist() == [frequency(int(n)) for n in trace.pulls[snap.t - 1]]
        assert sorted(snap.energies.tolist())[:3] == pytest.approx([0.05] * 3)


def test_sweep_single_alpha_matches_ensemble():
    config = cfg(replications=6)
    (row,) = sweep_alpha(config, [0.5])
    direct = run_ensemble(config)
    mean, half = direct.final_regret_ci()
    assert (row.mean_regret, row.ci_half_width) == (mean, half)
    assert row.v_of_T == direct.v_ensemble[-1]
    assert list(row.mean_pulls) == direct.mean_pulls.tolist()


def test_sweep_is_deterministic_and_shares_environment():
    config = cfg(replications=5)
    assert sweep_alpha(config, [0.25, 0.75]) == sweep_alpha(config, [0.25, 0.75])
    slow = run_single(config.replace(policy=PolicyConfig(GENERALIZED_UCB, alpha_exp=0.25)), 2)
    fast = run_single(config.replace(policy=PolicyConfig(GENERALIZED_UCB, alpha_exp=0.75)), 2)
    assert slow.rewards[:4].tobytes() == fast.rewards[:4].tobytes()
    # the n-th pull of an arm yields the same reward under both policies
    for arm in range(4):
        a = slow.rewards[slow.arms == arm]
        b = fast.rewards[fast.arms == arm]
        n = min(len(a), len(b))
        assert a[:n].tobytes() == b[:n].tobytes()


def test_sweep_rejects_bad_alpha():
    with pytest.raises(ConfigError):
        sweep_alpha(cfg(), [0.0])
    with pytest.raises(ConfigError):
        sweep_alpha(cfg(PolicyConfig(GREEDY)), [0.5])


def test_config_validation():
    with pytest.raises(ConfigError) as err:
        cfg(horizon=3)
    assert err.value.field == "horizon"
    with pytest.raises(ConfigError):
        cfg(replications=0)


def _raw(**overrides):
    raw = {
        "instance": {"arms": [{"kind": "gaussian", "mean": 0.9, "stddev": 0.5},
                              {"kind": "bernoulli", "p": 0.4}]},
        "policy": {"kind": "epsilon_greedy", "epsilon": 0.1},
        "horizon": 100,
        "replications": 3,
        "master_seed": 5,
    }
    raw.update(overrides)
    return raw


def test_config_round_trip():
    config = ExperimentConfig.from_dict(_raw())
    assert ExperimentConfig.from_dict(config.to_dict()) == config
    assert config.digest() == ExperimentConfig.from_dict(_raw()).digest()


@pytest.mark.parametrize("raw, field", [
    (_raw(horizn=10), "horizn"),
    (_raw(policy={"kind": "epsilon_greedy", "epsilon": 1.5}), "policy.epsilon"),
    (_raw(policy={"kind": "ucb1", "c": 1.0, "exploration": 2}), "policy.exploration"),
    (_raw(instance={"arms": [{"kind": "bernoulli", "p": 1.4}, {"kind": "bernoulli", "p": 0.1}]}),
     "instance.arms[0].p"),
    (_raw(instance={"arms": [{"kind": "gaussian", "mean": 0.1}, {"kind": "bernoulli", "p": 0.1}]}),
     "instance.arms[0].stddev"),
    (_raw(horizon="long"), "horizon"),
])
def test_config_errors_name_the_field(raw, field):
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict(raw)
    assert err.value.field == field
