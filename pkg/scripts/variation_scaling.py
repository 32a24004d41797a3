"""Growth of E[N_suboptimal(T)] and V(T) against ln T for UCB1 on two Gaussian arms.

    python scripts/variation_scaling.py --replications 200
"""

import argparse
import math

from fdbandit.core import BanditInstance
from fdbandit.experiment import ExperimentConfig, run_ensemble
from fdbandit.policy import PolicyConfig
from fdbandit.regret import fit_log_slope, pull_count_bound


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--horizon", type=int, default=10_000)
    p.add_argument("--replications", type=int, default=200)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=20240601)
    args = p.parse_args()

    instance = BanditInstance.gaussian([0.9, 0.6], 0.5)
    config = ExperimentConfig(instance, PolicyConfig(c=args.c), args.horizon, args.replications, args.seed)
    result = run_ensemble(config)

    times = [t for t in (10, 30, 100, 300, 1000, 3000, 10_000, 30_000, 100_000) if t <= args.horizon]
    print("T,mean_pulls_1,bound_C8,v_onehot,v_ensemble,v_ensemble_over_lnT")
    series = []
    for T in times:
        n1 = float(result.mean_pulls_at(T)[1])
        series.append((T, n1))
        bound = pull_count_bound(instance, 0.5, T)[1]
        v_ens = result.v_at(T) if T in result.grid else float("nan")
        v_one = result.v_at(T, "onehot") if T in result.grid else float("nan")
        print(f"{T},{n1:.2f},{bound:.2f},{v_one:.2f},{v_ens:.3f},{v_ens / math.log(T):.4f}")
    slope, intercept, r2 = fit_log_slope(series)
    print(f"# E[N_1(T)] ~ {slope:.2f} ln T + {intercept:.2f}  (r2 = {r2:.4f})")


if __name__ == "__main__":
    main()
