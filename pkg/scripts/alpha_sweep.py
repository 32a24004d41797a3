"""Gain-decay exponent sweep on the four-arm Gaussian instance, for several c.

Prints mean final pseudo-regret with 95% half-widths. All rows share seeds, so
differences come from the policy alone.

    python scripts/alpha_sweep.py --replications 500 --cs 0.25,0.5,1.0
"""

import argparse

from fdbandit.core import BanditInstance
from fdbandit.experiment import ExperimentConfig, sweep_alpha
from fdbandit.policy import PolicyConfig


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--horizon", type=int, default=10_000)
    p.add_argument("--replications", type=int, default=500)
    p.add_argument("--seed", type=int, default=20240601)
    p.add_argument("--alphas", default="0.25,0.375,0.5,0.625,0.75")
    p.add_argument("--cs", default="1.0")
    args = p.parse_args()

    instance = BanditInstance.gaussian([0.9, 0.8, 0.7, 0.6], 0.5)
    alphas = [float(a) for a in args.alphas.split(",")]
    print("c,alpha,mean_regret,ci_half_width,v_of_T")
    for c in (float(x) for x in args.cs.split(",")):
        config = ExperimentConfig(instance, PolicyConfig(c=c), args.horizon, args.replications, args.seed)
        for row in sweep_alpha(config, alphas):
            print(f"{c},{row.alpha},{row.mean_regret:.2f},{row.ci_half_width:.2f},{row.v_of_T:.2f}")


if __name__ == "__main__":
    main()
