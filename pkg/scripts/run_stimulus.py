"""Recover a half-circle stimulus walk from a tent-tuned neural population.

Usage: python3 scripts/run_stimulus.py [--seed S] [--trials T] [--out DIR]
"""

import argparse
import json

from psc.experiments import RUNNERS

NAME = "stimulus"


def main():
    runner, default_trials = RUNNERS[NAME]
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=default_trials)
    parser.add_argument("--out", default=f"results/{NAME}")
    args = parser.parse_args()
    summary = runner(args.out, seed=args.seed, trials=args.trials)
    summary.pop("trials")
    print(json.dumps(summary, indent=1))


if __name__ == "__main__":
    main()
