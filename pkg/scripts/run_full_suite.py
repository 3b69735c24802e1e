#!/usr/bin/env python3
"""Run the full reproduction batch and print the interaction tables.

Covers the 13 persistence-study combinations on mountain car, the
state-based and rule-based knowledge-base suites, and the driving pair.
Use --quick for a fast smoke pass (fewer, shorter runs).
"""

import argparse
import os
import sys
import time

from advice_loop.config import COMBO_SUITE_13, ExperimentConfig, apply_combo
from advice_loop.harness import run_experiment, summarize, write_metrics, write_summary

KB_SUITE = (
    "MCP-FULL", "MCP-HALF", "MCP-QUAR", "MCP-MID",
    "MCRDR-FULL", "MCRDR-HALF", "MCRDR-QUAR", "MCRDR-MID",
)
SDC_SUITE = ("SC-UQL", "SCP-AVOID", "SCRDR-AVOID")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/full_suite")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--episodes", type=int, default=100)
    parser.add_argument("--sdc-episodes", type=int, default=60)
    parser.add_argument("--parallel", type=int, default=1)
    parser.add_argument("--quick", action="store_true",
                        help="3 runs x 20 episodes, for smoke testing")
    args = parser.parse_args()

    runs, episodes, sdc_episodes = args.runs, args.episodes, args.sdc_episodes
    if args.quick:
        runs, episodes, sdc_episodes = 3, 20, 20

    os.makedirs(args.out, exist_ok=True)
    summaries = []
    for combo in list(COMBO_SUITE_13) + list(KB_SUITE) + list(SDC_SUITE):
        eps = sdc_episodes if combo.startswith("SC") else episodes
        cfg = apply_combo(
            ExperimentConfig(runs=runs, episodes_per_run=eps, base_seed=args.seed),
            combo)
        t0 = time.time()
        metrics = run_experiment(cfg, parallel=args.parallel)
        summary = summarize(cfg, metrics)
        summaries.append(summary)
        write_metrics(metrics, os.path.join(args.out, f"{combo}.csv"))
        mean_per_run = summary.total_interactions / runs
        print(f"{combo:<12} steps={summary.total_steps:<9} "
              f"interactions/run={mean_per_run:<8.1f} "
              f"pct={summary.interaction_percentage:6.2f}%  [{time.time()-t0:.0f}s]")
    write_summary(summaries, os.path.join(args.out, "summary.csv"))
    print(f"\nsummary: {os.path.join(args.out, 'summary.csv')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
