"""Command line interface: batch runs, report aggregation, live service."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import (
    ADDR_ENV_VAR,
    COMBO_SUITE_13,
    COMBOS,
    ConfigError,
    ExperimentConfig,
    apply_combo,
    load_config,
    seed_from_env,
)
from .harness import (
    read_metrics,
    run_experiment,
    summarize,
    write_metrics,
    write_summary,
)


def _add_run_parser(sub) -> None:
    p = sub.add_parser("run", help="run one combo or the full 13-combination suite")
    p.add_argument("--config", help="TOML or JSON experiment config")
    p.add_argument("--combo", default="all",
                   help="named agent/user combo (e.g. PI-O, MCRDR-FULL) or 'all'")
    p.add_argument("--seed", type=int, help="base seed (ADVICE_LOOP_SEED overrides)")
    p.add_argument("--runs", type=int, help="override run count")
    p.add_argument("--episodes", type=int, help="override episodes per run")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--parallel", type=int, default=1, help="worker processes")


def _add_report_parser(sub) -> None:
    p = sub.add_parser("report", help="aggregate metrics CSVs into a summary table")
    p.add_argument("--in", dest="indir", required=True, help="directory of metrics CSVs")
    p.add_argument("--out", help="summary CSV path (default: <in>/summary.csv)")


def _add_serve_parser(sub) -> None:
    p = sub.add_parser("serve", help="start the live advising service")
    p.add_argument("--config", help="TOML or JSON session config")
    p.add_argument("--addr", help=f"host:port (default 127.0.0.1:8733; {ADDR_ENV_VAR} overrides)")
    p.add_argument("--tcp", action="store_true",
                   help="serve the newline-delimited JSON TCP protocol instead of the web UI")


def base_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    cfg = replace(cfg, base_seed=seed_from_env(cfg.base_seed))
    if getattr(args, "runs", None):
        cfg = replace(cfg, runs=args.runs)
    if getattr(args, "episodes", None):
        cfg = replace(cfg, episodes_per_run=args.episodes)
    return cfg


def cmd_run(args) -> int:
    cfg = base_config(args)
    combos = list(COMBO_SUITE_13) if args.combo == "all" else [args.combo]
    os.makedirs(args.out, exist_ok=True)
    summaries = []
    for combo in combos:
        combo_cfg = apply_combo(cfg, combo)
        metrics = run_experiment(combo_cfg, parallel=args.parallel)
        path = os.path.join(args.out, f"{combo}.csv")
        write_metrics(metrics, path)
        summary = summarize(combo_cfg, metrics)
        summaries.append((combo, summary))
        print(f"{combo}: runs={combo_cfg.runs} episodes={combo_cfg.episodes_per_run} "
              f"steps={summary.total_steps} interactions={summary.total_interactions} "
              f"({summary.interaction_percentage:.2f}%) -> {path}")
    write_summary([s for _, s in summaries], os.path.join(args.out, "summary.csv"))
    return 0


def cmd_report(args) -> int:
    import csv

    rows = []
    for name in sorted(os.listdir(args.indir)):
        if not name.endswith(".csv") or name == "summary.csv":
            continue
        combo = name[:-4]
        if combo not in COMBOS:
            continue
        metrics = read_metrics(os.path.join(args.indir, name))
        total_steps = sum(m.steps for m in metrics)
        total_interactions = sum(m.interactions for m in metrics)
        pct = 100.0 * total_interactions / total_steps if total_steps else 0.0
        env_name, agent, user = COMBOS[combo]
        rows.append((agent, user or "NONE", total_interactions, f"{pct:.4f}"))
        print(f"{combo:<14} {agent:<4} {user or 'NONE':<24} "
              f"interactions={total_interactions:<8} pct={pct:.2f}%")
    out = args.out or os.path.join(args.indir, "summary.csv")
    with open(out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["agent", "user", "interactions", "interaction_pct"])
        writer.writerows(rows)
    print(f"summary written to {out}")
    return 0


def cmd_serve(args) -> int:
    from .service import SessionConfig, serve_tcp

    addr = args.addr or os.environ.get(ADDR_ENV_VAR) or "127.0.0.1:8733"
    host, _, port_text = addr.rpartition(":")
    host = host or "127.0.0.1"
    port = int(port_text)
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    session_cfg = SessionConfig.from_experiment(cfg)
    if args.tcp:
        print(f"serving TCP protocol on {host}:{port}")
        serve_tcp(session_cfg, host, port)
        return 0
    from .webapp import serve_web

    print(f"serving web console on http://{host}:{port}")
    serve_web(session_cfg, host, port)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="advice-loop",
        description="Persistent rule-based interactive RL: batch experiments and live advising",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub)
    _add_report_parser(sub)
    _add_serve_parser(sub)
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "report":
            return cmd_report(args)
        return cmd_serve(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
