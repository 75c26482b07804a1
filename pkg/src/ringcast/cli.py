"""Command line entry points: run, verify, sweep."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import apply_overrides, parse_kv_file
from .harness import ScenarioConfig, run_scenario, run_sweep, verdict_lines, verify_logs


def _load_config(args) -> ScenarioConfig:
    kv = parse_kv_file(Path(args.config)) if args.config else {}
    kv = apply_overrides(kv, args.override)
    return ScenarioConfig.from_mapping(kv)


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    result = run_scenario(cfg, out_dir=Path(args.out) if args.out else None)
    for line in verdict_lines(result.verdicts):
        print(line)
    m = result.metrics
    print(
        f"delivered {m['delivered_messages_total']} messages in {m['elapsed_s']:.2f}s, "
        f"{m['throughput_bytes_per_s'] / 1e6:.2f} MB/s per node, "
        f"{m['writes_posted']} writes ({m['writes_per_delivery']:.2f}/delivery), "
        f"{m['nulls_committed']} nulls"
    )
    if args.out:
        print(f"report written to {args.out}")
    return 0 if result.passed else 1


def _cmd_verify(args) -> int:
    verdicts = verify_logs(Path(args.logs))
    for line in verdict_lines(verdicts):
        print(line)
    return 0 if all(verdicts.values()) else 1


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    results = run_sweep(cfg, args.param, values, Path(args.out))
    failed = False
    for value, result in zip(values, results):
        status = "PASS" if result.passed else "FAIL"
        failed |= not result.passed
        print(
            f"{status} {args.param}={value}: "
            f"{result.metrics['throughput_bytes_per_s'] / 1e6:.2f} MB/s, "
            f"{result.metrics['writes_per_delivery']:.2f} writes/delivery"
        )
    print(f"sweep written to {args.out}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringcast",
        description="Atomic multicast experiments on a simulated one-sided-write fabric",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and report verdicts")
    p_run.add_argument("--config", help="key=value scenario file")
    p_run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_run.add_argument("--out", help="directory for metrics, logs and figures")
    p_run.set_defaults(fn=_cmd_run)

    p_verify = sub.add_parser("verify", help="re-check a run directory's logs against the oracle")
    p_verify.add_argument("--logs", required=True, help="directory holding commits.log/deliveries.log")
    p_verify.set_defaults(fn=_cmd_verify)

    p_sweep = sub.add_parser("sweep", help="run a scenario across parameter values")
    p_sweep.add_argument("--config", help="key=value scenario file")
    p_sweep.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_sweep.add_argument("--param", required=True, help="parameter to sweep, e.g. w")
    p_sweep.add_argument("--values", required=True, help="comma-separated values, e.g. 5,20,100,500")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.set_defaults(fn=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
