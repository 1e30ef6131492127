"""Command line entry point: ``bench run | realness | report``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import benchmark as bm


def _config(args) -> bm.BenchmarkConfig:
    config = bm.BenchmarkConfig.load(args.config)
    if getattr(args, "seed", None) is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    if not config.datasets:
        raise SystemExit("config lists no datasets")
    return config


def cmd_run(args) -> int:
    config = _config(args)
    out = Path(args.out)
    rows = bm.run_benchmark(config, workers=args.workers)
    results = bm.write_rows(rows, out / "results.csv")
    bm.write_manifest(config, rows, out / "manifest.json")
    report = bm.emit_report(rows, out)
    print(f"wrote {len(rows)} rows to {results}; {report['n_failed']} failed")
    return 0


def cmd_realness(args) -> int:
    config = _config(args)
    out = Path(args.out)
    rows = bm.run_realness(config, ntrees=args.ntrees)
    path = bm.write_rows(rows, out / "realness.csv", bm.REALNESS_COLUMNS)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"wrote {len(rows)} rows to {path}; {failed} failed")
    return 0


def cmd_report(args) -> int:
    rows = bm.read_rows(args.results)
    out = Path(args.out) if args.out else Path(args.results).parent
    report = bm.emit_report(rows, out)
    sys.stdout.write(bm.format_report(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the detection benchmark matrix")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--seed", type=int, default=None, help="override master_seed")
    run.set_defaults(func=cmd_run)

    real = sub.add_parser("realness", help="run the classifier realness protocol")
    real.add_argument("--config", required=True)
    real.add_argument("--out", required=True)
    real.add_argument("--seed", type=int, default=None, help="override master_seed")
    real.add_argument("--ntrees", type=int, default=100)
    real.set_defaults(func=cmd_realness)

    rep = sub.add_parser("report", help="summarize an existing results CSV")
    rep.add_argument("--results", required=True)
    rep.add_argument("--out", default=None, help="directory for summary files")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
