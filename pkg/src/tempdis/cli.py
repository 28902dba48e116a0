"""Command line entry point: ``tempdis run`` and ``tempdis validate``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import parse_config
from .exceptions import ConfigError
from .pipeline import run_jobs

EXIT_OK, EXIT_JOB_FAILED, EXIT_BAD_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tempdis", description="Temporal disaggregation of annual series to quarters."
    )
    p.add_argument("--version", action="version", version=f"tempdis {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the jobs of a config file")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--jobs", help="comma-separated subset of job names")
    run.add_argument("--out", type=Path, help="output root (one sub-directory per job)")
    run.add_argument("--workers", type=int, default=1, help="jobs to run concurrently")

    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("--config", required=True, type=Path)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        jobs = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    if args.command == "validate":
        for j in jobs:
            k = j.spec.n_regressors
            print(f"{j.name}: {j.method.display_name}, {k} regressor{'s' * (k != 1)}")
        return EXIT_OK

    if args.jobs:
        wanted = [s.strip() for s in args.jobs.split(",") if s.strip()]
        missing = sorted(set(wanted) - {j.name for j in jobs})
        if missing:
            print(f"config error: no job named {missing[0]!r}", file=sys.stderr)
            return EXIT_BAD_CONFIG
        jobs = [j for j in jobs if j.name in wanted]

    outcomes = run_jobs(jobs, args.out, workers=max(1, args.workers))
    for o in outcomes:
        if o.ok:
            print(f"{o.name}: ok")
        else:
            print(f"{o.name}: FAILED {o.error}", file=sys.stderr)
    return EXIT_OK if all(o.ok for o in outcomes) else EXIT_JOB_FAILED


if __name__ == "__main__":
    sys.exit(main())
