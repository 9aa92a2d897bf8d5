#!/usr/bin/env python3
import argparse
import logging
import os
import sys
import traceback

from .cli.jobs import TASKS
from .cli.runner import EXIT_INPUT, dumps, run_file, run_sweep
from .config import get_settings

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(settings):
    """Diagnostics go to stderr and, unless LOGCONN_LOG_DIR is empty, to logs/logconn.log"""
    handlers = [logging.StreamHandler(sys.stderr)]
    if settings.log_dir:
        # Create logs directory if it doesn't exist
        if not os.path.exists(settings.log_dir):
            os.makedirs(settings.log_dir)
        handlers.append(logging.FileHandler(os.path.join(settings.log_dir, 'logconn.log')))

    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="logconn",
        description="Exact computations with logarithmic connections on the projective line",
    )
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--job", help="JSON job file")
    parser.add_argument("--field-order", type=int, default=None,
                        help="cyclotomic order N; overrides the job file and LOGCONN_FIELD_ORDER")
    parser.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from reports")
    parser.add_argument("--sweep", metavar="DIR", help="run every *.json job in DIR in parallel")
    return parser


def main(argv=None):
    """Command line entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    setup_logging(settings)

    if not args.job and not args.sweep:
        logging.error("either --job or --sweep is required")
        return EXIT_INPUT

    timestamp = not args.no_timestamp
    try:
        if args.sweep:
            reports, code = run_sweep(args.sweep, args.task, args.field_order, timestamp)
            print(dumps(reports))
        else:
            report, code = run_file(args.job, args.task, args.field_order, timestamp)
            print(dumps(report))
        logging.info(f"{args.task} finished with exit code {code}")
        return code
    except Exception as e:
        logging.error(f"Fatal error in main: {e}")
        logging.error(traceback.format_exc())
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
