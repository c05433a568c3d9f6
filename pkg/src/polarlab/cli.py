"""``polarlab`` command line: profile, rd-sweep, bler-sweep, scheme, validate.

Each subcommand takes ``--config <path>`` plus optional ``--seed``,
``--workers`` and ``--out`` overrides.  Exit codes: 0 success, 1 failed
validation, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__, harness

_COMMANDS = {
    "profile": harness.cmd_profile,
    "rd-sweep": harness.cmd_rd_sweep,
    "bler-sweep": harness.cmd_bler_sweep,
    "scheme": harness.cmd_scheme,
    "validate": harness.cmd_validate,
}

_HELP = {
    "profile": "estimate or enumerate a reliability profile",
    "rd-sweep": "sweep rate vs distortion for the source encoder",
    "bler-sweep": "sweep rate vs block error rate for the channel decoder",
    "scheme": "design and simulate one nested-code scheme",
    "validate": "run the internal validation suites",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarlab",
        description="Polar-code lossy source coding lab",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, text in _HELP.items():
        sub = subparsers.add_parser(name, help=text)
        sub.add_argument(
            "--config", required=True, help="path to the JSON config file"
        )
        sub.add_argument(
            "--seed", type=int, default=None,
            help="master seed (overrides the config)",
        )
        sub.add_argument(
            "--workers", type=int, default=None,
            help="worker threads (results do not depend on this)",
        )
        sub.add_argument(
            "--out", default=None,
            help="primary output path (overrides the config)",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = harness.RunConfig.load(
            args.command, args.config, args.seed, args.workers, args.out
        )
        result = _COMMANDS[args.command](run)
    except (OSError, KeyError, ValueError) as exc:
        print(f"polarlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        return int(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
