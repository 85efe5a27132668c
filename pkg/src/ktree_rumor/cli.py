"""Command line entry point: ``ktree-rumor <command> [options]``.

Exit codes: 0 success, 2 bad configuration or arguments, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ex.ConfigError(message)


def _sizes(text: str) -> list[int]:
    try:
        return [int(float(s)) for s in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ktree-rumor", description="Push-Pull experiments on random k-trees and k-Apollonian networks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file; flags override it")
    common.add_argument("--seed", type=int, dest="master_seed")
    common.add_argument("--out")
    common.add_argument("--family", choices=["ktree", "apollonian"])
    common.add_argument("--k", type=int)
    common.add_argument("--sizes", type=_sizes, help="comma separated, e.g. 1e3,1e4")
    common.add_argument("--trials", type=int)
    common.add_argument("--max-rounds", type=int)
    common.add_argument("--workers", type=int)

    sub.add_parser("generate", parents=[common], help="write graphs to <out>/graphs")
    sp = sub.add_parser("spread", parents=[common], help="Push-Pull runs to <out>/spread.csv")
    sp.add_argument("--fraction", type=float)
    sp.add_argument("--metrics", type=lambda s: [m for m in s.split(",") if m])
    sub.add_parser("lowerbound", parents=[common], help="pieces and barriers to <out>/lowerbound.csv")
    sub.add_parser("structure", parents=[common], help="structural metrics to <out>/structure.csv")
    rp = sub.add_parser("report", help="fit growth exponents from spread CSVs")
    rp.add_argument("csv", nargs="+", type=Path)
    return p


def load_config(args: argparse.Namespace) -> ex.ExperimentConfig:
    base = ex.ExperimentConfig.from_json(args.config) if args.config else ex.ExperimentConfig()
    keys = ("master_seed", "out", "family", "k", "sizes", "trials", "max_rounds", "workers", "fraction", "metrics")
    return base.with_overrides(**{key: getattr(args, key, None) for key in keys})


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ex.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "report":
            print(ex.cmd_report(args.csv).text())
            return EXIT_OK
        cfg = load_config(args)
        if args.command == "generate":
            paths = ex.cmd_generate(cfg)
            print(f"wrote {len(paths)} graphs to {Path(cfg.out) / 'graphs'}")
        else:
            handler = {"spread": ex.cmd_spread, "lowerbound": ex.cmd_lowerbound, "structure": ex.cmd_structure}
            print(f"wrote {handler[args.command](cfg)}")
    except (ex.ConfigError, ex.ReportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
