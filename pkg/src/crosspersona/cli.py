"""Command-line entry point: ``crosspersona <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__, pipeline
from .config import PipelineConfig
from .errors import CrossPersonaError
from .providers import MODES

log = logging.getLogger("crosspersona")


class _Parser(argparse.ArgumentParser):
    # argparse already exits with 2 on usage errors; keep that, minus the traceback noise
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="JSON config file (paths resolve relative to it)")
    g.add_argument("--seed", type=int, help="global seed; all stage seeds derive from it")
    g.add_argument("--mode", choices=MODES, help="provider mode")
    g.add_argument("--workers", type=int, help="worker threads for per-user work")
    g.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value, e.g. --set inference.runs=5 (repeatable)")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="crosspersona", description="Cross-platform persona profiling pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    sub.add_parser("match", parents=[common], help="select linked users and verify platform activity")
    sub.add_parser("profile", parents=[common], help="build per-platform profiles")
    sub.add_parser("integrate", parents=[common], help="cross-platform profiles and trait-change tables")
    c = sub.add_parser("cluster", parents=[common], help="k-means with silhouette selection of k")
    c.add_argument("--features", action="append", metavar="SPEC",
                   help="traits:<platform>, traits (averaged) or trait_change; repeatable "
                        "(default: traits:<each platform> and trait_change)")
    sub.add_parser("stats", parents=[common], help="trait means, KS tests and point-biserial correlations")
    v = sub.add_parser("validate", parents=[common], help="error report against labeled traits")
    v.add_argument("--labeled", help="labeled JSONL (default: paths.labeled)")
    sub.add_parser("report", parents=[common], help="interest frequency and profile summary tables")
    return parser


def run(args: argparse.Namespace) -> None:
    cfg = PipelineConfig.load(args.config, args.overrides, args.seed, args.mode, args.workers)
    if args.command == "cluster":
        feats = args.features or [f"traits:{p}" for p in cfg.platforms] + ["trait_change"]
        for f in feats:
            print(f"cluster {f}: {pipeline.fmt_summary(pipeline.cmd_cluster(cfg, f))}")
        return
    if args.command == "validate":
        summary = pipeline.cmd_validate(cfg, args.labeled)
    else:
        summary = getattr(pipeline, f"cmd_{args.command}")(cfg)
    print(f"{args.command}: {pipeline.fmt_summary(summary)}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run(args)
    except CrossPersonaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
