"""Command-line entry point: one subcommand per pipeline stage.

Exit codes: 0 success, 2 contract-violation budget exceeded, 3 cache miss
in replay mode, 4 configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .pipeline import (
    ConfigError,
    Pipeline,
    PipelineError,
    RunLock,
    emit_report,
    load_config,
)

# CLI subcommand -> pipeline stage name (where they differ only by spelling).
STAGE_COMMANDS = {
    "ingest": "ingest",
    "screen": "screen",
    "sectors": "sectors",
    "extract": "extract",
    "validate-predictors": "validate-predictors",
    "map-rdc": "map-rdc",
    "catalog": "catalog",
    "pairs": "pairs",
    "audit-plan": "audit-plan",
    "audit-metrics": "audit-metrics",
    "correct": "correct",
    "stats": "stats",
    "report": "report",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regmap",
        description="Replayable corpus pipeline, audit tooling, and statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the run config JSON")
        p.add_argument("--mode", choices=("live", "replay"), default="replay")
        p.add_argument("--cache", required=True, help="model/registry cache directory")
        p.add_argument("--out", required=True, help="run output directory")
        p.add_argument("--seed", type=int, default=0)

    for name in STAGE_COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage")
        common(p)
        p.add_argument("--stage", default=None, help=argparse.SUPPRESS)

    run = sub.add_parser("run", help="run the full stage chain, resuming if partial")
    common(run)
    run.add_argument("--stage", default=None,
                     help="run only up to and including this stage")

    serve = sub.add_parser("audit-serve", help="serve blinded audit tasks over HTTP")
    common(serve)
    serve.add_argument("--ledger", required=True, help="label ledger JSONL path")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8321)

    bundle = sub.add_parser("emit-report", help="copy selected artifacts to a bundle")
    common(bundle)
    bundle.add_argument("--select", nargs="*", default=[],
                        help="artifact names (e.g. multipliers, per_regulation)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "audit-serve":
            from .audit_service import create_app, load_tasks_from_plan
            import uvicorn

            store = load_tasks_from_plan(args.out, args.ledger)
            uvicorn.run(create_app(store), host=args.host, port=args.port)
            return 0

        pipeline = Pipeline(config, args.mode, args.cache, args.out, seed=args.seed)
        if args.command == "emit-report":
            emit_report(args.out, args.select)
            return 0
        with RunLock(pipeline.out):
            if args.command == "run":
                from .pipeline import STAGE_ORDER

                stages = None
                if args.stage:
                    if args.stage not in STAGE_ORDER:
                        raise ConfigError(f"unknown stage {args.stage!r}")
                    cut = STAGE_ORDER.index(args.stage) + 1
                    stages = [s for s in STAGE_ORDER[:cut]
                              if s != "audit-metrics" or config.get("audit_ledger")]
                pipeline.run_all(stages)
            else:
                pipeline.run_stage(STAGE_COMMANDS[args.command])
        return 0
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
