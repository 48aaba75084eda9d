"""Command-line entry point.

Subcommands: annotate, evaluate, inspect, validate-config. The config path
comes from --config or the HOLOCAP_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, load_config
from .pipeline import cmd_annotate, cmd_evaluate, cmd_inspect
from .prompts import PromptStrategy

logger = logging.getLogger(__name__)

STRATEGY_CHOICES = ("basic", "role-play", "template", "rule")


def _strategy_arg(value: str | None) -> PromptStrategy | None:
    if value is None:
        return None
    return PromptStrategy(value.replace("-", "_"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holocap",
        description="Multifacet video annotation and retrieval evaluation pipeline.",
    )
    parser.add_argument(
        "--config",
        help="path to the JSON config (falls back to $HOLOCAP_CONFIG)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    annotate = sub.add_parser("annotate", help="run the captioning pipeline")
    annotate.add_argument("--force", action="store_true", help="reprocess stored videos")
    annotate.add_argument(
        "--only", help="comma-separated video ids to restrict the run to"
    )
    annotate.add_argument(
        "--strategy", choices=STRATEGY_CHOICES, help="override the config prompt strategy"
    )
    annotate.add_argument(
        "--mock-all", action="store_true", help="force every backend to the mock"
    )

    sub.add_parser("evaluate", help="compute benchmark grids and render the report")

    inspect = sub.add_parser("inspect", help="dump one stored record")
    inspect.add_argument("video_id")
    inspect.add_argument(
        "--strategy", choices=STRATEGY_CHOICES, help="strategy of the record to dump"
    )

    sub.add_parser("validate-config", help="check the config file and echo it back")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "annotate":
            only = tuple(x for x in args.only.split(",") if x) if args.only else None
            summary = cmd_annotate(
                config,
                force=args.force,
                only=only,
                strategy=_strategy_arg(args.strategy),
                mock_all=args.mock_all,
            )
            print(
                f"annotate: wrote {summary.written} record(s),"
                f" skipped {summary.skipped}, failures {len(summary.failures)}"
            )
            for video_id, message in summary.failures:
                print(f"  failed {video_id}: {message}", file=sys.stderr)
            return 0 if summary.ok else 1

        if args.command == "evaluate":
            report = cmd_evaluate(config)
            print(report, end="")
            return 0

        if args.command == "inspect":
            dump = cmd_inspect(config, args.video_id, strategy=_strategy_arg(args.strategy))
            print(dump, end="")
            return 0

        if args.command == "validate-config":
            print(json.dumps(_config_echo(config), indent=2, sort_keys=True))
            return 0
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    parser.error(f"unknown command {args.command!r}")
    return 2


def _config_echo(config) -> dict:
    return {
        "manifest_path": config.manifest_path,
        "output_dir": config.output_dir,
        "store_path": config.store_path,
        "visual_fps": config.visual_fps,
        "tone_fps": config.tone_fps,
        "style_fps": config.style_fps,
        "strategy": config.strategy.value,
        "seed": config.seed,
        "max_workers": config.max_workers,
        "exclude_audioless": config.exclude_audioless,
        "backends": dict(config.backends),
        "model_id": config.model_id,
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
        "frames_decoder": config.frames_decoder,
        "audio_decoder": config.audio_decoder,
        "evaluation_models": [m.name for m in config.evaluation_models],
        "report_format": config.report_format,
        "report_path": config.report_path,
    }


if __name__ == "__main__":
    raise SystemExit(main())
