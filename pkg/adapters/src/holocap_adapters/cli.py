"""Command line front end: serve one adapter, or check one for conformance."""

from __future__ import annotations

import argparse
import logging
import sys

from .conformance import conformance_check
from .engines import EngineError, EngineUnavailable
from .manifest import EXPERT_KINDS
from .server import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holocap-adapter")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run one expert adapter until interrupted")
    p_serve.add_argument("--kind", required=True, choices=EXPERT_KINDS)
    p_serve.add_argument("--model", default="stub", help="engine to load (default: stub)")
    p_serve.add_argument("--port", type=int, default=0, help="0 picks a free port")
    p_serve.add_argument("--device", default="cpu")

    p_check = sub.add_parser("conformance", help="schema-check a running adapter")
    p_check.add_argument("endpoint", help="adapter base URL, e.g. http://127.0.0.1:8001")
    p_check.add_argument("--kind", required=True, choices=EXPERT_KINDS)
    p_check.add_argument("--timeout", type=float, default=30.0)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        try:
            server = serve(args.kind, args.model, port=args.port, device=args.device)
        except EngineUnavailable as exc:
            print(f"model unavailable: {exc}", file=sys.stderr)
            return 1
        except EngineError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(
            f"serving {args.kind} adapter ({args.model}) on port {server.port}",
            flush=True,
        )
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            server.shutdown()
        return 0

    try:
        report = conformance_check(args.endpoint, args.kind, timeout=args.timeout)
    except OSError as exc:
        print(f"error: endpoint unreachable: {exc}", file=sys.stderr)
        return 2
    print(report.render(), end="")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
