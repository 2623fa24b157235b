# promisekit/main.py
import argparse
import logging
import sys
from typing import List, Optional

from promisekit import config
from promisekit.errors import PromiseKitError
from promisekit.routers import check, converge, proxy, simulate, translate

logger = logging.getLogger("promisekit")


def build_parser() -> argparse.ArgumentParser:
    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=["text", "json"], default=config.DEFAULT_FORMAT)
    output.add_argument("--out", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="promisekit",
        description="Model, check and simulate systems of promises between autonomous agents.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register command routers
    check.register(subparsers, [output])
    simulate.register(subparsers, [output])
    proxy.register(subparsers, [output])
    translate.register(subparsers, [output])
    converge.register(subparsers, [output])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=config.LOG_LEVEL,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        return args.handler(args)
    except PromiseKitError as e:
        logger.error("%s: %s", args.command, e.detail)
        return e.exit_code
    except OSError as e:
        logger.error("%s: %s", args.command, e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
