"""
Main entry point for CLI.
"""

from __future__ import annotations

import sys
from typing import Optional

from spikedpca import settings
from spikedpca.errors import PreconditionError, SpikedPcaError
from spikedpca.log import get_logger, setup_logging

from .parser import (
    _expand_abbreviations,
    apply_config,
    build_parser,
    load_config,
    print_overview,
)
from .commands import report_error

LOGGER = get_logger("spikedpca.cli")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PRECONDITION = 2


def main(argv: Optional[list[str]] = None) -> int:
    """Main CLI entry point.

    Exit codes: 0 on success, 2 when a precondition is violated and 1 on
    numerical or I/O failures.
    """
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    argv = _expand_abbreviations(argv, parser)
    pre_args, _ = parser.parse_known_args(argv)

    setup_logging(
        pre_args.log_level or settings.LOG_LEVEL,
        pre_args.log_file or settings.LOG_FILE or None,
    )

    try:
        if pre_args.config:
            apply_config(parser, pre_args.command, load_config(pre_args.config))
        args = parser.parse_args(argv)

        if not hasattr(args, "func"):
            print_overview(parser)
            return EXIT_PRECONDITION
        LOGGER.debug("running %s with %s", args.command, vars(args))
        return int(args.func(args))
    except PreconditionError as exc:
        LOGGER.debug("precondition failed", exc_info=True)
        report_error(exc)
        return EXIT_PRECONDITION
    except SpikedPcaError as exc:
        LOGGER.debug("command failed", exc_info=True)
        report_error(exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
