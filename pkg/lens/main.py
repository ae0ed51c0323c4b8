#!/usr/bin/env python3
"""
Lens
Main entry point for the command line.
"""

import sys
from typing import Optional, Sequence

from lens.config import logger
from lens.handlers import HANDLERS, UsageError, build_parser
from lens.services.run_service import RunService

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv, run one subcommand and return its exit status.

    0 when every asserted invariant holds, 1 when one failed, 2 on a usage or
    input error. Runs that reach a handler are recorded in the run ledger.

    Args:
        argv: Arguments without the program name (default sys.argv[1:])

    Returns:
        Exit status
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"lens: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return e.code if isinstance(e.code, int) else EXIT_OK

    name = f"{args.group} {args.command}"
    handler = HANDLERS[(args.group, args.command)]
    manifest_text = None
    try:
        outcome = handler(args)
        exit_code = outcome.exit_code
        manifest_text = outcome.manifest.to_text()
        path = outcome.manifest.write(args.out)
        logger.info(f"Manifest written to {path}")
    except (ValueError, OSError) as e:
        print(f"lens: error: {e}", file=sys.stderr)
        logger.debug(f"{name} rejected its input", exc_info=True)
        exit_code = EXIT_USAGE

    if name != "runs list":
        RunService.record_run(name, exit_code, seed=getattr(args, "seed", None), manifest=manifest_text)
    return exit_code


def main() -> None:
    """Run the command line."""
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
