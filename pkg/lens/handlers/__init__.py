"""
Command-Line Handlers
Argument parsing and one handler per subcommand.
"""

from lens.handlers.parser import LensArgumentParser, UsageError, build_parser
from lens.handlers.commands import HANDLERS, CommandOutcome

__all__ = [
    'LensArgumentParser',
    'UsageError',
    'build_parser',
    'HANDLERS',
    'CommandOutcome',
]
