"""
Lens Utilities
Helper functions and utilities.
"""

from lens.utils.formatting import (
    format_float,
    format_state,
    format_states,
    parse_int_list,
    parse_word,
    truncate_text,
)

__all__ = [
    'format_float',
    'format_state',
    'format_states',
    'parse_int_list',
    'parse_word',
    'truncate_text',
]
