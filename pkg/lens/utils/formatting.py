"""
Formatting Utilities
Helper functions for rendering and parsing command-line values.
"""

from typing import Hashable, Iterable, List, Sequence


def format_state(state: Hashable) -> str:
    """
    Render a state label; tuple states become '(a,0)'.

    Args:
        state: State label

    Returns:
        Printable label without spaces
    """
    if isinstance(state, tuple):
        return "(" + ",".join(format_state(part) for part in state) + ")"
    return str(state)


def format_states(states: Iterable[Hashable]) -> str:
    """Space-separated state labels."""
    return " ".join(format_state(q) for q in states)


def format_float(value: float) -> str:
    """
    Render a float reproducibly.

    Uses 17 significant digits so the text round-trips to the same double.
    """
    return f"{value:.17g}"


def parse_word(text: str, alphabet: Sequence[str]) -> List[str]:
    """
    Split a word into symbols.

    Space- or comma-separated input is split on the separators; otherwise,
    when every symbol is a single character, the word is split per character.

    Args:
        text: Word as typed
        alphabet: Known symbols

    Returns:
        List of symbols (unvalidated)
    """
    text = text.strip()
    if not text:
        return []
    if any(sep in text for sep in (" ", ",")):
        return [part for part in text.replace(",", " ").split() if part]
    if all(len(symbol) == 1 for symbol in alphabet):
        return list(text)
    return [text]


def parse_int_list(text: str) -> List[int]:
    """'2,0,1' → [2, 0, 1]"""
    text = text.strip()
    if not text:
        return []
    try:
        return [int(part) for part in text.replace(" ", ",").split(",") if part]
    except ValueError:
        raise ValueError(f"Expected a comma-separated list of integers, got {text!r}") from None


def truncate_text(text: str, max_length: int = 100, suffix: str = "...") -> str:
    """
    Truncate text to maximum length with suffix.

    Args:
        text: Text to truncate
        max_length: Maximum length
        suffix: Suffix to add if truncated

    Returns:
        Truncated text
    """
    if len(text) <= max_length:
        return text
    return text[:max_length - len(suffix)] + suffix
