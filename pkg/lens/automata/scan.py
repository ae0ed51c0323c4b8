"""
Shortcut Scan
Parallel-prefix evaluation of state sequences by composing transformations.
"""

import math
from typing import List, Sequence

from lens.automata.fsa import Fsa, State, Transformation, compose


def scan_levels(n: int) -> int:
    """Doubling rounds an inclusive scan of n items needs."""
    return 0 if n <= 1 else math.ceil(math.log2(n))


def prefix_transformations(a: Fsa, word: Sequence[str]) -> List[Transformation]:
    """
    Inclusive prefix compositions of the word's symbol maps.

    Hillis-Steele doubling: in round r every item i >= 2^r absorbs item
    i - 2^r on its left. Composition is associative, so the result equals the
    serial left fold.

    Args:
        a: Automaton
        word: Symbols

    Returns:
        items[i] = transformation of word[0..i]
    """
    items = [a.transformation(symbol) for symbol in word]
    offset = 1
    while offset < len(items):
        items = [
            items[i] if i < offset else compose(items[i - offset], items[i])
            for i in range(len(items))
        ]
        offset *= 2
    return items


def scan_state_sequence(a: Fsa, q0: State, word: Sequence[str]) -> List[State]:
    """
    State sequence computed from prefix transformations applied to q0.

    Args:
        a: Automaton
        q0: Start state
        word: Symbols

    Returns:
        Same result as state_sequence(a, q0, word)
    """
    start = a.state_index(q0)
    return [a.states[t(start)] for t in prefix_transformations(a, word)]
