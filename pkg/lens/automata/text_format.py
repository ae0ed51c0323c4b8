"""
Automaton Text Formats
Line-oriented .fsa and .cascade files.

FSA:
    states: A B
    alphabet: 0 1
    0: A A          # δ(0, A) = A, δ(0, B) = A
    1: B B

Cascade (component k lists k upstream states after the symbol):
    alphabet: p q
    component 0:
    states: a b
    p: a a
    q: b b
    component 1:
    states: 0 1
    p a: 1 0
    p b: 0 1
    q a: 0 1
    q b: 1 0
    cover: (a,0) -> X0
"""

import re
from pathlib import Path
from typing import Dict, Hashable, List, Optional, Tuple, Union

from lens.automata.cascade import Cascade, CascadeComponent, CoveringMap
from lens.automata.fsa import AutomatonError, Fsa
from lens.utils.formatting import format_state

_COMPONENT_HEADER = re.compile(r"^component\s+(\d+)\s*:$")
_COVER_LINE = re.compile(r"^cover\s*:\s*(.+?)\s*->\s*(\S+)$")


class FsaFormatError(AutomatonError):
    """Custom exception for malformed automaton files"""
    pass


def _content_lines(text: str) -> List[Tuple[int, str]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((number, line))
    return lines


def _split_entry(number: int, line: str) -> Tuple[str, List[str]]:
    if ":" not in line:
        raise FsaFormatError(f"Line {number}: expected 'key: values', got {line!r}")
    key, values = line.split(":", 1)
    return key.strip(), values.split()


def parse_state_label(text: str) -> Hashable:
    """'(a,0)' → ('a', '0'); anything else stays a string."""
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        return tuple(part.strip() for part in text[1:-1].split(",") if part.strip())
    return text


def _rows_to_fsa(
    states: Optional[List[str]],
    alphabet: Optional[List[str]],
    rows: Dict[str, Tuple[int, List[str]]],
) -> Fsa:
    if states is None:
        raise FsaFormatError("Missing 'states:' line")
    if alphabet is None:
        raise FsaFormatError("Missing 'alphabet:' line")

    unknown = [symbol for symbol in rows if symbol not in alphabet]
    if unknown:
        raise FsaFormatError(f"Transition rows for symbols not in the alphabet: {unknown}")

    delta = {}
    for symbol in alphabet:
        if symbol not in rows:
            raise FsaFormatError(f"Incomplete table: no row for symbol {symbol!r}")
        number, targets = rows[symbol]
        if len(targets) != len(states):
            raise FsaFormatError(
                f"Line {number}: row {symbol!r} has {len(targets)} entries, expected {len(states)}"
            )
        for state, target in zip(states, targets):
            if target not in states:
                raise FsaFormatError(f"Line {number}: {target!r} is not a state")
            delta[(symbol, state)] = target
    return Fsa.from_delta(alphabet, states, delta)


def parse_fsa(text: str) -> Fsa:
    """
    Parse the FSA text format.

    Args:
        text: File contents

    Returns:
        Fsa with string state labels
    """
    states = alphabet = None
    rows: Dict[str, Tuple[int, List[str]]] = {}
    for number, line in _content_lines(text):
        key, values = _split_entry(number, line)
        if key == "states":
            states = values
        elif key == "alphabet":
            alphabet = values
        elif key in rows:
            raise FsaFormatError(f"Line {number}: duplicate row for symbol {key!r}")
        else:
            rows[key] = (number, values)
    return _rows_to_fsa(states, alphabet, rows)


def load_fsa(path: Union[str, Path]) -> Fsa:
    return parse_fsa(Path(path).read_text(encoding="utf-8"))


def format_fsa(a: Fsa) -> str:
    """Render an automaton in the FSA text format."""
    lines = [
        "states: " + " ".join(format_state(q) for q in a.states),
        "alphabet: " + " ".join(a.alphabet),
    ]
    for symbol, row in zip(a.alphabet, a.table):
        lines.append(f"{symbol}: " + " ".join(format_state(a.states[q]) for q in row))
    return "\n".join(lines) + "\n"


def parse_cascade(text: str) -> Tuple[Cascade, Optional[CoveringMap]]:
    """
    Parse the cascade text format.

    Args:
        text: File contents

    Returns:
        Tuple of (cascade, covering map or None when no 'cover:' lines are present)
    """
    alphabet: Optional[List[str]] = None
    sections: List[dict] = []
    cover: Dict[Hashable, Hashable] = {}

    for number, line in _content_lines(text):
        header = _COMPONENT_HEADER.match(line)
        cover_match = _COVER_LINE.match(line)
        if header:
            index = int(header.group(1))
            if index != len(sections):
                raise FsaFormatError(f"Line {number}: expected component {len(sections)}, got {index}")
            sections.append({"states": None, "rows": {}, "line": number})
        elif cover_match:
            label = parse_state_label(cover_match.group(1))
            if label in cover:
                raise FsaFormatError(f"Line {number}: duplicate cover entry for {cover_match.group(1)}")
            cover[label] = cover_match.group(2)
        else:
            key, values = _split_entry(number, line)
            if key == "alphabet":
                alphabet = values
            elif not sections:
                raise FsaFormatError(f"Line {number}: {key!r} appears before any 'component k:' header")
            elif key == "states":
                sections[-1]["states"] = values
            else:
                parts = tuple(key.split())
                if parts in sections[-1]["rows"]:
                    raise FsaFormatError(f"Line {number}: duplicate row {key!r}")
                sections[-1]["rows"][parts] = (number, values)

    if alphabet is None:
        raise FsaFormatError("Missing 'alphabet:' line")

    components = []
    for k, section in enumerate(sections):
        states = section["states"]
        if states is None:
            raise FsaFormatError(f"Component {k} (line {section['line']}) has no 'states:' line")
        table = {}
        for parts, (number, targets) in section["rows"].items():
            if len(parts) != k + 1:
                raise FsaFormatError(
                    f"Line {number}: component {k} rows need a symbol and {k} upstream state(s)"
                )
            if len(targets) != len(states):
                raise FsaFormatError(
                    f"Line {number}: row has {len(targets)} entries, expected {len(states)}"
                )
            symbol, upstream = parts[0], tuple(parts[1:])
            for own, target in zip(states, targets):
                table[(symbol, upstream, own)] = target
        components.append(CascadeComponent(f"component {k}", tuple(states), table))

    try:
        cascade = Cascade(tuple(alphabet), tuple(components))
    except AutomatonError as e:
        raise FsaFormatError(f"Incomplete cascade: {e}") from e
    return cascade, (CoveringMap(cover) if cover else None)


def load_cascade(path: Union[str, Path]) -> Tuple[Cascade, Optional[CoveringMap]]:
    return parse_cascade(Path(path).read_text(encoding="utf-8"))
