"""
Automaton Catalog
Hand-built automata, cascades and covering witnesses shipped with the package.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from lens.automata.cascade import Cascade, CascadeComponent, CoveringMap, component_kind, flatten
from lens.automata.fsa import Fsa, SymbolKind, cyclic_counter, flip_flop, reset_automaton
from lens.automata.semigroup import classify_automaton

MIXED_ALPHABET = ("p", "q", "e")


@dataclass(frozen=True)
class CatalogEntry:
    """A named automaton, optionally with a cascade that covers it"""

    name: str
    description: str
    automaton: Fsa
    component_kinds: Tuple[SymbolKind, ...]
    cascade: Optional[Cascade] = None
    cover: Optional[CoveringMap] = None
    expect_cover: bool = True

    @property
    def covering_automaton(self) -> Optional[Fsa]:
        """The automaton playing Y in the covering check, if any."""
        if self.cascade is not None:
            return flatten(self.cascade)
        if self.cover is not None:
            return self.automaton
        return None


def mixed_target() -> Fsa:
    """
    Three-state automaton whose symbols p and q are mixed.

    p: [X1, X0, X0]; q: [X2, X0, X0]; e: identity.
    """
    return Fsa(
        MIXED_ALPHABET,
        ("X0", "X1", "X2"),
        ((1, 0, 0), (2, 0, 0), (0, 1, 2)),
    )


def mixed_cascade() -> Cascade:
    """
    Reset component feeding a two-state permutation component.

    Component 0 (reset): p → a, q → b, e keeps its state.
    Component 1 (permutation): p swaps while upstream is a, q swaps while
    upstream is b; every other row is the identity.
    """
    reset_table = {}
    for own in ("a", "b"):
        reset_table[("p", (), own)] = "a"
        reset_table[("q", (), own)] = "b"
        reset_table[("e", (), own)] = own

    swap = {"0": "1", "1": "0"}
    swapping = {("p", "a"), ("q", "b")}
    permutation_table = {}
    for symbol in MIXED_ALPHABET:
        for upstream in ("a", "b"):
            for own in ("0", "1"):
                permutation_table[(symbol, (upstream,), own)] = (
                    swap[own] if (symbol, upstream) in swapping else own
                )

    return Cascade(
        MIXED_ALPHABET,
        (
            CascadeComponent("reset", ("a", "b"), reset_table),
            CascadeComponent("parity", ("0", "1"), permutation_table),
        ),
    )


def mixed_cover() -> CoveringMap:
    """φ from the flattened mixed cascade onto mixed_target's states."""
    return CoveringMap({
        ("a", "0"): "X0",
        ("a", "1"): "X1",
        ("b", "0"): "X2",
        ("b", "1"): "X0",
    })


def flip_flop_swap() -> CoveringMap:
    """State-swapping map on the flip-flop; fails against its resets."""
    return CoveringMap({"A": "B", "B": "A"})


def _kind_of(a: Fsa) -> SymbolKind:
    return SymbolKind(classify_automaton(a).value)


def _kinds_of(cascade: Cascade) -> Tuple[SymbolKind, ...]:
    return tuple(component_kind(cascade, k) for k in range(len(cascade)))


def builtin_examples() -> Dict[str, CatalogEntry]:
    """
    The shipped catalog, keyed by name.

    Returns:
        reset2, flip_flop, cyclic_counter_2..5, mixed3 (with its cascade cover)
        and flip_flop_swap (a covering expected to fail)
    """
    entries = [
        CatalogEntry(
            "reset2",
            "two-state reset automaton over {0, 1}",
            reset_automaton(),
            (_kind_of(reset_automaton()),),
        ),
        CatalogEntry(
            "flip_flop",
            "reset automaton with identity symbol e",
            flip_flop(),
            (_kind_of(flip_flop()),),
        ),
    ]
    for n in (2, 3, 4, 5):
        counter = cyclic_counter(n)
        entries.append(CatalogEntry(
            f"cyclic_counter_{n}",
            f"counter modulo {n} over '+1'",
            counter,
            (_kind_of(counter),),
        ))

    cascade = mixed_cascade()
    entries.append(CatalogEntry(
        "mixed3",
        "mixed three-state automaton covered by a reset → permutation cascade",
        mixed_target(),
        _kinds_of(cascade),
        cascade=cascade,
        cover=mixed_cover(),
    ))
    entries.append(CatalogEntry(
        "flip_flop_swap",
        "flip-flop against itself under the state swap (not a covering)",
        flip_flop(),
        (_kind_of(flip_flop()),),
        cover=flip_flop_swap(),
        expect_cover=False,
    ))
    return {entry.name: entry for entry in entries}
