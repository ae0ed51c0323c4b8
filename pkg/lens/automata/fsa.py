"""
Finite State Automata
Automata (Σ, Q, δ), state transformations, state-sequence functions and
symbol classification.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Hashable, Iterable, List, Mapping, Sequence, Tuple

State = Hashable


class AutomatonError(ValueError):
    """Custom exception for invalid automata, symbols or states"""
    pass


@dataclass(frozen=True)
class Transformation:
    """Total map Q → Q over state indices; image[q] is the image of q"""

    image: Tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(q) for q in self.image)
        bad = [q for q in image if not 0 <= q < len(image)]
        if bad:
            raise AutomatonError(f"Transformation image {list(image)} has invalid state indices {bad}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, n: int) -> "Transformation":
        return cls(tuple(range(n)))

    @classmethod
    def constant(cls, n: int, q: int) -> "Transformation":
        return cls((q,) * n)

    def __call__(self, q: int) -> int:
        return self.image[q]

    def __len__(self) -> int:
        return len(self.image)

    def then(self, other: "Transformation") -> "Transformation":
        """Apply self first, then other."""
        if len(other) != len(self):
            raise AutomatonError(f"Cannot compose maps on {len(self)} and {len(other)} states")
        return Transformation(tuple(other.image[q] for q in self.image))

    @property
    def is_identity(self) -> bool:
        return self.image == tuple(range(len(self.image)))

    @property
    def is_constant(self) -> bool:
        return len(set(self.image)) <= 1

    @property
    def is_bijection(self) -> bool:
        return len(set(self.image)) == len(self.image)

    def inverse(self) -> "Transformation":
        if not self.is_bijection:
            raise AutomatonError(f"Transformation {list(self.image)} is not invertible")
        inverse = [0] * len(self.image)
        for q, target in enumerate(self.image):
            inverse[target] = q
        return Transformation(tuple(inverse))


def compose(first: Transformation, second: Transformation) -> Transformation:
    """Transformation that applies first, then second."""
    return first.then(second)


class SymbolKind(str, Enum):
    """Derived label of a symbol's transformation"""
    RESET = "Reset"
    PERMUTATION = "Permutation"
    MIXED = "Mixed"


@dataclass(frozen=True)
class SymbolClass:
    """Reset / permutation / identity flags of one transformation"""

    is_reset: bool
    is_permutation: bool
    is_identity: bool

    @property
    def kind(self) -> SymbolKind:
        # The identity is flagged as both and labelled Permutation
        if self.is_permutation:
            return SymbolKind.PERMUTATION
        if self.is_reset:
            return SymbolKind.RESET
        return SymbolKind.MIXED

    @property
    def label(self) -> str:
        return self.kind.value

    @classmethod
    def of(cls, t: Transformation) -> "SymbolClass":
        return cls(
            is_reset=t.is_constant or t.is_identity,
            is_permutation=t.is_bijection,
            is_identity=t.is_identity,
        )


@dataclass(frozen=True)
class Fsa:
    """
    Finite state automaton (Σ, Q, δ).

    table[s][q] holds the index of δ(alphabet[s], states[q]).
    """

    alphabet: Tuple[str, ...]
    states: Tuple[State, ...]
    table: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        alphabet = tuple(str(s) for s in self.alphabet)
        states = tuple(self.states)
        table = tuple(tuple(int(q) for q in row) for row in self.table)

        if len(set(alphabet)) != len(alphabet):
            raise AutomatonError(f"Duplicate symbols in alphabet {list(alphabet)}")
        if len(set(states)) != len(states):
            raise AutomatonError(f"Duplicate states in {list(states)}")
        if not states:
            raise AutomatonError("An automaton needs at least one state")
        if len(table) != len(alphabet):
            raise AutomatonError(f"Table has {len(table)} rows for {len(alphabet)} symbols")
        for symbol, row in zip(alphabet, table):
            if len(row) != len(states):
                raise AutomatonError(f"Row for symbol {symbol!r} has {len(row)} entries, expected {len(states)}")
            bad = [q for q in row if not 0 <= q < len(states)]
            if bad:
                raise AutomatonError(f"Row for symbol {symbol!r} has invalid targets {bad}")

        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_symbol_index", {s: i for i, s in enumerate(alphabet)})
        object.__setattr__(self, "_state_index", {q: i for i, q in enumerate(states)})

    @classmethod
    def from_delta(
        cls,
        alphabet: Sequence[str],
        states: Sequence[State],
        delta: Mapping[Tuple[str, State], State],
    ) -> "Fsa":
        """
        Build from a (symbol, state) → state mapping.

        Args:
            alphabet: Symbols Σ
            states: State labels Q
            delta: Total transition mapping

        Returns:
            Fsa
        """
        index = {q: i for i, q in enumerate(states)}
        rows = []
        for symbol in alphabet:
            row = []
            for q in states:
                if (symbol, q) not in delta:
                    raise AutomatonError(f"Transition table missing δ({symbol!r}, {q!r})")
                target = delta[(symbol, q)]
                if target not in index:
                    raise AutomatonError(f"δ({symbol!r}, {q!r}) = {target!r} is not a state")
                row.append(index[target])
            rows.append(tuple(row))
        return cls(tuple(alphabet), tuple(states), tuple(rows))

    def symbol_index(self, symbol: str) -> int:
        try:
            return self._symbol_index[symbol]
        except KeyError:
            raise AutomatonError(f"Unknown symbol {symbol!r}; alphabet is {list(self.alphabet)}") from None

    def state_index(self, state: State) -> int:
        try:
            return self._state_index[state]
        except (KeyError, TypeError):
            raise AutomatonError(f"Unknown state {state!r}; states are {list(self.states)}") from None

    def delta(self, symbol: str, state: State) -> State:
        return self.states[self.table[self.symbol_index(symbol)][self.state_index(state)]]

    def transformation(self, symbol: str) -> Transformation:
        """The map f_σ: Q → Q of one symbol."""
        return Transformation(self.table[self.symbol_index(symbol)])

    def transformations(self) -> List[Transformation]:
        return [Transformation(row) for row in self.table]


def run(a: Fsa, q0: State, word: Iterable[str]) -> State:
    """
    Final state after reading word from q0.

    Args:
        a: Automaton
        q0: Start state
        word: Symbols, read left to right

    Returns:
        State label
    """
    q = a.state_index(q0)
    for symbol in word:
        q = a.table[a.symbol_index(symbol)][q]
    return a.states[q]


def state_sequence(a: Fsa, q0: State, word: Sequence[str]) -> List[State]:
    """
    States visited while reading word; element i is the state after word[0..i].

    Args:
        a: Automaton
        q0: Start state (not included in the output)
        word: Symbols

    Returns:
        One state per symbol
    """
    q = a.state_index(q0)
    visited = []
    for symbol in word:
        q = a.table[a.symbol_index(symbol)][q]
        visited.append(a.states[q])
    return visited


def classify_symbol(a: Fsa, symbol: str) -> SymbolClass:
    """Reset / permutation / identity flags of one symbol."""
    return SymbolClass.of(a.transformation(symbol))


def transformation_of(a: Fsa, word: Sequence[str]) -> Transformation:
    """
    Transformation induced by a word, earlier symbols applied first.

    Args:
        a: Automaton
        word: Symbols

    Returns:
        Composite transformation (identity for the empty word)
    """
    result = Transformation.identity(len(a.states))
    for symbol in word:
        result = result.then(a.transformation(symbol))
    return result


def reset_automaton() -> Fsa:
    """Two-state reset automaton: '0' sends every state to A, '1' to B."""
    return Fsa.from_delta(
        ("0", "1"),
        ("A", "B"),
        {("0", "A"): "A", ("0", "B"): "A", ("1", "A"): "B", ("1", "B"): "B"},
    )


def flip_flop() -> Fsa:
    """Reset automaton with an identity symbol 'e'."""
    return extend_alphabet(reset_automaton(), ("e",))


def cyclic_counter(n: int) -> Fsa:
    """Counter modulo n over the single symbol '+1'."""
    if n < 1:
        raise AutomatonError(f"cyclic_counter needs n >= 1, got {n}")
    return Fsa(("+1",), tuple(str(q) for q in range(n)), (tuple((q + 1) % n for q in range(n)),))


def extend_alphabet(a: Fsa, symbols: Iterable[str]) -> Fsa:
    """
    Add identity rows for symbols not yet in the alphabet.

    Args:
        a: Automaton
        symbols: Symbols to include

    Returns:
        Automaton over the union alphabet, new symbols appended in order
    """
    alphabet = list(a.alphabet)
    table = list(a.table)
    for symbol in symbols:
        if symbol not in alphabet:
            alphabet.append(symbol)
            table.append(tuple(range(len(a.states))))
    return Fsa(tuple(alphabet), a.states, tuple(table))


def direct_product(x: Fsa, y: Fsa) -> Fsa:
    """
    Product automaton on pairs of states over the union alphabet.

    A symbol missing from one factor leaves that factor's state unchanged.

    Args:
        x: First factor
        y: Second factor

    Returns:
        Automaton with states (qx, qy) in lexicographic order
    """
    alphabet = list(x.alphabet) + [s for s in y.alphabet if s not in x.alphabet]
    x_ext = extend_alphabet(x, alphabet)
    y_ext = extend_alphabet(y, alphabet)
    states = tuple((qx, qy) for qx in x.states for qy in y.states)
    delta: Dict[Tuple[str, State], State] = {}
    for symbol in alphabet:
        for qx, qy in states:
            delta[(symbol, (qx, qy))] = (x_ext.delta(symbol, qx), y_ext.delta(symbol, qy))
    return Fsa.from_delta(tuple(alphabet), states, delta)
