"""
Cascades and Covering
Feedforward cascades of automata, flattening, and verification of covering
maps φ: Q_Y → Q_X.
"""

import itertools
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from lens.automata.fsa import AutomatonError, Fsa, State, SymbolClass, SymbolKind, Transformation
from lens.config import logger

JointState = Tuple[str, ...]
CascadeKey = Tuple[str, Tuple[str, ...], str]


class CascadeError(AutomatonError):
    """Custom exception for malformed cascades or joint states"""
    pass


class CoveringError(AutomatonError):
    """Custom exception for covering maps that cannot be checked"""
    pass


@dataclass(frozen=True)
class CascadeComponent:
    """
    One stage of a cascade.

    table maps (symbol, upstream states, own state) → next own state, where the
    upstream tuple holds the states of all earlier components.
    """

    name: str
    states: Tuple[str, ...]
    table: Mapping[CascadeKey, str]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "table", MappingProxyType(dict(self.table)))
        if not self.states:
            raise CascadeError(f"Component {self.name!r} has no states")


@dataclass(frozen=True)
class Cascade:
    """Ordered feedforward composition of components over one alphabet"""

    alphabet: Tuple[str, ...]
    components: Tuple[CascadeComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "components", tuple(self.components))
        for k, component in enumerate(self.components):
            upstream_sets = [c.states for c in self.components[:k]]
            for symbol in self.alphabet:
                for upstream in itertools.product(*upstream_sets):
                    for own in component.states:
                        key = (symbol, tuple(upstream), own)
                        if key not in component.table:
                            raise CascadeError(f"Component {k} ({component.name!r}) has no entry for {key}")
                        if component.table[key] not in component.states:
                            raise CascadeError(
                                f"Component {k} entry {key} -> {component.table[key]!r} is not one of its states"
                            )

    def __len__(self) -> int:
        return len(self.components)

    def validate_joint(self, joint: Sequence[str]) -> JointState:
        joint = tuple(joint)
        if len(joint) != len(self.components):
            raise CascadeError(f"Joint state {joint} has {len(joint)} parts, cascade has {len(self.components)}")
        for k, (part, component) in enumerate(zip(joint, self.components)):
            if part not in component.states:
                raise CascadeError(f"Joint state {joint}: {part!r} is not a state of component {k}")
        return joint


def cascade_step(c: Cascade, joint: Sequence[str], symbol: str) -> JointState:
    """
    Advance every component by one symbol.

    Updates are synchronous: component k reads the pre-step states of
    components 0..k-1 together with its own pre-step state.

    Args:
        c: Cascade
        joint: Current joint state
        symbol: Input symbol

    Returns:
        Next joint state
    """
    joint = c.validate_joint(joint)
    if symbol not in c.alphabet:
        raise CascadeError(f"Unknown symbol {symbol!r}; alphabet is {list(c.alphabet)}")
    return tuple(
        component.table[(symbol, joint[:k], joint[k])]
        for k, component in enumerate(c.components)
    )


def cascade_state_sequence(c: Cascade, joint_q0: Sequence[str], word: Sequence[str]) -> List[JointState]:
    """Joint states visited while reading word, one per symbol."""
    joint = c.validate_joint(joint_q0)
    visited = []
    for symbol in word:
        joint = cascade_step(c, joint, symbol)
        visited.append(joint)
    return visited


def flatten(c: Cascade) -> Fsa:
    """
    Equivalent automaton on the product of component state sets.

    States are joint-state tuples in lexicographic component order.
    """
    states = tuple(itertools.product(*(component.states for component in c.components)))
    delta = {
        (symbol, joint): cascade_step(c, joint, symbol)
        for symbol in c.alphabet
        for joint in states
    }
    return Fsa.from_delta(c.alphabet, states, delta)


def component_kind(c: Cascade, k: int) -> SymbolKind:
    """
    Reset, Permutation or Mixed, judged over every (symbol, upstream) row of component k.

    Rows that are the identity count towards both reset and permutation.
    """
    if not 0 <= k < len(c.components):
        raise CascadeError(f"Cascade has no component {k}")
    component = c.components[k]
    index = {q: i for i, q in enumerate(component.states)}
    upstream_sets = [other.states for other in c.components[:k]]

    classes = []
    for symbol in c.alphabet:
        for upstream in itertools.product(*upstream_sets):
            row = Transformation(tuple(
                index[component.table[(symbol, tuple(upstream), own)]] for own in component.states
            ))
            classes.append(SymbolClass.of(row))

    if all(cls.is_reset for cls in classes):
        return SymbolKind.RESET
    if all(cls.is_permutation for cls in classes):
        return SymbolKind.PERMUTATION
    return SymbolKind.MIXED


@dataclass(frozen=True)
class CoveringMap:
    """Partial map φ from Y-states to X-states"""

    mapping: Mapping[Hashable, Hashable]

    def __post_init__(self):
        object.__setattr__(self, "mapping", MappingProxyType(dict(self.mapping)))

    @property
    def domain(self) -> Tuple[Hashable, ...]:
        return tuple(self.mapping.keys())

    def __call__(self, q: Hashable) -> Hashable:
        return self.mapping[q]

    @classmethod
    def identity(cls, a: Fsa) -> "CoveringMap":
        return cls({q: q for q in a.states})


@dataclass(frozen=True)
class CoveringResult:
    """Outcome of a covering check, with the witnessing (symbol, Y-state) on failure"""

    covers: bool
    reason: str
    counterexample: Optional[Tuple[str, Hashable]] = None

    def __bool__(self) -> bool:
        return self.covers


def check_covering(y: Fsa, x: Fsa, phi: CoveringMap) -> CoveringResult:
    """
    Verify that Y covers X through φ.

    Requires φ surjective onto Q_X, the domain of φ closed under δ_Y, and
    φ(δ_Y(σ, q)) = δ_X(σ, φ(q)) for every symbol σ and every q in the domain.

    Args:
        y: Covering automaton
        x: Covered automaton
        phi: Partial map from Y-states to X-states

    Returns:
        CoveringResult; on failure the first (σ, q_Y) found in alphabet × domain order
    """
    if set(y.alphabet) != set(x.alphabet):
        raise CoveringError(f"Alphabets differ: {list(y.alphabet)} vs {list(x.alphabet)}")
    unknown = [q for q in phi.domain if q not in set(y.states)]
    if unknown:
        raise CoveringError(f"φ is defined on states {unknown} that Y does not have")
    foreign = [q for q in phi.mapping.values() if q not in set(x.states)]
    if foreign:
        raise CoveringError(f"φ maps onto {foreign}, which are not states of X")

    missing = [q for q in x.states if q not in set(phi.mapping.values())]
    if missing:
        return CoveringResult(False, f"φ is not surjective; missing X-states {missing}")

    for symbol in x.alphabet:
        for q in phi.domain:
            target = y.delta(symbol, q)
            if target not in phi.mapping:
                return CoveringResult(
                    False,
                    f"δ_Y({symbol!r}, {q!r}) = {target!r} leaves the domain of φ",
                    (symbol, q),
                )
            if phi(target) != x.delta(symbol, phi(q)):
                return CoveringResult(
                    False,
                    f"φ(δ_Y({symbol!r}, {q!r})) = {phi(target)!r} but δ_X({symbol!r}, φ({q!r})) = "
                    f"{x.delta(symbol, phi(q))!r}",
                    (symbol, q),
                )

    logger.debug(f"Covering verified on {len(phi.domain)} Y-state(s)")
    return CoveringResult(True, "covers")


def projection_map(product: Fsa, index: int) -> CoveringMap:
    """Map each tuple state of a product automaton to its index-th part."""
    return CoveringMap({q: q[index] for q in product.states})


def compose_maps(first: CoveringMap, second: CoveringMap) -> CoveringMap:
    """
    φ₂∘φ₁: apply first, then second, on the part of first's domain that lands
    in second's domain.
    """
    mapping: Dict[Hashable, Hashable] = {}
    for q, image in first.mapping.items():
        if image in second.mapping:
            mapping[q] = second(image)
    return CoveringMap(mapping)
