"""
Transformation Semigroups
Composition closure of state transformations, group tests and automaton
classification.
"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

from lens.automata.fsa import AutomatonError, Fsa, Transformation
from lens.config import CLOSURE_MAX_SIZE, logger


class SemigroupOverflowError(AutomatonError):
    """Raised when a closure would exceed its size bound"""

    def __init__(self, max_size: int, partial_size: int):
        super().__init__(
            f"Semigroup closure exceeded max_size={max_size} (reached {partial_size} elements)"
        )
        self.max_size = max_size
        self.partial_size = partial_size


@dataclass(frozen=True)
class Semigroup:
    """Composition-closed set of transformations, in insertion order"""

    elements: Tuple[Transformation, ...]
    generator_labels: Tuple[str, ...] = ()
    # Set by semigroup_closure, whose output is closed by construction
    _closed: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.elements:
            raise AutomatonError("A semigroup needs at least one element")
        if len({len(t) for t in self.elements}) != 1:
            raise AutomatonError("All elements must act on the same state set")
        if len(set(self.elements)) != len(self.elements):
            raise AutomatonError("Semigroup elements must be distinct")

        if self._closed:
            return
        members = set(self.elements)
        for a in self.elements:
            for b in self.elements:
                if a.then(b) not in members:
                    raise AutomatonError(
                        f"Not closed: {list(a.image)} then {list(b.image)} is missing"
                    )

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, t: Transformation) -> bool:
        return t in set(self.elements)

    @property
    def degree(self) -> int:
        """Number of states acted on."""
        return len(self.elements[0])


def semigroup_closure(
    generators: Iterable[Transformation],
    max_size: int = CLOSURE_MAX_SIZE,
    labels: Optional[Sequence[str]] = None,
) -> Semigroup:
    """
    Breadth-first closure of generators under composition.

    Elements appear in discovery order: the distinct generators first, then
    products found by extending known elements with one generator at a time.

    Args:
        generators: Non-empty transformations on a common state set
        max_size: Abort once the closure would grow beyond this
        labels: Optional generator labels

    Returns:
        Semigroup generated by the input
    """
    generators = list(dict.fromkeys(generators))
    if not generators:
        raise AutomatonError("semigroup_closure needs at least one generator")
    if max_size < len(generators):
        raise AutomatonError(f"max_size={max_size} is smaller than {len(generators)} generators")

    elements = list(generators)
    seen = set(elements)
    queue = deque(elements)
    while queue:
        current = queue.popleft()
        for g in generators:
            product = current.then(g)
            if product in seen:
                continue
            if len(elements) >= max_size:
                raise SemigroupOverflowError(max_size, len(elements))
            seen.add(product)
            elements.append(product)
            queue.append(product)

    logger.debug(f"Closure of {len(generators)} generator(s) has {len(elements)} element(s)")
    return Semigroup(tuple(elements), tuple(labels or ()), _closed=True)


def transformation_semigroup(a: Fsa, max_size: int = CLOSURE_MAX_SIZE) -> Semigroup:
    """Closure of an automaton's per-symbol transformations."""
    if not a.alphabet:
        raise AutomatonError("An automaton with an empty alphabet has no transformation semigroup")
    return semigroup_closure(a.transformations(), max_size=max_size, labels=a.alphabet)


def is_group(s: Semigroup) -> bool:
    """
    Whether the semigroup is a permutation group.

    True iff every element is a bijection, the identity is present and every
    element's inverse is present.
    """
    members = set(s.elements)
    if not all(t.is_bijection for t in s.elements):
        return False
    if Transformation.identity(s.degree) not in members:
        return False
    return all(t.inverse() in members for t in s.elements)


class AutomatonKind(str, Enum):
    """Classification of a whole automaton by its semigroup"""
    RESET = "Reset"
    PERMUTATION = "Permutation"
    MIXED = "Mixed"


def classify_automaton(a: Fsa, max_size: int = CLOSURE_MAX_SIZE) -> AutomatonKind:
    """
    Reset automaton if every semigroup element is constant or the identity;
    permutation automaton if the semigroup is a group; mixed otherwise.
    """
    semigroup = transformation_semigroup(a, max_size=max_size)
    if all(t.is_constant or t.is_identity for t in semigroup.elements):
        return AutomatonKind.RESET
    if is_group(semigroup):
        return AutomatonKind.PERMUTATION
    return AutomatonKind.MIXED
