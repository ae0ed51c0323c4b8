"""
Automata Package
Finite state automata, transformation semigroups, shortcut scans, cascades
and covering.
"""

from lens.automata.fsa import (
    AutomatonError,
    Fsa,
    SymbolClass,
    SymbolKind,
    Transformation,
    classify_symbol,
    compose,
    cyclic_counter,
    direct_product,
    extend_alphabet,
    flip_flop,
    reset_automaton,
    run,
    state_sequence,
    transformation_of,
)
from lens.automata.semigroup import (
    AutomatonKind,
    Semigroup,
    SemigroupOverflowError,
    classify_automaton,
    is_group,
    semigroup_closure,
    transformation_semigroup,
)
from lens.automata.scan import prefix_transformations, scan_levels, scan_state_sequence
from lens.automata.cascade import (
    Cascade,
    CascadeComponent,
    CascadeError,
    CoveringError,
    CoveringMap,
    CoveringResult,
    cascade_state_sequence,
    cascade_step,
    check_covering,
    component_kind,
    compose_maps,
    flatten,
    projection_map,
)

__all__ = [
    'AutomatonError',
    'Fsa',
    'SymbolClass',
    'SymbolKind',
    'Transformation',
    'classify_symbol',
    'compose',
    'cyclic_counter',
    'direct_product',
    'extend_alphabet',
    'flip_flop',
    'reset_automaton',
    'run',
    'state_sequence',
    'transformation_of',
    'AutomatonKind',
    'Semigroup',
    'SemigroupOverflowError',
    'classify_automaton',
    'is_group',
    'semigroup_closure',
    'transformation_semigroup',
    'prefix_transformations',
    'scan_levels',
    'scan_state_sequence',
    'Cascade',
    'CascadeComponent',
    'CascadeError',
    'CoveringError',
    'CoveringMap',
    'CoveringResult',
    'cascade_state_sequence',
    'cascade_step',
    'check_covering',
    'component_kind',
    'compose_maps',
    'flatten',
    'projection_map',
]
