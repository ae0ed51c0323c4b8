"""
Residual Lens
Transformer invariance verifiers and algebraic automata tooling, bridged by
hand-built shortcut emulators.
"""

__version__ = "0.1.0"
