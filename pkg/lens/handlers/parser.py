"""
Argument Parser
Nested subcommands of the lens command line.
"""

import argparse

from lens import __version__
from lens.config import (
    BRIDGE_BETA,
    BRIDGE_GAMMA,
    BRIDGE_MAX_LEN,
    DEFAULT_D_MODEL,
    DEFAULT_LAYERS,
    DEFAULT_MAX_LEN,
    DEFAULT_SEED,
    DEFAULT_SEQ_LEN,
    DEFAULT_VOCAB_SIZE,
    OUTPUT_PATH,
)
from lens.kernel.transformer import MaskMode

MASK_CHOICES = [mode.value for mode in MaskMode]


class UsageError(ValueError):
    """Raised instead of exiting when arguments cannot be parsed"""
    pass


class LensArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError so dispatch owns the exit status"""

    def error(self, message):
        self.print_usage()
        raise UsageError(message)


def _common(seed: bool = True) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    if seed:
        parent.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    parent.add_argument("--out", default=OUTPUT_PATH, help=f"output directory (default {OUTPUT_PATH})")
    parent.add_argument("--jobs", type=int, default=1, help="worker threads for scenario batches")
    return parent


def _model(mask_default: str) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--d-model", type=int, default=DEFAULT_D_MODEL, help="residual width")
    parent.add_argument("--layers", type=int, default=DEFAULT_LAYERS, help="number of blocks")
    parent.add_argument("--d-mlp", type=int, default=None, help="MLP width (default 4 × d-model)")
    parent.add_argument("--len", type=int, default=DEFAULT_SEQ_LEN, dest="length", help="input length")
    parent.add_argument("--vocab", type=int, default=DEFAULT_VOCAB_SIZE, help="vocabulary size")
    parent.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN, help="number of positions")
    parent.add_argument("--mask", choices=MASK_CHOICES, default=mask_default, help="attention mask placement")
    parent.add_argument("--attn-scale", type=float, default=None, help="score multiplier (default 1/sqrt(d-model))")
    parent.add_argument("--no-mlp", action="store_true", help="bypass the MLP blocks")
    return parent


def _automaton_source(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--fsa", help="automaton file")
    source.add_argument("--builtin", help="catalog name (see 'catalog list')")


def _bridge_spec(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--resets", default="0:A,1:B", help="reset symbols and their states, e.g. 0:A,1:B")
    parser.add_argument("--identity", default="e", help="identity symbol")
    parser.add_argument("--states", default=None, help="state labels (default: the reset targets)")
    parser.add_argument("--initial", default=None, help="initial state (default: first state)")
    parser.add_argument("--beta", type=float, default=BRIDGE_BETA, help="score bonus of reset tokens")
    parser.add_argument("--gamma", type=float, default=BRIDGE_GAMMA, help="score slope over positions")
    parser.add_argument("--max-len", type=int, default=BRIDGE_MAX_LEN, help="longest supported input")


def build_parser() -> LensArgumentParser:
    """Assemble the full command tree."""
    parser = LensArgumentParser(
        prog="lens",
        description="Residual-stream invariance checks and automaton emulation for minimal transformers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = parser.add_subparsers(dest="group", metavar="COMMAND", parser_class=LensArgumentParser)
    groups.required = True

    # invariance
    invariance = groups.add_parser("invariance", help="architectural invariance checks")
    inv = invariance.add_subparsers(dest="command", metavar="CHECK", parser_class=LensArgumentParser)
    inv.required = True

    perm = inv.add_parser(
        "perm",
        parents=[_common(), _model(MaskMode.UNMASKED.value)],
        help="permutation equivariance T(PX) = P T(X) of unmasked models",
    )
    perm.add_argument("--trials", type=int, default=1, help="random (tokens, permutation) scenarios")
    perm.add_argument("--perm", default=None, help="explicit permutation, e.g. 2,1,0,3")

    softmax = inv.add_parser(
        "softmax",
        parents=[_common()],
        help="softmax(P A Pᵀ) = P softmax(A) Pᵀ on random score matrices",
    )
    softmax.add_argument("--n", type=int, default=DEFAULT_SEQ_LEN, help="matrix size")
    softmax.add_argument("--trials", type=int, default=1, help="random instances")

    ops = inv.add_parser(
        "ops",
        parents=[_common()],
        help="permutation equivariance of rescale, weight, compare and weighted-sum operations",
    )
    ops.add_argument("--n", type=int, default=DEFAULT_SEQ_LEN, help="rows")
    ops.add_argument("--d-model", type=int, default=DEFAULT_D_MODEL, help="columns")

    inv.add_parser(
        "substring",
        parents=[_common(), _model(MaskMode.NEG_INF_PRE_SOFTMAX.value)],
        help="prefix coherence R_m(X[n]) = R_m(X)[n] of masked models (asserted for neginf only)",
    )

    curve = inv.add_parser(
        "curve",
        parents=[_common(), _model(MaskMode.ZERO_PRE_SOFTMAX.value)],
        help="decay of the marginal effect of appending one token as inputs grow",
    )
    curve.add_argument("--seeds", type=int, default=20, help="seeds per length, starting at --seed")
    curve.add_argument("--lengths", default="4,8,16,32", help="comma-separated prefix lengths")

    prefix = inv.add_parser(
        "prefix-perm",
        parents=[_common(), _model(MaskMode.NEG_INF_PRE_SOFTMAX.value)],
        help="last-row invariance under permutations of earlier rows (one attention layer)",
    )
    prefix.add_argument("--trials", type=int, default=1, help="random prefix permutations")
    prefix.add_argument("--perm", default=None, help="explicit permutation fixing the last index")

    # probe
    probe = groups.add_parser("probe", help="residual-stream probes")
    prb = probe.add_subparsers(dest="command", metavar="PROBE", parser_class=LensArgumentParser)
    prb.required = True

    position = prb.add_parser(
        "position",
        parents=[_common(), _model(MaskMode.UNMASKED.value)],
        help="recoverability of position by cosine similarity to P, per block",
    )
    position.add_argument("--probe-count", type=int, default=9, help="candidate positions")

    collisions = prb.add_parser(
        "collisions",
        parents=[_common(), _model(MaskMode.UNMASKED.value)],
        help="near-collisions among token + position vectors",
    )
    collisions.add_argument("--trials", type=int, default=1000, help="sampled pairs")
    collisions.add_argument("--threshold", type=float, default=1e-3, help="counted at similarity >= 1 - threshold")

    prb.add_parser(
        "lens",
        parents=[_common(), _model(MaskMode.UNMASKED.value)],
        help="top token of every residual snapshot decoded through the unembedding",
    )

    # pe
    pe = groups.add_parser("pe", help="positional-encoding properties")
    pes = pe.add_subparsers(dest="command", metavar="CHECK", parser_class=LensArgumentParser)
    pes.required = True
    pe_check = pes.add_parser(
        "check",
        parents=[_common()],
        help="translation invariance, symmetry and self-similarity of sinusoidal positions",
    )
    pe_check.add_argument("--max-len", type=int, default=128, help="positions")
    pe_check.add_argument("--d-model", type=int, default=64, help="width")
    pe_check.add_argument("--samples", type=int, default=1000, help="sampled triples")

    # fsa
    fsa = groups.add_parser("fsa", help="finite state automata")
    fsas = fsa.add_subparsers(dest="command", metavar="ACTION", parser_class=LensArgumentParser)
    fsas.required = True
    for name, text in (
        ("run", "final state after reading a word"),
        ("seq", "state after every prefix of a word"),
        ("scan", "state sequence by parallel-prefix composition of symbol maps"),
    ):
        action = fsas.add_parser(name, parents=[_common(seed=False)], help=text)
        _automaton_source(action)
        action.add_argument("--q0", required=True, help="start state")
        action.add_argument("--word", required=True, help="input word, e.g. 0110 or '+1 +1'")
    for name, text in (
        ("classify", "reset / permutation / identity kind of every symbol and of the automaton"),
        ("semigroup", "transformation semigroup generated by the symbols"),
    ):
        action = fsas.add_parser(name, parents=[_common(seed=False)], help=text)
        _automaton_source(action)

    # cover
    cover = groups.add_parser("cover", help="covering maps")
    covers = cover.add_subparsers(dest="command", metavar="ACTION", parser_class=LensArgumentParser)
    covers.required = True
    cover_check = covers.add_parser(
        "check",
        parents=[_common(seed=False)],
        help="homomorphic covering of one automaton by another (or by a cascade)",
    )
    source = cover_check.add_mutually_exclusive_group(required=True)
    source.add_argument("--builtin", help="catalog name")
    source.add_argument("--cascade", help="cascade file with 'cover:' lines")
    cover_check.add_argument("--fsa", help="covered automaton file (with --cascade)")

    # cascade
    cascade = groups.add_parser("cascade", help="feedforward cascades")
    cascades = cascade.add_subparsers(dest="command", metavar="ACTION", parser_class=LensArgumentParser)
    cascades.required = True
    cascade_run = cascades.add_parser(
        "run",
        parents=[_common(seed=False)],
        help="joint states of a cascade with synchronous updates",
    )
    source = cascade_run.add_mutually_exclusive_group(required=True)
    source.add_argument("--builtin", help="catalog name of an entry with a cascade")
    source.add_argument("--cascade", help="cascade file")
    cascade_run.add_argument("--q0", required=True, help="joint start state, e.g. a,0")
    cascade_run.add_argument("--word", required=True, help="input word")

    # bridge
    bridge = groups.add_parser("bridge", help="one-block transformer emulating a reset automaton")
    bridges = bridge.add_subparsers(dest="command", metavar="ACTION", parser_class=LensArgumentParser)
    bridges.required = True
    build = bridges.add_parser(
        "build",
        parents=[_common(seed=False)],
        help="construct attention weights whose decoded output is the latest reset's state",
    )
    _bridge_spec(build)
    build.add_argument("--name", default="bridge.npz", help="weight file name inside --out")

    compare = bridges.add_parser(
        "compare",
        parents=[_common()],
        help="positionwise agreement of a model's decoded output with an automaton's states",
    )
    _bridge_spec(compare)
    compare.add_argument("--weights", default=None, help="weight container (default: build from the flags)")
    compare.add_argument("--fsa", default=None, help="reference automaton file (default: the emulated one)")
    compare.add_argument("--q0", default=None, help="start state (default: the initial state)")
    compare.add_argument("--exhaustive", type=int, default=6, help="all words up to this length")
    compare.add_argument("--random", type=int, default=0, help="additional random words")
    compare.add_argument("--random-len", type=int, default=16, help="longest random word")

    # catalog
    catalog = groups.add_parser("catalog", help="shipped automata and cascades")
    catalogs = catalog.add_subparsers(dest="command", metavar="ACTION", parser_class=LensArgumentParser)
    catalogs.required = True
    catalogs.add_parser("list", parents=[_common(seed=False)], help="names, component kinds and descriptions")

    # runs
    runs = groups.add_parser("runs", help="run ledger")
    runss = runs.add_subparsers(dest="command", metavar="ACTION", parser_class=LensArgumentParser)
    runss.required = True
    runs_list = runss.add_parser("list", parents=[_common(seed=False)], help="most recent recorded runs")
    runs_list.add_argument("--limit", type=int, default=20, help="number of runs")

    return parser
