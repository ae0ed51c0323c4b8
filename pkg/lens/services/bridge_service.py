"""
Bridge Service
Hand-set one-block transformer weights that emulate a reset automaton, and
positionwise comparison of any labelled model against an automaton.
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from lens.automata.fsa import Fsa, State, state_sequence
from lens.config import BRIDGE_BETA, BRIDGE_GAMMA, BRIDGE_MAX_LEN, logger
from lens.kernel.linalg import make_rng
from lens.kernel.transformer import (
    LayerWeights,
    MaskMode,
    ModelConfig,
    ModelWeights,
    decode_top,
    forward,
)
from lens.utils.formatting import format_state

# Extra score gap kept above the bound that separates resets from later identity tokens
BETA_MARGIN = 1.0


class BridgeError(ValueError):
    """Custom exception for invalid bridge specifications or vocabularies"""
    pass


def minimum_beta(gamma: float, max_len: int, margin: float = BETA_MARGIN) -> float:
    """
    Smallest reset bonus for which the latest reset outweighs every later identity token.

    β > γ(max_len − 1) + ln(max_len) + margin
    """
    return gamma * (max_len - 1) + math.log(max_len) + margin


@dataclass(frozen=True)
class BridgeSpec:
    """
    Reset automaton with one identity symbol.

    resets pairs each reset symbol with the state it sends every state to.
    """

    identity_symbol: str = "e"
    resets: Tuple[Tuple[str, str], ...] = (("0", "A"), ("1", "B"))
    states: Tuple[str, ...] = ("A", "B")
    initial_state: str = "A"
    beta: float = BRIDGE_BETA
    gamma: float = BRIDGE_GAMMA
    max_len: int = BRIDGE_MAX_LEN

    def __post_init__(self):
        object.__setattr__(self, "resets", tuple((str(s), str(q)) for s, q in self.resets))
        object.__setattr__(self, "states", tuple(str(q) for q in self.states))

        if not self.beta > 0:
            raise BridgeError(f"beta must be positive, got {self.beta}")
        # Earlier resets must not outweigh the latest one: Σ e^{-γk} < 1
        if not self.gamma > math.log(2.0):
            raise BridgeError(f"gamma must exceed ln 2, got {self.gamma}")
        if self.max_len < 1:
            raise BridgeError(f"max_len must be >= 1, got {self.max_len}")
        if not self.resets:
            raise BridgeError("At least one reset symbol is required")
        if len(set(self.states)) != len(self.states):
            raise BridgeError(f"Duplicate states in {list(self.states)}")

        symbols = [s for s, _ in self.resets]
        targets = [q for _, q in self.resets]
        if len(set(symbols)) != len(symbols):
            raise BridgeError(f"Duplicate reset symbols in {symbols}")
        if self.identity_symbol in symbols:
            raise BridgeError(f"{self.identity_symbol!r} is both the identity and a reset symbol")
        if len(set(targets)) != len(targets):
            raise BridgeError(f"Reset symbols must map onto distinct states, got {targets}")
        unknown = [q for q in (*targets, self.initial_state) if q not in self.states]
        if unknown:
            raise BridgeError(f"Unknown states {unknown}; states are {list(self.states)}")
        overlap = set(self.alphabet) & set(self.states)
        if overlap:
            raise BridgeError(f"Labels {sorted(overlap)} are used both as symbols and as states")

    @property
    def alphabet(self) -> Tuple[str, ...]:
        """Reset symbols in order, then the identity symbol."""
        return tuple(s for s, _ in self.resets) + (self.identity_symbol,)

    @property
    def vocabulary(self) -> Tuple[str, ...]:
        """Symbols followed by one output token per state."""
        return self.alphabet + self.states

    @property
    def d_model(self) -> int:
        return len(self.alphabet) + 1 + len(self.states)

    def to_fsa(self) -> Fsa:
        """The automaton the construction emulates."""
        delta = {}
        for q in self.states:
            for symbol, target in self.resets:
                delta[(symbol, q)] = target
            delta[(self.identity_symbol, q)] = q
        return Fsa.from_delta(self.alphabet, self.states, delta)


@dataclass(frozen=True)
class LabeledModel:
    """Model weights with a label per token id"""

    config: ModelConfig
    weights: ModelWeights
    vocabulary: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vocabulary", tuple(self.vocabulary))
        if len(self.vocabulary) != self.config.vocab_size:
            raise BridgeError(
                f"Vocabulary has {len(self.vocabulary)} labels for vocab_size {self.config.vocab_size}"
            )
        if len(set(self.vocabulary)) != len(self.vocabulary):
            raise BridgeError("Vocabulary labels must be distinct")
        self.weights.check_shapes(self.config)

    def encode(self, word: Sequence[str]) -> List[int]:
        index = {label: i for i, label in enumerate(self.vocabulary)}
        unknown = [s for s in word if s not in index]
        if unknown:
            raise BridgeError(f"Symbols {unknown} are not in the model vocabulary")
        return [index[s] for s in word]

    def decode(self, word: Sequence[str]) -> List[str]:
        """Top token label at every position of word."""
        if not word:
            return []
        trace = forward(self.encode(word), self.weights, self.config)
        return [self.vocabulary[t] for t in decode_top(trace)]


def build_reset_shortcut_model(spec: BridgeSpec) -> LabeledModel:
    """
    Construct one masked attention block that decodes the reset automaton's state.

    Channels: one per symbol, one position channel carrying i, one per state.
    The score of key j is β·[j is a reset] + γ·j for every query, so the most
    recent reset dominates; its value writes the reset's target state channel,
    identity tokens write the initial state. U reads the state channels.

    Args:
        spec: Bridge specification

    Returns:
        LabeledModel over spec.vocabulary
    """
    n_symbols = len(spec.alphabet)
    pos_channel = n_symbols
    d = spec.d_model
    vocab = spec.vocabulary

    def state_channel(q: str) -> int:
        return n_symbols + 1 + spec.states.index(q)

    E = np.zeros((len(vocab), d))
    for t in range(n_symbols):
        E[t, t] = 1.0

    P = np.zeros((spec.max_len, d))
    P[:, pos_channel] = np.arange(spec.max_len, dtype=np.float64)

    wq = np.zeros((d, d))
    wq[:n_symbols, 0] = 1.0
    wq[:n_symbols, 1] = 1.0

    wk = np.zeros((d, d))
    wv = np.zeros((d, d))
    for t, (symbol, target) in enumerate(spec.resets):
        wk[t, 0] = spec.beta
        wv[t, state_channel(target)] = 1.0
    wk[pos_channel, 1] = spec.gamma
    wv[n_symbols - 1, state_channel(spec.initial_state)] = 1.0

    U = np.zeros((d, len(vocab)))
    for q in spec.states:
        U[state_channel(q), vocab.index(q)] = 1.0

    config = ModelConfig(
        vocab_size=len(vocab),
        d_model=d,
        n_layers=1,
        d_mlp=1,
        max_len=spec.max_len,
        mask_mode=MaskMode.NEG_INF_PRE_SOFTMAX,
        attn_scale=1.0,
        use_mlp=False,
        layer_norm=False,
    )
    layer = LayerWeights(
        wq=_frozen(wq),
        wk=_frozen(wk),
        wv=_frozen(wv),
        wo=_frozen(np.eye(d)),
        w1=_frozen(np.zeros((d, 1))),
        w2=_frozen(np.zeros((1, d))),
        ln1_gain=_frozen(np.ones(d)),
        ln1_bias=_frozen(np.zeros(d)),
        ln2_gain=_frozen(np.ones(d)),
        ln2_bias=_frozen(np.zeros(d)),
    )
    weights = ModelWeights(
        E=_frozen(E),
        P=_frozen(P),
        layers=(layer,),
        final_gain=_frozen(np.ones(d)),
        final_bias=_frozen(np.zeros(d)),
        U=_frozen(U),
    )

    bound = minimum_beta(spec.gamma, spec.max_len)
    if spec.beta <= bound:
        logger.warning(f"beta={spec.beta} is at or below {bound:.2f}; late identity tokens may leak")
    logger.info(f"Built reset shortcut model: d_model={d}, vocab={list(vocab)}, beta={spec.beta}")
    return LabeledModel(config, weights, vocab)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class WordResult:
    word: Tuple[str, ...]
    decoded: Tuple[str, ...]
    expected: Tuple[str, ...]

    @property
    def first_mismatch(self) -> Optional[int]:
        for i, (got, want) in enumerate(zip(self.decoded, self.expected)):
            if got != want:
                return i
        return None

    @property
    def match(self) -> bool:
        return self.first_mismatch is None


@dataclass(frozen=True)
class ComparisonReport:
    """Per-word and aggregate positionwise agreement"""

    results: Tuple[WordResult, ...] = field(default_factory=tuple)

    @property
    def positions(self) -> int:
        return sum(len(r.word) for r in self.results)

    @property
    def matched_positions(self) -> int:
        return sum(
            sum(1 for got, want in zip(r.decoded, r.expected) if got == want)
            for r in self.results
        )

    @property
    def accuracy(self) -> float:
        """Fraction of matching positions; 1.0 when there is nothing to compare."""
        return self.matched_positions / self.positions if self.positions else 1.0

    @property
    def all_match(self) -> bool:
        return all(r.match for r in self.results)

    def rows(self) -> List[Tuple[str, bool, str]]:
        """CSV rows: word, match, first_mismatch_pos (empty when matching)."""
        return [
            (" ".join(r.word), r.match, "" if r.first_mismatch is None else str(r.first_mismatch))
            for r in self.results
        ]


def compare_model_to_fsa(
    model: LabeledModel,
    fsa: Fsa,
    q0: State,
    words: Iterable[Sequence[str]],
    jobs: int = 1,
) -> ComparisonReport:
    """
    Compare decoded model output against the automaton's state sequence.

    Args:
        model: Labelled model
        fsa: Reference automaton
        q0: Start state
        words: Words to evaluate; reported in the given order
        jobs: Worker threads

    Returns:
        ComparisonReport
    """
    fsa.state_index(q0)
    missing = [s for s in fsa.alphabet if s not in model.vocabulary]
    missing += [format_state(q) for q in fsa.states if format_state(q) not in model.vocabulary]
    if missing:
        raise BridgeError(f"Model vocabulary lacks {missing}")

    words = [tuple(w) for w in words]
    too_long = [w for w in words if len(w) > model.config.max_len]
    if too_long:
        raise BridgeError(f"{len(too_long)} word(s) exceed max_len {model.config.max_len}")

    def evaluate(word: Tuple[str, ...]) -> WordResult:
        expected = tuple(format_state(q) for q in state_sequence(fsa, q0, word))
        return WordResult(word, tuple(model.decode(word)), expected)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            results = tuple(executor.map(evaluate, words))
    else:
        results = tuple(evaluate(w) for w in words)

    report = ComparisonReport(results)
    logger.info(
        f"Compared {len(results)} word(s): accuracy {report.accuracy:.4f}, "
        f"{sum(1 for r in results if not r.match)} mismatching"
    )
    return report


def all_words(alphabet: Sequence[str], max_length: int) -> List[Tuple[str, ...]]:
    """Every word of length 1..max_length, shorter words first."""
    return [
        word
        for length in range(1, max_length + 1)
        for word in itertools.product(alphabet, repeat=length)
    ]


def random_words(alphabet: Sequence[str], count: int, max_length: int, seed: int) -> List[Tuple[str, ...]]:
    """count words with lengths uniform in 1..max_length."""
    rng = make_rng(seed)
    words = []
    for _ in range(count):
        length = int(rng.integers(1, max_length + 1))
        words.append(tuple(alphabet[int(i)] for i in rng.integers(0, len(alphabet), size=length)))
    return words
