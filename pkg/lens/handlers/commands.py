"""
Command Handlers
One handler per subcommand. Each writes its reports into --out and returns
an outcome carrying the exit status and the run manifest.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple

from lens.automata.cascade import cascade_state_sequence, check_covering, flatten
from lens.automata.catalog import CatalogEntry, builtin_examples
from lens.automata.fsa import Fsa, SymbolClass, run, state_sequence
from lens.automata.scan import scan_levels, scan_state_sequence
from lens.automata.semigroup import classify_automaton, is_group, transformation_semigroup
from lens.automata.text_format import load_cascade, load_fsa
from lens.config import LEMMA_TOLERANCE, logger
from lens.kernel.linalg import Permutation
from lens.kernel.transformer import ModelConfig, forward, init_weights
from lens.kernel.weights_io import load_weights, save_weights
from lens.services.bridge_service import (
    BridgeError,
    BridgeSpec,
    LabeledModel,
    all_words,
    build_reset_shortcut_model,
    compare_model_to_fsa,
    random_words,
)
from lens.services.invariance_service import (
    DeviationReport,
    InvarianceService,
    random_permutation,
    random_tokens,
)
from lens.services.probe_service import ProbeService
from lens.services.report_service import RunManifest, write_csv
from lens.services.run_service import RunService
from lens.utils.formatting import (
    format_float,
    format_state,
    format_states,
    parse_int_list,
    parse_word,
    truncate_text,
)

DEVIATION_HEADER = ("scenario", "block", "deviation", "tolerance", "pass")


@dataclass
class CommandOutcome:
    """Exit status plus the manifest describing the run"""

    exit_code: int
    manifest: RunManifest


def _name(args: argparse.Namespace) -> str:
    return f"{args.group} {args.command}"


def _csv_path(args: argparse.Namespace) -> Path:
    return Path(args.out) / f"{args.group}_{args.command.replace('-', '_')}.csv"


def _manifest(args: argparse.Namespace, config: Sequence[Tuple[str, object]] = ()) -> RunManifest:
    return RunManifest(subcommand=_name(args), seed=getattr(args, "seed", None), config=list(config))


def _model_config(args: argparse.Namespace, **overrides) -> ModelConfig:
    values = dict(
        vocab_size=args.vocab,
        d_model=args.d_model,
        n_layers=args.layers,
        d_mlp=args.d_mlp or 4 * args.d_model,
        max_len=args.max_len,
        mask_mode=args.mask,
        seed=args.seed,
        attn_scale=args.attn_scale,
        use_mlp=not args.no_mlp,
    )
    values.update(overrides)
    return ModelConfig(**values)


def _config_items(config: ModelConfig) -> List[Tuple[str, object]]:
    return sorted(config.to_dict().items())


def _map_jobs(fn: Callable, items: Sequence, jobs: int) -> list:
    """fn over items in order, optionally on worker threads."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(fn, items))
    return [fn(item) for item in items]


def _deviation_outcome(args, reports: Sequence[DeviationReport], manifest: RunManifest) -> CommandOutcome:
    path = write_csv(_csv_path(args), DEVIATION_HEADER, [row for r in reports for row in r.rows()])
    manifest.outputs.append(str(path))
    for report in reports:
        verdict = "pass" if report.passed else ("FAIL" if report.asserted else "reported")
        print(f"{report.scenario}: {format_float(report.max_deviation)} {verdict}")
    failed = sum(1 for r in reports if r.failed_assertion)
    if failed:
        print(f"{failed} of {len(reports)} scenario(s) failed")
    return CommandOutcome(1 if failed else 0, manifest)


def _permutation(text: str) -> Permutation:
    return Permutation(tuple(parse_int_list(text)))


# ---------------------------------------------------------------- invariance


def invariance_perm(args: argparse.Namespace) -> CommandOutcome:
    """Permutation equivariance over random scenarios."""
    config = _model_config(args)

    def scenario(trial: int) -> DeviationReport:
        seed = args.seed + trial
        tokens = random_tokens(seed, args.length, config.vocab_size)
        perm = _permutation(args.perm) if args.perm else random_permutation(seed + 1, args.length)
        return InvarianceService.check_permutation_invariance(config, seed, tokens, perm)

    reports = _map_jobs(scenario, range(args.trials), args.jobs)
    return _deviation_outcome(args, reports, _manifest(args, _config_items(config) + [("trials", args.trials)]))


def invariance_softmax(args: argparse.Namespace) -> CommandOutcome:
    """Softmax permutation lemma on random matrices."""
    rows = []
    for trial in range(args.trials):
        deviation = InvarianceService.check_softmax_lemma(args.n, args.seed + trial)
        rows.append((args.n, args.seed + trial, deviation, LEMMA_TOLERANCE, deviation <= LEMMA_TOLERANCE))
        print(f"n={args.n} seed={args.seed + trial}: {format_float(deviation)}")

    manifest = _manifest(args, [("n", args.n), ("trials", args.trials)])
    manifest.outputs.append(str(write_csv(_csv_path(args), ("n", "seed", "deviation", "tolerance", "pass"), rows)))
    return CommandOutcome(0 if all(row[-1] for row in rows) else 1, manifest)


def invariance_ops(args: argparse.Namespace) -> CommandOutcome:
    """Equivariance of each operation class in isolation."""
    deviations = InvarianceService.check_operation_classes(args.n, args.d_model, args.seed)
    rows = [(op, dev, LEMMA_TOLERANCE, dev <= LEMMA_TOLERANCE) for op, dev in deviations.items()]
    for op, dev, _, ok in rows:
        print(f"{op}: {format_float(dev)} {'pass' if ok else 'FAIL'}")

    manifest = _manifest(args, [("n", args.n), ("d_model", args.d_model)])
    manifest.outputs.append(str(write_csv(_csv_path(args), ("operation", "deviation", "tolerance", "pass"), rows)))
    return CommandOutcome(0 if all(row[-1] for row in rows) else 1, manifest)


def invariance_substring(args: argparse.Namespace) -> CommandOutcome:
    """Prefix coherence; only exact mask modes are asserted."""
    config = _model_config(args)
    tokens = random_tokens(args.seed, args.length, config.vocab_size)
    reports = InvarianceService.check_substring_invariance(config, args.seed, tokens)
    return _deviation_outcome(args, reports, _manifest(args, _config_items(config)))


def invariance_curve(args: argparse.Namespace) -> CommandOutcome:
    """Median marginal deviation per length."""
    lengths = parse_int_list(args.lengths)
    if not lengths or min(lengths) < 1:
        raise ValueError(f"--lengths needs positive integers, got {args.lengths!r}")
    config = _model_config(args, max_len=max(args.max_len, max(lengths) + 1))
    seeds = list(range(args.seed, args.seed + args.seeds))

    curve = InvarianceService.substring_deviation_curve(config, seeds, lengths)
    for length, median in curve:
        print(f"{length}: {format_float(median)}")
    if len(curve) > 1 and not curve[-1][1] < curve[0][1]:
        logger.warning(f"Marginal deviation did not shrink from n={curve[0][0]} to n={curve[-1][0]}")

    manifest = _manifest(args, _config_items(config) + [("lengths", args.lengths), ("seeds", args.seeds)])
    manifest.outputs.append(str(write_csv(_csv_path(args), ("length", "median_deviation"), curve)))
    return CommandOutcome(0, manifest)


def invariance_prefix_perm(args: argparse.Namespace) -> CommandOutcome:
    """Last-row invariance under permutations of earlier rows."""
    config = _model_config(args, n_layers=1, use_mlp=False)

    def scenario(trial: int) -> DeviationReport:
        seed = args.seed + trial
        tokens = random_tokens(seed, args.length, config.vocab_size)
        if args.perm:
            perm = _permutation(args.perm)
        else:
            head = random_permutation(seed + 1, args.length - 1).mapping
            perm = Permutation(head + (args.length - 1,))
        report, earlier = InvarianceService.check_prefix_permutation(config, seed, tokens, perm)
        logger.info(f"{report.scenario}: earlier rows deviate by {earlier:.3e} (reported)")
        return report

    reports = _map_jobs(scenario, range(args.trials), args.jobs)
    return _deviation_outcome(args, reports, _manifest(args, _config_items(config) + [("trials", args.trials)]))


# ---------------------------------------------------------------- probes


def probe_position(args: argparse.Namespace) -> CommandOutcome:
    """Best-matching position per row and block."""
    config = _model_config(args)
    weights = init_weights(config)
    trace = forward(random_tokens(args.seed, args.length, config.vocab_size), weights, config)
    table = ProbeService.position_probe(trace, weights, args.probe_count)

    for r, row in enumerate(table.cells):
        print(f"row {r}: " + " ".join(str(cell.position) for cell in row))

    manifest = _manifest(args, _config_items(config) + [("probe_count", args.probe_count)])
    manifest.outputs.append(str(write_csv(_csv_path(args), ("row", "block", "position", "similarity"), table.rows())))
    return CommandOutcome(0, manifest)


def probe_collisions(args: argparse.Namespace) -> CommandOutcome:
    """Near-collision count among summed token and position vectors."""
    config = _model_config(args)
    report = ProbeService.collision_scan(init_weights(config), args.trials, args.threshold, args.seed)
    print(f"{report.collisions}/{report.trials} near-collisions (rate {format_float(report.rate)})")

    manifest = _manifest(args, _config_items(config) + [("threshold", args.threshold), ("trials", args.trials)])
    manifest.outputs.append(str(write_csv(
        _csv_path(args),
        ("trials", "threshold", "collisions", "rate"),
        [(report.trials, report.threshold, report.collisions, report.rate)],
    )))
    return CommandOutcome(0, manifest)


def probe_lens(args: argparse.Namespace) -> CommandOutcome:
    """Top token per snapshot and row."""
    config = _model_config(args)
    weights = init_weights(config)
    tokens = random_tokens(args.seed, args.length, config.vocab_size)
    table = ProbeService.logit_lens(forward(tokens, weights, config), weights, config)

    print("input: " + " ".join(str(t) for t in tokens))
    for block, row in enumerate(table):
        print(f"block {block}: " + " ".join(str(t) for t in row))

    rows = [(block, r, token) for block, row in enumerate(table) for r, token in enumerate(row)]
    manifest = _manifest(args, _config_items(config))
    manifest.outputs.append(str(write_csv(_csv_path(args), ("block", "row", "token"), rows)))
    return CommandOutcome(0, manifest)


def pe_check(args: argparse.Namespace) -> CommandOutcome:
    """Sampled sinusoidal-position properties."""
    report = ProbeService.positional_properties(args.max_len, args.d_model, args.samples, args.seed)
    for name, value, ok in report.rows():
        print(f"{name}: {format_float(value)} {'pass' if ok else 'FAIL'}")

    manifest = _manifest(args, [("d_model", args.d_model), ("max_len", args.max_len), ("samples", args.samples)])
    manifest.outputs.append(str(write_csv(_csv_path(args), ("property", "value", "pass"), report.rows())))
    return CommandOutcome(0 if report.passed else 1, manifest)


# ---------------------------------------------------------------- automata


def _catalog_entry(name: str) -> CatalogEntry:
    catalog = builtin_examples()
    if name not in catalog:
        raise ValueError(f"Unknown catalog entry {name!r}; choose from {sorted(catalog)}")
    return catalog[name]


def _automaton(args: argparse.Namespace) -> Fsa:
    if args.builtin:
        return _catalog_entry(args.builtin).automaton
    return load_fsa(args.fsa)


def _source_config(args: argparse.Namespace) -> List[Tuple[str, object]]:
    if args.builtin:
        source = [("builtin", args.builtin)]
    else:
        source = [(key, getattr(args, key)) for key in ("cascade", "fsa") if getattr(args, key, None)]
    return source + [(key, getattr(args, key)) for key in ("q0", "word") if hasattr(args, key)]


def _table_outcome(
    args: argparse.Namespace, header: Sequence[str], rows: Sequence[Sequence], exit_code: int = 0
) -> CommandOutcome:
    manifest = _manifest(args, _source_config(args))
    manifest.outputs.append(str(write_csv(_csv_path(args), header, rows)))
    return CommandOutcome(exit_code, manifest)


def _sequence_rows(states: Sequence) -> List[Tuple[int, str]]:
    return [(position, format_state(q)) for position, q in enumerate(states)]


def fsa_run(args: argparse.Namespace) -> CommandOutcome:
    a = _automaton(args)
    final = format_state(run(a, args.q0, parse_word(args.word, a.alphabet)))
    print(final)
    return _table_outcome(args, ("q0", "word", "final_state"), [(args.q0, args.word, final)])


def fsa_seq(args: argparse.Namespace) -> CommandOutcome:
    a = _automaton(args)
    states = state_sequence(a, args.q0, parse_word(args.word, a.alphabet))
    print(format_states(states))
    return _table_outcome(args, ("position", "state"), _sequence_rows(states))


def fsa_scan(args: argparse.Namespace) -> CommandOutcome:
    """Parallel-prefix state sequence, checked against the serial one."""
    a = _automaton(args)
    word = parse_word(args.word, a.alphabet)
    scanned = scan_state_sequence(a, args.q0, word)
    print(format_states(scanned))
    logger.info(f"Scan used {scan_levels(len(word))} combine round(s) for {len(word)} symbol(s)")
    serial = state_sequence(a, args.q0, word)
    rows = [
        (position, format_state(s), format_state(t), s == t)
        for position, (s, t) in enumerate(zip(scanned, serial))
    ]
    if scanned != serial:
        logger.error(f"Scan disagrees with the serial run: {format_states(serial)}")
        return _table_outcome(args, ("position", "scan_state", "serial_state", "match"), rows, 1)
    return _table_outcome(args, ("position", "scan_state", "serial_state", "match"), rows)


def fsa_classify(args: argparse.Namespace) -> CommandOutcome:
    a = _automaton(args)
    rows = []
    for symbol, t in zip(a.alphabet, a.transformations()):
        cls = SymbolClass.of(t)
        rows.append((symbol, cls.label, cls.is_identity))
        print(f"{symbol}: {cls.label}{' (identity)' if cls.is_identity else ''}")
    kind = classify_automaton(a).value
    print(f"automaton: {kind}")
    return _table_outcome(args, ("symbol", "class", "identity"), rows + [("*", kind, False)])


def fsa_semigroup(args: argparse.Namespace) -> CommandOutcome:
    a = _automaton(args)
    semigroup = transformation_semigroup(a)
    print(f"size: {len(semigroup)}")
    print(f"group: {'yes' if is_group(semigroup) else 'no'}")
    rows = []
    for i, t in enumerate(semigroup.elements):
        image = " ".join(format_state(a.states[q]) for q in t.image)
        print(f"[{image}]")
        rows.append((i, image))
    return _table_outcome(args, ("element", "image"), rows)


def cover_check(args: argparse.Namespace) -> CommandOutcome:
    """Covering check of a catalog entry or of a cascade file against an automaton."""
    if args.builtin:
        entry = _catalog_entry(args.builtin)
        y, x, phi, expected = entry.covering_automaton, entry.automaton, entry.cover, entry.expect_cover
        if y is None or phi is None:
            raise ValueError(f"Catalog entry {entry.name!r} has no covering map")
    else:
        if not args.fsa:
            raise ValueError("--cascade needs --fsa naming the covered automaton")
        cascade, phi = load_cascade(args.cascade)
        if phi is None:
            raise ValueError(f"{args.cascade} has no 'cover:' lines")
        y, x, expected = flatten(cascade), load_fsa(args.fsa), True

    result = check_covering(y, x, phi)
    symbol, q = result.counterexample or (None, None)
    if result.covers:
        print("covers")
    else:
        print(f"not a covering: {result.reason}")
        if symbol is not None:
            print(f"counterexample: symbol {symbol} at state {format_state(q)}")
    row = (
        result.covers,
        expected,
        result.reason,
        "" if symbol is None else symbol,
        "" if q is None else format_state(q),
    )
    return _table_outcome(
        args,
        ("covers", "expected", "reason", "counterexample_symbol", "counterexample_state"),
        [row],
        0 if result.covers == expected else 1,
    )


def _joint_state(text: str) -> Tuple[str, ...]:
    return tuple(part.strip() for part in text.strip().strip("()").split(",") if part.strip())


def cascade_run(args: argparse.Namespace) -> CommandOutcome:
    if args.builtin:
        cascade = _catalog_entry(args.builtin).cascade
        if cascade is None:
            raise ValueError(f"Catalog entry {args.builtin!r} has no cascade")
    else:
        cascade, _ = load_cascade(args.cascade)
    word = parse_word(args.word, cascade.alphabet)
    states = cascade_state_sequence(cascade, _joint_state(args.q0), word)
    print(format_states(states))
    return _table_outcome(args, ("position", "state"), _sequence_rows(states))


# ---------------------------------------------------------------- bridge


def _bridge_spec(args: argparse.Namespace) -> BridgeSpec:
    resets = []
    for pair in args.resets.split(","):
        if ":" not in pair:
            raise BridgeError(f"Reset entries look like symbol:state, got {pair!r}")
        symbol, state = (part.strip() for part in pair.split(":", 1))
        resets.append((symbol, state))
    targets = list(dict.fromkeys(state for _, state in resets))
    states = args.states.replace(",", " ").split() if args.states else targets
    return BridgeSpec(
        identity_symbol=args.identity,
        resets=tuple(resets),
        states=tuple(states),
        initial_state=args.initial or states[0],
        beta=args.beta,
        gamma=args.gamma,
        max_len=args.max_len,
    )


def _spec_items(spec: BridgeSpec) -> List[Tuple[str, object]]:
    return [
        ("beta", spec.beta),
        ("gamma", spec.gamma),
        ("identity", spec.identity_symbol),
        ("initial", spec.initial_state),
        ("max_len", spec.max_len),
        ("resets", ",".join(f"{s}:{q}" for s, q in spec.resets)),
        ("states", " ".join(spec.states)),
    ]


def bridge_build(args: argparse.Namespace) -> CommandOutcome:
    spec = _bridge_spec(args)
    model = build_reset_shortcut_model(spec)
    path = save_weights(Path(args.out) / args.name, model.weights, model.config, model.vocabulary)
    print(f"vocabulary: {' '.join(model.vocabulary)}")
    print(f"weights: {path}")

    manifest = _manifest(args, _spec_items(spec))
    manifest.outputs.append(str(path))
    return CommandOutcome(0, manifest)


def bridge_compare(args: argparse.Namespace) -> CommandOutcome:
    """Decoded model output against the automaton's state sequence."""
    spec = _bridge_spec(args)
    if args.weights:
        weights, config, vocabulary = load_weights(args.weights)
        if vocabulary is None:
            raise BridgeError(f"{args.weights} carries no vocabulary")
        model = LabeledModel(config, weights, vocabulary)
    else:
        model = build_reset_shortcut_model(spec)
    fsa = load_fsa(args.fsa) if args.fsa else spec.to_fsa()
    q0 = args.q0 or spec.initial_state

    words = all_words(fsa.alphabet, args.exhaustive)
    if args.random:
        words += random_words(fsa.alphabet, args.random, min(args.random_len, model.config.max_len), args.seed)
    report = compare_model_to_fsa(model, fsa, q0, words, jobs=args.jobs)

    print(f"words: {len(report.results)}")
    print(f"accuracy: {format_float(report.accuracy)}")
    for result in report.results:
        if not result.match:
            print(f"mismatch: {' '.join(result.word)} at position {result.first_mismatch}")
            break

    manifest = _manifest(args, _spec_items(spec) + [
        ("exhaustive", args.exhaustive),
        ("random", args.random),
        ("random_len", args.random_len),
        ("weights", args.weights or ""),
    ])
    manifest.outputs.append(str(write_csv(_csv_path(args), ("word", "match", "first_mismatch_pos"), report.rows())))
    return CommandOutcome(0 if report.all_match else 1, manifest)


# ---------------------------------------------------------------- catalog, runs


def catalog_list(args: argparse.Namespace) -> CommandOutcome:
    rows = []
    for entry in builtin_examples().values():
        kinds = "/".join(kind.value for kind in entry.component_kinds)
        cover = "" if entry.cover is None else (" [cover]" if entry.expect_cover else " [non-cover]")
        print(f"{entry.name}: {kinds}{cover} - {entry.description}")
        rows.append((entry.name, kinds, cover.strip(" []"), entry.description))
    manifest = _manifest(args)
    manifest.outputs.append(str(write_csv(_csv_path(args), ("name", "kinds", "cover", "description"), rows)))
    return CommandOutcome(0, manifest)


def runs_list(args: argparse.Namespace) -> CommandOutcome:
    records = RunService.list_runs(args.limit)
    if not records:
        print("no runs recorded")
    for record in records:
        stamp = record.created_at.strftime("%Y-%m-%d %H:%M:%S") if record.created_at else "-"
        seed = "" if record.seed is None else f" seed={record.seed}"
        print(f"{record.id} {stamp} {truncate_text(record.subcommand, 40)}{seed} {record.status.value}")
    return CommandOutcome(0, _manifest(args))


HANDLERS: Dict[Tuple[str, str], Callable[[argparse.Namespace], CommandOutcome]] = {
    ("invariance", "perm"): invariance_perm,
    ("invariance", "softmax"): invariance_softmax,
    ("invariance", "ops"): invariance_ops,
    ("invariance", "substring"): invariance_substring,
    ("invariance", "curve"): invariance_curve,
    ("invariance", "prefix-perm"): invariance_prefix_perm,
    ("probe", "position"): probe_position,
    ("probe", "collisions"): probe_collisions,
    ("probe", "lens"): probe_lens,
    ("pe", "check"): pe_check,
    ("fsa", "run"): fsa_run,
    ("fsa", "seq"): fsa_seq,
    ("fsa", "scan"): fsa_scan,
    ("fsa", "classify"): fsa_classify,
    ("fsa", "semigroup"): fsa_semigroup,
    ("cover", "check"): cover_check,
    ("cascade", "run"): cascade_run,
    ("bridge", "build"): bridge_build,
    ("bridge", "compare"): bridge_compare,
    ("catalog", "list"): catalog_list,
    ("runs", "list"): runs_list,
}
