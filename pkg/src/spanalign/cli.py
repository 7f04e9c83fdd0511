"""Command line interface.

One executable, subcommand per pipeline stage::

    spanalign synth       build SQuAD-layout training data
    spanalign synth-null  add impossible records from unaligned sentences
    spanalign score       run a built-in scorer, write a prediction file
    spanalign align-ilp   snap + combine + exact selection
    spanalign align-sym   bidirectional averaging + threshold
    spanalign baseline    dictionary DP aligner
    spanalign eval        span or pair metrics against gold
    spanalign pipeline    planted-scorer demo chaining the stages

Every option can come from an INI config file (--config, or the
SPANALIGN_CONFIG environment variable); explicit flags win. Outputs are
written atomically and byte-deterministic for a fixed seed, whatever
--jobs says. Exit codes: 0 ok, 1 validation/parse/config, 2 solver cap
exceeded, 3 I/O.

Corpus files paired by a subcommand (baseline, score) match documents
positionally: the i-th source document goes with the i-th target one.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from spanalign import __version__
from spanalign._kernels import BACKEND
from spanalign.baseline import BeadPenalties, dp_align
from spanalign.corpus import (
    Alignment,
    Document,
    Span,
    atomic_write_lines,
    flip_alignment,
    load_alignments,
    load_corpus,
    write_alignments,
)
from spanalign.errors import (
    ConfigError,
    ParseError,
    SolverCapError,
    SpanAlignError,
    ValidationError,
)
from spanalign.metrics import evaluate_pairs, evaluate_spans, report
from spanalign.optimize import (
    CombineConfig,
    SolveReport,
    alignment_from_selection,
    combine_scores,
    flip_ranges,
    solve_exact,
    solve_greedy,
)
from spanalign.predict import (
    BilingualDictionary,
    LexicalScorer,
    NullRule,
    PlantedScorer,
    PredictionRecord,
    apply_null_rule,
    load_predictions,
    write_predictions,
)
from spanalign.snap import SnapConfig, candidate_pool, collect_candidates
from spanalign.symmetrize import SymConfig, symmetrize
from spanalign.synth import (
    SynthConfig,
    load_parallel_pairs,
    synthesize,
    synthesize_null_examples,
    write_squad,
)

log = logging.getLogger("spanalign")

CONFIG_ENV_VAR = "SPANALIGN_CONFIG"

_CONFIG_KEYS = {
    "global": {"jobs", "log_level", "seed", "out_dir"},
    "synth": {
        "negatives",
        "mode",
        "seed",
        "max_query_tokens",
        "max_context_tokens",
        "format",
        "null_cap",
    },
    "predict": {"top_k", "sharpness", "unit", "tau"},
    "snap": {"boundary_rule", "min_score"},
    "combine": {"c", "c_prime", "one_sided_policy", "solver", "exact_cap", "emit_nulls"},
    "sym": {"theta", "missing"},
    "penalties": {"one_one", "zero_one", "one_zero", "one_two", "two_one", "two_two"},
}

_BOOL_STATES = {
    "1": True,
    "true": True,
    "yes": True,
    "on": True,
    "0": False,
    "false": False,
    "no": False,
    "off": False,
}


class RunConfig:
    """INI-backed defaults; flags always override. Unknown sections or
    keys are rejected up front so typos never silently fall back."""

    def __init__(self, path: str | None):
        self._cp = configparser.ConfigParser(interpolation=None)
        self.path = path
        if path is None:
            return
        try:
            with open(path, encoding="utf-8") as fh:
                self._cp.read_file(fh, source=path)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file {path} does not exist") from exc
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for section in self._cp.sections():
            if section not in _CONFIG_KEYS:
                raise ConfigError(f"{path}: unknown config section [{section}]")
            for key in self._cp[section]:
                if key not in _CONFIG_KEYS[section]:
                    raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")

    def resolve(self, flag_value, section: str, key: str, default, cast=str):
        if flag_value is not None:
            return flag_value
        if self._cp.has_option(section, key):
            raw = self._cp.get(section, key)
            try:
                if cast is bool:
                    state = _BOOL_STATES.get(raw.strip().lower())
                    if state is None:
                        raise ValueError(raw)
                    return state
                return cast(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"{self.path}: [{section}] {key} = {raw!r} is not a {cast.__name__}"
                ) from exc
        return default


def _out_path(args, cfg: RunConfig, path: str) -> str:
    """Resolve an output path against [global] out_dir when one is set."""
    out_dir = cfg.resolve(None, "global", "out_dir", None)
    if out_dir and not os.path.isabs(path):
        os.makedirs(out_dir, exist_ok=True)
        return os.path.join(out_dir, path)
    return path


class _Parser(argparse.ArgumentParser):
    # The contract reserves exit status 2 for the solver cap, so usage
    # errors exit 1 instead of argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="spanalign", description=__doc__.split("\n\n")[0])
    parser.add_argument(
        "--version",
        action="version",
        version=f"spanalign {__version__} (kernel backend: {BACKEND})",
    )
    parser.add_argument("--config", help="INI config file with per-section defaults")
    parser.add_argument("--jobs", type=int, help="worker threads for per-pair stages")
    parser.add_argument("--log-level", help="logging level name (default WARNING)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="build SQuAD-layout records from a parallel corpus")
    p.add_argument("--pairs", required=True, help="JSONL parallel pairs {src, tgt}")
    p.add_argument("--name", required=True, help="corpus name used in qids")
    p.add_argument("--out", required=True)
    p.add_argument("--flip", action="store_true", help="synthesize the reverse direction")
    p.add_argument("--no-space", action="store_true", help="join context sentences without spaces")
    p.add_argument("--negatives", type=int, help="U, negatives per record (default 9)")
    p.add_argument("--mode", choices=["random", "contextual"])
    p.add_argument("--seed", type=int)
    p.add_argument("--max-query-tokens", type=int)
    p.add_argument("--max-context-tokens", type=int)
    p.add_argument("--format", dest="format_version", choices=["v1.1", "v2.0"])

    p = sub.add_parser("synth-null", help="impossible records from unaligned sentences")
    p.add_argument("--src-corpus", required=True)
    p.add_argument("--tgt-corpus", required=True)
    p.add_argument("--gold", required=True, help="gold alignment file")
    p.add_argument("--name", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--null-cap", type=float, help="max impossible records per doc, as a fraction")
    p.add_argument("--max-query-tokens", type=int)
    p.add_argument("--max-context-tokens", type=int)

    p = sub.add_parser("score", help="run a built-in scorer over paired documents")
    p.add_argument("--scorer", required=True, choices=["lexical", "planted"])
    p.add_argument("--src-corpus", required=True)
    p.add_argument("--tgt-corpus", required=True)
    p.add_argument("--direction", choices=["src2tgt", "tgt2src"], default="src2tgt")
    p.add_argument("--dictionary", help="TSV dictionary (lexical scorer)")
    p.add_argument("--gold", help="gold alignment file (planted scorer)")
    p.add_argument("--sharpness", type=float)
    p.add_argument("--unit", choices=["group", "sentence"])
    p.add_argument("--top-k", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("align-ilp", help="snap, combine directions, select exactly")
    p.add_argument("--fwd", required=True, help="src2tgt prediction file")
    p.add_argument("--rev", help="tgt2src prediction file (omit for unidirectional)")
    p.add_argument("--src-corpus", required=True)
    p.add_argument("--tgt-corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--c", type=float)
    p.add_argument("--c-prime", help='reverse weight, a number or "auto"')
    p.add_argument("--one-sided", dest="one_sided_policy", choices=["keep", "drop"])
    p.add_argument("--solver", choices=["exact", "greedy"])
    p.add_argument("--exact-cap", type=int)
    p.add_argument("--emit-nulls", action="store_true", default=None)
    p.add_argument("--boundary-rule", choices=["nearest", "contain", "cover"])
    p.add_argument("--min-score", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--report", help="write per-pair solver reports (JSONL)")

    p = sub.add_parser("align-sym", help="average directions, threshold, merge groups")
    p.add_argument("--fwd", required=True)
    p.add_argument("--rev", required=True)
    p.add_argument("--src-corpus", required=True)
    p.add_argument("--tgt-corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--theta", type=float)
    p.add_argument("--missing", choices=["half", "skip"])
    p.add_argument("--tau", type=float)

    p = sub.add_parser("baseline", help="dictionary DP aligner")
    p.add_argument("--src-corpus", required=True)
    p.add_argument("--tgt-corpus", required=True)
    p.add_argument("--dictionary", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--emit-nulls", action="store_true", default=None)

    p = sub.add_parser("eval", help="score predictions or alignments against gold")
    p.add_argument("--mode", required=True, choices=["span", "pair"])
    p.add_argument("--pred", required=True, help="alignment file (pair) or prediction file (span)")
    p.add_argument("--gold", required=True, help="gold alignment file")
    p.add_argument("--src-corpus", required=True)
    p.add_argument("--tgt-corpus", required=True)
    p.add_argument("--system", default="this-work", help="label in the report")
    p.add_argument("--direction", default="src2tgt", help="label in the report")
    p.add_argument("--tau", type=float)
    p.add_argument("--report", help="also write the report as JSON to this file")

    p = sub.add_parser("pipeline", help="planted demo: score, align both ways, eval")
    p.add_argument("--src-corpus", required=True)
    p.add_argument("--tgt-corpus", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--sharpness", type=float)
    p.add_argument("--theta", type=float)
    return parser


def _load_doc_maps(src_path, tgt_path) -> tuple[dict, dict, list, list]:
    src_docs = load_corpus(src_path)
    tgt_docs = load_corpus(tgt_path)
    return (
        {d.doc_id: d for d in src_docs},
        {d.doc_id: d for d in tgt_docs},
        src_docs,
        tgt_docs,
    )


def _zip_docs(src_docs: Sequence[Document], tgt_docs: Sequence[Document]):
    if len(src_docs) != len(tgt_docs):
        raise ValidationError(
            f"corpora pair positionally but hold {len(src_docs)} vs {len(tgt_docs)} documents"
        )
    return list(zip(src_docs, tgt_docs))


def _jobs_map(jobs: int, fn, items):
    """Order-preserving map, optionally threaded. Results arrive in
    input order either way, keeping outputs byte-identical."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _rule_for(header: dict, tau: float) -> NullRule:
    if header.get("na_slot"):
        return NullRule("na_token")
    return NullRule("score_threshold", tau=tau)


def _ruled_by_pair(path, tau: float, expect_direction: str):
    header, records = load_predictions(path)
    if header["direction"] != expect_direction:
        raise ValidationError(
            f"{path}: header declares {header['direction']}, expected {expect_direction}"
        )
    rule = _rule_for(header, tau)
    by_pair: dict[tuple[str, str], list[PredictionRecord]] = {}
    for rec in records:
        ruled = apply_null_rule(rec, rule)
        by_pair.setdefault((rec.query_doc_id, rec.target_doc_id), []).append(ruled)
    return by_pair


def _seed(args, cfg: RunConfig) -> int:
    # per-section seed first, then the global one
    fallback = cfg.resolve(None, "global", "seed", 0, int)
    return cfg.resolve(args.seed, "synth", "seed", fallback, int)


def _cmd_synth(args, cfg: RunConfig) -> int:
    synth_cfg = SynthConfig(
        num_negatives=cfg.resolve(args.negatives, "synth", "negatives", 9, int),
        sampling_mode=cfg.resolve(args.mode, "synth", "mode", "random"),
        rng_seed=_seed(args, cfg),
        max_query_tokens=cfg.resolve(args.max_query_tokens, "synth", "max_query_tokens", 100, int),
        max_context_tokens=cfg.resolve(
            args.max_context_tokens, "synth", "max_context_tokens", 1000, int
        ),
        format_version=cfg.resolve(args.format_version, "synth", "format", "v1.1"),
    )
    corpus = load_parallel_pairs(args.pairs, args.name, no_space=args.no_space)
    if args.flip:
        corpus = corpus.flipped()
    records = synthesize(corpus, synth_cfg)
    write_squad(records, _out_path(args, cfg, args.out), synth_cfg, title=corpus.name)
    log.info("synth: %d records -> %s", len(records), args.out)
    return 0


def _cmd_synth_null(args, cfg: RunConfig) -> int:
    synth_cfg = SynthConfig(
        rng_seed=_seed(args, cfg),
        max_query_tokens=cfg.resolve(args.max_query_tokens, "synth", "max_query_tokens", 100, int),
        max_context_tokens=cfg.resolve(
            args.max_context_tokens, "synth", "max_context_tokens", 1000, int
        ),
        format_version="v2.0",
        null_cap=cfg.resolve(args.null_cap, "synth", "null_cap", 0.10, float),
    )
    src_by_id, tgt_by_id, src_docs, tgt_docs = _load_doc_maps(args.src_corpus, args.tgt_corpus)
    gold = load_alignments(args.gold, src_docs, tgt_docs)
    triples = [(src_by_id[a.src_doc_id], tgt_by_id[a.tgt_doc_id], a) for a in gold]
    records = synthesize_null_examples(triples, synth_cfg)
    write_squad(records, _out_path(args, cfg, args.out), synth_cfg, title=args.name)
    log.info("synth-null: %d records -> %s", len(records), args.out)
    return 0


def _cmd_score(args, cfg: RunConfig) -> int:
    top_k = cfg.resolve(args.top_k, "predict", "top_k", 5, int)
    src_by_id, tgt_by_id, src_docs, tgt_docs = _load_doc_maps(args.src_corpus, args.tgt_corpus)
    pairs = _zip_docs(src_docs, tgt_docs)
    if args.direction == "tgt2src":
        pairs = [(t, s) for s, t in pairs]

    if args.scorer == "lexical":
        if not args.dictionary:
            raise ConfigError("the lexical scorer needs --dictionary")
        dictionary = BilingualDictionary.from_file(args.dictionary)
        if args.direction == "tgt2src":
            dictionary = dictionary.invert()
        scorer = LexicalScorer(dictionary, top_k=top_k)
        na_slot = False
    else:
        if not args.gold:
            raise ConfigError("the planted scorer needs --gold")
        gold = load_alignments(args.gold, src_docs, tgt_docs)
        if args.direction == "tgt2src":
            gold = [flip_alignment(a) for a in gold]
        scorer = PlantedScorer(
            gold,
            sharpness=cfg.resolve(args.sharpness, "predict", "sharpness", 1.0, float),
            unit=cfg.resolve(args.unit, "predict", "unit", "group"),
            top_k=top_k,
        )
        na_slot = True

    jobs = getattr(args, "_jobs", 1)
    record_lists = _jobs_map(jobs, lambda qt: scorer.predict(*qt), pairs)
    records = [rec for lst in record_lists for rec in lst]
    write_predictions(
        records,
        _out_path(args, cfg, args.out),
        direction=args.direction,
        producer=args.scorer,
        na_slot=na_slot,
    )
    log.info("score: %d records -> %s", len(records), args.out)
    return 0


def _cmd_align_ilp(args, cfg: RunConfig) -> int:
    tau = cfg.resolve(args.tau, "predict", "tau", 0.0, float)
    snap_cfg = SnapConfig(
        boundary_rule=cfg.resolve(args.boundary_rule, "snap", "boundary_rule", "nearest"),
        min_score=cfg.resolve(args.min_score, "snap", "min_score", 1e-6, float),
    )
    raw_c_prime = cfg.resolve(args.c_prime, "combine", "c_prime", "auto")
    try:
        c_prime = None if raw_c_prime == "auto" else float(raw_c_prime)
    except ValueError as exc:
        raise ConfigError(f'--c-prime must be a number or "auto", got {raw_c_prime!r}') from exc
    combine_cfg = CombineConfig(
        c=cfg.resolve(args.c, "combine", "c", 1.0, float),
        c_prime=c_prime,
        one_sided_policy=cfg.resolve(args.one_sided_policy, "combine", "one_sided_policy", "keep"),
    )
    solver = cfg.resolve(args.solver, "combine", "solver", "exact")
    exact_cap = cfg.resolve(args.exact_cap, "combine", "exact_cap", 200, int)
    emit_nulls = cfg.resolve(args.emit_nulls, "combine", "emit_nulls", False, bool)

    src_by_id, tgt_by_id, _, _ = _load_doc_maps(args.src_corpus, args.tgt_corpus)
    fwd_by_pair = _ruled_by_pair(args.fwd, tau, "src2tgt")
    rev_by_pair = _ruled_by_pair(args.rev, tau, "tgt2src") if args.rev else {}
    keys = sorted(set(fwd_by_pair) | {(s, t) for (t, s) in rev_by_pair})

    def solve_pair(key):
        src_id, tgt_id = key
        if src_id not in src_by_id:
            raise ValidationError(f"{args.fwd}: unknown src doc_id {src_id!r}")
        if tgt_id not in tgt_by_id:
            raise ValidationError(f"{args.fwd}: unknown tgt doc_id {tgt_id!r}")
        src_doc, tgt_doc = src_by_id[src_id], tgt_by_id[tgt_id]
        fwd_units = collect_candidates(
            fwd_by_pair.get(key, []), src_doc, tgt_doc, snap_cfg
        )
        rev_units = collect_candidates(
            rev_by_pair.get((tgt_id, src_id), []), tgt_doc, src_doc, snap_cfg
        )
        fwd_pool = candidate_pool(fwd_units)
        rev_pool = flip_ranges(candidate_pool(rev_units))
        if not fwd_pool and not rev_pool:
            # everything null-ruled for this pair; nothing to optimize
            cands = []
            solved = SolveReport(0.0, (), True, 0)
        else:
            cands = combine_scores(fwd_pool, rev_pool, combine_cfg)
            if solver == "exact":
                solved = solve_exact(
                    cands,
                    cap=exact_cap,
                    n_src=src_doc.num_sentences,
                    n_tgt=tgt_doc.num_sentences,
                )
            else:
                solved = solve_greedy(cands)
        alignment = alignment_from_selection(
            src_doc, tgt_doc, cands, solved.selected, emit_nulls=emit_nulls
        )
        return alignment, solved, len(cands)

    results = _jobs_map(getattr(args, "_jobs", 1), solve_pair, keys)
    write_alignments([r[0] for r in results], _out_path(args, cfg, args.out))
    if args.report:
        atomic_write_lines(
            _out_path(args, cfg, args.report),
            (
                json.dumps(
                    {
                        "src_doc_id": alignment.src_doc_id,
                        "tgt_doc_id": alignment.tgt_doc_id,
                        "objective": solved.objective,
                        "selected": list(solved.selected),
                        "optimal": solved.optimal,
                        "nodes_explored": solved.nodes_explored,
                        "candidates": n_cands,
                    },
                    ensure_ascii=False,
                    separators=(",", ":"),
                    sort_keys=True,
                )
                for alignment, solved, n_cands in results
            ),
        )
    log.info("align-ilp: %d document pairs -> %s", len(results), args.out)
    return 0


def _cmd_align_sym(args, cfg: RunConfig) -> int:
    tau = cfg.resolve(args.tau, "predict", "tau", 0.0, float)
    sym_cfg = SymConfig(
        theta=cfg.resolve(args.theta, "sym", "theta", 0.4, float),
        missing=cfg.resolve(args.missing, "sym", "missing", "half"),
    )
    src_by_id, tgt_by_id, _, _ = _load_doc_maps(args.src_corpus, args.tgt_corpus)
    fwd_by_pair = _ruled_by_pair(args.fwd, tau, "src2tgt")
    rev_by_pair = _ruled_by_pair(args.rev, tau, "tgt2src")
    keys = sorted(set(fwd_by_pair) | {(s, t) for (t, s) in rev_by_pair})

    def sym_pair(key):
        src_id, tgt_id = key
        if src_id not in src_by_id:
            raise ValidationError(f"{args.fwd}: unknown src doc_id {src_id!r}")
        if tgt_id not in tgt_by_id:
            raise ValidationError(f"{args.fwd}: unknown tgt doc_id {tgt_id!r}")
        return symmetrize(
            fwd_by_pair.get(key, []),
            rev_by_pair.get((tgt_id, src_id), []),
            src_by_id[src_id],
            tgt_by_id[tgt_id],
            sym_cfg,
        )
    alignments = _jobs_map(getattr(args, "_jobs", 1), sym_pair, keys)
    write_alignments(alignments, _out_path(args, cfg, args.out))
    log.info("align-sym: %d document pairs -> %s", len(alignments), args.out)
    return 0


def _penalties_from(cfg: RunConfig) -> BeadPenalties:
    base = BeadPenalties()
    return BeadPenalties(
        **{
            name: cfg.resolve(None, "penalties", name, getattr(base, name), float)
            for name in ("one_one", "zero_one", "one_zero", "one_two", "two_one", "two_two")
        }
    )


def _cmd_baseline(args, cfg: RunConfig) -> int:
    emit_nulls = cfg.resolve(args.emit_nulls, "combine", "emit_nulls", False, bool)
    dictionary = BilingualDictionary.from_file(args.dictionary)
    penalties = _penalties_from(cfg)
    _, _, src_docs, tgt_docs = _load_doc_maps(args.src_corpus, args.tgt_corpus)
    doc_pairs = _zip_docs(src_docs, tgt_docs)
    results = _jobs_map(
        getattr(args, "_jobs", 1),
        lambda st: dp_align(st[0], st[1], dictionary, penalties).to_alignment(emit_nulls),
        doc_pairs,
    )
    write_alignments(results, _out_path(args, cfg, args.out))
    log.info("baseline: %d document pairs -> %s", len(results), args.out)
    return 0


def _gold_span_lookup(
    gold: Alignment, src_doc: Document, tgt_doc: Document
) -> dict[Span, Span | None]:
    """Map each gold query span to its gold answer span (None = null).

    Keys are the token spans of two-sided groups' source sides, plus
    every source sentence outside any two-sided group mapping to null.
    """
    table: dict[Span, Span | None] = {}
    covered: set[int] = set()
    for group in gold.links:
        if group.src_sent_ids and group.tgt_sent_ids:
            qspan = src_doc.sentence_range_span(group.src_sent_ids[0], group.src_sent_ids[-1])
            tspan = tgt_doc.sentence_range_span(group.tgt_sent_ids[0], group.tgt_sent_ids[-1])
            table[qspan] = tspan
            covered.update(group.src_sent_ids)
    for sent in src_doc.sentences:
        if sent.sent_id not in covered:
            table.setdefault(sent.token_range, None)
    return table


def _cmd_eval(args, cfg: RunConfig) -> int:
    src_by_id, tgt_by_id, src_docs, tgt_docs = _load_doc_maps(args.src_corpus, args.tgt_corpus)
    gold = load_alignments(args.gold, src_docs, tgt_docs)

    if args.mode == "pair":
        preds = load_alignments(args.pred, src_docs, tgt_docs, require_contiguous=False)
        result = evaluate_pairs(preds, gold)
    else:
        tau = cfg.resolve(args.tau, "predict", "tau", 0.0, float)
        by_pair = _ruled_by_pair(args.pred, tau, args.direction)
        gold_by_key = {(a.src_doc_id, a.tgt_doc_id): a for a in gold}
        if args.direction == "tgt2src":
            gold_by_key = {(t, s): flip_alignment(a) for (s, t), a in gold_by_key.items()}
            src_by_id, tgt_by_id = tgt_by_id, src_by_id
        items = []
        for key in sorted(by_pair):
            if key not in gold_by_key:
                raise ValidationError(f"{args.pred}: no gold alignment for pair {key}")
            q_doc, t_doc = src_by_id[key[0]], tgt_by_id[key[1]]
            lookup = _gold_span_lookup(gold_by_key[key], q_doc, t_doc)
            for rec in by_pair[key]:
                if rec.query_span not in lookup:
                    raise ValidationError(
                        f"{args.pred}: query {rec.qid!r} matches no gold unit"
                    )
                best = rec.best
                pred_span = best.target_span if best else None
                items.append((rec.qid, pred_span, lookup[rec.query_span]))
        result = evaluate_spans(items)

    rows = [(args.system, args.direction, result)]
    print(report(rows))
    if args.report:
        atomic_write_lines(_out_path(args, cfg, args.report), [report(rows, fmt="json")])
    return 0


def _cmd_pipeline(args, cfg: RunConfig) -> int:
    """Planted demo: plant gold into scores, then recover it both ways."""
    sharpness = cfg.resolve(args.sharpness, "predict", "sharpness", 1.0, float)
    theta = cfg.resolve(args.theta, "sym", "theta", 0.4, float)
    jobs = getattr(args, "_jobs", 1)
    out = args.out_dir
    os.makedirs(out, exist_ok=True)

    src_by_id, tgt_by_id, src_docs, tgt_docs = _load_doc_maps(args.src_corpus, args.tgt_corpus)
    gold = load_alignments(args.gold, src_docs, tgt_docs)
    gold_rev = [flip_alignment(a) for a in gold]
    pairs = [(src_by_id[a.src_doc_id], tgt_by_id[a.tgt_doc_id]) for a in gold]

    def score_to(path, alignments, doc_pairs, direction, unit):
        scorer = PlantedScorer(alignments, sharpness=sharpness, unit=unit)
        lists = _jobs_map(jobs, lambda qt: scorer.predict(*qt), doc_pairs)
        write_predictions(
            [r for lst in lists for r in lst],
            path,
            direction=direction,
            producer="planted",
            na_slot=True,
        )
        return path

    rev_pairs = [(t, s) for s, t in pairs]
    files = {
        "fwd_group": score_to(os.path.join(out, "fwd.group.pred.jsonl"), gold, pairs, "src2tgt", "group"),
        "rev_group": score_to(os.path.join(out, "rev.group.pred.jsonl"), gold_rev, rev_pairs, "tgt2src", "group"),
        "fwd_sent": score_to(os.path.join(out, "fwd.sent.pred.jsonl"), gold, pairs, "src2tgt", "sentence"),
        "rev_sent": score_to(os.path.join(out, "rev.sent.pred.jsonl"), gold_rev, rev_pairs, "tgt2src", "sentence"),
    }

    ilp_out = os.path.join(out, "ilp.align.jsonl")
    sym_out = os.path.join(out, "sym.align.jsonl")

    fwd_by_pair = _ruled_by_pair(files["fwd_group"], 0.0, "src2tgt")
    rev_by_pair = _ruled_by_pair(files["rev_group"], 0.0, "tgt2src")
    snap_cfg = SnapConfig()
    combine_cfg = CombineConfig()

    def solve_pair(key):
        src_doc, tgt_doc = src_by_id[key[0]], tgt_by_id[key[1]]
        fwd_units = collect_candidates(fwd_by_pair.get(key, []), src_doc, tgt_doc, snap_cfg)
        rev_units = collect_candidates(
            rev_by_pair.get((key[1], key[0]), []), tgt_doc, src_doc, snap_cfg
        )
        fwd_pool = candidate_pool(fwd_units)
        rev_pool = flip_ranges(candidate_pool(rev_units))
        if not fwd_pool and not rev_pool:
            return alignment_from_selection(src_doc, tgt_doc, [], ())
        cands = combine_scores(fwd_pool, rev_pool, combine_cfg)
        solved = solve_exact(cands)
        return alignment_from_selection(src_doc, tgt_doc, cands, solved.selected)

    keys = sorted(set(fwd_by_pair) | {(s, t) for (t, s) in rev_by_pair})
    write_alignments(_jobs_map(jobs, solve_pair, keys), ilp_out)

    sfwd = _ruled_by_pair(files["fwd_sent"], 0.0, "src2tgt")
    srev = _ruled_by_pair(files["rev_sent"], 0.0, "tgt2src")
    sym_cfg = SymConfig(theta=theta)

    def sym_pair(key):
        return symmetrize(
            sfwd.get(key, []),
            srev.get((key[1], key[0]), []),
            src_by_id[key[0]],
            tgt_by_id[key[1]],
            sym_cfg,
        )

    write_alignments(_jobs_map(jobs, sym_pair, sorted(sfwd)), sym_out)

    rows = []
    for label, path in (("ilp", ilp_out), ("sym", sym_out)):
        preds = load_alignments(path, src_docs, tgt_docs, require_contiguous=False)
        rows.append((label, "bidi", evaluate_pairs(preds, gold)))
    print(report(rows))
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "synth-null": _cmd_synth_null,
    "score": _cmd_score,
    "align-ilp": _cmd_align_ilp,
    "align-sym": _cmd_align_sym,
    "baseline": _cmd_baseline,
    "eval": _cmd_eval,
    "pipeline": _cmd_pipeline,
}


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    config_path = args.config or os.environ.get(CONFIG_ENV_VAR) or None
    cfg = RunConfig(config_path)
    level_name = cfg.resolve(args.log_level, "global", "log_level", "WARNING")
    level = getattr(logging, str(level_name).upper(), None)
    if not isinstance(level, int):
        raise ConfigError(f"unknown log level {level_name!r}")
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    jobs = cfg.resolve(args.jobs, "global", "jobs", 1, int)
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    args._jobs = jobs
    return _COMMANDS[args.command](args, cfg)


def main(argv=None) -> int:
    try:
        return run(argv)
    except SolverCapError as exc:
        print(f"spanalign: solver cap: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValidationError, ConfigError) as exc:
        print(f"spanalign: error: {exc}", file=sys.stderr)
        return 1
    except SpanAlignError as exc:
        print(f"spanalign: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"spanalign: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
