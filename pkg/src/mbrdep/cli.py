"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (bad file, misaligned
inputs, undefined metric) or failed self-test.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from mbrdep import conllu
from mbrdep.core import AlignmentError, StructureError
from mbrdep.diversity import FLEISS_FORMS, METRICS, DiversityConfig, UndefinedMetricError, diversity
from mbrdep.dpst import corpus_f1
from mbrdep.mbr import aggregate_corpus, weights_from_validation
from mbrdep.selection import METHODS, SelectionConfig, alpha_sweep, incremental_curve, select
from mbrdep.uas import corpus_uas, uas_by_pos

logger = logging.getLogger("mbrdep")

DATA_ERRORS = (conllu.ConlluError, AlignmentError, StructureError, UndefinedMetricError, OSError, UnicodeDecodeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _log_base(text: str) -> float:
    if text == "e":
        return math.e
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"log base must be 'e' or a number > 1, got {text!r}") from None
    if not value > 1:
        raise argparse.ArgumentTypeError(f"log base must be > 1, got {text!r}")
    return value


def _weights(text: str) -> list[Fraction]:
    try:
        out = [Fraction(w.strip()) for w in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"weights must be comma-separated rationals, got {text!r}") from None
    if any(w < 0 for w in out):
        raise argparse.ArgumentTypeError("weights must be non-negative")
    return out


def _grid(text: str) -> list[float]:
    try:
        return [float(a) for a in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha grid must be comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mbrdep", description="Ensemble aggregation, diversity and selection for dependency parses.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("aggregate", help="combine several parses of one corpus")
    p.add_argument("--inputs", nargs="+", required=True, metavar="CONLLU")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--weights", type=_weights, help="comma-separated rational weights, one per input")
    group.add_argument("--weights-from-gold", metavar="CONLLU", help="weight each input by its UAS on this file")
    p.add_argument("--digits", type=int, default=3, help="decimal digits kept in gold-derived weights")
    p.add_argument("--objective", choices=("uas", "f1"), default="uas")
    p.add_argument("--output", default="-", help="output file, '-' for stdout")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("evaluate", help="score a parse file against gold")
    p.add_argument("--pred", required=True, metavar="CONLLU")
    p.add_argument("--gold", required=True, metavar="CONLLU")
    p.add_argument("--metric", choices=("uas", "f1"), default="uas")
    p.add_argument("--by-pos", action="store_true", help="also report UAS per dependent POS tag")

    p = sub.add_parser("diversity", help="diversity of a set of individuals")
    p.add_argument("--inputs", nargs="+", required=True, metavar="CONLLU")
    p.add_argument("--gold", metavar="CONLLU")
    p.add_argument("--metric", choices=METRICS, default="society-entropy")
    p.add_argument("--log-base", type=_log_base, default=math.e)
    p.add_argument("--fleiss-form", choices=FLEISS_FORMS, default="as-printed")

    def selection_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--candidates", nargs="+", required=True, metavar="PATH", help="files or directories of .conllu files")
        p.add_argument("--gold", required=True, metavar="CONLLU")
        p.add_argument("--metric", choices=METRICS, default="society-entropy")
        p.add_argument("--log-base", type=_log_base, default=math.e)
        p.add_argument("--fleiss-form", choices=FLEISS_FORMS, default="as-printed")
        p.add_argument("--size", type=int, required=True)
        p.add_argument("--output", default="-")

    p = sub.add_parser("select", help="choose ensemble members on validation data")
    selection_args(p)
    p.add_argument("--method", choices=METHODS, default="diversity-objective")
    p.add_argument("--alpha", type=float, default=0.0)

    p = sub.add_parser("sweep", help="forward-stepwise selection for a grid of alpha values")
    selection_args(p)
    p.add_argument("--grid", type=_grid, help="comma-separated alphas (default 0.0..5.0 step 0.1)")

    p = sub.add_parser("curve", help="UAS of ensembles of the first t inputs")
    p.add_argument("--inputs", nargs="+", required=True, metavar="CONLLU")
    p.add_argument("--gold", required=True, metavar="CONLLU")

    p = sub.add_parser("selftest", help="check the decoders against exhaustive enumeration")
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _candidate_paths(items: Sequence[str]) -> list[Path]:
    paths = []
    for item in items:
        p = Path(item)
        paths.extend(sorted(p.glob("*.conllu")) if p.is_dir() else [p])
    if not paths:
        raise UsageError("no candidate files found")
    return paths


def _names(paths: Sequence[Path]) -> list[str]:
    stems = [p.stem for p in paths]
    if len(set(stems)) == len(stems):
        return stems
    return [str(p) for p in paths]


def _load_all(paths: Sequence[str | Path]) -> list[conllu.CorpusFile]:
    corpora = [conllu.load(p) for p in paths]
    conllu.require_aligned(corpora)
    return corpora


class _Sink:
    def __init__(self, target: str):
        self.target = target

    def __enter__(self):
        if self.target == "-":
            return sys.stdout
        self.fh = open(self.target, "w", encoding="utf-8", newline="\n")
        return self.fh

    def __exit__(self, *exc):
        if self.target != "-":
            self.fh.close()


def _metric_config(args) -> DiversityConfig:
    return DiversityConfig(args.metric, args.log_base, args.fleiss_form)


def cmd_aggregate(args) -> None:
    if args.weights is not None and len(args.weights) != len(args.inputs):
        raise UsageError(f"{len(args.weights)} weights given for {len(args.inputs)} inputs")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    corpora = _load_all(args.inputs)
    names = _names([Path(p) for p in args.inputs])
    weights = args.weights
    if args.weights_from_gold:
        gold = conllu.load(args.weights_from_gold)
        conllu.require_aligned([corpora[0], gold])
        weights = weights_from_validation(corpora, gold, args.digits)
        for name, w in zip(names, weights):
            print(f"weight\t{name}\t{w}\t{float(w)}", file=sys.stderr)
    if weights is None:
        weights = [1] * len(corpora)
    if not any(w > 0 for w in weights):
        raise UsageError("at least one weight must be positive")
    out = aggregate_corpus(corpora, weights, args.objective, template=corpora[0], jobs=args.jobs)
    with _Sink(args.output) as fh:
        conllu.write_corpus(out, fh)


def cmd_evaluate(args) -> None:
    pred, gold = _load_all([args.pred, args.gold])
    print("metric\tvalue")
    if args.metric == "uas":
        print(f"uas\t{corpus_uas(pred, gold)}")
    else:
        print(f"f1\t{corpus_f1(pred, gold)}")
    if args.by_pos:
        print("pos\tuas\tsupport")
        for pos, (value, support) in uas_by_pos(pred, gold).items():
            print(f"{pos}\t{value}\t{support}")


def cmd_diversity(args) -> None:
    config = _metric_config(args)
    if config.needs_gold and not args.gold:
        raise UsageError(f"--gold is required for metric {args.metric!r}")
    corpora = _load_all(args.inputs + ([args.gold] if args.gold else []))
    gold = corpora.pop() if args.gold else None
    value = diversity(corpora, gold if config.needs_gold else None, config)
    print("metric\tvalue")
    print(f"{args.metric}\t{value}")


def _selection_inputs(args):
    if args.size < 1:
        raise UsageError("--size must be at least 1")
    paths = _candidate_paths(args.candidates)
    if args.size > len(paths):
        raise UsageError(f"--size {args.size} exceeds the {len(paths)} candidates")
    corpora = _load_all([*paths, args.gold])
    gold = corpora.pop()
    candidates = [c.to_output(name) for c, name in zip(corpora, _names(paths))]
    return candidates, gold


def cmd_select(args) -> None:
    if args.alpha < 0:
        raise UsageError("--alpha must be non-negative")
    config = SelectionConfig(args.alpha, args.size, _metric_config(args), args.method)
    candidates, gold = _selection_inputs(args)
    result = select(candidates, gold, config)
    logger.info("ensembles decoded during selection: %d", result.ensembles_evaluated)
    with _Sink(args.output) as fh:
        fh.write("step\tname\tobjective\n")
        for step, (name, value) in enumerate(zip(result.chosen, result.step_objectives), start=1):
            fh.write(f"{step}\t{name}\t{value}\n")


def cmd_sweep(args) -> None:
    candidates, gold = _selection_inputs(args)
    rows = alpha_sweep(candidates, gold, _metric_config(args), args.size, args.grid)
    with _Sink(args.output) as fh:
        fh.write("alpha\tuas\tchosen\n")
        for row in rows:
            fh.write(f"{row.alpha}\t{row.uas}\t{','.join(row.result.chosen)}\n")


def cmd_curve(args) -> None:
    corpora = _load_all([*args.inputs, args.gold])
    gold = corpora.pop()
    print("t\tuas")
    for t, value in incremental_curve(corpora, gold):
        print(f"{t}\t{value}")


def cmd_selftest(args) -> int:
    from mbrdep.oracle import MAX_ENUM_LEN, selftest

    if not 1 <= args.max_len <= MAX_ENUM_LEN:
        raise UsageError(f"--max-len must be between 1 and {MAX_ENUM_LEN}")
    if args.cases < 1:
        raise UsageError("--cases must be positive")
    print(f"# seed={args.seed} max_len={args.max_len} cases={args.cases}")
    rows = selftest(args.max_len, args.cases, args.seed)
    for name, passed, detail in rows:
        print(f"{'PASS' if passed else 'FAIL'}\t{name}\t{detail}")
    return 0 if all(passed for _, passed, _ in rows) else 2


COMMANDS = {
    "aggregate": cmd_aggregate,
    "evaluate": cmd_evaluate,
    "diversity": cmd_diversity,
    "select": cmd_select,
    "sweep": cmd_sweep,
    "curve": cmd_curve,
    "selftest": cmd_selftest,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return exc.code if isinstance(exc.code, int) else 1
    level = logging.ERROR if args.quiet else (logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args) or 0
    except UsageError as exc:
        print(f"mbrdep {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except DATA_ERRORS as exc:
        print(f"mbrdep {args.command}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # remaining ValueErrors come from the data (e.g. no usable individual for F1 voting)
        print(f"mbrdep {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
