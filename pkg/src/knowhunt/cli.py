"""Command line: ``knowhunt index|solve|eval|inspect``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .estimator import CopaHunter, KnowledgeHunter
from .evalharness import REPORT_FORMATS, EvalError, emit_report, load_copa
from .evidence import EvidenceSentence, dump_record
from .lexicon import data_dir
from .querygen import DEFAULT_ALPHA, PlanError
from .retrieval import DEFAULT_LIMIT, FixtureError, IndexFormatError, build_index, save_index
from .schema import AnnotationError, DatasetError, SchemaError, load_wsc
from .validation import QUERY_MODE_ALIASES, ConfigError

logger = logging.getLogger("knowhunt")

EXIT_DATA = 1
EXIT_CONFIG = 2


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--task", choices=("wsc", "copa"), default="wsc")
    p.add_argument("--dataset", help="JSONL dataset (default: the shipped sample for --task)")
    p.add_argument("--queries", choices=tuple(QUERY_MODE_ALIASES), default="auto")
    p.add_argument("--manual-queries", help="JSONL file with hand-written query sets")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="semantic filter threshold")
    p.add_argument("--provider", choices=("corpus", "fixture"))
    p.add_argument("--corpus-dir", help="directory of .txt files to index on the fly")
    p.add_argument("--index", help="index file written by 'knowhunt index'")
    p.add_argument("--fixtures", help="recorded snippet file")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="snippets per query")
    p.add_argument("--weights", help="len2,len1,ord2,ord1 (default 2,1,2,1)")
    p.add_argument("--force-label", action="store_true", help="label unresolved snippets by proximity")
    p.add_argument("--random-backoff", action="store_true", help="guess instead of abstaining")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lexicon-dir", help="alternative taxonomy and word-list directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knowhunt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a line-based index from a corpus directory")
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lexicon-dir")

    p = sub.add_parser("solve", help="resolve every instance and dump the resolutions")
    _add_pipeline_args(p)
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("eval", help="resolve, score against gold and write a report")
    _add_pipeline_args(p)
    p.add_argument("--report-format", choices=REPORT_FORMATS, default="json-lines")
    p.add_argument("--out", help="report file (default: stdout)")

    p = sub.add_parser("inspect", help="list the evidence gathered for one instance")
    _add_pipeline_args(p)
    p.add_argument("--id", required=True, dest="instance_id")
    p.add_argument("--json", action="store_true", help="print evidence records as JSON lines")

    return parser


def _hunter(args):
    cls = CopaHunter if args.task == "copa" else KnowledgeHunter
    return cls(
        query_mode=args.queries,
        alpha=args.alpha,
        provider=args.provider,
        corpus_dir=args.corpus_dir,
        index_path=args.index,
        fixtures=args.fixtures,
        manual_queries=args.manual_queries,
        limit=args.limit,
        weights=args.weights,
        force_label=args.force_label,
        random_backoff=args.random_backoff,
        seed=args.seed,
        lexicon_dir=args.lexicon_dir,
        n_jobs=args.jobs,
    ).fit()


def _dataset(args):
    default = "copa_sample.jsonl" if args.task == "copa" else "wsc_sample.jsonl"
    path = Path(args.dataset) if args.dataset else data_dir() / default
    if not path.is_file():
        raise ConfigError(f"dataset not found: {path}")
    items = load_copa(path) if args.task == "copa" else load_wsc(path)
    logger.info("loaded %d instances from %s", len(items), path)
    return items


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_index(args) -> int:
    from .lexicon import Lexicon

    if not Path(args.corpus_dir).is_dir():
        raise ConfigError(f"corpus directory not found: {args.corpus_dir}")
    lex = Lexicon.load(args.lexicon_dir)
    index = build_index(args.corpus_dir, lex.lemmatizer)
    save_index(index, args.out)
    print(f"indexed {len(index)} documents, {len(index.postings)} terms -> {args.out}")
    return 0


def cmd_solve(args) -> int:
    hunter = _hunter(args)
    items = _dataset(args)
    lines = [r.to_json() + "\n" for r in hunter.resolve(items)]
    _write("".join(lines), args.out)
    return 0


def cmd_eval(args) -> int:
    hunter = _hunter(args)
    items = _dataset(args)
    report = hunter.evaluate(items)
    report.check_consistency()
    text = emit_report(report, args.report_format)
    _write(text, args.out)
    stream = sys.stderr if args.out is None else sys.stdout
    print(report.summary_line(), file=stream)
    return 0


def _describe(ev: EvidenceSentence) -> str:
    s = ev.snippet
    head = f"[{ev.label}] strength={ev.strength} (len={ev.len_score} ord={ev.order_score})"
    terms = f"terms: {s.matched_term_c!r} / {s.matched_term_q!r}"
    if ev.parse is None:
        return f"{head} {ev.target}\n  {s.text}\n  {terms}"
    p = ev.parse
    mention = lambda m: m.text if m is not None else "-"  # noqa: E731
    detail = (
        f"pattern={p.pattern or '-'} coref={p.coref_target}{' (forced)' if p.forced else ''} "
        f"voice={'passive' if p.passive else 'active'} causative={str(p.causative).lower()} "
        f"E1'={mention(p.e1p)} E2'={mention(p.e2p)} E3'={mention(p.e3p)}"
    )
    return f"{head}\n  {s.text}\n  {terms}\n  {detail}"


def cmd_inspect(args) -> int:
    hunter = _hunter(args)
    items = {x.id: x for x in _dataset(args)}
    if args.instance_id not in items:
        raise ConfigError(f"unknown instance id {args.instance_id!r}")
    inst = items[args.instance_id]
    evidence = hunter.evidence(inst)
    if not evidence:
        print(f"{inst.id}: no evidence")
        return 0
    if args.json:
        for ev in evidence:
            print(json.dumps(dump_record(inst.id, ev), ensure_ascii=False))
        return 0
    print(f"{inst.id}: {len(evidence)} evidence sentence(s)")
    for ev in evidence:
        print(_describe(ev))
    res = hunter.resolve([inst])[0]
    print(f"decision={res.decision} strengths={json.dumps(res.strengths)}")
    return 0


COMMANDS = {"index": cmd_index, "solve": cmd_solve, "eval": cmd_eval, "inspect": cmd_inspect}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"knowhunt: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        DatasetError,
        AnnotationError,
        SchemaError,
        PlanError,
        EvalError,
        FixtureError,
        IndexFormatError,
        OSError,
    ) as exc:
        print(f"knowhunt: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
