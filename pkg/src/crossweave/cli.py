"""Command-line entry points.

Subcommands: run (full pipeline), validate (load inputs only), stats
(summarize a finished run), mark / unmark (annotation round trip through
an external translator).  Exit codes: 0 success, 1 invalid config or
input files, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from crossweave import knowledge, markers, pipeline
from crossweave.errors import ConfigError, CorpusError, LoadError

logger = logging.getLogger(__name__)


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = pipeline.load_config(args.config)
    cfg = pipeline.override(cfg, seed=args.seed, stage=args.stage)
    stats = pipeline.run_pipeline(cfg, workers=args.workers)
    total = sum(stats["examples"].values())
    print(f"wrote {total} records to {cfg.output_dir / 'corpus.jsonl'}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    cfg = pipeline.load_config(args.config)
    lexicon = knowledge.load_lexicon(cfg.lexicon)
    relations = knowledge.load_relations(cfg.relations)
    facts = knowledge.load_facts(cfg.facts, lexicon, relations)
    registry = knowledge.load_passage_registry(cfg.passage_registry)
    print(
        f"ok: {len(lexicon)} entities, {len(relations)} relations, "
        f"{len(facts)} facts, {len(registry.articles)} articles, {len(registry.links)} links"
    )
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    print(pipeline.stats_report(args.output_dir))
    return 0


def _cmd_mark(args: argparse.Namespace) -> int:
    n = markers.mark_file(args.annotations, args.marked, args.ids)
    print(f"marked {n} sentences to {args.marked}")
    return 0


def _cmd_unmark(args: argparse.Namespace) -> int:
    recovered, quarantined = markers.unmark_file(
        args.translated, args.ids, args.annotations, args.output, args.quarantine
    )
    print(f"recovered {recovered} sentences, quarantined {quarantined}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crossweave", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the corpus construction pipeline")
    run.add_argument("--config", required=True, help="path to the YAML run config")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--stage", choices=pipeline.STAGES, default=None, help="override the config stage")
    run.add_argument("--workers", type=int, default=1, help="parallel document workers")
    run.set_defaults(func=_cmd_run)

    validate = sub.add_parser("validate", help="load and check all inputs, write nothing")
    validate.add_argument("--config", required=True)
    validate.set_defaults(func=_cmd_validate)

    stats = sub.add_parser("stats", help="summarize a completed run directory")
    stats.add_argument("output_dir")
    stats.set_defaults(func=_cmd_stats)

    mark = sub.add_parser("mark", help="wrap gold entities in numbered markers for translation")
    mark.add_argument("--annotations", required=True, help="input annotated-sentence JSONL")
    mark.add_argument("--marked", required=True, help="output text file, one sentence per line")
    mark.add_argument("--ids", required=True, help="output sidecar of sentence ids")
    mark.set_defaults(func=_cmd_mark)

    unmark = sub.add_parser("unmark", help="recover annotations from translated marked text")
    unmark.add_argument("--translated", required=True, help="translated marked text file")
    unmark.add_argument("--ids", required=True, help="sidecar of sentence ids from mark")
    unmark.add_argument("--annotations", required=True, help="original annotated-sentence JSONL")
    unmark.add_argument("--output", required=True, help="output annotated-sentence JSONL")
    unmark.add_argument("--quarantine", required=True, help="output JSONL of {id, error} rejects")
    unmark.set_defaults(func=_cmd_unmark)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, LoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # unexpected; keep the traceback for debugging
        logger.exception("unhandled failure")
        return 2


if __name__ == "__main__":
    sys.exit(main())
