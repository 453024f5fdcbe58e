"""End-to-end corpus construction: config, orchestration, stats, manifest.

A run is a pure function of (config, inputs): per-document seeds are
derived by hashing, worker scheduling never reorders output, and the
manifest records digests of everything consumed so reruns can be
compared byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from crossweave import collator, facts, knowledge, passages, switching
from crossweave.errors import ConfigError, CorpusError, PipelineError
from crossweave.tokens import count_tokens, nfc

logger = logging.getLogger(__name__)

STAGES = ("stage1", "kbio")

_PATH_KEYS = (
    "lexicon",
    "relations",
    "facts",
    "corpus_en",
    "corpus_zh",
    "passage_registry",
    "output_dir",
)
_KNOB_DEFAULTS = {
    "seed": 0,
    "ratio": collator.MASK_RATIO,
    "max_facts": facts.MAX_FACTS,
    "max_segment_tokens": passages.MAX_SEGMENT_TOKENS,
    "pair_budget": passages.PAIR_BUDGET,
    "switch_cap": switching.SWITCH_CAP,
}

OUTPUT_FILES = ("corpus.jsonl", "stats.json", "manifest.json")


@dataclass
class PipelineConfig:
    lexicon: Path
    relations: Path
    facts: Path
    corpus_en: Path
    corpus_zh: Path
    passage_registry: Path
    output_dir: Path
    seed: int = 0
    ratio: float = collator.MASK_RATIO
    max_facts: int = facts.MAX_FACTS
    max_segment_tokens: int = passages.MAX_SEGMENT_TOKENS
    pair_budget: int = passages.PAIR_BUDGET
    switch_cap: int = switching.SWITCH_CAP
    stage: str = "kbio"
    config_path: Path | None = None


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a YAML run config.

    Relative paths resolve against the config file's directory.  Unknown
    keys are rejected so typos cannot silently fall back to defaults.
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")

    paths_block = raw.pop("paths", None)
    if not isinstance(paths_block, dict):
        raise ConfigError(f"{path}: missing 'paths' mapping")
    unknown = set(paths_block) - set(_PATH_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown path keys: {', '.join(sorted(unknown))}")
    missing = [k for k in _PATH_KEYS if k not in paths_block]
    if missing:
        raise ConfigError(f"{path}: missing path keys: {', '.join(missing)}")

    stage = raw.pop("stage", "kbio")
    knobs = {}
    for key, default in _KNOB_DEFAULTS.items():
        knobs[key] = raw.pop(key, default)
    if raw:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(sorted(raw))}")

    base = path.parent
    resolved = {k: (base / str(paths_block[k])).resolve() for k in _PATH_KEYS}
    cfg = PipelineConfig(**resolved, **knobs, stage=stage, config_path=path.resolve())
    validate_config(cfg)
    return cfg


def validate_config(cfg: PipelineConfig) -> None:
    if cfg.stage not in STAGES:
        raise ConfigError(f"stage must be one of {STAGES}, got {cfg.stage!r}")
    if not 0 < cfg.ratio <= 1:
        raise ConfigError(f"ratio must be in (0, 1], got {cfg.ratio}")
    for knob in ("max_facts", "max_segment_tokens", "switch_cap"):
        if getattr(cfg, knob) <= 0:
            raise ConfigError(f"{knob} must be positive, got {getattr(cfg, knob)}")
    if cfg.pair_budget < 3:
        raise ConfigError(f"pair_budget must be at least 3, got {cfg.pair_budget}")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {cfg.seed!r}")
    for key in ("lexicon", "relations", "facts", "corpus_en", "corpus_zh"):
        p = getattr(cfg, key)
        if not p.is_file():
            raise ConfigError(f"{key} file not found: {p}")
    if not cfg.passage_registry.is_dir():
        raise ConfigError(f"passage_registry directory not found: {cfg.passage_registry}")


def derive_seed(global_seed: int, doc_id: str, purpose: str) -> int:
    """Stable per-document seed; parallel scheduling can never change it."""
    digest = hashlib.sha256(f"{global_seed}:{purpose}:{doc_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def read_corpus(path: Path, lang: str) -> list[tuple[str, str, str]]:
    """One sample per non-blank line, NFC-normalized, ids in line order."""
    docs = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = nfc(line.strip())
        if text:
            docs.append((f"{lang}:{lineno:06d}", lang, text))
    return docs


# Per-process state for document workers.  Populated once per worker via
# the pool initializer (or directly for in-process runs); read-only after.
_STATE: dict = {}


def _init_state(lexicon, relation_table, fact_store, knobs) -> None:
    _STATE["lexicon"] = lexicon
    _STATE["relations"] = relation_table
    _STATE["facts"] = fact_store
    _STATE["knobs"] = knobs
    _STATE["matcher"] = switching.SurfaceMatcher(lexicon)


def _process_doc(doc: tuple[str, str, str]) -> dict:
    """All per-document work for one sample; pure given _STATE."""
    doc_id, lang, text = doc
    lexicon = _STATE["lexicon"]
    knobs = _STATE["knobs"]
    seed = knobs["seed"]
    mentions = _STATE["matcher"].find(text, lang)

    stage1_ex = collator.stage1_mask(
        text, lang, mentions, knobs["ratio"], derive_seed(seed, doc_id, "stage1"), doc_id
    )
    no_eligible = not any(
        1 <= count_tokens(text[m.start:m.end]) <= collator.STAGE1_MAX_MENTION_TOKENS
        for m in mentions
    )
    out = {"doc_id": doc_id, "lang": lang, "stage1": stage1_ex, "entity": None, "fact": None,
           "balance": Counter(), "no_mentions": not mentions, "no_eligible": no_eligible}
    # Mention-free docs carry nothing to anchor: they feed the monolingual
    # stream only, so bilingual examples always have at least one target.
    if knobs["stage"] == "stage1" or not mentions:
        return out

    switched = switching.code_switch(
        text, lang, mentions, lexicon, derive_seed(seed, doc_id, "switch"), knobs["switch_cap"]
    )
    moved = switching.mentions_after_switch(switched, mentions)
    out["entity"] = collator.mask_entities(
        switched, moved, knobs["ratio"], derive_seed(seed, doc_id, "entity"), doc_id
    )
    out["balance"] = Counter(
        f"{r.mention.surface_lang}_to_{r.target_lang}" for r in switched.replacements
    )

    matches = facts.match_facts(mentions, _STATE["facts"])
    augmented = facts.inject_facts(
        text, lang, matches, lexicon, _STATE["relations"],
        knobs["max_facts"], derive_seed(seed, doc_id, "facts"),
    )
    if augmented.appended_facts:
        out["fact"] = collator.mask_relation(augmented, derive_seed(seed, doc_id, "relmask"), doc_id)
    return out


def _map_docs(docs, workers: int, init_args) -> list[dict]:
    if workers <= 1:
        _init_state(*init_args)
        return [_process_doc(d) for d in docs]
    chunk = max(1, len(docs) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_state, initargs=init_args) as pool:
        return list(pool.map(_process_doc, docs, chunksize=chunk))


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _tree_digest(root: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(root)).encode("utf-8"))
            h.update(_file_digest(p).encode("ascii"))
    return h.hexdigest()


def _example_tokens(ex: collator.TrainingExample) -> int:
    if ex.task == "passage_rel":
        return count_tokens(ex.text_a) + count_tokens(ex.text_b)
    return count_tokens(collator.reconstruct(ex))


_LEVEL_BY_TASK = {
    "entity_mlm": "entity",
    "fact_mlm": "fact",
    "passage_rel": "passage",
    "stage1_mlm": "stage1",
}


def collect_stats(examples, stage: str, doc_counts: Counter, balance: Counter, flags: Counter) -> dict:
    example_counts: Counter = Counter()
    tokens: Counter = Counter()
    mask_kinds: Counter = Counter()
    pair_labels: Counter = Counter()
    for ex in examples:
        example_counts[ex.task] += 1
        tokens[_LEVEL_BY_TASK[ex.task]] += _example_tokens(ex)
        for t in ex.targets:
            mask_kinds[t.kind] += 1
        if ex.pair_label:
            pair_labels[ex.pair_label] += 1
    return {
        "stage": stage,
        "documents": {lang: doc_counts.get(lang, 0) for lang in knowledge.LANGS},
        "examples": {task: example_counts.get(task, 0) for task in collator.TASKS},
        "tokens_per_level": {lvl: tokens.get(lvl, 0) for lvl in ("entity", "fact", "passage", "stage1")},
        "mask_kinds": {kind: mask_kinds.get(kind, 0) for kind in ("entity", "relation", "word")},
        "pair_labels": {label: pair_labels.get(label, 0) for label in passages.LABELS},
        "switch_balance": {
            "en_to_zh": balance.get("en_to_zh", 0),
            "zh_to_en": balance.get("zh_to_en", 0),
        },
        "flags": {
            "docs_without_mentions": flags.get("no_mentions", 0),
            "stage1_docs_without_eligible_mentions": flags.get("no_eligible", 0),
        },
    }


def run_pipeline(cfg: PipelineConfig, workers: int = 1) -> dict:
    """Execute a full run and write corpus.jsonl, stats.json, manifest.json.

    Returns the stats dict.  On any failure, partially written outputs
    are removed and the error names the module that raised.
    """
    validate_config(cfg)
    lexicon = knowledge.load_lexicon(cfg.lexicon)
    relation_table = knowledge.load_relations(cfg.relations)
    fact_store = knowledge.load_facts(cfg.facts, lexicon, relation_table)
    registry = knowledge.load_passage_registry(cfg.passage_registry)

    docs = read_corpus(cfg.corpus_en, "en") + read_corpus(cfg.corpus_zh, "zh")
    doc_counts = Counter(lang for _, lang, _ in docs)
    logger.info("processing %d documents (stage %s)", len(docs), cfg.stage)

    knobs = {
        "seed": cfg.seed,
        "ratio": cfg.ratio,
        "max_facts": cfg.max_facts,
        "switch_cap": cfg.switch_cap,
        "stage": cfg.stage,
    }
    try:
        results = _map_docs(docs, workers, (lexicon, relation_table, fact_store, knobs))
    except CorpusError as exc:
        raise PipelineError("collator", str(exc)) from exc

    balance: Counter = Counter()
    flags: Counter = Counter()
    for r in results:
        balance.update(r["balance"])
        flags["no_mentions"] += r["no_mentions"]
        flags["no_eligible"] += r["no_eligible"]

    if cfg.stage == "stage1":
        stream = [r["stage1"] for r in results]
    else:
        mono = [r["stage1"] for r in results]
        bilingual = [r["entity"] for r in results if r["entity"] is not None]
        bilingual += [r["fact"] for r in results if r["fact"] is not None]
        try:
            pair_examples = [
                collator.make_pair_example(p)
                for p in passages.build_pairs(
                    registry, cfg.pair_budget, derive_seed(cfg.seed, "", "pairs"), cfg.max_segment_tokens
                )
            ]
        except CorpusError as exc:
            raise PipelineError("passages", str(exc)) from exc
        bilingual += pair_examples
        # Mixing truncates at the shorter stream; shuffling first means an
        # undersupplied mono side costs a uniform sample of the constructed
        # examples instead of whichever level happens to sit at the tail.
        random.Random(derive_seed(cfg.seed, "", "shuffle")).shuffle(bilingual)
        try:
            stream = list(collator.mix_streams(mono, bilingual, derive_seed(cfg.seed, "", "mix")))
        except CorpusError as exc:
            raise PipelineError("collator", str(exc)) from exc

    out_dir = cfg.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        corpus_path = out_dir / "corpus.jsonl"
        written.append(corpus_path)
        n = collator.write_jsonl(corpus_path, stream)

        stats = collect_stats(stream, cfg.stage, doc_counts, balance, flags)
        stats_path = out_dir / "stats.json"
        written.append(stats_path)
        stats_path.write_text(
            json.dumps(stats, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )

        manifest = {
            "stage": cfg.stage,
            "seed": cfg.seed,
            "config_sha256": _file_digest(cfg.config_path) if cfg.config_path else None,
            "inputs": {
                "lexicon": _file_digest(cfg.lexicon),
                "relations": _file_digest(cfg.relations),
                "facts": _file_digest(cfg.facts),
                "corpus_en": _file_digest(cfg.corpus_en),
                "corpus_zh": _file_digest(cfg.corpus_zh),
                "passage_registry": _tree_digest(cfg.passage_registry),
            },
            "outputs": {
                "corpus.jsonl": _file_digest(corpus_path),
                "records": n,
            },
        }
        manifest_path = out_dir / "manifest.json"
        written.append(manifest_path)
        manifest_path.write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
    except Exception:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    logger.info("wrote %d records to %s", n, corpus_path)
    return stats


def stats_report(output_dir: str | Path) -> str:
    """Recount the emitted corpus and render the stored stats as text."""
    out = Path(output_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.is_file():
        raise ConfigError(f"{manifest_path}: manifest not found (incomplete or missing run)")
    stats = json.loads((out / "stats.json").read_text(encoding="utf-8"))

    recounted: Counter = Counter()
    for ex in collator.read_jsonl(out / "corpus.jsonl"):
        recounted[ex.task] += 1
    for task, count in stats["examples"].items():
        if recounted.get(task, 0) != count:
            raise CorpusError(
                f"stats.json reports {count} {task} examples but corpus.jsonl has {recounted.get(task, 0)}"
            )

    lines = [f"stage: {stats['stage']}"]
    lines.append(
        "documents: " + ", ".join(f"{lang}={n}" for lang, n in stats["documents"].items())
    )
    for section in ("examples", "tokens_per_level", "mask_kinds", "pair_labels", "switch_balance", "flags"):
        lines.append(f"{section}:")
        for key, value in stats[section].items():
            lines.append(f"  {key}: {value}")
    return "\n".join(lines)


def override(cfg: PipelineConfig, seed: int | None = None, stage: str | None = None) -> PipelineConfig:
    """Apply CLI overrides, revalidating the result."""
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if stage is not None:
        updates["stage"] = stage
    if not updates:
        return cfg
    cfg = replace(cfg, **updates)
    validate_config(cfg)
    return cfg
