"""Masked-example collation and the unified JSONL record format.

Every example carries character-span targets against its own pre-mask
text, so downstream tokenizers can re-derive masks however they like.
The emitted JSONL line format (field order fixed, no floats) is the
interface contract consumed by external trainers:

    {"task": ..., "doc_id": ..., "text": ... | "text_a"/"text_b": ...,
     "targets": [{"start", "end", "gold", "kind"}...],
     "pair_label": ... | null, "meta": {...}}
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator

from crossweave.errors import StreamError
from crossweave.facts import AugmentedDoc
from crossweave.passages import PassagePairExample
from crossweave.switching import Mention, SwitchedDoc
from crossweave.tokens import count_tokens, iter_tokens

MASK = "[MASK]"
MASK_RATIO = 0.15
STAGE1_MAX_MENTION_TOKENS = 3

TASKS = ("entity_mlm", "fact_mlm", "passage_rel", "stage1_mlm")


@dataclass(frozen=True)
class MaskTarget:
    start: int  # span in the pre-mask text
    end: int
    gold: str
    kind: str  # entity | relation | word


@dataclass
class TrainingExample:
    task: str
    doc_id: str
    text: str | None = None
    text_a: str | None = None
    text_b: str | None = None
    targets: tuple[MaskTarget, ...] = ()
    pair_label: str | None = None
    meta: dict = field(default_factory=dict)


def _ceil_ratio(ratio: float, count: int) -> int:
    # Exact rational ceil; float ceil would round 0.15*20 past 3.
    return math.ceil(Fraction(str(ratio)) * count)


def apply_masks(text: str, targets: Iterable[MaskTarget]) -> str:
    """Replace each target span (sorted, non-overlapping) with the placeholder."""
    parts: list[str] = []
    pos = 0
    for t in targets:
        parts.append(text[pos:t.start])
        parts.append(MASK)
        pos = t.end
    parts.append(text[pos:])
    return "".join(parts)


def reconstruct(example: TrainingExample) -> str:
    """Substitute golds back for the placeholders, in order."""
    parts = example.text.split(MASK)
    if len(parts) != len(example.targets) + 1:
        raise ValueError(
            f"{example.doc_id}: {len(parts) - 1} placeholders vs {len(example.targets)} targets"
        )
    out = [parts[0]]
    for target, tail in zip(example.targets, parts[1:]):
        out.append(target.gold)
        out.append(tail)
    return "".join(out)


def _targets_from_spans(text: str, spans: Iterable[tuple[int, int, str]]) -> tuple[MaskTarget, ...]:
    ordered = sorted(spans)
    return tuple(MaskTarget(s, e, text[s:e], kind) for s, e, kind in ordered)


def mask_entities(
    doc: SwitchedDoc,
    mentions: list[Mention],
    ratio: float = MASK_RATIO,
    seed: int = 0,
    doc_id: str = "",
) -> TrainingExample:
    """Mask whole mentions until >= ceil(ratio * total entity tokens).

    ``mentions`` must be in switched-text coordinates (see
    ``mentions_after_switch``).  Mentions are drawn uniformly without
    replacement, so the masked-token count overshoots the threshold by
    less than the last selected mention's length.  A document with no
    mentions is emitted with empty targets for the caller to count.
    """
    text = doc.switched_text
    token_counts = {m: count_tokens(text[m.start:m.end]) for m in mentions}
    goal = _ceil_ratio(ratio, sum(token_counts.values()))
    rng = random.Random(seed)
    masked = 0
    chosen: list[Mention] = []
    for m in rng.sample(mentions, len(mentions)):
        if masked >= goal:
            break
        chosen.append(m)
        masked += token_counts[m]
    targets = _targets_from_spans(text, [(m.start, m.end, "entity") for m in chosen])
    return TrainingExample(
        task="entity_mlm",
        doc_id=doc_id,
        text=apply_masks(text, targets),
        targets=targets,
        meta={"lang": doc.doc_lang},
    )


def mask_relation(doc: AugmentedDoc, seed: int = 0, doc_id: str = "") -> TrainingExample:
    """Mask every appended fact's relation surface.

    ``seed`` is accepted for interface parity with the other collation
    ops; relation masking is exhaustive, not sampled.
    """
    if not doc.appended_facts:
        raise ValueError(f"{doc_id}: document has no appended facts to mask")
    target_lang = doc.appended_facts[0].target_lang
    doc_lang = "en" if target_lang == "zh" else "zh"
    spans = [(f.rel_start, f.rel_end, "relation") for f in doc.appended_facts]
    targets = _targets_from_spans(doc.full_text, spans)
    return TrainingExample(
        task="fact_mlm",
        doc_id=doc_id,
        text=apply_masks(doc.full_text, targets),
        targets=targets,
        meta={"lang": doc_lang, "fact_lang": target_lang},
    )


def make_pair_example(pair: PassagePairExample) -> TrainingExample:
    a, b = pair.seg_a, pair.seg_b
    return TrainingExample(
        task="passage_rel",
        doc_id=f"{a.article_id}:{a.index}|{b.article_id}:{b.index}",
        text_a=a.text,
        text_b=b.text,
        pair_label=pair.label,
        meta={"lang_a": a.lang, "lang_b": b.lang},
    )


def stage1_mask(
    text: str,
    lang: str,
    mentions: list[Mention],
    total_ratio: float = MASK_RATIO,
    seed: int = 0,
    doc_id: str = "",
) -> TrainingExample:
    """Split a whole-document mask budget 1:1 between entities and words.

    Budget B = ceil(total_ratio * document tokens); ceil(B/2) goes to
    whole short mentions (token length <= 3), floor(B/2) to non-mention
    whole words.  If short mentions run out, words absorb the remainder
    so the total still reaches B when the document allows.
    """
    doc_tokens = count_tokens(text)
    budget = _ceil_ratio(total_ratio, doc_tokens)
    rng = random.Random(seed)

    token_counts = {m: count_tokens(text[m.start:m.end]) for m in mentions}
    eligible = [m for m in mentions if 1 <= token_counts[m] <= STAGE1_MAX_MENTION_TOKENS]
    entity_goal = (budget + 1) // 2
    entity_tokens = 0
    chosen: list[Mention] = []
    for m in rng.sample(eligible, len(eligible)):
        if entity_tokens >= entity_goal:
            break
        chosen.append(m)
        entity_tokens += token_counts[m]

    words_needed = budget // 2 if entity_tokens >= entity_goal else budget - entity_tokens
    sorted_mentions = sorted(mentions, key=lambda m: m.start)
    candidates = []
    mi = 0
    for tok in iter_tokens(text):
        while mi < len(sorted_mentions) and sorted_mentions[mi].end <= tok.start:
            mi += 1
        if mi < len(sorted_mentions) and sorted_mentions[mi].start < tok.end:
            continue  # overlaps a mention, entity material
        candidates.append(tok)
    words = rng.sample(candidates, min(words_needed, len(candidates)))

    spans = [(m.start, m.end, "entity") for m in chosen]
    spans += [(tok.start, tok.end, "word") for tok in words]
    targets = _targets_from_spans(text, spans)
    return TrainingExample(
        task="stage1_mlm",
        doc_id=doc_id,
        text=apply_masks(text, targets),
        targets=targets,
        meta={"lang": lang},
    )


def mix_streams(
    mono: Iterable[TrainingExample],
    bilingual: Iterable[TrainingExample],
    seed: int,
) -> Iterator[TrainingExample]:
    """Strictly alternate the two streams, starting from a seeded coin flip.

    Stops the moment the stream whose turn it is has nothing left, so the
    per-source counts in the output never differ by more than one.  Both
    streams must be non-empty.
    """
    sentinel = object()
    it_mono, it_bi = iter(mono), iter(bilingual)
    head_mono = next(it_mono, sentinel)
    head_bi = next(it_bi, sentinel)
    if head_mono is sentinel:
        raise StreamError("monolingual stream is empty")
    if head_bi is sentinel:
        raise StreamError("bilingual stream is empty")
    mono_turn = random.Random(seed).random() < 0.5

    def generate():
        nonlocal head_mono, head_bi, mono_turn
        while True:
            if mono_turn:
                if head_mono is sentinel:
                    return
                yield head_mono
                head_mono = next(it_mono, sentinel)
            else:
                if head_bi is sentinel:
                    return
                yield head_bi
                head_bi = next(it_bi, sentinel)
            mono_turn = not mono_turn

    return generate()


def example_to_dict(example: TrainingExample) -> dict:
    """Serialize with the fixed field order of the JSONL contract."""
    record: dict = {"task": example.task, "doc_id": example.doc_id}
    if example.task == "passage_rel":
        record["text_a"] = example.text_a
        record["text_b"] = example.text_b
    else:
        record["text"] = example.text
    record["targets"] = [
        {"start": t.start, "end": t.end, "gold": t.gold, "kind": t.kind} for t in example.targets
    ]
    record["pair_label"] = example.pair_label
    record["meta"] = example.meta
    return record


def example_from_dict(record: dict) -> TrainingExample:
    return TrainingExample(
        task=record["task"],
        doc_id=record["doc_id"],
        text=record.get("text"),
        text_a=record.get("text_a"),
        text_b=record.get("text_b"),
        targets=tuple(
            MaskTarget(t["start"], t["end"], t["gold"], t["kind"]) for t in record["targets"]
        ),
        pair_label=record.get("pair_label"),
        meta=record.get("meta", {}),
    )


def write_jsonl(path: str | Path, examples: Iterable[TrainingExample]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(json.dumps(example_to_dict(example), ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def read_jsonl(path: str | Path) -> Iterator[TrainingExample]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield example_from_dict(json.loads(line))
