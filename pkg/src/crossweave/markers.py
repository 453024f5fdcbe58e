"""Numbered-marker round trip for porting span annotations across translation.

Workflow: wrap each gold entity as `<k>surface</k>` (ordinals follow start
offsets, 1-based), send the marked text through any external translator,
then recover clean text plus per-ordinal spans from the translation and
re-attach the original labels.  Translators may reorder entities freely;
ordinals, not positions, carry identity.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from crossweave.errors import MarkerError

_MARKER_RE = re.compile(r"<(/?)(\d+)>")


@dataclass(frozen=True)
class EntitySpan:
    start: int
    end: int
    label: str


@dataclass(frozen=True)
class RelationEdge:
    head: int  # index into the entity list
    tail: int
    label: str


@dataclass(frozen=True)
class AnnotatedSentence:
    text: str
    entities: tuple[EntitySpan, ...]
    relations: tuple[RelationEdge, ...]


def _validate(sentence: AnnotatedSentence) -> None:
    prev_end = -1
    last_start = -1
    for ent in sentence.entities:
        if not (0 <= ent.start < ent.end <= len(sentence.text)):
            raise MarkerError(f"entity span ({ent.start}, {ent.end}) out of bounds")
        if ent.start < last_start:
            raise MarkerError("entity list must be ordered by start offset")
        if ent.start < prev_end:
            raise MarkerError(f"overlapping gold spans at offset {ent.start}")
        prev_end = ent.end
        last_start = ent.start
    for rel in sentence.relations:
        if not (0 <= rel.head < len(sentence.entities)) or not (0 <= rel.tail < len(sentence.entities)):
            raise MarkerError(f"relation references entity ordinal out of range: {rel}")


def insert_markers(sentence: AnnotatedSentence) -> str:
    """Wrap the i-th entity (1-based, by start offset) as `<i>surface</i>`.

    The source text must not already contain marker-shaped tokens; they
    would be indistinguishable on the way back.
    """
    _validate(sentence)
    if _MARKER_RE.search(sentence.text):
        raise MarkerError("source text already contains marker-like tokens")
    parts: list[str] = []
    pos = 0
    for ordinal, ent in enumerate(sentence.entities, start=1):
        parts.append(sentence.text[pos:ent.start])
        parts.append(f"<{ordinal}>{sentence.text[ent.start:ent.end]}</{ordinal}>")
        pos = ent.end
    parts.append(sentence.text[pos:])
    return "".join(parts)


def strip_markers(text: str) -> str:
    return _MARKER_RE.sub("", text)


def extract_markers(translated: str, expected_count: int) -> tuple[str, tuple[tuple[int, int], ...]]:
    """Parse `<k>…</k>` wrappers out of a translated sentence.

    Returns the marker-free text and, indexed by ordinal (1..expected),
    each ordinal's content span in that clean text.  Ordinals may appear
    in any order but each must appear exactly once, properly closed.
    """
    spans: dict[int, tuple[int, int]] = {}
    parts: list[str] = []
    clean_len = 0
    open_ordinal: int | None = None
    open_start = 0
    pos = 0
    for m in _MARKER_RE.finditer(translated):
        closing, ordinal = m.group(1) == "/", int(m.group(2))
        chunk = translated[pos:m.start()]
        parts.append(chunk)
        clean_len += len(chunk)
        pos = m.end()
        if not closing:
            if open_ordinal is not None:
                raise MarkerError(
                    f"marker {ordinal} opened inside marker {open_ordinal}", ordinal
                )
            if ordinal in spans:
                raise MarkerError(f"duplicate marker {ordinal}", ordinal)
            if not 1 <= ordinal <= expected_count:
                raise MarkerError(f"unexpected marker {ordinal}", ordinal)
            open_ordinal = ordinal
            open_start = clean_len
        else:
            if open_ordinal != ordinal:
                raise MarkerError(f"mismatched closing marker {ordinal}", ordinal)
            spans[ordinal] = (open_start, clean_len)
            open_ordinal = None
    if open_ordinal is not None:
        raise MarkerError(f"unclosed marker {open_ordinal}", open_ordinal)
    tail = translated[pos:]
    parts.append(tail)
    for ordinal in range(1, expected_count + 1):
        if ordinal not in spans:
            raise MarkerError(f"missing marker {ordinal}", ordinal)
    ordered = tuple(spans[k] for k in range(1, expected_count + 1))
    return "".join(parts), ordered


def project_labels(
    source: AnnotatedSentence, extraction: tuple[str, tuple[tuple[int, int], ...]]
) -> AnnotatedSentence:
    """Attach the source labels to the extracted spans, ordinal by ordinal."""
    clean_text, spans = extraction
    if len(spans) != len(source.entities):
        raise MarkerError(
            f"extraction has {len(spans)} spans for {len(source.entities)} source entities"
        )
    entities = tuple(
        EntitySpan(start, end, ent.label) for (start, end), ent in zip(spans, source.entities)
    )
    return AnnotatedSentence(clean_text, entities, source.relations)


# File-level round trip used by the CLI: sentences and ids travel in
# parallel so the marked text file stays plain one-line-per-sentence for
# the external translator.

def sentence_to_dict(sentence_id: str, sentence: AnnotatedSentence) -> dict:
    return {
        "id": sentence_id,
        "text": sentence.text,
        "entities": [[e.start, e.end, e.label] for e in sentence.entities],
        "relations": [[r.head, r.tail, r.label] for r in sentence.relations],
    }


def sentence_from_dict(record: dict) -> tuple[str, AnnotatedSentence]:
    sentence = AnnotatedSentence(
        record["text"],
        tuple(EntitySpan(s, e, label) for s, e, label in record["entities"]),
        tuple(RelationEdge(h, t, label) for h, t, label in record["relations"]),
    )
    return record["id"], sentence


def read_annotations(path: str | Path) -> list[tuple[str, AnnotatedSentence]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(sentence_from_dict(json.loads(line)))
    return rows


def write_annotations(path: str | Path, rows: Iterable[tuple[str, AnnotatedSentence]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sentence_id, sentence in rows:
            fh.write(json.dumps(sentence_to_dict(sentence_id, sentence), ensure_ascii=False))
            fh.write("\n")


def mark_file(annotations_path: str | Path, marked_path: str | Path, ids_path: str | Path) -> int:
    """Emit one marked sentence per line plus a sidecar of sentence ids.

    Sentences that cannot be marked (defective gold spans) raise; defects
    in the source dataset should fail loudly before translation money is
    spent.
    """
    rows = read_annotations(annotations_path)
    with open(marked_path, "w", encoding="utf-8") as marked, open(ids_path, "w", encoding="utf-8") as ids:
        for sentence_id, sentence in rows:
            if "\n" in sentence.text:
                raise MarkerError(f"{sentence_id}: sentence text contains a newline")
            try:
                marked.write(insert_markers(sentence))
            except MarkerError as exc:
                raise MarkerError(f"{sentence_id}: {exc}", exc.ordinal) from exc
            marked.write("\n")
            ids.write(sentence_id)
            ids.write("\n")
    return len(rows)


def unmark_file(
    translated_path: str | Path,
    ids_path: str | Path,
    annotations_path: str | Path,
    output_path: str | Path,
    quarantine_path: str | Path,
) -> tuple[int, int]:
    """Recover annotations from translated marked text.

    Returns (recovered, quarantined).  Malformed sentences go to the
    quarantine JSONL as {id, error} for manual review instead of killing
    the batch.
    """
    translated_lines = Path(translated_path).read_text(encoding="utf-8").splitlines()
    ids = Path(ids_path).read_text(encoding="utf-8").splitlines()
    if len(translated_lines) != len(ids):
        raise MarkerError(
            f"line count mismatch: {len(translated_lines)} translations for {len(ids)} ids"
        )
    by_id = dict(read_annotations(annotations_path))
    recovered: list[tuple[str, AnnotatedSentence]] = []
    quarantined = 0
    with open(quarantine_path, "w", encoding="utf-8") as quarantine:
        for sentence_id, line in zip(ids, translated_lines):
            source = by_id.get(sentence_id)
            if source is None:
                raise MarkerError(f"unknown sentence id {sentence_id!r} in {ids_path}")
            try:
                extraction = extract_markers(line, len(source.entities))
                recovered.append((sentence_id, project_labels(source, extraction)))
            except MarkerError as exc:
                quarantine.write(json.dumps({"id": sentence_id, "error": str(exc)}, ensure_ascii=False))
                quarantine.write("\n")
                quarantined += 1
    write_annotations(output_path, recovered)
    return len(recovered), quarantined
