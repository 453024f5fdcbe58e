"""Corpus JSONL reading, tokenization, vocabulary, and batch encoding.

The corpus contract: one JSON record per line with a `task` field.
Masked-LM records carry `text` (with literal [MASK] placeholders) plus
`targets` of {start, end, gold, kind} whose offsets index the UNMASKED
text.  Passage-pair records carry `text_a`, `text_b`, `pair_label`.
Offsets are Python str indices; tokens are single CJK chars or maximal
non-CJK alphanumeric runs, so every target span tiles whole tokens.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import torch

from tinytrainer.errors import TrainerError

PAD, MASK, SEP, CLS = "[PAD]", "[MASK]", "[SEP]", "[CLS]"
SPECIALS = (PAD, MASK, SEP, CLS)
PAIR_LABELS = ("positive", "random", "context")
IGNORE_INDEX = -100
MAX_LEN = 128

_CJK_RANGES = ((0x3400, 0x4DBF), (0x4E00, 0x9FFF), (0xF900, 0xFAFF))
_CJK_CLASS = "".join(f"{chr(lo)}-{chr(hi)}" for lo, hi in _CJK_RANGES)
TOKEN_RE = re.compile(f"[{_CJK_CLASS}]|[^\\W_{_CJK_CLASS}]+")


@dataclass(frozen=True)
class MlmRecord:
    doc_id: str
    task: str
    clean_text: str
    targets: tuple[tuple[int, int, str, str], ...]  # (start, end, gold, kind)


@dataclass(frozen=True)
class PairRecord:
    doc_id: str
    text_a: str
    text_b: str
    label: str


@dataclass
class Dataset:
    """Examples pooled by objective: entity-level MLM, fact MLM, passage pairs."""

    entity: list[MlmRecord]
    fact: list[MlmRecord]
    pair: list[PairRecord]


def tokenize(text: str) -> list[tuple[int, int, str]]:
    return [(m.start(), m.end(), m.group()) for m in TOKEN_RE.finditer(text)]


def unmask(masked_text: str, golds: list[str]) -> str:
    """Refill [MASK] placeholders with the gold strings, in order."""
    parts = masked_text.split(MASK)
    if len(parts) != len(golds) + 1:
        raise TrainerError(
            f"text has {len(parts) - 1} [MASK] placeholders for {len(golds)} targets"
        )
    out = [parts[0]]
    for gold, part in zip(golds, parts[1:]):
        out.append(gold)
        out.append(part)
    return "".join(out)


def parse_record(record: dict) -> MlmRecord | PairRecord:
    task = record.get("task")
    doc_id = record.get("doc_id", "")
    if task == "passage_rel":
        label = record.get("pair_label")
        if label not in PAIR_LABELS:
            raise TrainerError(f"{doc_id}: unknown pair label {label!r}")
        return PairRecord(doc_id, record["text_a"], record["text_b"], label)
    if task not in ("entity_mlm", "fact_mlm", "stage1_mlm"):
        raise TrainerError(f"{doc_id}: unknown task {task!r}")
    targets = tuple(
        (t["start"], t["end"], t["gold"], t["kind"]) for t in record["targets"]
    )
    clean = unmask(record["text"], [gold for _, _, gold, _ in targets])
    for start, end, gold, _ in targets:
        if clean[start:end] != gold:
            raise TrainerError(
                f"{doc_id}: target span ({start}, {end}) does not slice to its gold string"
            )
    return MlmRecord(doc_id, task, clean, targets)


def load_corpus(path: str | Path) -> Dataset:
    dataset = Dataset([], [], [])
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            parsed = parse_record(json.loads(line))
            if isinstance(parsed, PairRecord):
                dataset.pair.append(parsed)
            elif parsed.task == "fact_mlm":
                dataset.fact.append(parsed)
            else:
                dataset.entity.append(parsed)
    return dataset


class Vocab:
    """Closed vocabulary: the corpus token types plus the four specials."""

    def __init__(self, tokens) -> None:
        self.itos = list(SPECIALS) + sorted(set(tokens) - set(SPECIALS))
        self.stoi = {tok: i for i, tok in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    def id(self, token: str) -> int:
        try:
            return self.stoi[token]
        except KeyError:
            raise TrainerError(f"token {token!r} is not in the vocabulary") from None


def build_vocab(dataset: Dataset) -> Vocab:
    types: set[str] = set()
    for record in dataset.entity + dataset.fact:
        types.update(tok for _, _, tok in tokenize(record.clean_text))
    for record in dataset.pair:
        types.update(tok for _, _, tok in tokenize(record.text_a))
        types.update(tok for _, _, tok in tokenize(record.text_b))
    return Vocab(types)


def encode_mlm(record: MlmRecord, vocab: Vocab, max_len: int = MAX_LEN) -> dict:
    """Token ids with [MASK] at target positions and gold labels there.

    Every target span must tile whole tokens (byte-offset agreement with
    the corpus contract); a span cutting through a token is a hard error.
    """
    tokens = tokenize(record.clean_text)[:max_len]
    input_ids = [vocab.id(tok) for _, _, tok in tokens]
    labels = [IGNORE_INDEX] * len(tokens)
    mask_id = vocab.id(MASK)
    for start, end, gold, _ in record.targets:
        covered = [i for i, (s, e, _) in enumerate(tokens) if start <= s and e <= end]
        if not covered:
            if tokens and tokens[-1][1] >= end:
                raise TrainerError(
                    f"{record.doc_id}: target span ({start}, {end}) covers no token"
                )
            continue  # span truncated away entirely
        joined = "".join(tokens[i][2] for i in covered)
        if joined != "".join(tok for _, _, tok in tokenize(gold)):
            raise TrainerError(
                f"{record.doc_id}: target span ({start}, {end}) does not align with token boundaries"
            )
        for i in covered:
            labels[i] = input_ids[i]
            input_ids[i] = mask_id
    return {"input_ids": input_ids, "labels": labels, "doc_id": record.doc_id}


def encode_pair(record: PairRecord, vocab: Vocab, max_len: int = MAX_LEN) -> dict:
    a = [tok for _, _, tok in tokenize(record.text_a)]
    b = [tok for _, _, tok in tokenize(record.text_b)]
    budget = max_len - 2
    if len(a) + len(b) > budget:
        half = budget // 2
        keep_a = min(len(a), max(half, budget - len(b)))
        a, b = a[:keep_a], b[: budget - keep_a]
    input_ids = (
        [vocab.id(CLS)] + [vocab.id(t) for t in a] + [vocab.id(SEP)] + [vocab.id(t) for t in b]
    )
    return {
        "input_ids": input_ids,
        "label": PAIR_LABELS.index(record.label),
        "doc_id": record.doc_id,
    }


def _pad_stack(rows: list[list[int]], fill: int) -> torch.Tensor:
    width = max(len(r) for r in rows)
    return torch.tensor([r + [fill] * (width - len(r)) for r in rows], dtype=torch.long)


def collate_mlm(encoded: list[dict]) -> dict:
    if not encoded:
        raise TrainerError("cannot collate an empty batch")
    input_ids = _pad_stack([e["input_ids"] for e in encoded], 0)
    labels = _pad_stack([e["labels"] for e in encoded], IGNORE_INDEX)
    lengths = [len(e["input_ids"]) for e in encoded]
    attention = torch.zeros_like(input_ids, dtype=torch.bool)
    for i, n in enumerate(lengths):
        attention[i, :n] = True
    return {"input_ids": input_ids, "attention_mask": attention, "labels": labels}


def collate_pair(encoded: list[dict]) -> dict:
    if not encoded:
        raise TrainerError("cannot collate an empty batch")
    input_ids = _pad_stack([e["input_ids"] for e in encoded], 0)
    attention = torch.zeros_like(input_ids, dtype=torch.bool)
    for i, e in enumerate(encoded):
        attention[i, : len(e["input_ids"])] = True
    labels = torch.tensor([e["label"] for e in encoded], dtype=torch.long)
    return {"input_ids": input_ids, "attention_mask": attention, "labels": labels}
