"""Fact co-occurrence detection and other-language fact injection.

A fact fires when both of its entities are mentioned in the same sample.
Selected facts are rendered in the language opposite the document and
appended behind a literal " [SEP] " separator; the relation surface's
span is recorded so the collator can mask it later.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from crossweave.knowledge import BilingualLexicon, FactStore, FactTriple, RelationTable
from crossweave.switching import Mention

SEPARATOR = " [SEP] "
MAX_FACTS = 3


@dataclass(frozen=True)
class FactMatch:
    triple: FactTriple
    head_mention: Mention
    tail_mention: Mention


@dataclass(frozen=True)
class AppendedFact:
    text: str
    rel_start: int  # relation surface span, in full_text coordinates
    rel_end: int
    target_lang: str


@dataclass(frozen=True)
class AugmentedDoc:
    base_text: str
    appended_facts: tuple[AppendedFact, ...]
    full_text: str


def match_facts(mentions: list[Mention], facts: FactStore) -> list[FactMatch]:
    """Facts whose head and tail entities both occur among ``mentions``.

    Each stored triple yields at most one match, anchored at the earliest
    mention of its head and the earliest mention of its tail; results are
    ordered by (head start, tail start, relation_id).
    """
    first: dict[str, Mention] = {}
    for m in sorted(mentions, key=lambda m: m.start):
        first.setdefault(m.entity_id, m)
    ids = sorted(first)
    matches: list[FactMatch] = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            for triple in facts.for_pair(a, b):
                matches.append(FactMatch(triple, first[triple.head_id], first[triple.tail_id]))
    matches.sort(key=lambda fm: (fm.head_mention.start, fm.tail_mention.start, fm.triple.relation_id))
    return matches


def render_fact(
    triple: FactTriple, target_lang: str, lexicon: BilingualLexicon, relations: RelationTable
) -> tuple[str, int, int] | None:
    """Render a triple in ``target_lang``; None if a surface is missing.

    Chinese rendering concatenates head+relation+tail with no spaces,
    English joins with single spaces.  Returns the fact string and the
    relation surface's span within it.
    """
    head = lexicon.preferred_surface(triple.head_id, target_lang)
    tail = lexicon.preferred_surface(triple.tail_id, target_lang)
    if head is None or tail is None:
        return None
    rel = relations.get(triple.relation_id).surface(target_lang)
    if target_lang == "zh":
        rel_start = len(head)
    else:
        rel_start = len(head) + 1
    text = head + rel + tail if target_lang == "zh" else f"{head} {rel} {tail}"
    return text, rel_start, rel_start + len(rel)


def inject_facts(
    text: str,
    doc_lang: str,
    fact_matches: list[FactMatch],
    lexicon: BilingualLexicon,
    relations: RelationTable,
    max_facts: int = MAX_FACTS,
    seed: int = 0,
) -> AugmentedDoc:
    """Append up to ``max_facts`` seeded-random matched facts to the text.

    Facts whose entities lack a surface in the target language cannot be
    rendered and are skipped before selection.  With no usable matches the
    document passes through unchanged.
    """
    target_lang = "zh" if doc_lang == "en" else "en"
    renderable = []
    for fm in fact_matches:
        rendered = render_fact(fm.triple, target_lang, lexicon, relations)
        if rendered is not None:
            renderable.append(rendered)
    rng = random.Random(seed)
    chosen = rng.sample(renderable, min(max_facts, len(renderable)))

    full = text
    appended: list[AppendedFact] = []
    for fact_text, rel_start, rel_end in chosen:
        offset = len(full) + len(SEPARATOR)
        full = full + SEPARATOR + fact_text
        appended.append(AppendedFact(fact_text, offset + rel_start, offset + rel_end, target_lang))
    return AugmentedDoc(text, tuple(appended), full)
