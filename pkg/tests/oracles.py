"""Brute-force reference implementations used only by the test suite.

These are deliberately naive: enumerate everything, filter, pick.  The
production code must agree with them exactly on randomized instances.
Nothing here may import from the modules it checks beyond plain data
types.
"""

from __future__ import annotations

import random

from crossweave.knowledge import BilingualLexicon, FactStore
from crossweave.switching import Mention

# Small pools chosen to force overlaps, shared prefixes, and casefold
# collisions (including one-to-many folds like the sharp s).
EN_LETTERS = "abcsß"
ZH_CHARS = "汉字医药病毒"
NOISE = " .,;-%0123456789"


def _surface_index(lexicon: BilingualLexicon, lang: str) -> dict[str, str]:
    """surface -> smallest owning entity_id, folding en surfaces."""
    index: dict[str, str] = {}
    for eid, ent in lexicon.entities.items():
        for surface in ent.surfaces(lang):
            key = surface.casefold() if lang == "en" else surface
            if key not in index or eid < index[key]:
                index[key] = eid
    return index


def oracle_find_mentions(text: str, doc_lang: str, lexicon: BilingualLexicon) -> list[Mention]:
    """Enumerate every substring, keep dictionary hits, pick greedily.

    Substrings longer than the longest indexed surface can never hit, so
    enumeration is capped there; this is a speed cap, not a semantic one.
    """
    en_index = _surface_index(lexicon, "en")
    zh_index = _surface_index(lexicon, "zh")
    max_len = max((len(s) for s in (*en_index, *zh_index)), default=0)

    candidates = []  # (start, end, entity_id, surface_lang)
    n = len(text)
    for start in range(n):
        for end in range(start + 1, min(n, start + max_len) + 1):
            sub = text[start:end]
            folded = sub.casefold()
            if folded in en_index:
                left_ok = start == 0 or not text[start - 1].isalnum()
                right_ok = end == n or not text[end].isalnum()
                if left_ok and right_ok:
                    candidates.append((start, end, en_index[folded], "en"))
            if sub in zh_index:
                candidates.append((start, end, zh_index[sub], "zh"))

    # Greedy leftmost-longest; on a start+length tie the dictionary of the
    # document's own language wins.
    def preference(cand):
        start, end, _eid, lang = cand
        return (start, -(end - start), 0 if lang == doc_lang else 1)

    chosen: list[Mention] = []
    for start, end, eid, lang in sorted(candidates, key=preference):
        if not chosen or start >= chosen[-1].end:
            chosen.append(Mention(start, end, eid, lang))
    return chosen


def oracle_match_facts(mentions: list[Mention], facts: FactStore):
    """All mention pairs x all triples, duplicates collapsed to earliest pair."""
    hits = {}
    for mh in mentions:
        for mt in mentions:
            if mh.entity_id == mt.entity_id:
                continue
            for triple in facts.triples:
                if triple.head_id == mh.entity_id and triple.tail_id == mt.entity_id:
                    key = triple
                    pair = (mh, mt)
                    if key not in hits or (pair[0].start, pair[1].start) < (
                        hits[key][0].start,
                        hits[key][1].start,
                    ):
                        hits[key] = pair
    out = [(triple, mh, mt) for triple, (mh, mt) in hits.items()]
    out.sort(key=lambda item: (item[1].start, item[2].start, item[0].relation_id))
    return out


def random_lexicon(rng: random.Random, max_surfaces: int = 50) -> BilingualLexicon:
    """Lexicon of short clashing surfaces over tiny alphabets."""
    from crossweave.knowledge import BilingualEntity

    n_entities = rng.randint(1, 12)
    entities = {}
    total = 0
    for i in range(n_entities):
        eid = f"C{rng.randint(0, 20):04d}"
        if eid in entities:
            continue
        en, zh = [], []
        for _ in range(rng.randint(0, 3)):
            if total >= max_surfaces:
                break
            # Multi-word en surfaces appear with space separators.
            words = [
                "".join(rng.choice(EN_LETTERS) for _ in range(rng.randint(1, 5)))
                for _ in range(rng.randint(1, 2))
            ]
            en.append(" ".join(words))
            total += 1
        for _ in range(rng.randint(0, 3)):
            if total >= max_surfaces:
                break
            zh.append("".join(rng.choice(ZH_CHARS) for _ in range(rng.randint(1, 4))))
            total += 1
        if en or zh:
            entities[eid] = BilingualEntity(eid, tuple(dict.fromkeys(en)), tuple(dict.fromkeys(zh)))
    if not entities:
        entities["C0000"] = BilingualEntity("C0000", ("ab",), ("汉",))
    return BilingualLexicon(entities)


def random_text(rng: random.Random, lexicon: BilingualLexicon, max_chars: int = 500) -> str:
    """Mixed-script text seeded with real surfaces so hits are common."""
    surfaces = [s for ent in lexicon.entities.values() for s in ent.en_surfaces + ent.zh_surfaces]
    parts: list[str] = []
    length = 0
    target = rng.randint(0, max_chars)
    while length < target:
        roll = rng.random()
        if surfaces and roll < 0.45:
            chunk = rng.choice(surfaces)
            if rng.random() < 0.3:
                chunk = chunk.upper() if rng.random() < 0.5 else chunk.capitalize()
        elif roll < 0.65:
            chunk = "".join(rng.choice(EN_LETTERS) for _ in range(rng.randint(1, 6)))
        elif roll < 0.8:
            chunk = "".join(rng.choice(ZH_CHARS) for _ in range(rng.randint(1, 4)))
        else:
            chunk = rng.choice(NOISE)
        parts.append(chunk)
        length += len(chunk)
    return "".join(parts)[:max_chars]
