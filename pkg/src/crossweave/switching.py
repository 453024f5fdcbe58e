"""Entity mention detection and entity-level code-switching.

Matching is dictionary-based over both surface tables at once: English
surfaces match case-insensitively and only between word boundaries,
Chinese surfaces match as exact substrings.  Scanning is left to right,
greedy, longest match first; on a length tie the dictionary of the
document's language wins, and a surface shared by several entities
resolves to the smallest entity_id.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from weakref import WeakKeyDictionary

from crossweave.knowledge import BilingualLexicon
from crossweave.tokens import is_word_char

SWITCH_CAP = 10

_TERMINAL = ""  # never a real character key in a trie node


@dataclass(frozen=True)
class Mention:
    start: int
    end: int
    entity_id: str
    surface_lang: str


@dataclass(frozen=True)
class Replacement:
    mention: Mention  # span in the original text
    substitute: str
    target_lang: str


@dataclass(frozen=True)
class SwitchedDoc:
    original_text: str
    switched_text: str
    replacements: tuple[Replacement, ...]
    doc_lang: str


def _build_trie(surface_to_entity: dict[str, str]) -> dict:
    root: dict = {}
    for surface, entity_id in surface_to_entity.items():
        node = root
        for ch in surface:
            node = node.setdefault(ch, {})
        node[_TERMINAL] = entity_id
    return root


class SurfaceMatcher:
    """Longest-match trie tagger over a lexicon's bilingual surfaces.

    Built once per lexicon and reused across documents; the structure is
    read-only after construction.
    """

    def __init__(self, lexicon: BilingualLexicon):
        en_map: dict[str, str] = {}
        zh_map: dict[str, str] = {}
        for entity_id, entity in lexicon.entities.items():
            for surface in entity.en_surfaces:
                key = surface.casefold()
                if key not in en_map or entity_id < en_map[key]:
                    en_map[key] = entity_id
            for surface in entity.zh_surfaces:
                if surface not in zh_map or entity_id < zh_map[surface]:
                    zh_map[surface] = entity_id
        self._en_trie = _build_trie(en_map)
        self._zh_trie = _build_trie(zh_map)

    def _longest_en(self, text: str, start: int) -> tuple[int, str] | None:
        """Longest casefolded match from ``start`` ending on a word boundary.

        The text is folded character by character so match ends always land
        on real character offsets even when folding expands (e.g. sharp s).
        """
        node = self._en_trie
        n = len(text)
        best = None
        for j in range(start, n):
            for folded_ch in text[j].casefold():
                node = node.get(folded_ch)
                if node is None:
                    return best
            if _TERMINAL in node and (j + 1 == n or not is_word_char(text[j + 1])):
                best = (j + 1, node[_TERMINAL])
        return best

    def _longest_zh(self, text: str, start: int) -> tuple[int, str] | None:
        node = self._zh_trie
        best = None
        for j in range(start, len(text)):
            node = node.get(text[j])
            if node is None:
                return best
            if _TERMINAL in node:
                best = (j + 1, node[_TERMINAL])
        return best

    def find(self, text: str, doc_lang: str) -> list[Mention]:
        mentions: list[Mention] = []
        n = len(text)
        i = 0
        while i < n:
            en_hit = None
            if i == 0 or not is_word_char(text[i - 1]):
                en_hit = self._longest_en(text, i)
            zh_hit = self._longest_zh(text, i)
            candidates = []
            if en_hit:
                candidates.append((en_hit[0], 0 if doc_lang == "en" else 1, en_hit[1], "en"))
            if zh_hit:
                candidates.append((zh_hit[0], 0 if doc_lang == "zh" else 1, zh_hit[1], "zh"))
            if candidates:
                end, _pref, entity_id, lang = min(candidates, key=lambda c: (-c[0], c[1]))
                mentions.append(Mention(i, end, entity_id, lang))
                i = end
            else:
                i += 1
        return mentions


_matchers: WeakKeyDictionary[BilingualLexicon, SurfaceMatcher] = WeakKeyDictionary()


def find_mentions(text: str, doc_lang: str, lexicon: BilingualLexicon) -> list[Mention]:
    """Locate lexicon entities in NFC-normalized text, sorted by start."""
    matcher = _matchers.get(lexicon)
    if matcher is None:
        matcher = _matchers[lexicon] = SurfaceMatcher(lexicon)
    return matcher.find(text, doc_lang)


def _other(lang: str) -> str:
    return "zh" if lang == "en" else "en"


def code_switch(
    text: str,
    doc_lang: str,
    mentions: list[Mention],
    lexicon: BilingualLexicon,
    seed: int,
    cap: int = SWITCH_CAP,
) -> SwitchedDoc:
    """Replace up to ``cap`` mentions with their other-language counterparts.

    Selection is uniform without replacement over the switchable mentions
    (those whose entity has at least one surface in the other language);
    each is replaced by the first-listed counterpart surface.  Zero
    switchable mentions yields the document unchanged.
    """
    switchable = [
        (m, lexicon.preferred_surface(m.entity_id, _other(m.surface_lang)))
        for m in mentions
        if lexicon.preferred_surface(m.entity_id, _other(m.surface_lang))
    ]
    rng = random.Random(seed)
    chosen = rng.sample(switchable, min(cap, len(switchable)))
    chosen.sort(key=lambda pair: pair[0].start)

    parts: list[str] = []
    replacements: list[Replacement] = []
    pos = 0
    for mention, substitute in chosen:
        parts.append(text[pos:mention.start])
        parts.append(substitute)
        pos = mention.end
        replacements.append(Replacement(mention, substitute, _other(mention.surface_lang)))
    parts.append(text[pos:])
    return SwitchedDoc(text, "".join(parts), tuple(replacements), doc_lang)


def invert_switch(doc: SwitchedDoc) -> str:
    """Undo the recorded substitutions; must reproduce the original text."""
    parts: list[str] = []
    pos = 0
    delta = 0
    for r in doc.replacements:
        new_start = r.mention.start + delta
        parts.append(doc.switched_text[pos:new_start])
        parts.append(doc.original_text[r.mention.start:r.mention.end])
        pos = new_start + len(r.substitute)
        delta += len(r.substitute) - (r.mention.end - r.mention.start)
    parts.append(doc.switched_text[pos:])
    return "".join(parts)


def mentions_after_switch(doc: SwitchedDoc, mentions: list[Mention]) -> list[Mention]:
    """Re-address original-text mentions in switched-text coordinates.

    Replaced mentions take their substitute's span and language; the rest
    shift by the accumulated length delta.  ``mentions`` must be the list
    the switch was computed from.
    """
    by_mention = {r.mention: r for r in doc.replacements}
    out: list[Mention] = []
    delta = 0
    for m in sorted(mentions, key=lambda m: m.start):
        r = by_mention.get(m)
        if r is not None:
            out.append(Mention(m.start + delta, m.start + delta + len(r.substitute), m.entity_id, r.target_lang))
            delta += len(r.substitute) - (m.end - m.start)
        else:
            out.append(Mention(m.start + delta, m.end + delta, m.entity_id, m.surface_lang))
    return out
