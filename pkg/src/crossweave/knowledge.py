"""Loaders for the bilingual knowledge base and the linked passage registry.

All stores are plain immutable-after-load containers, safe to share
read-only across worker processes.  Loaders validate eagerly and raise
:class:`~crossweave.errors.LoadError` with file and line context; a store
that loads successfully satisfies its invariants.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from crossweave.errors import LoadError
from crossweave.tokens import nfc

logger = logging.getLogger(__name__)

LANGS = ("en", "zh")


@dataclass(frozen=True)
class BilingualEntity:
    """One entity with its surface forms per language, in file order.

    The first surface listed for a language is that language's preferred
    rendering and is what substitution and fact rendering emit.
    """

    entity_id: str
    en_surfaces: tuple[str, ...]
    zh_surfaces: tuple[str, ...]

    def surfaces(self, lang: str) -> tuple[str, ...]:
        return self.en_surfaces if lang == "en" else self.zh_surfaces

    @property
    def switchable(self) -> bool:
        return bool(self.en_surfaces) and bool(self.zh_surfaces)


class BilingualLexicon:
    """Entity id -> :class:`BilingualEntity`, in first-appearance order."""

    def __init__(self, entities: dict[str, BilingualEntity]):
        self.entities = entities

    def __len__(self) -> int:
        return len(self.entities)

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self.entities

    def get(self, entity_id: str) -> BilingualEntity:
        return self.entities[entity_id]

    def preferred_surface(self, entity_id: str, lang: str) -> str | None:
        surfaces = self.entities[entity_id].surfaces(lang)
        return surfaces[0] if surfaces else None

    def switchable_ids(self) -> set[str]:
        return {eid for eid, ent in self.entities.items() if ent.switchable}


@dataclass(frozen=True)
class RelationType:
    relation_id: str
    en_surface: str
    zh_surface: str

    def surface(self, lang: str) -> str:
        return self.en_surface if lang == "en" else self.zh_surface


class RelationTable:
    def __init__(self, relations: dict[str, RelationType]):
        self.relations = relations

    def __len__(self) -> int:
        return len(self.relations)

    def __contains__(self, relation_id: str) -> bool:
        return relation_id in self.relations

    def get(self, relation_id: str) -> RelationType:
        return self.relations[relation_id]


@dataclass(frozen=True)
class FactTriple:
    head_id: str
    relation_id: str
    tail_id: str


class FactStore:
    """Fact triples indexed by unordered entity pair."""

    def __init__(self, triples: tuple[FactTriple, ...]):
        self.triples = triples
        index: dict[tuple[str, str], list[FactTriple]] = {}
        for t in triples:
            key = (t.head_id, t.tail_id) if t.head_id < t.tail_id else (t.tail_id, t.head_id)
            index.setdefault(key, []).append(t)
        self._by_pair = {k: tuple(v) for k, v in index.items()}

    def __len__(self) -> int:
        return len(self.triples)

    def for_pair(self, a: str, b: str) -> tuple[FactTriple, ...]:
        """Triples relating entities ``a`` and ``b`` in either role, file order."""
        key = (a, b) if a < b else (b, a)
        return self._by_pair.get(key, ())

    def entity_pairs(self) -> set[tuple[str, str]]:
        return set(self._by_pair)


@dataclass(frozen=True)
class Article:
    article_id: str
    lang: str
    paragraphs: tuple[str, ...]


class PassageRegistry:
    """Articles in both languages plus the cross-language link manifest."""

    def __init__(self, articles: dict[str, Article], links: tuple[tuple[str, str], ...]):
        self.articles = articles
        self.links = links
        self._linked = {frozenset(pair) for pair in links}
        self._in_link = {aid for pair in links for aid in pair}

    def article_ids(self, lang: str | None = None) -> tuple[str, ...]:
        ids = (aid for aid, art in self.articles.items() if lang is None or art.lang == lang)
        return tuple(sorted(ids))

    def is_linked(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self._linked

    def orphan_ids(self) -> tuple[str, ...]:
        return tuple(sorted(aid for aid in self.articles if aid not in self._in_link))


def _read_tsv(path: Path, n_cols: int) -> Iterator[tuple[int, list[str]]]:
    """Yield (1-based line number, fields) for each non-blank line."""
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"{path}: cannot read: {exc}") from exc
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != n_cols:
            raise LoadError(f"{path}:{lineno}: expected {n_cols} tab-separated fields, got {len(fields)}")
        if any(not f.strip() for f in fields):
            raise LoadError(f"{path}:{lineno}: empty field")
        yield lineno, [nfc(f.strip()) for f in fields]


def load_lexicon(path: str | Path) -> BilingualLexicon:
    """Load the entity lexicon from a TSV of (entity_id, lang, surface) rows.

    Row order per (entity, language) is preserved; the first row is the
    preferred surface.  Exact duplicate rows are collapsed with a warning.
    Entities covering only one language are kept; they simply cannot be
    switched.
    """
    path = Path(path)
    surfaces: dict[str, dict[str, list[str]]] = {}
    seen: set[tuple[str, str, str]] = set()
    for lineno, (entity_id, lang, surface) in _read_tsv(path, 3):
        if lang not in LANGS:
            raise LoadError(f"{path}:{lineno}: unknown language tag {lang!r}")
        row = (entity_id, lang, surface)
        if row in seen:
            logger.warning("%s:%d: duplicate lexicon row %r collapsed", path, lineno, row)
            continue
        seen.add(row)
        surfaces.setdefault(entity_id, {l: [] for l in LANGS})[lang].append(surface)
    entities = {
        eid: BilingualEntity(eid, tuple(by_lang["en"]), tuple(by_lang["zh"]))
        for eid, by_lang in surfaces.items()
    }
    logger.info("loaded %d entities from %s", len(entities), path)
    return BilingualLexicon(entities)


def load_relations(path: str | Path) -> RelationTable:
    """Load relation types from a TSV of (relation_id, en_surface, zh_surface)."""
    path = Path(path)
    relations: dict[str, RelationType] = {}
    for lineno, (relation_id, en_surface, zh_surface) in _read_tsv(path, 3):
        if relation_id in relations:
            raise LoadError(f"{path}:{lineno}: duplicate relation id {relation_id!r}")
        relations[relation_id] = RelationType(relation_id, en_surface, zh_surface)
    logger.info("loaded %d relation types from %s", len(relations), path)
    return RelationTable(relations)


def load_facts(path: str | Path, lexicon: BilingualLexicon, relations: RelationTable) -> FactStore:
    """Load fact triples, validating every id against the other stores.

    Self-loop triples (head == tail) and references to unknown entities or
    relations are load errors; exact duplicate triples collapse silently.
    """
    path = Path(path)
    triples: list[FactTriple] = []
    seen: set[FactTriple] = set()
    for lineno, (head_id, relation_id, tail_id) in _read_tsv(path, 3):
        if head_id not in lexicon:
            raise LoadError(f"{path}:{lineno}: unknown head entity {head_id!r}")
        if tail_id not in lexicon:
            raise LoadError(f"{path}:{lineno}: unknown tail entity {tail_id!r}")
        if relation_id not in relations:
            raise LoadError(f"{path}:{lineno}: unknown relation {relation_id!r}")
        if head_id == tail_id:
            raise LoadError(f"{path}:{lineno}: self-loop fact on {head_id!r}")
        triple = FactTriple(head_id, relation_id, tail_id)
        if triple in seen:
            continue
        seen.add(triple)
        triples.append(triple)
    logger.info("loaded %d facts from %s", len(triples), path)
    return FactStore(tuple(triples))


def _split_paragraphs(text: str) -> tuple[str, ...]:
    """Split article text into paragraphs on blank lines."""
    paragraphs = []
    for block in text.split("\n\n"):
        block = "\n".join(line.rstrip() for line in block.splitlines()).strip()
        if block:
            paragraphs.append(nfc(block))
    return tuple(paragraphs)


def load_passage_registry(path: str | Path) -> PassageRegistry:
    """Load linked articles from a directory layout.

    Expected layout: ``en/<article_id>.txt`` and ``zh/<article_id>.txt``
    document files (blank-line separated paragraphs) plus a ``pairs.tsv``
    manifest of (en_id, zh_id) rows.  Articles with no content are dropped
    with a warning; a manifest row referencing a missing or empty article
    is an error, as is an article appearing in more than one link.
    Articles absent from the manifest are retained as unlinked.
    """
    root = Path(path)
    if not root.is_dir():
        raise LoadError(f"{root}: passage registry directory not found")
    manifest = root / "pairs.tsv"
    if not manifest.is_file():
        raise LoadError(f"{manifest}: pair-link manifest not found")

    articles: dict[str, Article] = {}
    empty: set[str] = set()
    for lang in LANGS:
        lang_dir = root / lang
        if not lang_dir.is_dir():
            raise LoadError(f"{lang_dir}: article directory not found")
        for doc_path in sorted(lang_dir.glob("*.txt")):
            article_id = doc_path.stem
            if article_id in articles or article_id in empty:
                raise LoadError(f"{doc_path}: duplicate article id {article_id!r}")
            paragraphs = _split_paragraphs(doc_path.read_text(encoding="utf-8"))
            if not paragraphs:
                logger.warning("%s: empty article %r excluded", doc_path, article_id)
                empty.add(article_id)
                continue
            articles[article_id] = Article(article_id, lang, paragraphs)

    links: list[tuple[str, str]] = []
    used: set[str] = set()
    for lineno, (en_id, zh_id) in _read_tsv(manifest, 2):
        for aid, lang in ((en_id, "en"), (zh_id, "zh")):
            if aid in empty:
                raise LoadError(f"{manifest}:{lineno}: link references empty article {aid!r}")
            if aid not in articles:
                raise LoadError(f"{manifest}:{lineno}: link references unknown article {aid!r}")
            if articles[aid].lang != lang:
                raise LoadError(f"{manifest}:{lineno}: article {aid!r} is not in language {lang!r}")
            if aid in used:
                raise LoadError(f"{manifest}:{lineno}: article {aid!r} appears in more than one link")
            used.add(aid)
        links.append((en_id, zh_id))

    registry = PassageRegistry(articles, tuple(links))
    orphans = registry.orphan_ids()
    if orphans:
        logger.warning("%d unlinked articles retained: %s", len(orphans), ", ".join(orphans[:5]))
    logger.info("loaded %d articles, %d links from %s", len(articles), len(links), root)
    return registry
