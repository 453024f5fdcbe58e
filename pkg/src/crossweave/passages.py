"""Article segmentation and three-way passage-pair sampling.

Pairs carry one of three labels: positive (segments from cross-language
linked articles), random (cross-language, not linked), context (adjacent
segments of one article).  Sampling treats each label's candidate space
as index ranges over segment products, so huge cross products are never
materialized.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate

from crossweave.errors import CorpusError
from crossweave.knowledge import Article, PassageRegistry
from crossweave.tokens import is_cjk_char

MAX_SEGMENT_TOKENS = 256
PAIR_BUDGET = 30000

LABELS = ("positive", "random", "context")


@dataclass(frozen=True)
class Segment:
    article_id: str
    lang: str
    index: int
    text: str
    token_count: int


@dataclass(frozen=True)
class PassagePairExample:
    seg_a: Segment
    seg_b: Segment
    label: str


def segment_token_count(text: str, lang: str) -> int:
    """Length budget unit: whitespace words for en, CJK chars for zh."""
    if lang == "en":
        return len(text.split())
    return sum(1 for ch in text if is_cjk_char(ch))


def _split_overlong(para: str, lang: str, cap: int) -> tuple[list[str], str]:
    """Split a paragraph over the cap into full-cap chunks plus a remainder."""
    chunks: list[str] = []
    if lang == "en":
        words = para.split()
        while len(words) > cap:
            chunks.append(" ".join(words[:cap]))
            words = words[cap:]
        return chunks, " ".join(words)
    count = 0
    start = 0
    for idx, ch in enumerate(para):
        if is_cjk_char(ch):
            count += 1
            if count == cap:
                chunks.append(para[start:idx + 1])
                start = idx + 1
                count = 0
    return chunks, para[start:].strip()


def segment_article(article: Article, max_segment_tokens: int = MAX_SEGMENT_TOKENS) -> list[Segment]:
    """Pack paragraphs greedily into segments of at most the token cap.

    Paragraph order is preserved, so consecutive segment indices always
    cover adjacent article content; an over-cap paragraph is cut at the
    cap and its tail packs on with following paragraphs.
    """
    texts: list[str] = []
    cur: list[str] = []
    cur_count = 0

    def flush():
        nonlocal cur, cur_count
        if cur:
            texts.append("\n".join(cur))
            cur = []
            cur_count = 0

    for para in article.paragraphs:
        n = segment_token_count(para, article.lang)
        if n > max_segment_tokens:
            flush()
            chunks, remainder = _split_overlong(para, article.lang, max_segment_tokens)
            texts.extend(chunks)
            if remainder:
                cur = [remainder]
                cur_count = segment_token_count(remainder, article.lang)
        elif cur_count + n <= max_segment_tokens:
            cur.append(para)
            cur_count += n
        else:
            flush()
            cur = [para]
            cur_count = n
    flush()
    return [
        Segment(article.article_id, article.lang, i, t, segment_token_count(t, article.lang))
        for i, t in enumerate(texts)
    ]


def _sample_from_blocks(rng: random.Random, blocks: list[tuple], sizes: list[int], quota: int):
    """Sample ``quota`` distinct pair indices across concatenated blocks.

    Yields (block, offset-within-block) in ascending index order.  Sampling
    over the flat index space implements without-replacement sampling of
    the full candidate product without materializing it.
    """
    total = sum(sizes)
    bounds = list(accumulate(sizes))
    for flat in sorted(rng.sample(range(total), min(quota, total))):
        b = bisect_right(bounds, flat)
        start = bounds[b - 1] if b else 0
        yield blocks[b], flat - start


def build_pairs(
    registry: PassageRegistry,
    budget: int = PAIR_BUDGET,
    seed: int = 0,
    max_segment_tokens: int = MAX_SEGMENT_TOKENS,
) -> list[PassagePairExample]:
    """Sample a three-way labeled pair corpus of ~budget/3 pairs per label.

    The budget splits as evenly as three classes allow (remainder goes to
    the earlier labels in positive, random, context order).  Each class is
    sampled uniformly without replacement; a class with no candidates at
    all raises, naming the class.
    """
    if budget < 3:
        raise CorpusError(f"pair budget must be at least 3, got {budget}")
    segments = {
        aid: segment_article(registry.articles[aid], max_segment_tokens)
        for aid in sorted(registry.articles)
    }

    positive_blocks = [(en_id, zh_id) for en_id, zh_id in registry.links]
    positive_sizes = [len(segments[a]) * len(segments[b]) for a, b in positive_blocks]

    random_blocks = [
        (en_id, zh_id)
        for en_id in registry.article_ids("en")
        for zh_id in registry.article_ids("zh")
        if not registry.is_linked(en_id, zh_id)
    ]
    random_sizes = [len(segments[a]) * len(segments[b]) for a, b in random_blocks]

    context_blocks = [(aid,) for aid in registry.article_ids() if len(segments[aid]) > 1]
    context_sizes = [len(segments[b[0]]) - 1 for b in context_blocks]

    base = budget // 3
    quotas = [base + (1 if i < budget % 3 else 0) for i in range(3)]

    rng = random.Random(seed)
    pairs: list[PassagePairExample] = []
    for label, blocks, sizes, quota in zip(
        LABELS,
        (positive_blocks, random_blocks, context_blocks),
        (positive_sizes, random_sizes, context_sizes),
        quotas,
    ):
        if sum(sizes) == 0:
            raise CorpusError(f"no candidate pairs for class {label!r}: registry too small")
        for block, offset in _sample_from_blocks(rng, blocks, sizes, quota):
            if label == "context":
                segs = segments[block[0]]
                pairs.append(PassagePairExample(segs[offset], segs[offset + 1], label))
            else:
                a_segs, b_segs = segments[block[0]], segments[block[1]]
                pairs.append(PassagePairExample(a_segs[offset // len(b_segs)], b_segs[offset % len(b_segs)], label))
    return pairs
