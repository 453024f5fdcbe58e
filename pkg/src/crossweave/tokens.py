"""Text primitives: normalization, CJK detection, offset tokenization.

Two token notions coexist in the pipeline and must not be conflated:

* masking-level tokens (this module): a single CJK ideograph, or a maximal
  run of non-CJK word characters (underscore excluded).  Used for mask
  budgets and corpus-size stats.
* segmentation-level tokens (:mod:`crossweave.passages`): whitespace words
  for English, non-whitespace characters for Chinese.  Used only for
  passage length budgeting.
"""

from __future__ import annotations

import re
import unicodedata
from typing import Iterator, NamedTuple

# Unified ideographs, extension A, and the compatibility block.
CJK_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
)

_CJK_CLASS = "".join(f"{chr(lo)}-{chr(hi)}" for lo, hi in CJK_RANGES)

# One CJK char is one token; everything else tokenizes as maximal runs of
# word characters, with underscore and CJK carved out of the run class.
TOKEN_RE = re.compile(f"[{_CJK_CLASS}]|[^\\W_{_CJK_CLASS}]+")


class Token(NamedTuple):
    start: int
    end: int
    text: str


def nfc(text: str) -> str:
    """Normalize to NFC; all pipeline inputs pass through this once."""
    return unicodedata.normalize("NFC", text)


def is_cjk_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in CJK_RANGES)


def has_cjk(text: str) -> bool:
    return any(is_cjk_char(ch) for ch in text)


def iter_tokens(text: str) -> Iterator[Token]:
    """Yield masking-level tokens with character offsets into ``text``."""
    for m in TOKEN_RE.finditer(text):
        yield Token(m.start(), m.end(), m.group())


def count_tokens(text: str) -> int:
    return sum(1 for _ in TOKEN_RE.finditer(text))


def is_word_char(ch: str) -> bool:
    """Boundary predicate for English dictionary matching."""
    return ch.isalnum()
