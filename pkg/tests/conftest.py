"""Pytest fixtures over the shared knowledge-base builders in kbfixtures."""

from __future__ import annotations

import pytest

from crossweave.knowledge import BilingualLexicon, FactStore, RelationTable
from kbfixtures import make_facts, make_lexicon, make_relations


@pytest.fixture(scope="session")
def std_lexicon() -> BilingualLexicon:
    return make_lexicon()


@pytest.fixture(scope="session")
def std_relations() -> RelationTable:
    return make_relations()


@pytest.fixture(scope="session")
def std_facts() -> FactStore:
    return make_facts()
