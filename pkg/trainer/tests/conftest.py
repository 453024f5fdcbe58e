"""Pytest fixtures over the synthetic corpus builders in synthcorpus."""

from __future__ import annotations

from pathlib import Path

import pytest

from synthcorpus import write_synthetic_corpus


@pytest.fixture()
def small_corpus(tmp_path) -> Path:
    return write_synthetic_corpus(
        tmp_path / "small.jsonl", n_entity=12, n_fact=9, n_pair=9, n_fillers=20, seed=4
    )
