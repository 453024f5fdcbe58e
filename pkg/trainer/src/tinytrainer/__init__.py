"""Tiny CPU trainer for knowledge-anchored multilingual pretraining data.

Consumes the corpus JSONL contract (masked texts with span targets plus
labeled passage pairs) and trains a 2-layer encoder with three heads-down
objectives: entity-level MLM, relation-level MLM, and 3-way passage-pair
classification.  Small enough that analytic loss baselines and
finite-difference gradient checks are exact.
"""

from tinytrainer.errors import TrainerError

__version__ = "0.1.0"
__all__ = ["TrainerError", "__version__"]
