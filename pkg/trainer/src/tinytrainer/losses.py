"""The three training objectives and their exact-sum combination.

Masked-LM losses are mean negative log-likelihood of the gold tokens at
masked positions; the pair loss is mean 3-way cross-entropy taken from
the first ([CLS]) position.
"""

from __future__ import annotations

import torch
from torch.nn import functional as F

from tinytrainer.data import IGNORE_INDEX
from tinytrainer.errors import TrainerError


def _mlm_loss(model, batch: dict) -> torch.Tensor:
    labels = batch["labels"]
    if int((labels != IGNORE_INDEX).sum()) == 0:
        raise TrainerError("batch has no prediction targets")
    logits = model.mlm_logits(batch["input_ids"], batch["attention_mask"])
    return F.cross_entropy(
        logits.reshape(-1, logits.size(-1)), labels.reshape(-1), ignore_index=IGNORE_INDEX
    )


def entity_mlm_loss(model, batch: dict) -> torch.Tensor:
    """Mean NLL of gold tokens at entity/word masked positions."""
    return _mlm_loss(model, batch)


def relation_mlm_loss(model, batch: dict) -> torch.Tensor:
    """Mean NLL of gold tokens at relation masked positions."""
    return _mlm_loss(model, batch)


def pair_loss(model, batch: dict) -> torch.Tensor:
    labels = batch["labels"]
    if labels.numel() == 0:
        raise TrainerError("batch has no pair examples")
    logits = model.pair_logits(batch["input_ids"], batch["attention_mask"])
    return F.cross_entropy(logits, labels)


def total_loss(le, lf, lp) -> torch.Tensor:
    """Exact sum of the three objectives."""
    terms = []
    for name, value in (("entity", le), ("fact", lf), ("pair", lp)):
        tensor = torch.as_tensor(value)
        if not torch.isfinite(tensor).all():
            raise TrainerError(f"{name} loss is not finite: {value}")
        terms.append(tensor)
    return terms[0] + terms[1] + terms[2]
