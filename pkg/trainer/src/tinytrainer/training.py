"""Round-robin multi-task training loop with a CSV metrics log.

Tasks alternate entity -> fact -> pair each step.  Probe losses (fixed
first-N batches per task, evaluated without gradients) are logged at
step 0 and every `log_every` steps; the CSV rows are (step, task, loss).
Everything is seed-deterministic: model init, batch sampling, and the
log bytes themselves.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch

from tinytrainer import data
from tinytrainer.errors import TrainerError
from tinytrainer.losses import entity_mlm_loss, pair_loss, relation_mlm_loss
from tinytrainer.model import TinyEncoder, TinyModelConfig, build_model

TASK_CYCLE = ("entity", "fact", "pair")
PROBE_SIZE = 32


@dataclass
class TrainResult:
    model: TinyEncoder
    vocab: data.Vocab
    steps: list[tuple[int, str, float]] = field(default_factory=list)
    probes: list[tuple[int, str, float]] = field(default_factory=list)
    pair_accuracy: float = 0.0

    def probe_losses(self, step: int) -> dict[str, float]:
        return {task: loss for s, task, loss in self.probes if s == step}


def _encode_pools(dataset: data.Dataset, vocab: data.Vocab) -> dict[str, list[dict]]:
    pools = {
        "entity": [data.encode_mlm(r, vocab) for r in dataset.entity],
        "fact": [data.encode_mlm(r, vocab) for r in dataset.fact],
        "pair": [data.encode_pair(r, vocab) for r in dataset.pair],
    }
    names = {"entity": "entity-level MLM", "fact": "fact_mlm", "pair": "passage_rel"}
    for task, pool in pools.items():
        if not pool:
            raise TrainerError(f"dataset has no {names[task]} examples")
    return pools


def _collate(task: str, encoded: list[dict]) -> dict:
    return data.collate_pair(encoded) if task == "pair" else data.collate_mlm(encoded)


_LOSS_BY_TASK = {"entity": entity_mlm_loss, "fact": relation_mlm_loss, "pair": pair_loss}


def evaluate_pair_accuracy(model: TinyEncoder, pair_batch: dict) -> float:
    model.eval()
    with torch.no_grad():
        logits = model.pair_logits(pair_batch["input_ids"], pair_batch["attention_mask"])
    return float((logits.argmax(dim=-1) == pair_batch["labels"]).float().mean())


def train(
    corpus_path: str | Path,
    steps: int = 300,
    seed: int = 0,
    batch_size: int = 8,
    lr: float = 3e-3,
    metrics_path: str | Path | None = None,
    log_every: int = 10,
    model_config: TinyModelConfig | None = None,
) -> TrainResult:
    dataset = data.load_corpus(corpus_path)
    vocab = data.build_vocab(dataset)
    if model_config is None:
        model_config = TinyModelConfig(vocab_size=len(vocab))
    elif model_config.vocab_size != len(vocab):
        raise TrainerError(
            f"model vocab_size {model_config.vocab_size} != corpus vocabulary {len(vocab)}"
        )
    pools = _encode_pools(dataset, vocab)
    probes = {
        task: _collate(task, pool[: min(PROBE_SIZE, len(pool))]) for task, pool in pools.items()
    }

    model = build_model(model_config, seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    rng = random.Random(seed)
    result = TrainResult(model=model, vocab=vocab)

    def log_probes(step: int) -> None:
        model.eval()
        with torch.no_grad():
            for task in TASK_CYCLE:
                loss = float(_LOSS_BY_TASK[task](model, probes[task]))
                result.probes.append((step, task, loss))
        model.train()

    log_probes(0)
    for step in range(1, steps + 1):
        task = TASK_CYCLE[(step - 1) % len(TASK_CYCLE)]
        pool = pools[task]
        batch = _collate(task, [pool[rng.randrange(len(pool))] for _ in range(batch_size)])
        loss = _LOSS_BY_TASK[task](model, batch)
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        result.steps.append((step, task, float(loss.detach())))
        if step % log_every == 0:
            log_probes(step)

    result.pair_accuracy = evaluate_pair_accuracy(model, _collate("pair", pools["pair"]))
    if metrics_path is not None:
        with open(metrics_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "task", "loss"])
            for step, task, loss in result.probes:
                writer.writerow([step, task, repr(loss)])
    return result
