"""A 2-layer transformer encoder with MLM and pair-classification heads.

Both output heads start at exactly zero, so the untrained model predicts
the uniform distribution: per-token MLM loss is ln|V| and pair loss is
ln 3 to machine precision, which the test suite checks analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from tinytrainer.data import MAX_LEN, PAIR_LABELS


@dataclass(frozen=True)
class TinyModelConfig:
    vocab_size: int
    layers: int = 2
    hidden: int = 64
    heads: int = 2
    max_len: int = MAX_LEN
    ffn: int = 128

    def __post_init__(self) -> None:
        for name in ("vocab_size", "layers", "hidden", "heads", "max_len", "ffn"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.hidden % self.heads:
            raise ValueError(f"hidden ({self.hidden}) must be divisible by heads ({self.heads})")


class TinyEncoder(nn.Module):
    def __init__(self, config: TinyModelConfig) -> None:
        super().__init__()
        self.config = config
        self.token_embedding = nn.Embedding(config.vocab_size, config.hidden, padding_idx=0)
        self.position_embedding = nn.Embedding(config.max_len, config.hidden)
        layer = nn.TransformerEncoderLayer(
            d_model=config.hidden,
            nhead=config.heads,
            dim_feedforward=config.ffn,
            dropout=0.0,  # keep every forward pass deterministic
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, config.layers, enable_nested_tensor=False)
        self.mlm_head = nn.Linear(config.hidden, config.vocab_size)
        self.pair_head = nn.Linear(config.hidden, len(PAIR_LABELS))
        nn.init.zeros_(self.mlm_head.weight)
        nn.init.zeros_(self.mlm_head.bias)
        nn.init.zeros_(self.pair_head.weight)
        nn.init.zeros_(self.pair_head.bias)

    def encode(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        if input_ids.size(1) > self.config.max_len:
            raise ValueError(
                f"sequence length {input_ids.size(1)} exceeds max_len {self.config.max_len}"
            )
        positions = torch.arange(input_ids.size(1), device=input_ids.device)
        states = self.token_embedding(input_ids) + self.position_embedding(positions)
        return self.encoder(states, src_key_padding_mask=~attention_mask)

    def mlm_logits(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        return self.mlm_head(self.encode(input_ids, attention_mask))

    def pair_logits(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        return self.pair_head(self.encode(input_ids, attention_mask)[:, 0])


def build_model(config: TinyModelConfig, seed: int = 0) -> TinyEncoder:
    """Construct with seeded parameter init (heads stay zero regardless)."""
    torch.manual_seed(seed)
    return TinyEncoder(config)
