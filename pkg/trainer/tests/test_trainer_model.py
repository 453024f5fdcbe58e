import pytest
import torch

from tinytrainer.model import TinyEncoder, TinyModelConfig, build_model


def config(vocab=50, **kwargs):
    return TinyModelConfig(vocab_size=vocab, **kwargs)


def batch_inputs(batch=2, length=6, vocab=50, seed=0):
    g = torch.Generator().manual_seed(seed)
    input_ids = torch.randint(4, vocab, (batch, length), generator=g)
    attention = torch.ones(batch, length, dtype=torch.bool)
    return input_ids, attention


def test_config_validation():
    with pytest.raises(ValueError, match="hidden"):
        TinyModelConfig(vocab_size=10, hidden=30, heads=4)
    with pytest.raises(ValueError, match="layers"):
        TinyModelConfig(vocab_size=10, layers=0)
    cfg = config()
    assert (cfg.layers, cfg.hidden, cfg.heads, cfg.max_len) == (2, 64, 2, 128)


def test_output_shapes():
    model = build_model(config(), seed=1)
    input_ids, attention = batch_inputs()
    assert model.mlm_logits(input_ids, attention).shape == (2, 6, 50)
    assert model.pair_logits(input_ids, attention).shape == (2, 3)


def test_zero_initialized_heads_are_uniform():
    model = build_model(config(), seed=3)
    input_ids, attention = batch_inputs()
    assert torch.all(model.mlm_logits(input_ids, attention) == 0)
    assert torch.all(model.pair_logits(input_ids, attention) == 0)


def test_padding_does_not_leak_into_valid_positions():
    model = build_model(config(), seed=5)
    model.eval()
    input_ids, _ = batch_inputs(batch=1, length=8)
    attention = torch.tensor([[True] * 5 + [False] * 3])
    with torch.no_grad():
        base = model.encode(input_ids, attention)
        poked = input_ids.clone()
        poked[0, 5:] = 7  # rewrite the padded tail
        after = model.encode(poked, attention)
    assert torch.allclose(base[0, :5], after[0, :5], atol=1e-6)


def test_seeded_build_is_deterministic():
    a = build_model(config(), seed=11)
    b = build_model(config(), seed=11)
    for (name, pa), (_, pb) in zip(a.named_parameters(), b.named_parameters()):
        assert torch.equal(pa, pb), name
    c = build_model(config(), seed=12)
    assert any(
        not torch.equal(pa, pc)
        for (_, pa), (_, pc) in zip(a.named_parameters(), c.named_parameters())
    )


def test_sequence_length_cap_enforced():
    model = build_model(config(), seed=0)
    input_ids = torch.zeros(1, 129, dtype=torch.long)
    attention = torch.ones(1, 129, dtype=torch.bool)
    with pytest.raises(ValueError, match="max_len"):
        model.encode(input_ids, attention)
