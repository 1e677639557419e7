"""Swin block behavior: identity cases, shapes, prompted attention."""

import math

import pytest
import torch

from jdnd.errors import AdapterError
from jdnd.models.swin import SwinBlock, WindowAttention, windowed_attention


def test_depth_zero_block_is_identity():
    block = SwinBlock(dim=8, depth=0, heads=2, window=4, mlp_ratio=2.0)
    x = torch.randn(1, 8, 8, 8)
    assert torch.equal(block(x), x)


@pytest.mark.parametrize("h,w", [(8, 8), (8, 16), (16, 8)])
def test_output_shape_equals_input_shape(h, w):
    block = SwinBlock(dim=6, depth=2, heads=2, window=4, mlp_ratio=2.0)
    x = torch.randn(2, 6, h, w)
    assert block(x).shape == x.shape


def test_zeroed_residual_projections_give_identity():
    block = SwinBlock(dim=8, depth=3, heads=2, window=4, mlp_ratio=2.0)
    for layer in block.layers:
        torch.nn.init.zeros_(layer.attn.proj.weight)
        torch.nn.init.zeros_(layer.attn.proj.bias)
        torch.nn.init.zeros_(layer.mlp.fc2.weight)
        torch.nn.init.zeros_(layer.mlp.fc2.bias)
    x = torch.randn(1, 8, 8, 8)
    assert torch.equal(block(x), x)


def test_alternating_shifts():
    block = SwinBlock(dim=4, depth=4, heads=1, window=4, mlp_ratio=2.0)
    assert [layer.shift for layer in block.layers] == [0, 2, 0, 2]


# -- prompted attention -------------------------------------------------------


def test_prompted_two_token_hand_oracle():
    # test-only shape: 2 tokens + 1 prompt, scalar weights -> 2x3 logits
    f = torch.tensor([[[1.0], [2.0]]])
    p = torch.tensor([[[3.0]]])
    one = torch.ones(1, 1)
    out = windowed_attention(f, one, one, one, None, heads=1, prompts=p)
    for i, q in enumerate((1.0, 2.0)):
        logits = [q * 1, q * 2, q * 3]
        exps = [math.exp(v) for v in logits]
        z = sum(exps)
        expect = (exps[0] * 1 + exps[1] * 2 + exps[2] * 3) / z
        assert out[0, i, 0].item() == pytest.approx(expect, rel=1e-6)


def test_prompt_disabled_equals_plain_attention():
    attn = WindowAttention(dim=8, window=4, heads=2)
    tokens = torch.randn(2, 16, 8)
    assert torch.equal(attn(tokens), attn(tokens, None))


def test_augmented_rows_sum_to_one():
    # N=4 tokens + 1 prompt: 5 augmented logits per row, softmax normalized
    n, c, heads = 4, 6, 2
    f = torch.randn(1, n, c, dtype=torch.float64)
    p = torch.randn(1, 1, c, dtype=torch.float64)
    w_q, w_k, w_v = (torch.randn(c, c, dtype=torch.float64) for _ in range(3))
    d = c // heads
    q = (f @ w_q).view(1, n, heads, d).transpose(1, 2)
    k = (torch.cat([f, p], 1) @ w_k).view(1, n + 1, heads, d).transpose(1, 2)
    soft = torch.softmax(q @ k.transpose(-2, -1) / math.sqrt(d), dim=-1)
    assert soft.shape[-1] == 5
    assert torch.allclose(soft.sum(-1), torch.ones(1, heads, n, dtype=torch.float64), atol=1e-6)
    # and the module reproduces the same weighted sum
    v = (torch.cat([f, p], 1) @ w_v).view(1, n + 1, heads, d).transpose(1, 2)
    expect = (soft @ v).transpose(1, 2).reshape(1, n, c)
    out = windowed_attention(f, w_q, w_k, w_v, None, heads, prompts=p)
    assert torch.allclose(out, expect, atol=1e-10)


def test_prompt_count_law_enforced_at_module():
    attn = WindowAttention(dim=8, window=4, heads=2)
    tokens = torch.randn(2, 16, 8)
    with pytest.raises(AdapterError):
        attn(tokens, torch.randn(2, 3, 8))  # 16 tokens need exactly 4 prompts
    out = attn(tokens, torch.randn(2, 4, 8))
    assert out.shape == (2, 16, 8)


def test_zero_prompt_map_still_shifts_attention():
    block = SwinBlock(dim=8, depth=2, heads=2, window=4, mlp_ratio=2.0)
    x = torch.randn(1, 8, 8, 8)
    p = torch.zeros(1, 8, 4, 4)
    assert not torch.equal(block(x, p), block(x))


def test_block_prompt_port_disabled_is_bit_exact():
    block = SwinBlock(dim=8, depth=2, heads=2, window=4, mlp_ratio=2.0)
    x = torch.randn(1, 8, 8, 8)
    assert torch.equal(block(x, None), block(x))


def test_block_prompt_shape_checks():
    block = SwinBlock(dim=8, depth=1, heads=2, window=4, mlp_ratio=2.0)
    x = torch.randn(1, 8, 8, 8)
    with pytest.raises(AdapterError):
        block(x, torch.zeros(1, 4, 4, 4))  # wrong channel count
    with pytest.raises(AdapterError):
        block(x, torch.zeros(1, 8, 8, 8))  # not half resolution


def test_prompted_block_output_shape():
    block = SwinBlock(dim=8, depth=2, heads=2, window=4, mlp_ratio=2.0)
    x = torch.randn(1, 8, 8, 8)
    p = torch.randn(1, 8, 4, 4)
    assert block(x, p).shape == x.shape
