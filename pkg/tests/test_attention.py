"""Windowed attention against scalar-arithmetic and numpy-loop oracles."""

import math

import numpy as np
import pytest
import torch

from jdnd.errors import NumericError
from jdnd.models.swin import WindowAttention, windowed_attention


def reference_attention(tokens, w_q, w_k, w_v, bias, heads, prompts=None):
    """Loop-based numpy reimplementation; returns (output, softmax rows)."""
    tokens = tokens.numpy().astype(np.float64)
    b, n, c = tokens.shape
    d = c // heads
    kv = tokens
    n_p = 0
    if prompts is not None:
        prompts = prompts.numpy().astype(np.float64)
        kv = np.concatenate([tokens, prompts], axis=1)
        n_p = prompts.shape[1]
    out = np.zeros((b, n, c))
    rows = []
    for wi in range(b):
        q = tokens[wi] @ w_q.numpy().astype(np.float64)
        k = kv[wi] @ w_k.numpy().astype(np.float64)
        v = kv[wi] @ w_v.numpy().astype(np.float64)
        for head in range(heads):
            sl = slice(head * d, (head + 1) * d)
            logits = q[:, sl] @ k[:, sl].T / math.sqrt(d)
            if bias is not None:
                bh = bias.numpy().astype(np.float64)[head]
                logits[:, :n] += bh
            e = np.exp(logits - logits.max(axis=1, keepdims=True))
            soft = e / e.sum(axis=1, keepdims=True)
            rows.append(soft)
            out[wi][:, sl] = soft @ v[:, sl]
    return out, rows


def test_single_token_output_is_value():
    # softmax over one key is 1, so the output equals V = F @ W_V
    f = torch.randn(1, 1, 6)
    w_q, w_k, w_v = torch.randn(6, 6), torch.randn(6, 6), torch.randn(6, 6)
    out = windowed_attention(f, w_q, w_k, w_v, None, heads=2)
    assert torch.allclose(out, f @ w_v, atol=1e-6)


def test_zero_query_gives_uniform_attention():
    f = torch.randn(3, 8, 4)
    w_k, w_v = torch.randn(4, 4), torch.randn(4, 4)
    out = windowed_attention(f, torch.zeros(4, 4), w_k, w_v, None, heads=1)
    v = f @ w_v
    assert torch.allclose(out, v.mean(dim=1, keepdim=True).expand_as(v), atol=1e-6)


def test_two_token_scalar_oracle():
    # F = [1, 2]^T, scalar weights = 1, no bias: logits [[1,2],[2,4]]
    f = torch.tensor([[[1.0], [2.0]]])
    one = torch.ones(1, 1)
    out = windowed_attention(f, one, one, one, None, heads=1)
    e1, e2, e4 = math.exp(1), math.exp(2), math.exp(4)
    row0 = (e1 * 1 + e2 * 2) / (e1 + e2)
    row1 = (e2 * 1 + e4 * 2) / (e2 + e4)
    assert out[0, 0, 0].item() == pytest.approx(row0, rel=1e-6)
    assert out[0, 1, 0].item() == pytest.approx(row1, rel=1e-6)


@pytest.mark.parametrize("n,c,heads,windows", [(4, 8, 2, 3), (16, 12, 3, 2), (9, 5, 5, 1)])
def test_matches_reference_and_rows_sum_to_one(n, c, heads, windows):
    f = torch.randn(windows, n, c)
    w_q, w_k, w_v = (torch.randn(c, c) * 0.5 for _ in range(3))
    bias = torch.randn(heads, n, n) * 0.3
    out = windowed_attention(f, w_q, w_k, w_v, bias, heads)
    ref, rows = reference_attention(f, w_q, w_k, w_v, bias, heads)
    assert np.allclose(out.numpy(), ref, atol=1e-5)
    for soft in rows:
        assert np.allclose(soft.sum(axis=1), 1.0, atol=1e-6)


def test_permutation_equivariance():
    # reindexing tokens with matching bias permutation permutes the output
    n, c, heads = 16, 8, 2
    f = torch.randn(1, n, c)
    w_q, w_k, w_v = (torch.randn(c, c) * 0.5 for _ in range(3))
    bias = torch.randn(heads, n, n)
    perm = torch.randperm(n)
    out = windowed_attention(f, w_q, w_k, w_v, bias, heads)
    out_p = windowed_attention(f[:, perm], w_q, w_k, w_v, bias[:, perm][:, :, perm], heads)
    assert torch.allclose(out[:, perm], out_p, atol=1e-5)


def test_gradient_matches_finite_differences():
    # double precision, 2x2-window (N=4) input, central differences
    torch.manual_seed(7)
    n, c, heads = 4, 4, 2
    f = torch.randn(1, n, c, dtype=torch.float64, requires_grad=True)
    mats = [torch.randn(c, c, dtype=torch.float64) * 0.5 for _ in range(3)]
    bias = torch.randn(heads, n, n, dtype=torch.float64) * 0.2
    probe = torch.randn(1, n, c, dtype=torch.float64)

    def scalar_fn(t):
        return (windowed_attention(t, *mats, bias, heads) * probe).sum()

    loss = scalar_fn(f)
    loss.backward()
    grad = f.grad.clone()

    eps = 1e-6
    fd = torch.zeros_like(f)
    with torch.no_grad():
        flat = f.view(-1)
        for i in range(flat.numel()):
            orig = flat[i].item()
            flat[i] = orig + eps
            hi = scalar_fn(f).item()
            flat[i] = orig - eps
            lo = scalar_fn(f).item()
            flat[i] = orig
            fd.view(-1)[i] = (hi - lo) / (2 * eps)
    rel = (grad - fd).norm() / fd.norm()
    assert rel < 1e-4


def test_non_finite_input_raises():
    f = torch.randn(1, 4, 4)
    f[0, 0, 0] = float("nan")
    w = torch.eye(4)
    with pytest.raises(NumericError):
        windowed_attention(f, w, w, w, None, heads=1)


def test_module_output_matches_functional_core():
    attn = WindowAttention(dim=8, window=4, heads=2)
    tokens = torch.randn(3, 16, 8)
    out = attn(tokens)
    c = 8
    ref = windowed_attention(
        tokens,
        attn.qkv.weight[:c].T,
        attn.qkv.weight[c : 2 * c].T,
        attn.qkv.weight[2 * c :].T,
        attn.relative_bias(),
        heads=2,
        q_bias=attn.qkv.bias[:c],
        k_bias=attn.qkv.bias[c : 2 * c],
        v_bias=attn.qkv.bias[2 * c :],
    )
    assert torch.allclose(out, ref @ attn.proj.weight.T + attn.proj.bias, atol=1e-6)
