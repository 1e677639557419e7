"""Windowed multi-head self-attention and the transformer blocks built on it.

Attention is restricted to non-overlapping square windows of tokens; blocks
alternate between unshifted and half-window-shifted layers (cyclic shift).
Prompt tokens, when supplied, extend the key/value rows of every window while
queries stay untouched, so a block with no prompts degrades exactly to plain
window attention.
"""

from __future__ import annotations

import torch
import torch.nn as nn
from torch import Tensor

from ..errors import AdapterError, ConfigError, NumericError


def window_partition(x: Tensor, window: int, shift: int = 0) -> Tensor:
    """Split a feature map into window token groups.

    Args:
        x: (B, H, W, C) feature map; H and W must be divisible by ``window``.
        window: window side length.
        shift: cyclic shift (in pixels, applied up-left) before partitioning.

    Returns:
        (B * nWindows, window*window, C) tokens, row-major inside each window,
        windows ordered row-major over the grid.
    """
    b, h, w, c = x.shape
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    if h % window or w % window:
        raise ConfigError(f"feature map {h}x{w} not divisible by window {window}")
    if not 0 <= shift < window:
        raise ConfigError(f"shift {shift} outside [0, {window})")
    if shift:
        x = torch.roll(x, shifts=(-shift, -shift), dims=(1, 2))
    x = x.view(b, h // window, window, w // window, window, c)
    x = x.permute(0, 1, 3, 2, 4, 5).contiguous()
    return x.view(-1, window * window, c)


def window_reverse(tokens: Tensor, window: int, shift: int, h: int, w: int) -> Tensor:
    """Exact inverse of :func:`window_partition` (including the shift)."""
    n = tokens.shape[1]
    if n != window * window:
        raise ConfigError(f"got {n} tokens per window, expected {window * window}")
    if (h % window) or (w % window) or tokens.shape[0] % ((h // window) * (w // window)):
        raise ConfigError("token count inconsistent with target grid")
    b = tokens.shape[0] // ((h // window) * (w // window))
    x = tokens.view(b, h // window, w // window, window, window, -1)
    x = x.permute(0, 1, 3, 2, 4, 5).contiguous().view(b, h, w, -1)
    if shift:
        x = torch.roll(x, shifts=(shift, shift), dims=(1, 2))
    return x


def windowed_attention(
    tokens: Tensor,
    w_q: Tensor,
    w_k: Tensor,
    w_v: Tensor,
    bias: Tensor | None,
    heads: int,
    q_bias: Tensor | None = None,
    k_bias: Tensor | None = None,
    v_bias: Tensor | None = None,
    prompts: Tensor | None = None,
    prompt_bias: Tensor | None = None,
) -> Tensor:
    """Multi-head self-attention over one batch of windows.

    ``Softmax(Q K^T / sqrt(d) + B) V`` with ``Q = F W_Q``; when ``prompts``
    is given, K and V rows are the projections of ``[F; P]`` while Q keeps
    only the input tokens. ``bias`` is (heads, N, N); prompt key columns get
    zero bias unless ``prompt_bias`` (heads, 1, N_p) is supplied.

    Args:
        tokens: (B, N, C) window tokens.
        w_q / w_k / w_v: (C, C) projection matrices (right-multiplied).
        prompts: optional (B, N_p, C) prompt tokens. This core accepts any
            N_p; the adapter layers enforce the quarter-token count.

    Returns:
        (B, N, C) updated tokens.
    """
    b, n, c = tokens.shape
    if c % heads:
        raise ConfigError(f"channels {c} not divisible by heads {heads}")
    if not torch.isfinite(tokens).all():
        raise NumericError("attention input contains non-finite values")
    d = c // heads

    kv_src = tokens
    n_p = 0
    if prompts is not None:
        if prompts.shape[0] != b or prompts.shape[2] != c:
            raise AdapterError(f"prompt shape {tuple(prompts.shape)} does not match tokens")
        n_p = prompts.shape[1]
        if not torch.isfinite(prompts).all():
            raise NumericError("prompt tokens contain non-finite values")
        kv_src = torch.cat([tokens, prompts], dim=1)

    q = tokens @ w_q
    k = kv_src @ w_k
    v = kv_src @ w_v
    if q_bias is not None:
        q = q + q_bias
    if k_bias is not None:
        k = k + k_bias
    if v_bias is not None:
        v = v + v_bias

    q = q.view(b, n, heads, d).transpose(1, 2)
    k = k.view(b, n + n_p, heads, d).transpose(1, 2)
    v = v.view(b, n + n_p, heads, d).transpose(1, 2)

    logits = q @ k.transpose(-2, -1) / (d ** 0.5)
    if bias is not None or (prompt_bias is not None and n_p):
        full = bias if bias is not None else logits.new_zeros(heads, n, n)
        if n_p:
            pad = (
                prompt_bias.expand(heads, n, n_p)
                if prompt_bias is not None
                else full.new_zeros(heads, n, n_p)
            )
            full = torch.cat([full, pad], dim=-1)
        logits = logits + full

    attn = torch.softmax(logits, dim=-1)
    out = (attn @ v).transpose(1, 2).reshape(b, n, c)
    return out


class WindowAttention(nn.Module):
    """W-MSA layer with a learnable relative-position bias table.

    The bias matrix B is realized as a table over relative offsets
    (2w-1)^2 x heads, gathered into (heads, N, N) per forward call.
    """

    def __init__(self, dim: int, window: int, heads: int, prompt_bias: bool = False):
        super().__init__()
        if dim % heads:
            raise ConfigError(f"dim {dim} not divisible by heads {heads}")
        self.dim = dim
        self.window = window
        self.heads = heads
        self.qkv = nn.Linear(dim, dim * 3, bias=True)
        self.proj = nn.Linear(dim, dim)

        self.bias_table = nn.Parameter(torch.zeros((2 * window - 1) ** 2, heads))
        nn.init.trunc_normal_(self.bias_table, std=0.02)
        coords = torch.stack(
            torch.meshgrid(torch.arange(window), torch.arange(window), indexing="ij")
        ).flatten(1)
        rel = coords[:, :, None] - coords[:, None, :]
        index = (rel[0] + window - 1) * (2 * window - 1) + (rel[1] + window - 1)
        self.register_buffer("bias_index", index, persistent=False)

        if prompt_bias:
            # bias on prompt key columns; owned by the adapter side, excluded
            # from the frozen-base parameter hash by name
            n_p = (window * window) // 4
            self.prompt_key_bias = nn.Parameter(torch.zeros(heads, 1, n_p))
        else:
            self.prompt_key_bias = None

    def relative_bias(self) -> Tensor:
        n = self.window * self.window
        return self.bias_table[self.bias_index.view(-1)].view(n, n, -1).permute(2, 0, 1)

    def forward(self, tokens: Tensor, prompts: Tensor | None = None) -> Tensor:
        c = self.dim
        if prompts is not None and prompts.shape[1] * 4 != tokens.shape[1]:
            raise AdapterError(
                f"expected {tokens.shape[1] // 4} prompt tokens per window, "
                f"got {prompts.shape[1]}"
            )
        wq = self.qkv.weight[:c].T
        wk = self.qkv.weight[c : 2 * c].T
        wv = self.qkv.weight[2 * c :].T
        out = windowed_attention(
            tokens,
            wq,
            wk,
            wv,
            self.relative_bias(),
            self.heads,
            q_bias=self.qkv.bias[:c],
            k_bias=self.qkv.bias[c : 2 * c],
            v_bias=self.qkv.bias[2 * c :],
            prompts=prompts,
            prompt_bias=self.prompt_key_bias if prompts is not None else None,
        )
        return self.proj(out)


class Mlp(nn.Module):
    def __init__(self, dim: int, hidden: int):
        super().__init__()
        self.fc1 = nn.Linear(dim, hidden)
        self.act = nn.GELU()
        self.fc2 = nn.Linear(hidden, dim)

    def forward(self, x: Tensor) -> Tensor:
        return self.fc2(self.act(self.fc1(x)))


class SwinLayer(nn.Module):
    """LayerNorm -> W-MSA (+residual) -> LayerNorm -> MLP (+residual)."""

    def __init__(self, dim: int, heads: int, window: int, shift: int, mlp_ratio: float,
                 prompt_bias: bool = False):
        super().__init__()
        self.window = window
        self.shift = shift
        self.norm1 = nn.LayerNorm(dim)
        self.attn = WindowAttention(dim, window, heads, prompt_bias=prompt_bias)
        self.norm2 = nn.LayerNorm(dim)
        self.mlp = Mlp(dim, int(dim * mlp_ratio))

    def forward(self, x: Tensor, prompt_map: Tensor | None = None) -> Tensor:
        b, h, w, c = x.shape
        tokens = window_partition(self.norm1(x), self.window, self.shift)
        prompts = None
        if prompt_map is not None:
            prompts = partition_prompts(prompt_map, self.window, self.shift)
        attn = self.attn(tokens, prompts)
        x = x + window_reverse(attn, self.window, self.shift, h, w)
        return x + self.mlp(self.norm2(x))


def partition_prompts(p_map: Tensor, window: int, shift: int) -> Tensor:
    """Window a prompt map so window i holds the prompts for token window i.

    The prompt map has half the spatial resolution of the feature map per
    axis, so windowing it with half the window (and half the shift) yields
    N/4 prompts per window, aligned with the token windows.

    Args:
        p_map: (B, Hf/2, Wf/2, C) prompt features.
        window / shift: the *token* window size and shift.
    """
    if window % 2:
        raise ConfigError(f"prompting requires an even window size, got {window}")
    if shift % 2:
        raise ConfigError(f"prompting requires an even shift, got {shift}")
    return window_partition(p_map, window // 2, shift // 2)


class SwinBlock(nn.Module):
    """Stack of Swin layers with alternating shift 0 and window/2.

    One optional prompt map is shared by every layer of the block and
    re-partitioned per layer to follow that layer's shift. With
    ``prompt_map=None`` the block is an ordinary (unprompted) one.
    """

    def __init__(self, dim: int, depth: int, heads: int, window: int, mlp_ratio: float,
                 prompt_bias: bool = False):
        super().__init__()
        self.dim = dim
        self.layers = nn.ModuleList(
            SwinLayer(
                dim,
                heads,
                window,
                shift=0 if i % 2 == 0 else window // 2,
                mlp_ratio=mlp_ratio,
                prompt_bias=prompt_bias,
            )
            for i in range(depth)
        )

    def forward(self, x: Tensor, prompt_map: Tensor | None = None) -> Tensor:
        # x: (B, C, H, W) conv layout; attention runs channels-last
        if prompt_map is not None:
            if prompt_map.shape[1] != self.dim:
                raise AdapterError(
                    f"prompt map has {prompt_map.shape[1]} channels, block has {self.dim}"
                )
            if (
                prompt_map.shape[2] * 2 != x.shape[2]
                or prompt_map.shape[3] * 2 != x.shape[3]
            ):
                raise AdapterError(
                    f"prompt map {tuple(prompt_map.shape[2:])} is not half of "
                    f"feature map {tuple(x.shape[2:])}"
                )
            prompt_map = prompt_map.permute(0, 2, 3, 1)
        x = x.permute(0, 2, 3, 1)
        for layer in self.layers:
            x = layer(x, prompt_map)
        return x.permute(0, 3, 1, 2)
