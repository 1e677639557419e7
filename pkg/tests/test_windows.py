"""Window partition/reverse against a brute-force index-map oracle."""

import pytest
import torch

from jdnd.errors import ConfigError
from jdnd.models.swin import window_partition, window_reverse


def reference_index_map(h, w, window, shift):
    """(row, col) -> (window index, slot) by direct coordinate arithmetic."""
    mapping = {}
    for r in range(h):
        for c in range(w):
            rs = (r - shift) % h
            cs = (c - shift) % w
            win = (rs // window) * (w // window) + (cs // window)
            slot = (rs % window) * window + (cs % window)
            mapping[(r, c)] = (win, slot)
    return mapping


def coord_tensor(h, w):
    """Feature map whose channel pair encodes each position's (row, col)."""
    r = torch.arange(h).view(h, 1).expand(h, w).float()
    c = torch.arange(w).view(1, w).expand(h, w).float()
    return torch.stack([r, c], dim=-1).unsqueeze(0)  # (1, h, w, 2)


def test_single_window_case():
    x = coord_tensor(4, 4)
    t = window_partition(x, 4, 0)
    assert t.shape == (1, 16, 2)


@pytest.mark.parametrize("shift", [0, 2])
def test_index_map_oracle_8x8(shift):
    h = w = 8
    window = 4
    x = coord_tensor(h, w)
    tokens = window_partition(x, window, shift)
    assert tokens.shape == (4, 16, 2)
    expected = reference_index_map(h, w, window, shift)
    for r in range(h):
        for c in range(w):
            win, slot = expected[(r, c)]
            assert tokens[win, slot, 0] == r
            assert tokens[win, slot, 1] == c


@pytest.mark.parametrize("h,w,window,shift", [
    (8, 8, 4, 0),
    (8, 8, 4, 2),
    (8, 12, 4, 1),
    (16, 8, 8, 4),
    (6, 6, 2, 0),
])
def test_round_trip_identity(h, w, window, shift):
    x = torch.randn(2, h, w, 5)
    tokens = window_partition(x, window, shift)
    back = window_reverse(tokens, window, shift, h, w)
    assert torch.equal(back, x)


def test_reverse_of_oracle_case():
    x = torch.randn(1, 8, 8, 3)
    tokens = window_partition(x, 4, 0)
    assert torch.equal(window_reverse(tokens, 4, 0, 8, 8), x)


def test_zero_in_zero_out():
    x = torch.zeros(1, 8, 8, 3)
    tokens = window_partition(x, 4, 0)
    assert torch.equal(tokens, torch.zeros(4, 16, 3))
    assert torch.equal(window_reverse(tokens, 4, 0, 8, 8), x)


def test_non_divisible_dims_error():
    x = torch.randn(1, 6, 8, 3)
    with pytest.raises(ConfigError):
        window_partition(x, 4, 0)
    with pytest.raises(ConfigError):
        window_partition(torch.randn(1, 8, 8, 3), 4, 5)


def test_reverse_shape_mismatch_error():
    tokens = torch.randn(4, 15, 3)
    with pytest.raises(ConfigError):
        window_reverse(tokens, 4, 0, 8, 8)
