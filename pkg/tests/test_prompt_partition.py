"""Prompt windowing alignment against an exhaustive coordinate oracle."""

import pytest
import torch

from jdnd.errors import ConfigError
from jdnd.models.swin import partition_prompts, window_partition


def test_quarter_token_count():
    # F 8x8 with window 4 (N=16) -> prompt map 4x4 with window 2 -> 4 per window
    p_map = torch.randn(1, 4, 4, 3)
    tokens = partition_prompts(p_map, window=4, shift=0)
    assert tokens.shape == (4, 4, 3)


def test_single_window_collects_all_prompts():
    p_map = torch.randn(1, 2, 2, 3)
    tokens = partition_prompts(p_map, window=4, shift=0)
    assert tokens.shape == (1, 4, 3)


@pytest.mark.parametrize("shift", [0, 2])
def test_window_correspondence_exhaustive(shift):
    """Prompt (pr, pc) lands in the same window index as its 2x2 token patch.

    Brute force over every position of an 8x8 map: encode coordinates into
    the tensors, partition both, and check that for every prompt token the
    tokens (2pr+dr, 2pc+dc) sit in the window with the same index.
    """
    h = w = 8
    window = 4
    f = torch.arange(h * w, dtype=torch.float32).view(1, h, w, 1)
    p = torch.arange((h // 2) * (w // 2), dtype=torch.float32).view(1, h // 2, w // 2, 1)

    f_tokens = window_partition(f, window, shift)
    p_tokens = partition_prompts(p, window, shift)
    assert p_tokens.shape[0] == f_tokens.shape[0]
    assert p_tokens.shape[1] * 4 == f_tokens.shape[1]

    token_window = {}
    for win in range(f_tokens.shape[0]):
        for v in f_tokens[win, :, 0]:
            token_window[(int(v) // w, int(v) % w)] = win

    for win in range(p_tokens.shape[0]):
        for v in p_tokens[win, :, 0]:
            pr, pc = int(v) // (w // 2), int(v) % (w // 2)
            for dr in (0, 1):
                for dc in (0, 1):
                    assert token_window[(2 * pr + dr, 2 * pc + dc)] == win


def test_round_trip_of_prompt_partition_indexing():
    p_map = torch.randn(1, 8, 8, 2)
    tokens = partition_prompts(p_map, window=4, shift=2)
    from jdnd.models.swin import window_reverse

    assert torch.equal(window_reverse(tokens, 2, 1, 8, 8), p_map)


def test_odd_window_rejected():
    with pytest.raises(ConfigError):
        partition_prompts(torch.randn(1, 4, 4, 3), window=3, shift=0)


def test_odd_shift_rejected():
    with pytest.raises(ConfigError):
        partition_prompts(torch.randn(1, 4, 4, 3), window=4, shift=1)
