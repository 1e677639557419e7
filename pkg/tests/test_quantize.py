"""Quantization conventions."""

import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as hst

from jdnd.entropy.gaussian import quantize


def test_round_half_away_from_zero():
    v = torch.tensor([0.4, -1.5, 2.5, 0.5, -0.5, 0.0, -2.49])
    expect = torch.tensor([0.0, -2.0, 3.0, 1.0, -1.0, 0.0, -2.0])
    assert torch.equal(quantize(v, "infer"), expect)


def test_infer_idempotent():
    v = torch.randn(1000) * 10
    once = quantize(v, "infer")
    assert torch.equal(quantize(once, "infer"), once)


def test_train_mode_within_half():
    v = torch.randn(1000) * 5
    gen = torch.Generator().manual_seed(0)
    out = quantize(v, "train", gen)
    assert ((out - v).abs() <= 0.5).all()


def test_train_mode_seeded_determinism():
    v = torch.randn(100)
    a = quantize(v, "train", torch.Generator().manual_seed(7))
    b = quantize(v, "train", torch.Generator().manual_seed(7))
    assert torch.equal(a, b)


def test_unknown_mode():
    with pytest.raises(ValueError):
        quantize(torch.zeros(3), "both")


@settings(max_examples=200, deadline=None)
@given(hst.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_rounding_property(x):
    out = float(quantize(torch.tensor([x], dtype=torch.float64), "infer")[0])
    assert out == int(out)
    assert abs(out - x) <= 0.5
    if abs(x - round(x)) == 0.5:  # ties go away from zero
        assert abs(out) >= abs(x)
