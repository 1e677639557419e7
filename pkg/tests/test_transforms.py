"""Shape contracts of the four transforms and the prompt generator."""

import dataclasses

import pytest
import torch

from jdnd.errors import AdapterError, ConfigError
from jdnd.models.codec import Codec
from jdnd.models.prompts import PromptGenerator
from jdnd.models.transforms import crop_image, pad_image


def test_toy_analyze_shape(toy_cfg):
    model = Codec(toy_cfg)
    x = torch.rand(1, 3, 64, 64)
    y = model.analyze(x)
    assert y.shape == (1, 96, 4, 4)


def test_synthesize_round_trip_shape(toy_cfg):
    model = Codec(toy_cfg)
    x = torch.rand(1, 3, 64, 64)
    with torch.no_grad():
        x_hat = model.synthesize(model.analyze(x))
    assert x_hat.shape == x.shape


def test_hyper_shapes(toy_cfg):
    model = Codec(toy_cfg)
    y = torch.randn(1, 96, 4, 4)
    z = model.hyper_analyze(y)
    assert z.shape == (1, 64, 1, 1)
    gp = model.hyper_synthesize(z)
    assert gp.mu.shape == y.shape
    assert gp.sigma.shape == y.shape


def test_sigma_strictly_positive(toy_cfg):
    model = Codec(toy_cfg)
    z = torch.randn(2, 64, 2, 2) * 10
    gp = model.hyper_synthesize(z)
    assert (gp.sigma > 0).all()
    assert (gp.sigma >= gp.sigma_min).all()


def test_prompt_absent_is_bit_exact(toy_cfg):
    model = Codec(toy_cfg)
    y = torch.randn(1, 96, 4, 4)
    with torch.no_grad():
        a = model.synthesize(y)
        b = model.synthesize(y, prompts=None)
        c = model.synthesize(y, prompts={})
    assert torch.equal(a, b)
    assert torch.equal(a, c)


def test_prompt_maps_shapes_toy(toy_cfg):
    model = Codec(toy_cfg)
    y = torch.randn(1, 96, 4, 4)
    prompts = model.generate_prompts(y)
    assert set(prompts) == {2, 3}
    assert prompts[2].shape == (1, 48, 8, 8)
    assert prompts[3].shape == (1, 32, 16, 16)


def test_prompts_are_instance_specific(toy_cfg):
    gen = PromptGenerator(toy_cfg)
    a = gen(torch.randn(1, 96, 4, 4))
    b = gen(torch.randn(1, 96, 4, 4))
    for k in a:
        assert not torch.equal(a[k], b[k])


def test_prompt_heavy_serves_all_blocks(toy_cfg):
    cfg = dataclasses.replace(toy_cfg, prompt_targets="all", prompt_convs="full")
    gen = PromptGenerator(cfg)
    prompts = gen(torch.randn(1, 96, 4, 4))
    assert set(prompts) == {0, 1, 2, 3}
    assert prompts[0].shape == (1, 96, 2, 2)
    assert prompts[1].shape == (1, 64, 4, 4)


def test_grouped_channel_validation(toy_cfg):
    bad = dataclasses.replace(toy_cfg, gp_channels=(40, 96, 96))
    with pytest.raises(ConfigError):
        PromptGenerator(bad)


def test_synthesize_with_prompts_shape(toy_cfg):
    model = Codec(toy_cfg)
    y = torch.randn(1, 96, 4, 4)
    with torch.no_grad():
        x = model.synthesize(y, model.generate_prompts(y))
    assert x.shape == (1, 3, 64, 64)


def test_prompt_wrong_block_index(toy_cfg):
    model = Codec(toy_cfg)
    y = torch.randn(1, 96, 4, 4)
    with pytest.raises(AdapterError):
        model.synthesize(y, prompts={7: torch.randn(1, 48, 8, 8)})


def test_prompt_shape_mismatch_raises(toy_cfg):
    model = Codec(toy_cfg)
    y = torch.randn(1, 96, 4, 4)
    with pytest.raises(AdapterError):
        model.synthesize(y, prompts={2: torch.randn(1, 48, 4, 4)})


def test_pad_and_crop():
    x = torch.rand(1, 3, 50, 70)
    xp = pad_image(x, 64)
    assert xp.shape == (1, 3, 64, 128)
    assert torch.equal(crop_image(xp, 50, 70), x)
    assert torch.equal(pad_image(xp, 64), xp)
