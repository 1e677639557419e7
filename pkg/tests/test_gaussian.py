"""Discretized Gaussian bit estimates against error-function oracles."""

import math

import pytest
import torch

from jdnd.entropy.gaussian import (
    P_FLOOR,
    SIGMA_MIN,
    FactorizedGaussian,
    GaussianParams,
    gaussian_bits,
    gaussian_prob,
)


def phi(x: float) -> float:
    """Standard normal CDF via the error function (independent oracle)."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def test_centered_unit_gaussian_bits():
    # mu = v, sigma = 1: p = Phi(0.5) - Phi(-0.5), bits = -log2(p)
    p_expect = phi(0.5) - phi(-0.5)
    bits_expect = -math.log2(p_expect)
    assert p_expect == pytest.approx(0.38292, abs=1e-5)
    assert bits_expect == pytest.approx(1.3852, abs=2e-4)

    v = torch.tensor([5.0])
    p = gaussian_prob(v, torch.tensor([5.0]), torch.tensor([1.0]))
    bits = gaussian_bits(v, torch.tensor([5.0]), torch.tensor([1.0]))
    assert float(p) == pytest.approx(p_expect, rel=1e-9)
    assert float(bits) == pytest.approx(bits_expect, rel=1e-9)


def test_symmetry_in_mean_offset():
    v = torch.zeros(50)
    t = torch.linspace(0.1, 5, 50)
    sigma = torch.full((50,), 2.0)
    left = gaussian_bits(v, -t, sigma)
    right = gaussian_bits(v, t, sigma)
    assert torch.allclose(left, right, rtol=1e-7, atol=0)


def test_probabilities_sum_to_one():
    # direct summation oracle over v in [-1000, 1000], mu=0, sigma=5
    v = torch.arange(-1000, 1001, dtype=torch.float64)
    p = gaussian_prob(v, 0.0, torch.tensor(5.0, dtype=torch.float64))
    assert abs(float(p.sum()) - 1.0) < 1e-9


def test_probability_floor():
    v = torch.tensor([500.0])
    bits = gaussian_bits(v, torch.tensor([0.0]), torch.tensor([0.05]))
    assert float(bits) == pytest.approx(-math.log2(P_FLOOR))


def test_sigma_clamped():
    gp = GaussianParams(mu=torch.zeros(3), sigma=torch.tensor([0.0, 0.01, 1.0]))
    assert (gp.sigma >= SIGMA_MIN).all()
    assert float(gp.sigma[2]) == 1.0


def test_factorized_specializations():
    prior = FactorizedGaussian(channels=4)
    with torch.no_grad():
        prior.log_scale.copy_(torch.log(torch.tensor([5.0, 1.0, 2.0, 0.5])))

    # channel 1 has sigma 1: same oracle as the conditional model at mu=0
    v = torch.zeros(1, 4, 1, 1)
    bits = prior.bits(v)
    p_expect = phi(0.5) - phi(-0.5)
    assert float(bits[0, 1]) == pytest.approx(-math.log2(p_expect), rel=1e-6)

    # symmetry: bits(v) == bits(-v)
    v = torch.randn(2, 4, 3, 3).round()
    assert torch.allclose(prior.bits(v), prior.bits(-v), rtol=1e-6, atol=0)

    # summation to one for channel 0 (sigma=5)
    v = torch.arange(-1000, 1001, dtype=torch.float64).view(1, 1, -1, 1).expand(1, 4, 2001, 1)
    p = gaussian_prob(v.double(), 0.0, prior.sigma().double().view(1, 4, 1, 1))
    assert abs(float(p[0, 0].sum()) - 1.0) < 1e-9
