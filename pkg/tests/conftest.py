import pytest
import torch

from jdnd.config import ModelConfig, load_preset


@pytest.fixture(scope="session")
def toy_cfg() -> ModelConfig:
    return load_preset("toy")


@pytest.fixture(scope="session")
def paper_cfg() -> ModelConfig:
    return load_preset("paper")


@pytest.fixture(autouse=True)
def _seed_torch():
    torch.manual_seed(1234)
