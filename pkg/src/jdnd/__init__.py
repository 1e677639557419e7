"""jdnd: a learned image codec whose single bitstream decodes in two modes,
standard reconstruction or joint decoding-and-denoising via frozen-base
add-on modules."""

from .config import LAMBDA_VALUES, ModelConfig, load_preset
from .errors import (
    AdapterError,
    BitstreamError,
    ConfigError,
    HashMismatchError,
    JdndError,
    NoiseParamError,
    NumericError,
    TrainingError,
)

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "BitstreamError",
    "ConfigError",
    "HashMismatchError",
    "JdndError",
    "LAMBDA_VALUES",
    "ModelConfig",
    "NoiseParamError",
    "NumericError",
    "TrainingError",
    "load_preset",
    "__version__",
]
