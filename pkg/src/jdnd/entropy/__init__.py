from .gaussian import (
    P_FLOOR,
    QMAX,
    SIGMA_MIN,
    FactorizedGaussian,
    GaussianParams,
    gaussian_bits,
    gaussian_prob,
    quantize,
)
from .bitstream import Bitstream, EncodeStats, decode_image, decode_latents, encode_image
from .rangecoder import RangeDecoder, RangeEncoder, backend_name

__all__ = [
    "Bitstream",
    "EncodeStats",
    "FactorizedGaussian",
    "GaussianParams",
    "P_FLOOR",
    "QMAX",
    "RangeDecoder",
    "RangeEncoder",
    "SIGMA_MIN",
    "backend_name",
    "decode_image",
    "decode_latents",
    "encode_image",
    "gaussian_bits",
    "gaussian_prob",
    "quantize",
]
