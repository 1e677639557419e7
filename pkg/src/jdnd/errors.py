"""Exception types shared across the package."""


class JdndError(Exception):
    """Base class for all package errors."""


class ConfigError(JdndError):
    """Invalid or inconsistent model configuration."""


class AdapterError(JdndError):
    """Prompt shapes incompatible with the block they adapt."""


class NumericError(JdndError):
    """Non-finite values where finite math is required."""


class BitstreamError(JdndError):
    """Corrupt, truncated, or otherwise undecodable bitstream."""


class HashMismatchError(BitstreamError):
    """Bitstream was produced by a model with a different config hash."""


class NoiseParamError(JdndError):
    """Invalid noise-model parameters."""


class TrainingError(JdndError):
    """Training diverged or was misconfigured."""
