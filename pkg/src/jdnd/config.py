"""Model configuration: architecture hyperparameters, presets, hashing.

Every tensor shape in the codec derives from a :class:`ModelConfig`. Configs
are stored as plain JSON (versioned via ``schema_version``) and identified by
a 64-bit hash that is embedded in checkpoints and bitstream headers so that
a decoder can refuse payloads produced under a different architecture.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError

SCHEMA_VERSION = 1

#: group count used by every grouped convolution in the adapters
GROUPS = 16


@dataclass(frozen=True)
class ModelConfig:
    """Architecture description for the codec and its add-on modules.

    ``stage_channels[-1]`` is the latent channel count; each stage halves the
    spatial resolution, so the total downsampling factor is
    ``2 ** len(stage_channels)``.
    """

    name: str = "toy"
    schema_version: int = SCHEMA_VERSION

    # base autoencoders
    stage_channels: tuple[int, ...] = (32, 48, 64, 96)
    stage_depths: tuple[int, ...] = (2, 2, 2, 2)
    stage_heads: tuple[int, ...] = (2, 3, 4, 6)
    window: int = 4
    mlp_ratio: float = 2.0
    hyper_channels: int = 64

    # latent refinement
    lrm: str = "normal"  # normal | light
    sft_hidden: int = 16

    # prompt generator / prompt-adapted decoder blocks
    prompt_targets: str = "last2"  # last2 | all
    prompt_convs: str = "grouped16"  # grouped16 | full
    prompt_bias: bool = False
    gp_channels: tuple[int, int, int] = (96, 96, 96)
    gp_depths: tuple[int, int, int] = (1, 0, 0)

    # rate point this model was (or will be) trained for
    lambda_index: int = 2

    def __post_init__(self):
        n = len(self.stage_channels)
        if n < 2:
            raise ConfigError("need at least two stages")
        if len(self.stage_depths) != n or len(self.stage_heads) != n:
            raise ConfigError("stage_depths/stage_heads must match stage_channels")
        for c, h in zip(self.stage_channels, self.stage_heads):
            if c % h != 0:
                raise ConfigError(f"channels {c} not divisible by heads {h}")
        if self.window < 2 or self.window % 2 != 0:
            raise ConfigError("window size must be even and >= 2")
        if self.lrm not in ("normal", "light"):
            raise ConfigError(f"unknown lrm variant {self.lrm!r}")
        if self.prompt_targets not in ("last2", "all"):
            raise ConfigError(f"unknown prompt_targets {self.prompt_targets!r}")
        if self.prompt_convs not in ("grouped16", "full"):
            raise ConfigError(f"unknown prompt_convs {self.prompt_convs!r}")
        if self.lrm == "light" and self.latent_channels % GROUPS != 0:
            raise ConfigError(
                f"light refinement needs latent channels divisible by {GROUPS}, "
                f"got {self.latent_channels}"
            )
        if not 0 <= self.lambda_index < len(LAMBDA_VALUES):
            raise ConfigError(f"lambda_index out of range: {self.lambda_index}")

    # -- derived quantities ------------------------------------------------

    @property
    def num_stages(self) -> int:
        return len(self.stage_channels)

    @property
    def latent_channels(self) -> int:
        return self.stage_channels[-1]

    @property
    def downsample(self) -> int:
        return 2 ** self.num_stages

    @property
    def pad_multiple(self) -> int:
        """Input sizes are padded up to a multiple of this.

        Guarantees window divisibility at every stage (including the extra
        hyper stages and half-resolution prompt maps).
        """
        return max(self.downsample * self.window, self.downsample * 4)

    @property
    def prompt_stb_indices(self) -> tuple[int, ...]:
        """Decoder-block indices (0 = deepest) that accept prompts."""
        if self.prompt_targets == "all":
            return tuple(range(self.num_stages))
        return (self.num_stages - 2, self.num_stages - 1)

    def latent_shape(self, height: int, width: int) -> tuple[int, int, int]:
        """(channels, h, w) of the latent for a padded input of given size."""
        hp, wp = padded_size(height, width, self.pad_multiple)
        return (self.latent_channels, hp // self.downsample, wp // self.downsample)

    def hyper_shape(self, height: int, width: int) -> tuple[int, int, int]:
        c, h, w = self.latent_shape(height, width)
        return (self.hyper_channels, h // 4, w // 4)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash64(self) -> int:
        digest = hashlib.sha256(self.canonical_json().encode()).digest()
        return int.from_bytes(digest[:8], "little")

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema version {version}")
        for key in ("stage_channels", "stage_depths", "stage_heads", "gp_channels", "gp_depths"):
            if key in d:
                d[key] = tuple(d[key])
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "ModelConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed config file {path}: {e}") from e
        return cls.from_dict(raw)


#: rate-point multipliers for the distortion term (255-scale MSE convention)
LAMBDA_VALUES = (0.0018, 0.0035, 0.0067, 0.013)


def padded_size(height: int, width: int, multiple: int) -> tuple[int, int]:
    """Smallest (H, W) >= input that are multiples of ``multiple``."""
    pad = lambda v: ((v + multiple - 1) // multiple) * multiple
    return pad(height), pad(width)


def load_preset(name: str) -> ModelConfig:
    """Load one of the configs shipped with the package ("toy", "paper")."""
    ref = resources.files("jdnd") / "configs" / f"{name}.json"
    if not ref.is_file():
        raise ConfigError(f"no preset config named {name!r}")
    return ModelConfig.from_dict(json.loads(ref.read_text()))


def resolve_config(spec: str | Path) -> ModelConfig:
    """Accept either a preset name or a path to a JSON config file."""
    p = Path(spec)
    if p.suffix == ".json" or p.exists():
        return ModelConfig.load(p)
    return load_preset(str(spec))
