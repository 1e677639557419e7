"""Analytic parameter and MAC counting from the model configuration.

Counts are closed-form and mirror the torch modules layer by layer (the test
suite cross-checks parameter totals against instantiated modules). MAC
conventions: one MAC per multiply-accumulate in convolutions, linears, and
attention matmuls (QKV/output projections, logit and weighted-sum products,
plus the prompt K/V rows when a block is prompted); elementwise work
(activations, norms, softmax, biases) is not counted. kMACs/pixel divides by
the input pixel count, not by latent positions.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .config import GROUPS, ModelConfig, padded_size
from .errors import ConfigError

VARIANTS = (
    "base",
    "lrm",
    "lrm_light",
    "prompt",
    "prompt_heavy",
    "full",
    "light",
    "full_heavy",
)

#: add-on selections per variant: (refiner variant or None, prompt flavor or None)
_VARIANT_PARTS = {
    "base": (None, None),
    "lrm": ("normal", None),
    "lrm_light": ("light", None),
    "prompt": (None, "grouped16/last2"),
    "prompt_heavy": (None, "full/all"),
    "full": ("normal", "grouped16/last2"),
    "light": ("light", "grouped16/last2"),
    "full_heavy": ("normal", "full/all"),
}


@dataclass
class Count:
    params: int = 0
    macs: int = 0

    def __add__(self, other: "Count") -> "Count":
        return Count(self.params + other.params, self.macs + other.macs)


def conv2d(k: int, cin: int, cout: int, hout: int, wout: int, groups: int = 1,
           bias: bool = True) -> Count:
    """Standard convolution: k^2 * Cin * Cout * Hout * Wout / groups MACs."""
    weights = k * k * cin * cout // groups
    return Count(weights + (cout if bias else 0), weights * hout * wout)


def deconv2d(k: int, cin: int, cout: int, hin: int, win: int, groups: int = 1,
             bias: bool = True) -> Count:
    """Transposed convolution: the kernel is applied once per input position."""
    weights = k * k * cin * cout // groups
    return Count(weights + (cout if bias else 0), weights * hin * win)


def linear(fin: int, fout: int, tokens: int, bias: bool = True) -> Count:
    return Count(fin * fout + (fout if bias else 0), fin * fout * tokens)


def layer_norm(dim: int) -> Count:
    return Count(2 * dim, 0)


def attention(dim: int, heads: int, window: int, h: int, w: int,
              prompted: bool = False, prompt_bias: bool = False) -> Count:
    """One W-MSA layer over an (h, w) map: projections + logits + weighted sum."""
    n = window * window
    n_p = n // 4 if prompted else 0
    tokens = h * w
    windows = tokens // n
    c = linear(dim, 3 * dim, tokens)              # QKV on input tokens
    if prompted:
        c += linear(dim, 2 * dim, windows * n_p)  # K/V rows for prompts
    c += Count(0, windows * n * (n + n_p) * dim)  # logits
    c += Count(0, windows * n * (n + n_p) * dim)  # weighted sum
    c += linear(dim, dim, tokens)                 # output projection
    c += Count((2 * window - 1) ** 2 * heads, 0)  # relative-position table
    if prompt_bias:
        c += Count(heads * (n // 4), 0)
    return c


def swin_block(dim: int, depth: int, heads: int, window: int, mlp_ratio: float,
               h: int, w: int, prompted: bool = False, prompt_bias: bool = False) -> Count:
    hidden = int(dim * mlp_ratio)
    total = Count()
    for _ in range(depth):
        total += layer_norm(dim)
        total += attention(dim, heads, window, h, w, prompted, prompt_bias)
        total += layer_norm(dim)
        total += linear(dim, hidden, h * w) + linear(hidden, dim, h * w)
    return total


# -- module-level counts ----------------------------------------------------


def analysis_counts(cfg: ModelConfig, hp: int, wp: int) -> Count:
    total = Count()
    prev = 3
    h, w = hp, wp
    for c, depth, heads in zip(cfg.stage_channels, cfg.stage_depths, cfg.stage_heads):
        h, w = h // 2, w // 2
        total += conv2d(3, prev, c, h, w)
        total += swin_block(c, depth, heads, cfg.window, cfg.mlp_ratio, h, w)
        prev = c
    return total


def synthesis_counts(cfg: ModelConfig, hp: int, wp: int, prompted: tuple[int, ...] = (),
                     prompt_bias: bool = False) -> Count:
    dims = list(reversed(cfg.stage_channels))
    depths = list(reversed(cfg.stage_depths))
    heads = list(reversed(cfg.stage_heads))
    n = cfg.num_stages
    total = Count()
    h, w = hp // cfg.downsample, wp // cfg.downsample
    for i in range(n):
        total += swin_block(
            dims[i], depths[i], heads[i], cfg.window, cfg.mlp_ratio, h, w,
            prompted=i in prompted,
            prompt_bias=prompt_bias and i in cfg.prompt_stb_indices,
        )
        cout = dims[i + 1] if i + 1 < n else 3
        total += deconv2d(3, dims[i], cout, h, w)
        h, w = h * 2, w * 2
    return total


def hyper_analysis_counts(cfg: ModelConfig, hp: int, wp: int) -> Count:
    m, mh = cfg.latent_channels, cfg.hyper_channels
    h, w = hp // cfg.downsample, wp // cfg.downsample
    total = conv2d(3, m, mh, h, w)
    total += conv2d(3, mh, mh, h // 2, w // 2)
    total += conv2d(3, mh, mh, h // 4, w // 4)
    return total


def hyper_synthesis_counts(cfg: ModelConfig, hp: int, wp: int) -> Count:
    m, mh = cfg.latent_channels, cfg.hyper_channels
    h, w = hp // cfg.downsample, wp // cfg.downsample
    total = deconv2d(3, mh, mh, h // 4, w // 4)
    total += deconv2d(3, mh, mh, h // 2, w // 2)
    total += conv2d(3, mh, 2 * m, h, w)
    return total


def refiner_counts(cfg: ModelConfig, hp: int, wp: int, variant: str) -> Count:
    m, hidden = cfg.latent_channels, cfg.sft_hidden
    groups = GROUPS if variant == "light" else 1
    h, w = hp // cfg.downsample, wp // cfg.downsample
    sft = Count()
    for _ in range(2):  # alpha and beta
        sft += conv2d(1, m, hidden, h, w)
        sft += conv2d(3, hidden, m, h, w, groups=groups)
    total = sft + sft  # two SFT layers
    total += conv2d(3, m, m, h, w, groups=groups)
    total += conv2d(3, m, m, h, w, groups=groups)
    return total


def prompter_counts(cfg: ModelConfig, hp: int, wp: int) -> Count:
    """Counts for the prompt generator exactly as configured in ``cfg``."""
    if cfg.num_stages != 4:
        raise ConfigError("prompt generation is implemented for 4-stage codecs")
    groups = GROUPS if cfg.prompt_convs == "grouped16" else 1
    g0, g1, g2 = cfg.gp_channels
    d0, d1, d2 = cfg.gp_depths
    m = cfg.latent_channels
    dims = list(reversed(cfg.stage_channels))
    targets = cfg.prompt_stb_indices
    h, w = hp // cfg.downsample, wp // cfg.downsample

    total = conv2d(3, m, g0, h, w, groups=groups)
    for _ in range(d0 - 1):
        total += conv2d(3, g0, g0, h, w, groups=groups)
    if 0 in targets:
        total += conv2d(3, g0, g0, h // 2, w // 2, groups=groups)  # down
        total += conv2d(3, g0, dims[0], h // 2, w // 2, groups=groups)
    if 1 in targets:
        total += conv2d(3, g0, dims[1], h, w, groups=groups)
    total += deconv2d(2, g0, g1, h, w, groups=groups)              # up x2
    for _ in range(d1):
        total += conv2d(3, g1, g1, 2 * h, 2 * w, groups=groups)
    total += conv2d(3, g1, dims[2], 2 * h, 2 * w, groups=groups)
    total += deconv2d(2, g1, g2, 2 * h, 2 * w, groups=groups)      # up x4
    for _ in range(d2):
        total += conv2d(3, g2, g2, 4 * h, 4 * w, groups=groups)
    total += conv2d(3, g2, dims[3], 4 * h, 4 * w, groups=groups)
    return total


def prompt_attention_overhead(cfg: ModelConfig, hp: int, wp: int,
                              targets: tuple[int, ...]) -> Count:
    """Extra decoder attention MACs when the target blocks consume prompts."""
    plain = synthesis_counts(cfg, hp, wp)
    prompted = synthesis_counts(cfg, hp, wp, prompted=targets)
    return Count(prompted.params - plain.params, prompted.macs - plain.macs)


# -- report -----------------------------------------------------------------


@dataclass
class ComplexityReport:
    variant: str
    height: int
    width: int
    modules: dict[str, Count] = field(default_factory=dict)
    baseline_params: int = 0
    baseline_macs: int = 0

    @property
    def total_params(self) -> int:
        return sum(c.params for c in self.modules.values())

    @property
    def total_macs(self) -> int:
        return sum(c.macs for c in self.modules.values())

    @property
    def kmacs_per_pixel(self) -> float:
        return self.total_macs / (self.height * self.width) / 1000.0

    @property
    def params_m(self) -> float:
        return self.total_params / 1e6

    @property
    def overhead_params_pct(self) -> float:
        return (self.total_params - self.baseline_params) / self.baseline_params * 100.0

    @property
    def overhead_macs_pct(self) -> float:
        return (self.total_macs - self.baseline_macs) / self.baseline_macs * 100.0

    def text(self) -> str:
        lines = [
            f"variant: {self.variant}",
            f"input: {self.height}x{self.width}",
        ]
        for name, c in self.modules.items():
            lines.append(f"{name}.params: {c.params}")
            lines.append(f"{name}.macs: {c.macs}")
        lines += [
            f"total.params: {self.total_params}",
            f"total.macs: {self.total_macs}",
            f"params_m: {self.params_m:.4f}",
            f"kmacs_per_pixel: {self.kmacs_per_pixel:.4f}",
            f"overhead.params_pct: {self.overhead_params_pct:+.2f}",
            f"overhead.macs_pct: {self.overhead_macs_pct:+.2f}",
        ]
        return "\n".join(lines)

    def to_json(self) -> str:
        d = {
            "variant": self.variant,
            "height": self.height,
            "width": self.width,
            "modules": {k: dataclasses.asdict(v) for k, v in self.modules.items()},
            "total_params": self.total_params,
            "total_macs": self.total_macs,
            "params_m": self.params_m,
            "kmacs_per_pixel": self.kmacs_per_pixel,
            "overhead_params_pct": self.overhead_params_pct,
            "overhead_macs_pct": self.overhead_macs_pct,
        }
        return json.dumps(d, indent=2)


def variant_config(cfg: ModelConfig, variant: str) -> ModelConfig:
    """The concrete config a given ablation variant runs under."""
    if variant not in _VARIANT_PARTS:
        raise ConfigError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    refiner, prompt = _VARIANT_PARTS[variant]
    changes = {}
    if refiner is not None:
        changes["lrm"] = refiner
    if prompt is not None:
        convs, targets = prompt.split("/")
        changes["prompt_convs"] = convs
        changes["prompt_targets"] = targets
    return dataclasses.replace(cfg, **changes) if changes else cfg


def count_complexity(cfg: ModelConfig, height: int, width: int,
                     variant: str = "full") -> ComplexityReport:
    """Decoder-side counts (denoising decode path) for an input size.

    The baseline for overhead percentages is the ``base`` variant: the
    standard-reconstruction decode path (hyper synthesis + main synthesis +
    hyper prior scales). Neural layers only; entropy decoding is not counted.
    """
    if variant not in _VARIANT_PARTS:
        raise ConfigError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    refiner, prompt = _VARIANT_PARTS[variant]
    vcfg = variant_config(cfg, variant)
    hp, wp = padded_size(height, width, vcfg.pad_multiple)

    modules: dict[str, Count] = {}
    modules["h_s"] = hyper_synthesis_counts(vcfg, hp, wp)
    modules["z_prior"] = Count(vcfg.hyper_channels, 0)
    modules["g_s"] = synthesis_counts(vcfg, hp, wp, prompt_bias=vcfg.prompt_bias and prompt is not None)
    if refiner is not None:
        modules["refiner"] = refiner_counts(vcfg, hp, wp, refiner)
    if prompt is not None:
        modules["g_p"] = prompter_counts(vcfg, hp, wp)
        modules["prompt_attention"] = prompt_attention_overhead(
            vcfg, hp, wp, vcfg.prompt_stb_indices
        )

    base_params = (
        modules["h_s"].params + modules["z_prior"].params
        + synthesis_counts(vcfg, hp, wp).params
    )
    base_macs = modules["h_s"].macs + synthesis_counts(vcfg, hp, wp).macs
    report = ComplexityReport(
        variant=variant,
        height=height,
        width=width,
        modules=modules,
        baseline_params=base_params,
        baseline_macs=base_macs,
    )
    return report
