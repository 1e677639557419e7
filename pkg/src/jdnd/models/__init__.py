from .codec import Codec, load_checkpoint, save_checkpoint
from .lrm import SFT, LatentRefiner
from .prompts import PromptGenerator
from .swin import (
    SwinBlock,
    SwinLayer,
    WindowAttention,
    partition_prompts,
    window_partition,
    window_reverse,
    windowed_attention,
)
from .transforms import (
    AnalysisTransform,
    HyperAnalysis,
    HyperSynthesis,
    SynthesisTransform,
    crop_image,
    pad_image,
)

__all__ = [
    "AnalysisTransform",
    "Codec",
    "HyperAnalysis",
    "HyperSynthesis",
    "LatentRefiner",
    "PromptGenerator",
    "SFT",
    "SwinBlock",
    "SwinLayer",
    "SynthesisTransform",
    "WindowAttention",
    "crop_image",
    "load_checkpoint",
    "pad_image",
    "partition_prompts",
    "save_checkpoint",
    "window_partition",
    "window_reverse",
    "windowed_attention",
]
