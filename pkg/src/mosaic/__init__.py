"""Multi-object text-driven stylization pipeline.

Parses prompts into object/style pairs, drives pluggable model backends
(text encoder, image encoder, mask generator, stylizer) through an
encoding cache, composites per-object stylizations, and scores results
with a patch-wise CLIP metric.
"""

from .backends import EMBED_DIM, Embedding, HttpBackend, ImageEncoding, MockBackend, ModelBackend, StylizedSet
from .compositor import BBox, CompositePolicy, OverlapPolicy, UncoveredPolicy
from .enc_cache import CacheStats, EncodingCache
from .evaluator import CropRect, ScoreReport
from .images import ImageRGB, Mask
from .pipeline import PipelineConfig, PipelineResult, StageTiming, run_bench, run_pipeline
from .promptseg import (
    ObjectStylePair,
    Prompt,
    SegmentedPrompt,
    TokenDistribution,
    TokenSeq,
    deserialize_pairs,
    parse_prompt,
    serialize_pairs,
    token_cross_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "CacheStats",
    "CompositePolicy",
    "CropRect",
    "EMBED_DIM",
    "Embedding",
    "EncodingCache",
    "HttpBackend",
    "ImageEncoding",
    "ImageRGB",
    "Mask",
    "MockBackend",
    "ModelBackend",
    "ObjectStylePair",
    "OverlapPolicy",
    "PipelineConfig",
    "PipelineResult",
    "Prompt",
    "ScoreReport",
    "SegmentedPrompt",
    "StageTiming",
    "StylizedSet",
    "TokenDistribution",
    "TokenSeq",
    "UncoveredPolicy",
    "deserialize_pairs",
    "parse_prompt",
    "run_bench",
    "run_pipeline",
    "serialize_pairs",
    "token_cross_entropy",
]
