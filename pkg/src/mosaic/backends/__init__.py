"""Model backends: contracts, deterministic mock, and HTTP client."""

from .base import EMBED_DIM, Embedding, ImageEncoding, ModelBackend, StylizedSet
from .http import HttpBackend
from .mock import MockBackend, style_deltas

__all__ = [
    "EMBED_DIM",
    "Embedding",
    "HttpBackend",
    "ImageEncoding",
    "MockBackend",
    "ModelBackend",
    "StylizedSet",
    "style_deltas",
]
