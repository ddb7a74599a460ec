"""Model-backend contracts.

Four roles sit behind one interface: text encoder, image encoder (producing
reusable encodings for the mask decoder), mask generator, and stylizer; a
fifth method embeds image crops for scoring. Implementations must be safely
shareable across threads.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np

from ..images import ImageRGB, Mask

EMBED_DIM = 512
NORM_TOLERANCE = 1e-6

_SOURCES = ("text", "image-crop")


@dataclass(frozen=True)
class Embedding:
    """Unit-norm real vector of dimension 512.

    Constructed values are validated, never renormalized: a backend that
    returns an off-norm vector is a contract violation the caller must see.
    """

    values: tuple[float, ...]
    source: str

    def __post_init__(self):
        if self.source not in _SOURCES:
            raise ValueError(f"source must be one of {_SOURCES}, got {self.source!r}")
        if len(self.values) != EMBED_DIM:
            raise ValueError(f"embedding dimension {len(self.values)} != {EMBED_DIM}")
        norm = math.sqrt(math.fsum(v * v for v in self.values))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"embedding L2 norm {norm} deviates from 1 by more than {NORM_TOLERANCE}")

    @classmethod
    def from_array(cls, arr: np.ndarray, source: str) -> "Embedding":
        return cls(values=tuple(float(v) for v in arr), source=source)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class ImageEncoding:
    """Opaque handle to a backend-side image encoding."""

    encoding_id: str
    width: int
    height: int

    def __post_init__(self):
        if not self.encoding_id:
            raise ValueError("encoding_id must be non-empty")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"encoding dimensions must be positive, got {self.width}x{self.height}")


@dataclass(frozen=True)
class StylizedSet:
    """One stylized full-frame image per distinct style phrase, in order."""

    entries: tuple[tuple[str, ImageRGB], ...]

    def __post_init__(self):
        phrases = [p for p, _ in self.entries]
        if len(set(phrases)) != len(phrases):
            raise ValueError("style phrases must be distinct")
        dims = {(img.width, img.height) for _, img in self.entries}
        if len(dims) > 1:
            raise ValueError(f"stylized frames disagree on dimensions: {sorted(dims)}")

    @property
    def phrases(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.entries)

    def get(self, phrase: str) -> ImageRGB:
        for p, img in self.entries:
            if p == phrase:
                return img
        raise KeyError(phrase)

    def __len__(self) -> int:
        return len(self.entries)


class ModelBackend(abc.ABC):
    """Interface shared by the deterministic mock and the HTTP client."""

    @abc.abstractmethod
    def encode_text(self, text: str) -> Embedding:
        """Unit-norm 512-vector for a text phrase."""

    @abc.abstractmethod
    def encode_image(self, img: ImageRGB) -> ImageEncoding:
        """Reusable encoding handle; identical pixels yield identical ids."""

    @abc.abstractmethod
    def generate_mask(self, enc: ImageEncoding, object_text: str, text_emb: Embedding) -> Mask:
        """Binary object mask with the encoded image's dimensions."""

    @abc.abstractmethod
    def stylize(self, img: ImageRGB, style_phrase: str, style_emb: Embedding) -> ImageRGB:
        """Full-frame stylized image with the input's dimensions."""

    @abc.abstractmethod
    def embed_image(self, img: ImageRGB) -> Embedding:
        """Unit-norm 512-vector for an image crop (scoring path)."""

    @abc.abstractmethod
    def health(self) -> dict:
        """Readiness descriptor; must report embedding_dim == 512."""
