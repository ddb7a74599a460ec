"""Shared fixtures and brute-force oracles.

The oracle functions here deliberately use plain per-pixel loops rather
than any helper from the package, so they stay independent of the code
paths they check.
"""

from __future__ import annotations

import numpy as np
import pytest

from mosaic.backends.base import EMBED_DIM, Embedding, ImageEncoding, ModelBackend
from mosaic.compositor import OverlapPolicy
from mosaic.images import ImageRGB, Mask


# --- deterministic inputs ---

def gradient_image(width: int, height: int, lo: int = 64, hi: int = 191, seed: int = 11) -> ImageRGB:
    """Random image with all channel values inside [lo, hi]."""
    rng = np.random.default_rng(seed)
    arr = rng.integers(lo, hi + 1, size=(height, width, 3), dtype=np.uint8)
    return ImageRGB.from_array(arr)


def random_mask(rng: np.random.Generator, width: int, height: int, density: float = 0.3) -> Mask:
    return Mask.from_array(rng.random((height, width)) < density)


def basis_embedding(index: int, source: str = "text") -> Embedding:
    """Exact unit vector along one axis; dot products are exact 0.0/1.0."""
    values = [0.0] * EMBED_DIM
    values[index] = 1.0
    return Embedding(values=tuple(values), source=source)


class InjectedBackend(ModelBackend):
    """Backend with injectable text/crop embeddings for metric algebra tests."""

    def __init__(self, text_fn, crop_fn):
        self.text_fn = text_fn
        self.crop_fn = crop_fn

    def encode_text(self, text: str) -> Embedding:
        return self.text_fn(text)

    def embed_image(self, img: ImageRGB) -> Embedding:
        return self.crop_fn(img)

    def encode_image(self, img: ImageRGB) -> ImageEncoding:
        raise NotImplementedError

    def generate_mask(self, enc, object_text, text_emb):
        raise NotImplementedError

    def stylize(self, img, style_phrase, style_emb):
        raise NotImplementedError

    def health(self) -> dict:
        return {"status": "ok", "embedding_dim": EMBED_DIM}


# --- brute-force oracles ---

def oracle_bbox(mask: Mask) -> tuple[int, int, int, int]:
    """Min/max scan over every set pixel."""
    xs, ys = [], []
    arr = mask.to_array()
    for y in range(mask.height):
        for x in range(mask.width):
            if arr[y, x]:
                xs.append(x)
                ys.append(y)
    assert xs, "oracle_bbox needs a non-empty mask"
    return min(xs), min(ys), max(xs), max(ys)


def oracle_resolve(masks: list[Mask], overlap: OverlapPolicy) -> list[np.ndarray]:
    """Per-pixel claim table: each pixel belongs to exactly one claimant."""
    h, w = masks[0].height, masks[0].width
    arrays = [m.to_array() for m in masks]
    out = [np.zeros((h, w), dtype=np.uint8) for _ in masks]
    for y in range(h):
        for x in range(w):
            claimants = [i for i, a in enumerate(arrays) if a[y, x]]
            if not claimants:
                continue
            winner = claimants[-1] if overlap is OverlapPolicy.LAST_WINS else claimants[0]
            out[winner][y, x] = 1
    return out


def oracle_composite(content: ImageRGB, masks: list[Mask], styled: list[ImageRGB],
                     ordinals: list[int], overlap: OverlapPolicy,
                     background: ImageRGB | None = None) -> ImageRGB:
    """Per-pixel source selection by ordinal-ordered arbitration."""
    order = sorted(range(len(masks)), key=lambda i: ordinals[i])
    mask_arrays = [masks[i].to_array() for i in order]
    styled_arrays = [styled[i].to_array() for i in order]
    base = (background or content).to_array()
    out = base.copy()
    for y in range(content.height):
        for x in range(content.width):
            claimants = [k for k, a in enumerate(mask_arrays) if a[y, x]]
            if not claimants:
                continue
            winner = claimants[-1] if overlap is OverlapPolicy.LAST_WINS else claimants[0]
            out[y, x] = styled_arrays[winner][y, x]
    return ImageRGB.from_array(out)


def oracle_cross_entropy(probs, gold) -> float:
    """Direct per-position summation with plain floats."""
    import math

    total = 0.0
    for vec, g in zip(probs, gold):
        total += -math.log(vec[g])
    return total / len(gold)


# --- fixtures ---

@pytest.fixture
def content_32() -> ImageRGB:
    return gradient_image(32, 32)


@pytest.fixture
def gray_16() -> ImageRGB:
    return ImageRGB.solid(16, 16, (128, 128, 128))
