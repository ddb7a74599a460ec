"""Bit-exact deterministic stand-ins for the model backends.

Every operation is a pure function of its declared inputs, so two
independently constructed mocks agree byte-for-byte and the full test
suite runs hermetically. The formulas are normative:

- text embedding: FNV-1a-64 over the UTF-8 bytes seeds a splitmix64 draw of
  512 values mapped to [-1, 1) via ((r >> 11) / 2^53) * 2 - 1, L2-normalized
- encoding id: 16 lowercase hex digits of FNV-1a-64 over
  le64(width) + le64(height) + raw RGB bytes
- mask: seed = FNV(object_text) XOR FNV(encoding_id); four splitmix64 draws
  r1..r4 give the filled rectangle x0 = r1 % W, y0 = r2 % H,
  w = 1 + r3 % (W - x0), h = 1 + r4 % (H - y0)
- stylize: delta_c = ((FNV(style_phrase) >> 8c) mod 128) - 64 per channel,
  output = clamp(input + delta_c, 0, 255)
- crop embedding: the text-embedding expansion seeded with the image
  content hash (same fingerprint as the encoding id)
"""

from __future__ import annotations

import re

import numpy as np

from ..errors import ImageTooLarge, UnknownEncoding
from ..hashing import SplitMix64, fnv1a64, unit_vector
from ..images import ImageRGB, Mask
from .base import EMBED_DIM, Embedding, ImageEncoding, ModelBackend

_ENCODING_ID_RE = re.compile(r"^[0-9a-f]{16}$")


class MockBackend(ModelBackend):
    """Stateless deterministic backend; safe to share across threads."""

    def __init__(self, max_pixels: int | None = None):
        self.max_pixels = max_pixels

    def encode_text(self, text: str) -> Embedding:
        if not text:
            raise ValueError("text must be non-empty")
        return Embedding.from_array(unit_vector(fnv1a64(text.encode("utf-8"))), source="text")

    def encode_image(self, img: ImageRGB) -> ImageEncoding:
        if self.max_pixels is not None and img.width * img.height > self.max_pixels:
            raise ImageTooLarge(f"{img.width}x{img.height} exceeds {self.max_pixels} pixels")
        return ImageEncoding(encoding_id=f"{img.fingerprint():016x}",
                             width=img.width, height=img.height)

    def generate_mask(self, enc: ImageEncoding, object_text: str, text_emb: Embedding) -> Mask:
        if not _ENCODING_ID_RE.match(enc.encoding_id):
            raise UnknownEncoding(f"malformed encoding_id {enc.encoding_id!r}")
        seed = fnv1a64(object_text.encode("utf-8")) ^ fnv1a64(enc.encoding_id.encode("ascii"))
        rng = SplitMix64(seed)
        x0 = rng.next() % enc.width
        y0 = rng.next() % enc.height
        w = 1 + rng.next() % (enc.width - x0)
        h = 1 + rng.next() % (enc.height - y0)
        return Mask.rectangle(enc.width, enc.height, x0, y0, w, h)

    def stylize(self, img: ImageRGB, style_phrase: str, style_emb: Embedding) -> ImageRGB:
        h = fnv1a64(style_phrase.encode("utf-8"))
        deltas = np.array([((h >> (8 * c)) & 127) - 64 for c in range(3)], dtype=np.int16)
        arr = img.to_array().astype(np.int16) + deltas
        return ImageRGB.from_array(np.clip(arr, 0, 255).astype(np.uint8))

    def embed_image(self, img: ImageRGB) -> Embedding:
        return Embedding.from_array(unit_vector(img.fingerprint()), source="image-crop")

    def health(self) -> dict:
        return {"status": "ok", "embedding_dim": EMBED_DIM}


def style_deltas(style_phrase: str) -> tuple[int, int, int]:
    """Per-channel deltas the mock stylizer applies for a phrase."""
    h = fnv1a64(style_phrase.encode("utf-8"))
    return tuple(((h >> (8 * c)) & 127) - 64 for c in range(3))
