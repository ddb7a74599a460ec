"""Wire-format helpers shared by the HTTP client, golden tests, and servers.

Bodies are canonical JSON (sorted keys, compact separators, repr floats) so
request/response bytes are reproducible. Images cross the wire as base64
PNG; masks as row-major alternating run lengths starting with the zero run.
"""

from __future__ import annotations

import base64
import json
from importlib import resources

from ..images import ImageRGB, Mask, rle_decode, rle_encode
from .base import Embedding

ENDPOINTS = {
    "text_encode": "/v1/text/encode",
    "image_encode": "/v1/image/encode",
    "mask": "/v1/mask",
    "stylize": "/v1/stylize",
    "image_embed": "/v1/image/embed",
    "health": "/v1/health",
}

SCHEMA_NAMES = (
    "text_encode.request",
    "text_encode.response",
    "image_encode.request",
    "image_encode.response",
    "mask.request",
    "mask.response",
    "stylize.request",
    "stylize.response",
    "image_embed.request",
    "image_embed.response",
    "health.response",
)


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def png_b64(img: ImageRGB) -> str:
    return base64.b64encode(img.to_png_bytes()).decode("ascii")


def png_from_b64(s: str) -> ImageRGB:
    return ImageRGB.from_png_bytes(base64.b64decode(s.encode("ascii")))


def mask_runs(mask: Mask) -> list[int]:
    return rle_encode(mask)


def mask_from_runs(width: int, height: int, runs: list[int]) -> Mask:
    return rle_decode(width, height, runs)


# --- request body builders (the client serializes exactly these) ---

def text_encode_request(text: str) -> dict:
    return {"text": text}


def image_encode_request(img: ImageRGB) -> dict:
    return {"image_png_b64": png_b64(img)}


def mask_request(encoding_id: str, object_text: str, text_emb: Embedding) -> dict:
    return {
        "encoding_id": encoding_id,
        "object_text": object_text,
        "text_embedding": list(text_emb.values),
    }


def stylize_request(img: ImageRGB, style_phrase: str, style_emb: Embedding) -> dict:
    return {
        "image_png_b64": png_b64(img),
        "style_text": style_phrase,
        "style_embedding": list(style_emb.values),
    }


def image_embed_request(img: ImageRGB) -> dict:
    return {"image_png_b64": png_b64(img)}


def load_schema(name: str) -> dict:
    """A golden JSON Schema shipped with this package (see SCHEMA_NAMES)."""
    if name not in SCHEMA_NAMES:
        raise KeyError(f"unknown schema {name!r}; known: {SCHEMA_NAMES}")
    blob = resources.files("mosaic").joinpath("backends", "schemas", f"{name}.json").read_text("utf-8")
    return json.loads(blob)
