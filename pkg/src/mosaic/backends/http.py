"""HTTP client for the sidecar wire protocol.

Stateless apart from a connection pool; concurrent in-flight requests are
fine. Every request carries a timeout. Status mapping: 404 unknown
encoding, 413 image too large, 422 empty mask, 503 backend not ready;
transport failures raise BackendUnavailable; anything else off-contract
raises BadResponse.
"""

from __future__ import annotations

import json

import requests

from ..errors import (
    BackendUnavailable,
    BadResponse,
    DimensionMismatch,
    EmptyMask,
    ImageTooLarge,
    UnknownEncoding,
)
from ..images import ImageRGB, Mask
from .base import EMBED_DIM, Embedding, ImageEncoding, ModelBackend
from . import protocol


class HttpBackend(ModelBackend):
    def __init__(self, endpoint: str, timeout: float = 30.0, session: requests.Session | None = None):
        if not endpoint:
            raise ValueError("endpoint must be non-empty")
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._session = session or requests.Session()

    # --- transport ---

    def _request(self, method: str, path: str, body: dict | None = None) -> dict:
        url = self.endpoint + path
        try:
            if method == "GET":
                resp = self._session.get(url, timeout=self.timeout)
            else:
                resp = self._session.post(
                    url,
                    data=protocol.canonical_json(body),
                    headers={"Content-Type": "application/json"},
                    timeout=self.timeout,
                )
        except requests.RequestException as exc:
            raise BackendUnavailable(f"{method} {url}: {exc}") from exc
        if resp.status_code == 503:
            raise BackendUnavailable(f"{url}: backend not ready (503)")
        if resp.status_code == 404:
            raise UnknownEncoding(f"{url}: unknown encoding_id (404)")
        if resp.status_code == 413:
            raise ImageTooLarge(f"{url}: image exceeds backend limit (413)")
        if resp.status_code == 422:
            raise EmptyMask(f"{url}: backend produced an empty mask (422)")
        if resp.status_code != 200:
            raise BadResponse(f"{url}: unexpected status {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
        except (json.JSONDecodeError, ValueError) as exc:
            raise BadResponse(f"{url}: non-JSON body") from exc
        if not isinstance(payload, dict):
            raise BadResponse(f"{url}: expected JSON object, got {type(payload).__name__}")
        return payload

    @staticmethod
    def _field(payload: dict, key: str, kind: type):
        if key not in payload:
            raise BadResponse(f"response missing field {key!r}")
        value = payload[key]
        if kind is int and isinstance(value, bool):
            raise BadResponse(f"field {key!r} has wrong type bool")
        if not isinstance(value, kind):
            raise BadResponse(f"field {key!r} has wrong type {type(value).__name__}")
        return value

    def _embedding(self, payload: dict, source: str) -> Embedding:
        values = self._field(payload, "embedding", list)
        try:
            return Embedding(values=tuple(float(v) for v in values), source=source)
        except (TypeError, ValueError) as exc:
            raise BadResponse(f"invalid embedding: {exc}") from exc

    # --- operations ---

    def encode_text(self, text: str) -> Embedding:
        if not text:
            raise ValueError("text must be non-empty")
        payload = self._request("POST", protocol.ENDPOINTS["text_encode"],
                                protocol.text_encode_request(text))
        return self._embedding(payload, "text")

    def encode_image(self, img: ImageRGB) -> ImageEncoding:
        payload = self._request("POST", protocol.ENDPOINTS["image_encode"],
                                protocol.image_encode_request(img))
        enc = ImageEncoding(
            encoding_id=self._field(payload, "encoding_id", str),
            width=self._field(payload, "width", int),
            height=self._field(payload, "height", int),
        )
        if (enc.width, enc.height) != (img.width, img.height):
            raise BadResponse(
                f"encoding dimensions {enc.width}x{enc.height} != image {img.width}x{img.height}"
            )
        return enc

    def generate_mask(self, enc: ImageEncoding, object_text: str, text_emb: Embedding) -> Mask:
        payload = self._request("POST", protocol.ENDPOINTS["mask"],
                                protocol.mask_request(enc.encoding_id, object_text, text_emb))
        width = self._field(payload, "width", int)
        height = self._field(payload, "height", int)
        if (width, height) != (enc.width, enc.height):
            raise BadResponse(f"mask dimensions {width}x{height} != encoding {enc.width}x{enc.height}")
        runs = self._field(payload, "mask_rle", list)
        mask = protocol.mask_from_runs(width, height, runs)
        if mask.count() == 0:
            raise EmptyMask(f"backend returned an all-zero mask for {object_text!r}")
        return mask

    def stylize(self, img: ImageRGB, style_phrase: str, style_emb: Embedding) -> ImageRGB:
        payload = self._request("POST", protocol.ENDPOINTS["stylize"],
                                protocol.stylize_request(img, style_phrase, style_emb))
        try:
            out = protocol.png_from_b64(self._field(payload, "image_png_b64", str))
        except Exception as exc:
            raise BadResponse(f"undecodable stylized image: {exc}") from exc
        if (out.width, out.height) != (img.width, img.height):
            raise DimensionMismatch(
                f"stylized image {out.width}x{out.height} != input {img.width}x{img.height}"
            )
        return out

    def embed_image(self, img: ImageRGB) -> Embedding:
        payload = self._request("POST", protocol.ENDPOINTS["image_embed"],
                                protocol.image_embed_request(img))
        return self._embedding(payload, "image-crop")

    def health(self) -> dict:
        return self._request("GET", protocol.ENDPOINTS["health"])

    def check_health(self) -> dict:
        """Handshake: reject backends that do not serve 512-wide embeddings."""
        payload = self.health()
        if payload.get("status") != "ok":
            raise BackendUnavailable(f"backend status {payload.get('status')!r}")
        dim = payload.get("embedding_dim")
        if dim != EMBED_DIM:
            raise BadResponse(f"backend embedding_dim {dim} != {EMBED_DIM}")
        return payload
