"""FastAPI application implementing the wire protocol.

Status mapping: 400 malformed body, 404 unknown encoding_id, 422 empty
mask, 503 until all model roles are loaded. Embeddings are L2-normalized
server-side before transmission; encoding_ids stay valid for the process
lifetime.
"""

from __future__ import annotations

import base64
import binascii
import io

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image
from pydantic import BaseModel, ConfigDict, Field

from .models import EMBED_DIM, ModelRegistry
from .rle import rle_encode


class _Body(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TextEncodeBody(_Body):
    text: str = Field(min_length=1)


class ImageEncodeBody(_Body):
    image_png_b64: str = Field(min_length=1)


class MaskBody(_Body):
    encoding_id: str = Field(min_length=1)
    object_text: str = Field(min_length=1)
    text_embedding: list[float] = Field(min_length=EMBED_DIM, max_length=EMBED_DIM)


class StylizeBody(_Body):
    image_png_b64: str = Field(min_length=1)
    style_text: str = Field(min_length=1)
    style_embedding: list[float] = Field(min_length=EMBED_DIM, max_length=EMBED_DIM)


class ImageEmbedBody(_Body):
    image_png_b64: str = Field(min_length=1)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _decode_png(b64: str) -> np.ndarray | None:
    try:
        blob = base64.b64decode(b64.encode("ascii"), validate=True)
        with Image.open(io.BytesIO(blob)) as im:
            rgb = im.convert("RGB")
            return np.asarray(rgb, dtype=np.uint8).reshape(rgb.height, rgb.width, 3)
    except (binascii.Error, ValueError, OSError):
        return None


def _encode_png(arr: np.ndarray) -> str:
    im = Image.fromarray(arr, mode="RGB")
    buf = io.BytesIO()
    im.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _normalized(vec: np.ndarray) -> list[float]:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        vec = np.eye(1, EMBED_DIM, 0, dtype=np.float64).ravel()
        norm = 1.0
    return (vec / norm).tolist()


def create_app(registry: ModelRegistry | None = None) -> FastAPI:
    app = FastAPI(title="mosaic-sidecar", docs_url=None, redoc_url=None)
    app.state.registry = registry if registry is not None else ModelRegistry()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return _error(400, "malformed body")

    def reg() -> ModelRegistry:
        return app.state.registry

    def not_ready() -> JSONResponse | None:
        if not reg().ready:
            return _error(503, "models not loaded")
        return None

    @app.get("/v1/health")
    async def health():
        if not reg().ready:
            return JSONResponse(status_code=503,
                                content={"status": "loading", "embedding_dim": EMBED_DIM})
        return {"status": "ok", "embedding_dim": reg().embedding_dim}

    @app.post("/v1/text/encode")
    async def text_encode(body: TextEncodeBody):
        if (resp := not_ready()) is not None:
            return resp
        vec = reg().models["text-encoder"].encode(body.text)
        return {"embedding": _normalized(np.asarray(vec, dtype=np.float64))}

    @app.post("/v1/image/encode")
    async def image_encode(body: ImageEncodeBody):
        if (resp := not_ready()) is not None:
            return resp
        arr = _decode_png(body.image_png_b64)
        if arr is None:
            return _error(400, "undecodable image")
        encoding_id = reg().models["image-encoder"].encode_id(arr)
        reg().encodings[encoding_id] = arr
        return {"encoding_id": encoding_id, "width": int(arr.shape[1]), "height": int(arr.shape[0])}

    @app.post("/v1/mask")
    async def mask(body: MaskBody):
        if (resp := not_ready()) is not None:
            return resp
        arr = reg().encodings.get(body.encoding_id)
        if arr is None:
            return _error(404, "unknown encoding_id")
        mask_arr = reg().models["mask-generator"].generate(arr, body.object_text)
        if not mask_arr.any():
            return _error(422, "empty mask")
        return {
            "width": int(arr.shape[1]),
            "height": int(arr.shape[0]),
            "mask_rle": rle_encode(mask_arr),
        }

    @app.post("/v1/stylize")
    async def stylize(body: StylizeBody):
        if (resp := not_ready()) is not None:
            return resp
        arr = _decode_png(body.image_png_b64)
        if arr is None:
            return _error(400, "undecodable image")
        emb = np.asarray(body.style_embedding, dtype=np.float64)
        out = reg().models["stylizer"].stylize(arr, body.style_text, emb)
        return {"image_png_b64": _encode_png(out)}

    @app.post("/v1/image/embed")
    async def image_embed(body: ImageEmbedBody):
        if (resp := not_ready()) is not None:
            return resp
        arr = _decode_png(body.image_png_b64)
        if arr is None:
            return _error(400, "undecodable image")
        vec = reg().embedder.embed(arr)
        return {"embedding": _normalized(vec)}

    return app
