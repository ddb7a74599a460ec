"""Model implementations behind the sidecar's four roles.

The default registry wires in lightweight deterministic models that run
anywhere with no weight files: a hashed character-n-gram text encoder, a
content-hash image encoder, a color-histogram crop embedder, a color-prior
segmenter, and a tone-transfer stylizer. Each role is constructed through
a factory table, so heavyweight pretrained models (CLIP text/image towers,
promptable segmenters, text-driven stylizers) can be swapped in per role
via the config file without touching the server.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

EMBED_DIM = 512

ROLES = ("text-encoder", "image-encoder", "mask-generator", "stylizer")


# --- text encoder ---

class HashedNGramTextEncoder:
    """Character n-gram feature hashing into a signed 512-dim space.

    Texts sharing substrings land near each other; the vector is
    L2-normalized before leaving the model.
    """

    def __init__(self, n_min: int = 3, n_max: int = 5):
        self.n_min = n_min
        self.n_max = n_max

    def encode(self, text: str) -> np.ndarray:
        normalized = " ".join(text.lower().split())
        padded = f"  {normalized}  "
        vec = np.zeros(EMBED_DIM, dtype=np.float64)
        for n in range(self.n_min, self.n_max + 1):
            for i in range(len(padded) - n + 1):
                gram = padded[i : i + n]
                digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
                value = int.from_bytes(digest, "little")
                sign = 1.0 if value & (1 << 63) else -1.0
                vec[value % EMBED_DIM] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            vec[0] = 1.0
            return vec
        return vec / norm


# --- image encoder ---

class ContentHashImageEncoder:
    """Encoding ids are content hashes; identical pixels hash identically."""

    def encode_id(self, arr: np.ndarray) -> str:
        h = hashlib.sha256()
        h.update(arr.shape[1].to_bytes(8, "little"))
        h.update(arr.shape[0].to_bytes(8, "little"))
        h.update(arr.tobytes())
        return h.hexdigest()[:32]


# --- crop embedder ---

class ColorHistogramEmbedder:
    """Joint 8x8x8 RGB histogram (512 bins), square-rooted and normalized."""

    def embed(self, arr: np.ndarray) -> np.ndarray:
        r = arr[:, :, 0].astype(np.int64) >> 5
        g = arr[:, :, 1].astype(np.int64) >> 5
        b = arr[:, :, 2].astype(np.int64) >> 5
        idx = (r * 64 + g * 8 + b).ravel()
        hist = np.bincount(idx, minlength=EMBED_DIM).astype(np.float64)
        hist = np.sqrt(hist)
        norm = np.linalg.norm(hist)
        return hist / norm if norm else np.eye(1, EMBED_DIM, 0, dtype=np.float64).ravel()


# --- mask generator ---

COLOR_WORDS = {
    "red": (200, 40, 40),
    "green": (60, 150, 60),
    "blue": (70, 100, 200),
    "yellow": (230, 215, 70),
    "orange": (240, 150, 40),
    "purple": (150, 60, 180),
    "pink": (240, 150, 180),
    "brown": (140, 90, 50),
    "black": (25, 25, 25),
    "white": (235, 235, 235),
    "gray": (128, 128, 128),
    "grey": (128, 128, 128),
}

# common object words mapped to a color prior
SEMANTIC_COLORS = {
    "sky": "blue", "sea": "blue", "ocean": "blue", "water": "blue",
    "lake": "blue", "river": "blue",
    "tree": "green", "grass": "green", "forest": "green", "leaf": "green",
    "plant": "green", "bush": "green", "meadow": "green",
    "sun": "yellow", "sand": "yellow", "beach": "yellow",
    "cloud": "white", "snow": "white", "moon": "white",
    "fire": "orange", "sunset": "orange",
    "mountain": "gray", "rock": "gray", "road": "gray", "stone": "gray",
    "night": "black", "shadow": "black",
    "earth": "brown", "soil": "brown", "wood": "brown", "trunk": "brown",
}


class ColorPriorMaskModel:
    """Segmentation by color prototype.

    The object text supplies a color prototype (an explicit color word, a
    semantic prior, or the image's central dominant color as fallback);
    the mask is the largest connected component of the pixels closest to
    that prototype. Deterministic per (image, text).
    """

    def __init__(self, keep_percentile: float = 35.0):
        self.keep_percentile = keep_percentile

    def _prototype(self, arr: np.ndarray, object_text: str) -> np.ndarray:
        words = object_text.lower().replace("-", " ").split()
        for w in words:
            if w in COLOR_WORDS:
                return np.array(COLOR_WORDS[w], dtype=np.float64)
        for w in words:
            if w in SEMANTIC_COLORS:
                return np.array(COLOR_WORDS[SEMANTIC_COLORS[w]], dtype=np.float64)
        h, w_ = arr.shape[:2]
        center = arr[h // 4 : max(h // 4 + 1, 3 * h // 4), w_ // 4 : max(w_ // 4 + 1, 3 * w_ // 4)]
        quant = (center.reshape(-1, 3) >> 6).astype(np.int64)
        idx = quant[:, 0] * 16 + quant[:, 1] * 4 + quant[:, 2]
        dominant = int(np.bincount(idx, minlength=64).argmax())
        bin_rgb = np.array([(dominant >> 4) & 3, (dominant >> 2) & 3, dominant & 3])
        return bin_rgb * 64.0 + 32.0

    def generate(self, arr: np.ndarray, object_text: str) -> np.ndarray:
        proto = self._prototype(arr, object_text)
        dist = np.linalg.norm(arr.astype(np.float64) - proto, axis=2)
        tau = np.percentile(dist, self.keep_percentile)
        candidates = dist <= tau
        if not candidates.any():
            return candidates
        labels, count = ndimage.label(candidates)
        if count == 0:
            return np.zeros(arr.shape[:2], dtype=bool)
        sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=range(1, count + 1))
        return labels == (int(np.argmax(sizes)) + 1)


# --- stylizer ---

def _grayscale(arr: np.ndarray) -> np.ndarray:
    return (0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2])


class ToneTransferStylizer:
    """Deterministic tonal restyling driven by the style text and embedding.

    Known style words select a named transform; anything else maps image
    luminance onto a duotone ramp whose endpoint colors come from the
    style embedding, so the embedding genuinely shapes the output.
    """

    def stylize(self, arr: np.ndarray, style_text: str, style_emb: np.ndarray) -> np.ndarray:
        words = set(style_text.lower().replace("-", " ").split())
        lum = _grayscale(arr)
        if words & {"charcoal", "sketch", "pencil", "ink", "grayscale", "monochrome"}:
            boosted = np.clip((lum - 128.0) * 1.2 + 128.0, 0, 255)
            return np.repeat(boosted[:, :, None], 3, axis=2).astype(np.uint8)
        if "sepia" in words:
            ramp = np.stack([lum * 1.07 + 20, lum * 0.93 + 10, lum * 0.74], axis=2)
            return np.clip(ramp, 0, 255).astype(np.uint8)
        if words & {"pixel", "voxel", "mosaic"}:
            block = 8
            h, w = arr.shape[:2]
            small = arr[: h - h % block or h, : w - w % block or w]
            if small.size and h >= block and w >= block:
                hh, ww = small.shape[0] // block, small.shape[1] // block
                coarse = small[: hh * block, : ww * block].reshape(hh, block, ww, block, 3)
                means = coarse.mean(axis=(1, 3)).astype(np.uint8)
                out = arr.copy()
                out[: hh * block, : ww * block] = np.repeat(np.repeat(means, block, 0), block, 1)
                return out
            return arr.copy()
        if words & {"poster", "pop", "posterize"}:
            return ((arr >> 6) * 85).astype(np.uint8)
        if words & {"watercolor", "pastel", "soft", "gouache"}:
            softened = arr.astype(np.float64)
            for axis in (0, 1):
                softened = (softened + np.roll(softened, 1, axis) + np.roll(softened, -1, axis)) / 3.0
            faded = softened * 0.85 + 38.0
            return np.clip(faded, 0, 255).astype(np.uint8)
        # duotone fallback: the whole embedding shapes the ramp colors, so
        # different style vectors genuinely restyle differently
        chunks = np.array_split(np.asarray(style_emb, dtype=np.float64), 6)
        knobs = np.tanh(np.array([c.sum() for c in chunks]) * 3.0)
        shadow = (knobs[:3] * 0.5 + 0.5) * 120.0
        highlight = 135.0 + (knobs[3:] * 0.5 + 0.5) * 120.0
        t = (lum / 255.0)[:, :, None]
        out = shadow[None, None, :] * (1 - t) + highlight[None, None, :] * t
        return np.clip(out, 0, 255).astype(np.uint8)


# --- registry ---

_FACTORIES = {
    "text-encoder": {"builtin": HashedNGramTextEncoder},
    "image-encoder": {"builtin": ContentHashImageEncoder},
    "mask-generator": {"builtin": ColorPriorMaskModel},
    "stylizer": {"builtin": ToneTransferStylizer},
}


def register_model(role: str, name: str, factory) -> None:
    """Expose an alternative implementation for a role (e.g. a real CLIP)."""
    if role not in _FACTORIES:
        raise KeyError(f"unknown role {role!r}; roles: {ROLES}")
    _FACTORIES[role][name] = factory


@dataclass
class ModelRegistry:
    """Loaded model handles keyed by role, plus the server-side encoding cache."""

    device: str = "cpu"
    implementations: dict = field(default_factory=dict)

    def __post_init__(self):
        self.models: dict[str, object] = {}
        self.encodings: dict[str, np.ndarray] = {}
        self.embedder = ColorHistogramEmbedder()
        for role in ROLES:
            impl = self.implementations.get(role, "builtin")
            try:
                factory = _FACTORIES[role][impl]
            except KeyError:
                raise KeyError(f"no implementation {impl!r} for role {role!r}") from None
            self.models[role] = factory()

    @property
    def ready(self) -> bool:
        return all(role in self.models for role in ROLES)

    @property
    def embedding_dim(self) -> int:
        return EMBED_DIM
