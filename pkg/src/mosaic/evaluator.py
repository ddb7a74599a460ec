"""Patch-wise CLIP scoring.

Per object: take the mask's tight bounding box, sample seeded square crops
inside it, embed each crop, and score it against the style text embedding
with a clamped cosine. Objects whose masks are empty are reported as
skipped and excluded from the aggregate — a segmentation failure should
not masquerade as a stylization failure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .backends.base import Embedding, ModelBackend
from .compositor import BBox, mask_bbox
from .errors import DimensionMismatch, EmptyMask
from .hashing import SplitMix64, derive_seed
from .images import ImageRGB, Mask
from .promptseg import SegmentedPrompt

DEFAULT_CROPS = 8
MIN_CROP_SIDE = 16

# Recorded in every report: scores are comparable only under the same rule.
CROP_SIDE_RULE = "side=clamp(round(0.5*min(bbox_w,bbox_h)),16,min(bbox_w,bbox_h))"


@dataclass(frozen=True)
class CropRect:
    """Square crop in image coordinates."""

    x: int
    y: int
    side: int


@dataclass(frozen=True)
class ObjectScore:
    object_phrase: str
    style_phrase: str
    ordinal: int
    crops: tuple[CropRect, ...]
    scores: tuple[float, ...]
    mean: float | None
    skipped: bool = False


@dataclass(frozen=True)
class ScoreReport:
    per_object: tuple[ObjectScore, ...]
    aggregate: float | None
    seed: int
    crop_rule: str = CROP_SIDE_RULE
    scale: float = 1.0

    def to_dict(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "crop_rule": self.crop_rule,
            "scale": self.scale,
            "seed": self.seed,
            "objects": [
                {
                    "object": o.object_phrase,
                    "style": o.style_phrase,
                    "ordinal": o.ordinal,
                    "skipped": o.skipped,
                    "crops": [[c.x, c.y, c.side] for c in o.crops],
                    "scores": list(o.scores),
                    "mean": o.mean,
                }
                for o in self.per_object
            ],
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"),
                          ensure_ascii=False).encode("utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreReport":
        return cls(
            per_object=tuple(
                ObjectScore(
                    object_phrase=o["object"],
                    style_phrase=o["style"],
                    ordinal=o["ordinal"],
                    crops=tuple(CropRect(x, y, s) for x, y, s in o["crops"]),
                    scores=tuple(o["scores"]),
                    mean=o["mean"],
                    skipped=o["skipped"],
                )
                for o in d["objects"]
            ),
            aggregate=d["aggregate"],
            seed=d["seed"],
            crop_rule=d["crop_rule"],
            scale=d["scale"],
        )


def clip_similarity(img_emb: Embedding, txt_emb: Embedding) -> float:
    """Cosine of two unit vectors clamped into [0, 1].

    No 2.5x rescaling; the upper clamp absorbs the float slack unit-norm
    vectors carry so reported scores always stay in range.
    """
    a = img_emb.as_array()
    b = txt_emb.as_array()
    if a.shape != b.shape:
        raise DimensionMismatch(f"embedding dims {a.shape} vs {b.shape}")
    return min(1.0, max(0.0, float(np.dot(a, b))))


def crop_side(bbox_w: int, bbox_h: int) -> int:
    """Half the short bbox extent, clamped to [16, short extent].

    Boxes shorter than 16 pixels use their full short extent.
    """
    short = min(bbox_w, bbox_h)
    if short < MIN_CROP_SIDE:
        return short
    return min(max(round(0.5 * short), MIN_CROP_SIDE), short)


def sample_crops(bbox: BBox, n: int = DEFAULT_CROPS, seed: int = 0, ordinal: int = 0) -> list[CropRect]:
    """Deterministic square crops fully inside the bbox.

    The draw stream is splitmix64 seeded by mixing ``seed`` with the object
    ordinal; each crop consumes an x draw then a y draw.
    """
    side = crop_side(bbox.width, bbox.height)
    nx = bbox.width - side + 1
    ny = bbox.height - side + 1
    rng = SplitMix64(derive_seed(seed, ordinal))
    crops = []
    for _ in range(n):
        x = bbox.x0 + rng.next() % nx
        y = bbox.y0 + rng.next() % ny
        crops.append(CropRect(x=x, y=y, side=side))
    return crops


def patchwise_clip_score(img: ImageRGB, pairs: SegmentedPrompt, masks: list[Mask],
                         txt_backend: ModelBackend, img_backend: ModelBackend,
                         seed: int = 0, n_crops: int = DEFAULT_CROPS,
                         scale: float = 1.0) -> ScoreReport:
    """Per-object crop scores and their unweighted aggregate.

    ``scale`` multiplies reported scores (for comparison against rescaled
    variants of the metric); at the default 1.0 every score lies in [0, 1].
    """
    if len(masks) != len(pairs):
        raise ValueError(f"{len(masks)} masks for {len(pairs)} pairs")
    for m in masks:
        if (m.width, m.height) != (img.width, img.height):
            raise DimensionMismatch(
                f"mask {m.width}x{m.height} != image {img.width}x{img.height}"
            )
    per_object = []
    means = []
    for pair, mask in zip(pairs, masks):
        try:
            bbox = mask_bbox(mask)
        except EmptyMask:
            per_object.append(ObjectScore(
                object_phrase=pair.object_phrase, style_phrase=pair.style_phrase,
                ordinal=pair.ordinal, crops=(), scores=(), mean=None, skipped=True,
            ))
            continue
        style_emb = txt_backend.encode_text(pair.style_phrase)
        crops = sample_crops(bbox, n=n_crops, seed=seed, ordinal=pair.ordinal)
        scores = []
        for c in crops:
            crop_emb = img_backend.embed_image(img.crop(c.x, c.y, c.side))
            scores.append(scale * clip_similarity(crop_emb, style_emb))
        mean = float(np.mean(scores))
        means.append(mean)
        per_object.append(ObjectScore(
            object_phrase=pair.object_phrase, style_phrase=pair.style_phrase,
            ordinal=pair.ordinal, crops=tuple(crops), scores=tuple(scores), mean=mean,
        ))
    aggregate = float(np.mean(means)) if means else None
    return ScoreReport(per_object=tuple(per_object), aggregate=aggregate,
                       seed=seed, scale=scale)
