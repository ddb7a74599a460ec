"""8-bit RGB images and binary masks, with PNG and run-length codecs."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as _PILImage

from .errors import BadResponse
from .hashing import fnv1a64


@dataclass(frozen=True)
class ImageRGB:
    """Row-major RGB image, 8 bits per channel."""

    width: int
    height: int
    data: bytes

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")
        expected = self.width * self.height * 3
        if len(self.data) != expected:
            raise ValueError(f"image data length {len(self.data)} != {expected}")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageRGB":
        arr = np.asarray(arr, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got {arr.shape}")
        h, w = arr.shape[:2]
        return cls(width=w, height=h, data=arr.tobytes())

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.data, dtype=np.uint8).reshape(self.height, self.width, 3)

    @classmethod
    def solid(cls, width: int, height: int, rgb: tuple[int, int, int]) -> "ImageRGB":
        return cls(width=width, height=height, data=bytes(rgb) * (width * height))

    @classmethod
    def from_png_bytes(cls, blob: bytes) -> "ImageRGB":
        with _PILImage.open(io.BytesIO(blob)) as im:
            rgb = im.convert("RGB")
            return cls(width=rgb.width, height=rgb.height, data=rgb.tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "ImageRGB":
        return cls.from_png_bytes(Path(path).read_bytes())

    def to_png_bytes(self) -> bytes:
        im = _PILImage.frombytes("RGB", (self.width, self.height), self.data)
        buf = io.BytesIO()
        im.save(buf, format="PNG")
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_png_bytes())

    def crop(self, x: int, y: int, side: int) -> "ImageRGB":
        if side <= 0 or x < 0 or y < 0 or x + side > self.width or y + side > self.height:
            raise ValueError(f"crop ({x},{y},{side}) outside {self.width}x{self.height}")
        arr = self.to_array()[y : y + side, x : x + side]
        return ImageRGB.from_array(arr)

    def fingerprint(self) -> int:
        """Content hash: FNV-1a-64 over le64(width) + le64(height) + raw bytes."""
        header = self.width.to_bytes(8, "little") + self.height.to_bytes(8, "little")
        return fnv1a64(header + self.data)


@dataclass(frozen=True)
class Mask:
    """Row-major binary occupancy mask; one byte per pixel, 0 or 1."""

    width: int
    height: int
    bits: bytes

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"mask dimensions must be positive, got {self.width}x{self.height}")
        if len(self.bits) != self.width * self.height:
            raise ValueError(f"mask bits length {len(self.bits)} != {self.width * self.height}")
        if self.bits.translate(None, b"\x00\x01"):
            raise ValueError("mask bits must contain only 0 and 1")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Mask":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError(f"expected (H, W) array, got {arr.shape}")
        h, w = arr.shape
        return cls(width=w, height=h, bits=(arr != 0).astype(np.uint8).tobytes())

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.bits, dtype=np.uint8).reshape(self.height, self.width)

    def to_bool(self) -> np.ndarray:
        return self.to_array().astype(bool)

    def count(self) -> int:
        return int(self.to_array().sum())

    @classmethod
    def rectangle(cls, width: int, height: int, x0: int, y0: int, w: int, h: int) -> "Mask":
        arr = np.zeros((height, width), dtype=np.uint8)
        arr[y0 : y0 + h, x0 : x0 + w] = 1
        return cls.from_array(arr)

    @classmethod
    def from_png_bytes(cls, blob: bytes) -> "Mask":
        with _PILImage.open(io.BytesIO(blob)) as im:
            gray = im.convert("L")
            arr = np.frombuffer(gray.tobytes(), dtype=np.uint8).reshape(gray.height, gray.width)
        return cls.from_array(arr != 0)

    @classmethod
    def load(cls, path: str | Path) -> "Mask":
        return cls.from_png_bytes(Path(path).read_bytes())

    def to_png_bytes(self) -> bytes:
        arr = self.to_array() * np.uint8(255)
        im = _PILImage.frombytes("L", (self.width, self.height), arr.tobytes())
        buf = io.BytesIO()
        im.save(buf, format="PNG")
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_png_bytes())


def rle_encode(mask: Mask) -> list[int]:
    """Row-major alternating run lengths; the first run counts zeros.

    The first entry is 0 when the mask starts with a set pixel.
    """
    flat = mask.to_array().ravel()
    runs: list[int] = []
    changes = np.flatnonzero(np.diff(flat)) + 1
    boundaries = np.concatenate(([0], changes, [flat.size]))
    lengths = np.diff(boundaries)
    if flat[0] != 0:
        runs.append(0)
    runs.extend(int(n) for n in lengths)
    return runs


def rle_decode(width: int, height: int, runs: list[int]) -> Mask:
    """Inverse of :func:`rle_encode`; raises BadResponse on malformed runs."""
    total = width * height
    if any((not isinstance(r, int)) or r < 0 for r in runs):
        raise BadResponse(f"run lengths must be non-negative integers, got {runs!r}")
    if sum(runs) != total:
        raise BadResponse(f"run lengths sum to {sum(runs)}, expected {total}")
    flat = np.zeros(total, dtype=np.uint8)
    pos = 0
    value = 0
    for run in runs:
        if value:
            flat[pos : pos + run] = 1
        pos += run
        value ^= 1
    return Mask(width=width, height=height, bits=flat.tobytes())
