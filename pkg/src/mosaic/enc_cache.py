"""Content-addressed LRU cache of image encodings with request coalescing.

One image encode serves many mask queries: entries are keyed by the pixel
content hash (FNV-1a-64 over dimensions + raw bytes), so the same image
under two names still hits. Concurrent misses on one key block behind a
single in-flight encode; failures are never cached.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from concurrent.futures import Future
from dataclasses import dataclass

from .backends.base import ImageEncoding, ModelBackend
from .images import ImageRGB

DEFAULT_CAPACITY = 8


@dataclass(frozen=True)
class CacheStats:
    hits: int
    misses: int
    evictions: int
    capacity: int

    @property
    def lookups(self) -> int:
        return self.hits + self.misses


class EncodingCache:
    """Thread-safe LRU over completed encodings plus an in-flight table.

    A lookup that joins an in-flight encode counts as a hit: it is served
    without a new backend call. Only successful encodes are stored.
    """

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._lock = threading.Lock()
        self._store: OrderedDict[int, ImageEncoding] = OrderedDict()
        self._inflight: dict[int, Future] = {}
        self._hits = 0
        self._misses = 0
        self._evictions = 0

    def get_or_encode(self, img: ImageRGB, backend: ModelBackend) -> ImageEncoding:
        key = img.fingerprint()
        initiate = False
        with self._lock:
            if key in self._store:
                self._store.move_to_end(key)
                self._hits += 1
                return self._store[key]
            if key in self._inflight:
                self._hits += 1
                fut = self._inflight[key]
            else:
                self._misses += 1
                fut = Future()
                self._inflight[key] = fut
                initiate = True
        if initiate:
            return self._encode_and_store(key, img, backend, fut)
        return fut.result()

    def _encode_and_store(self, key: int, img: ImageRGB, backend: ModelBackend, fut: Future) -> ImageEncoding:
        try:
            enc = backend.encode_image(img)
        except BaseException as exc:
            with self._lock:
                del self._inflight[key]
            fut.set_exception(exc)
            raise
        with self._lock:
            del self._inflight[key]
            self._store[key] = enc
            if len(self._store) > self.capacity:
                self._store.popitem(last=False)
                self._evictions += 1
        fut.set_result(enc)
        return enc

    def stats(self) -> CacheStats:
        with self._lock:
            return CacheStats(hits=self._hits, misses=self._misses,
                              evictions=self._evictions, capacity=self.capacity)

    def reset_stats(self) -> None:
        with self._lock:
            self._hits = self._misses = self._evictions = 0

    def clear(self) -> None:
        with self._lock:
            self._store.clear()
            self._hits = self._misses = self._evictions = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._store)
