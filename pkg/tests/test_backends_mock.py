"""Mock backend determinism and its normative formulas.

Expected constants were frozen from a standalone evaluation of the
documented FNV-1a-64 / splitmix64 definitions (see comments), independent
of the package implementation.
"""

import numpy as np
import pytest

from conftest import gradient_image
from mosaic.backends import MockBackend, style_deltas
from mosaic.backends.base import Embedding, ImageEncoding
from mosaic.errors import ImageTooLarge, UnknownEncoding
from mosaic.images import ImageRGB

# Frozen from the standalone oracle evaluation:
GRAY16_ENCODING_ID = "cbcd61e00ce00265"
TREE_ON_GRAY16_RECT = (3, 15, 10, 1)  # x0, y0, w, h
WATERCOLOR_DELTAS = (-25, -24, 54)
STARRY_NIGHT_DELTAS = (6, -44, -60)
IDENTITY_DELTA_PHRASE = "v000100341"  # offline phrase-space search hit for (0, 0, 0)
SHIFT_DELTA_PHRASE = "v002343276"  # offline search hit for (+10, -5, 0)


@pytest.fixture
def backend():
    return MockBackend()


class TestTextEncoder:
    def test_deterministic(self, backend):
        assert backend.encode_text("watercolor") == backend.encode_text("watercolor")

    def test_unit_norm(self, backend):
        emb = backend.encode_text("watercolor")
        assert abs(np.linalg.norm(emb.as_array()) - 1.0) <= 1e-6

    def test_distinct_texts_distinct_vectors(self, backend):
        a = backend.encode_text("a").as_array()
        b = backend.encode_text("b").as_array()
        cos = float(np.dot(a, b))
        assert cos < 1 - 1e-6
        # frozen from the oracle evaluation of the formula on both strings
        assert cos == pytest.approx(0.018434376670624558, abs=1e-15)

    def test_two_backends_agree(self):
        assert MockBackend().encode_text("x") == MockBackend().encode_text("x")

    def test_empty_text_rejected(self, backend):
        with pytest.raises(ValueError):
            backend.encode_text("")


class TestImageEncoder:
    def test_identical_pixels_identical_id(self, backend, gray_16):
        clone = ImageRGB(gray_16.width, gray_16.height, bytes(gray_16.data))
        assert backend.encode_image(gray_16) == backend.encode_image(clone)

    def test_known_encoding_id(self, backend, gray_16):
        assert backend.encode_image(gray_16).encoding_id == GRAY16_ENCODING_ID

    def test_one_channel_flip_changes_id(self, backend, gray_16):
        arr = gray_16.to_array().copy()
        arr[5, 5, 1] += 1
        assert backend.encode_image(ImageRGB.from_array(arr)).encoding_id != GRAY16_ENCODING_ID

    def test_zero_area_rejected_before_backend(self):
        with pytest.raises(ValueError):
            ImageRGB(width=0, height=1, data=b"")

    def test_size_limit(self, gray_16):
        limited = MockBackend(max_pixels=100)
        with pytest.raises(ImageTooLarge):
            limited.encode_image(gray_16)


class TestMaskGenerator:
    def test_known_rectangle(self, backend, gray_16):
        enc = backend.encode_image(gray_16)
        mask = backend.generate_mask(enc, "tree", backend.encode_text("tree"))
        x0, y0, w, h = TREE_ON_GRAY16_RECT
        arr = mask.to_array()
        assert arr[y0 : y0 + h, x0 : x0 + w].all()
        assert arr.sum() == w * h

    def test_deterministic(self, backend, gray_16):
        enc = backend.encode_image(gray_16)
        emb = backend.encode_text("tree")
        assert backend.generate_mask(enc, "tree", emb) == backend.generate_mask(enc, "tree", emb)

    def test_dims_match_encoding(self, backend):
        for w, h in [(5, 9), (32, 32), (1, 1)]:
            img = gradient_image(w, h, seed=w * 100 + h)
            enc = backend.encode_image(img)
            mask = backend.generate_mask(enc, "thing", backend.encode_text("thing"))
            assert (mask.width, mask.height) == (w, h)
            assert mask.count() >= 1

    def test_malformed_encoding_id_rejected(self, backend):
        enc = ImageEncoding(encoding_id="not-hex", width=4, height=4)
        with pytest.raises(UnknownEncoding):
            backend.generate_mask(enc, "tree", backend.encode_text("tree"))


class TestStylizer:
    def test_known_deltas(self):
        assert style_deltas("watercolor") == WATERCOLOR_DELTAS
        assert style_deltas("starry night") == STARRY_NIGHT_DELTAS

    def test_identity_phrase(self, backend, gray_16):
        assert style_deltas(IDENTITY_DELTA_PHRASE) == (0, 0, 0)
        emb = backend.encode_text(IDENTITY_DELTA_PHRASE)
        assert backend.stylize(gray_16, IDENTITY_DELTA_PHRASE, emb) == gray_16

    def test_solid_gray_shift(self, backend):
        # clamp-add rule by hand: (128,128,128) + (10,-5,0) -> (138,123,128)
        assert style_deltas(SHIFT_DELTA_PHRASE) == (10, -5, 0)
        img = ImageRGB.solid(4, 4, (128, 128, 128))
        out = backend.stylize(img, SHIFT_DELTA_PHRASE, backend.encode_text(SHIFT_DELTA_PHRASE))
        assert out.to_array().tolist() == [[[138, 123, 128]] * 4] * 4

    def test_clamping(self, backend):
        img = ImageRGB.solid(2, 2, (250, 3, 255))
        out = backend.stylize(img, "watercolor", backend.encode_text("watercolor"))
        # (-25, -24, 54) applied with clamping
        assert out.to_array()[0, 0].tolist() == [225, 0, 255]

    def test_dims_preserved(self, backend):
        for w, h in [(3, 7), (16, 2)]:
            img = gradient_image(w, h, seed=w + h)
            out = backend.stylize(img, "cubism", backend.encode_text("cubism"))
            assert (out.width, out.height) == (w, h)


class TestCropEmbedder:
    def test_deterministic_and_unit_norm(self, backend):
        img = gradient_image(6, 6)
        a = backend.embed_image(img)
        assert a == backend.embed_image(img)
        assert a.source == "image-crop"
        assert abs(np.linalg.norm(a.as_array()) - 1.0) <= 1e-6

    def test_content_sensitive(self, backend):
        a = backend.embed_image(gradient_image(6, 6, seed=1))
        b = backend.embed_image(gradient_image(6, 6, seed=2))
        assert a != b


class TestEmbeddingType:
    def test_never_silently_renormalized(self):
        values = [0.0] * 512
        values[0] = 0.9
        with pytest.raises(ValueError):
            Embedding(values=tuple(values), source="text")

    def test_dimension_enforced(self):
        with pytest.raises(ValueError):
            Embedding(values=(1.0,) * 511, source="text")

    def test_health(self):
        assert MockBackend().health() == {"status": "ok", "embedding_dim": 512}
