"""Golden wire-protocol tests.

Client-built request bodies must match the checked-in goldens byte-for-byte
after canonicalization, and every body must validate against the shipped
JSON Schemas. Golden PNG payloads are produced by the Pillow version pinned
in this environment.
"""

import json
from pathlib import Path

import jsonschema
import pytest

from mosaic.backends import MockBackend
from mosaic.backends import protocol
from mosaic.images import ImageRGB

GOLDEN_DIR = Path(__file__).parent / "golden"


def golden_bytes(name: str) -> bytes:
    return (GOLDEN_DIR / f"{name}.json").read_bytes()


def golden_obj(name: str) -> dict:
    return json.loads(golden_bytes(name))


@pytest.fixture(scope="module")
def pinned():
    inputs = json.loads((GOLDEN_DIR / "inputs.json").read_text())
    tiny = ImageRGB(width=inputs["tiny_image"]["width"],
                    height=inputs["tiny_image"]["height"],
                    data=bytes(inputs["tiny_image"]["data"]))
    return inputs, tiny, MockBackend()


class TestRequestBodies:
    def test_text_encode(self, pinned):
        inputs, _, _ = pinned
        body = protocol.text_encode_request(inputs["text"])
        assert protocol.canonical_json(body) == golden_bytes("text_encode.request")

    def test_image_encode(self, pinned):
        _, tiny, _ = pinned
        body = protocol.image_encode_request(tiny)
        assert protocol.canonical_json(body) == golden_bytes("image_encode.request")

    def test_mask(self, pinned):
        inputs, _, backend = pinned
        body = protocol.mask_request(inputs["gray16_encoding_id"], inputs["mask_object"],
                                     backend.encode_text(inputs["mask_object"]))
        assert protocol.canonical_json(body) == golden_bytes("mask.request")

    def test_stylize(self, pinned):
        inputs, tiny, backend = pinned
        body = protocol.stylize_request(tiny, inputs["text"], backend.encode_text(inputs["text"]))
        assert protocol.canonical_json(body) == golden_bytes("stylize.request")

    def test_image_embed(self, pinned):
        _, tiny, _ = pinned
        body = protocol.image_embed_request(tiny)
        assert protocol.canonical_json(body) == golden_bytes("image_embed.request")


class TestResponseBodies:
    """Golden responses are exactly what mock semantics dictate."""

    def test_text_encode(self, pinned):
        inputs, _, backend = pinned
        want = {"embedding": list(backend.encode_text(inputs["text"]).values)}
        assert protocol.canonical_json(want) == golden_bytes("text_encode.response")

    def test_image_encode(self, pinned):
        _, tiny, backend = pinned
        enc = backend.encode_image(tiny)
        want = {"encoding_id": enc.encoding_id, "width": enc.width, "height": enc.height}
        assert protocol.canonical_json(want) == golden_bytes("image_encode.response")

    def test_mask_response_is_the_frozen_rectangle(self, pinned):
        body = golden_obj("mask.response")
        assert (body["width"], body["height"]) == (16, 16)
        # rect (x0=3, y0=15, w=10, h=1) on 16x16, frozen from the oracle
        assert body["mask_rle"] == [243, 10, 3]
        mask = protocol.mask_from_runs(body["width"], body["height"], body["mask_rle"])
        arr = mask.to_array()
        assert arr[15, 3:13].all() and arr.sum() == 10

    def test_stylize_response_decodes_to_mock_output(self, pinned):
        inputs, tiny, backend = pinned
        out = protocol.png_from_b64(golden_obj("stylize.response")["image_png_b64"])
        want = backend.stylize(tiny, inputs["text"], backend.encode_text(inputs["text"]))
        assert out == want

    def test_health(self):
        assert golden_obj("health.response") == {"status": "ok", "embedding_dim": 512}


class TestSchemaConformance:
    @pytest.mark.parametrize("name", protocol.SCHEMA_NAMES)
    def test_golden_bodies_validate(self, name):
        schema = protocol.load_schema(name)
        jsonschema.Draft202012Validator.check_schema(schema)
        jsonschema.validate(golden_obj(name), schema)

    def test_canonicalization_is_stable(self):
        obj = {"b": 1.5, "a": [1, 2], "c": "x"}
        assert protocol.canonical_json(obj) == b'{"a":[1,2],"b":1.5,"c":"x"}'
        assert protocol.canonical_json(obj) == protocol.canonical_json(json.loads(
            protocol.canonical_json(obj)))
