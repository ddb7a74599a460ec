"""Endpoint conformance smoke suite.

Asserts only protocol-level properties (shapes, norms, idempotence,
well-formed reports), never backend-specific pixel values, so the same
tests hold for any conforming server: by default an in-process stub, or a
live server when MOSAIC_ENDPOINT is set.
"""

import os

import jsonschema
import numpy as np
import pytest

from conftest import gradient_image
from mosaic.backends import HttpBackend
from mosaic.backends import protocol
from mosaic.pipeline import PipelineConfig, evaluate_run, run_pipeline


@pytest.fixture(scope="module")
def endpoint():
    external = os.environ.get("MOSAIC_ENDPOINT")
    if external:
        yield external
        return
    from wire_stub import MockWireServer

    server = MockWireServer().start()
    yield server.url
    server.stop()


@pytest.fixture(scope="module")
def client(endpoint):
    return HttpBackend(endpoint, timeout=60.0)


def test_health_reports_512(client):
    payload = client.check_health()
    assert payload["status"] == "ok"
    assert payload["embedding_dim"] == 512
    jsonschema.validate(payload, protocol.load_schema("health.response"))


def test_text_encode_norm_close_to_unity(client):
    emb = client.encode_text("a watercolor painting")
    assert abs(np.linalg.norm(emb.as_array()) - 1.0) <= 1e-3


def test_image_encode_idempotent(client):
    img = gradient_image(24, 20, seed=6)
    first = client.encode_image(img)
    second = client.encode_image(img)
    assert first.encoding_id == second.encoding_id
    assert (first.width, first.height) == (24, 20)


def test_mask_shape_and_nonempty(client):
    img = gradient_image(24, 20, seed=6)
    enc = client.encode_image(img)
    mask = client.generate_mask(enc, "tree", client.encode_text("tree"))
    assert (mask.width, mask.height) == (enc.width, enc.height)
    assert mask.count() >= 1


def test_stylize_preserves_dims(client):
    img = gradient_image(24, 20, seed=7)
    out = client.stylize(img, "watercolor", client.encode_text("watercolor"))
    assert (out.width, out.height) == (24, 20)


def test_crop_embedding_norm(client):
    emb = client.embed_image(gradient_image(16, 16, seed=8))
    assert emb.source == "image-crop"
    assert abs(np.linalg.norm(emb.as_array()) - 1.0) <= 1e-3


def test_end_to_end_run_and_eval(endpoint, tmp_path):
    content = gradient_image(48, 48, seed=12)
    path = tmp_path / "content.png"
    content.save(path)
    cfg = PipelineConfig(
        image_path=str(path),
        prompt="tree in watercolor style and sky in the style of starry night",
        backend="http", endpoint=endpoint, out_dir=str(tmp_path / "out"),
        seed=21, timeout=60.0,
    )
    result = run_pipeline(cfg)
    assert (result.composite.width, result.composite.height) == (48, 48)
    assert (tmp_path / "out" / "composite.png").exists()

    report = evaluate_run(result.out_dir, HttpBackend(endpoint, timeout=60.0))
    assert report.aggregate is not None
    assert 0.0 <= report.aggregate <= 1.0
    for obj in report.per_object:
        if not obj.skipped:
            assert len(obj.scores) == 8
            assert all(0.0 <= s <= 1.0 for s in obj.scores)
