"""Fixtures: a TestClient app, a live uvicorn server, and a synthetic scene."""

from __future__ import annotations

import base64
import io
import socket
import threading
import time

import numpy as np
import pytest
import uvicorn
from fastapi.testclient import TestClient
from PIL import Image

from mosaic_sidecar.models import ModelRegistry
from mosaic_sidecar.server import create_app


def scene_image(width: int = 64, height: int = 64) -> np.ndarray:
    """Sky over grass with a sun disc; gives the color-prior segmenter
    something recognizable to find."""
    arr = np.zeros((height, width, 3), dtype=np.uint8)
    for y in range(height // 2):
        t = y / max(1, height // 2)
        arr[y, :] = (int(90 + 40 * t), int(130 + 30 * t), int(210 - 20 * t))
    arr[height // 2 :, :] = (70, 150, 60)
    yy, xx = np.mgrid[0:height, 0:width]
    sun = (yy - height // 5) ** 2 + (xx - 3 * width // 4) ** 2 <= (height // 8) ** 2
    arr[sun] = (235, 215, 80)
    return arr


def png_b64(arr: np.ndarray) -> str:
    im = Image.fromarray(arr, mode="RGB")
    buf = io.BytesIO()
    im.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


@pytest.fixture(scope="session")
def app():
    return create_app(ModelRegistry())


@pytest.fixture(scope="session")
def client(app):
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


@pytest.fixture(scope="session")
def live_server():
    """Real uvicorn server on an ephemeral port, for socket-level clients."""
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(create_app(ModelRegistry()), host="127.0.0.1", port=port,
                            log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("sidecar server failed to start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
