"""Process entry point: config file parsing and uvicorn launch.

Config file is ``key = value`` lines with ``#`` comments. Keys:
host, port, device, and per-role implementation picks
(text_encoder, image_encoder, mask_generator, stylizer), to swap a
builtin model for a registered heavyweight one.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

import uvicorn

from .models import ModelRegistry
from .server import create_app

_ROLE_KEYS = {
    "text_encoder": "text-encoder",
    "image_encoder": "image-encoder",
    "mask_generator": "mask-generator",
    "stylizer": "stylizer",
}


@dataclass
class SidecarConfig:
    host: str = "127.0.0.1"
    port: int = 8731
    device: str = "cpu"
    implementations: dict = field(default_factory=dict)


def load_config(path: str | Path) -> SidecarConfig:
    cfg = SidecarConfig()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key == "host":
            cfg.host = value
        elif key == "port":
            cfg.port = int(value)
        elif key == "device":
            cfg.device = value
        elif key in _ROLE_KEYS:
            cfg.implementations[_ROLE_KEYS[key]] = value
        else:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return cfg


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="mosaic inference sidecar")
    parser.add_argument("--config", type=Path, default=None, help="config file path")
    parser.add_argument("--host", default=None)
    parser.add_argument("--port", type=int, default=None)
    args = parser.parse_args(argv)

    cfg = load_config(args.config) if args.config else SidecarConfig()
    if args.host:
        cfg.host = args.host
    if args.port:
        cfg.port = args.port

    registry = ModelRegistry(device=cfg.device, implementations=cfg.implementations)
    uvicorn.run(create_app(registry), host=cfg.host, port=cfg.port, log_level="warning")


if __name__ == "__main__":
    main()
