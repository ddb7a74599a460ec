"""Reference inference server for the mosaic wire protocol."""

from .models import ModelRegistry, register_model
from .server import create_app

__version__ = "0.1.0"

__all__ = ["ModelRegistry", "create_app", "register_model"]
