"""HTTP service wrapping the library pipeline."""
from .app import create_app

__all__ = ["create_app"]
