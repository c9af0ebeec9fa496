"""FastAPI service shell around the core library."""

from .app import app

__all__ = ["app"]
