"""JSON-over-HTTP access to the stretch pipeline."""

from .app import create_app

__all__ = ["create_app"]
