from .main import build_parser, main
from .manifest import RunManifest

__all__ = ["build_parser", "main", "RunManifest"]
