"""Offline figure rendering for emwalk experiment CSV artifacts."""

__version__ = "0.1.0"

from .errors import MissingFile, RenderError, SchemaMismatch
from .render import render
from .specs import FIGURE_KINDS, PlotSpec

__all__ = ["FIGURE_KINDS", "MissingFile", "PlotSpec", "RenderError",
           "SchemaMismatch", "render", "__version__"]
