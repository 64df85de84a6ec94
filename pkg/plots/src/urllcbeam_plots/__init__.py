"""Figure rendering for urllcbeam CSV/JSON run outputs."""

from .figures import FIGURES, SchemaError, build_figure, render

__version__ = "0.1.0"

__all__ = ["FIGURES", "SchemaError", "build_figure", "render"]
