"""Figure rendering for subdeco sweep artifacts (CSV in, images out)."""

from .render import FigureSpec, SchemaError, build_figure, render, SCHEMAS

__version__ = "0.1.0"
