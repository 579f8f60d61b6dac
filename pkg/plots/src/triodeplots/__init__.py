"""Figure generation for triode-lab run directories."""

__version__ = "0.1.0"

from .figures import FIGURE_KINDS, FigureSpec, MissingInputError, render  # noqa: F401
