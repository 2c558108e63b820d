"""Offline figure generation from negcurv CLI artifacts.

A pure consumer: every figure is rendered from serialized CSV/JSON files
written by the primary command-line tool; nothing is recomputed.
"""

from .figures import FIGURE_KINDS, FigureSpec, PlotsError, render

__all__ = ["FIGURE_KINDS", "FigureSpec", "PlotsError", "render"]
__version__ = "0.1.0"
