"""Render simulation result CSVs into figures.

Only the CSV files are consumed; the simulator itself is never imported.
"""

from .csvdata import DataTable, EmptyDataError, MissingColumnError, read_table
from .figures import KINDS, FigureError, FigureSpec, build_figure, render

__all__ = [
    "DataTable",
    "EmptyDataError",
    "FigureError",
    "FigureSpec",
    "KINDS",
    "MissingColumnError",
    "build_figure",
    "read_table",
    "render",
]
