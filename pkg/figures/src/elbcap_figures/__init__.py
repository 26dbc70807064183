"""Multi-panel image rendering for the solver's figure CSV datasets."""

from .render import Dataset, FigureSpec, SchemaError, read_dataset, render

__version__ = "0.1.0"
