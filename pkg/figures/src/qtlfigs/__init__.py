"""Batch figure renderer for qtledger run directories.

Consumes only the published file interface of a run directory —
``ledger.csv``, ``entropy.csv`` and (optionally) ``meta.json`` — and
renders a flux-comparison figure plus an entropy/mutual-information
figure, each in SVG and PNG.
"""

from .reader import (
    ENTROPY_COLUMNS,
    LEDGER_COLUMNS,
    LedgerSeries,
    MissingColumnsError,
    RunData,
    load_entropy,
    load_ledger,
    load_run_dir,
)
from .render import FigureSpec, render_entropy_figure, render_flux_figure, render_run

__all__ = [
    "ENTROPY_COLUMNS",
    "LEDGER_COLUMNS",
    "LedgerSeries",
    "MissingColumnsError",
    "RunData",
    "load_entropy",
    "load_ledger",
    "load_run_dir",
    "FigureSpec",
    "render_entropy_figure",
    "render_flux_figure",
    "render_run",
]

__version__ = "0.1.0"
