"""Plots and slope fits for sysid sweep CSVs."""

from .curves import (EmptyGroup, PlotSpec, SchemaMismatch, fit_loglog_slope,
                     plot_error_curves, read_sweep_csv)

__all__ = ["EmptyGroup", "PlotSpec", "SchemaMismatch", "fit_loglog_slope",
           "plot_error_curves", "read_sweep_csv"]
__version__ = "0.1.0"
