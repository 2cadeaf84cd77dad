"""Figure regeneration for the reflected-Brownian-motion estimator experiments."""

from .plotting import (FigureSpec, KINDS, SchemaError, plot_error_complexity,
                       plot_mse_band, read_table, render)

__version__ = "0.1.0"
