"""Figure rendering for the pair-conversion simulator's CSV outputs.

This package talks to the simulator only through the files its CLI
writes: population-history CSVs from `uscpair run` and efficiency-curve
CSVs from `uscpair scan`.  It never imports the simulator, so the CSV
format documented there is the whole interface.
"""

from .csvio import EfficiencyTable, HistoryTable, read_efficiency, read_history
from .figures import FigureSpec, plot_efficiency, plot_history, render_efficiency, render_history

__version__ = "0.1.0"

__all__ = [
    "EfficiencyTable",
    "HistoryTable",
    "read_efficiency",
    "read_history",
    "FigureSpec",
    "plot_efficiency",
    "plot_history",
    "render_efficiency",
    "render_history",
    "__version__",
]
