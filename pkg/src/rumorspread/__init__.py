"""Rumor spreading dynamics, search-index influence fitting and feature analysis."""
from .influence import (FitResult, SearchSeries, extract_window, fit_exponential,
                        intensity_bounds, ls_step, total_intensity, update_bias)
from .spread import (ModelParams, StateVector, Trajectory, derivatives, new_insider_rate,
                     simulate)

__version__ = "0.1.0"

__all__ = [
    "FitResult", "ModelParams", "SearchSeries", "StateVector", "Trajectory",
    "derivatives", "extract_window", "fit_exponential", "intensity_bounds", "ls_step",
    "new_insider_rate", "simulate", "total_intensity", "update_bias",
]
