"""Canned experiment harnesses built on the trajectory engine."""

from .born import born_check, born_convergence, pooled_chi2, two_peak_field
from .double_slit import (DoubleSlitConfig, DoubleSlitResult, Packet, ScreenHistogram, SlitBarrier, WhichPath,
                          double_slit, sweep_detector_energy, visibility)
from .entangle import EntangledPairConfig, EntangledPairReport, entangled_pair
from .localization import DEFAULT_WIDTHS_NM, localization_energy_ev, localization_table

__all__ = [
    "born_check", "born_convergence", "pooled_chi2", "two_peak_field",
    "DoubleSlitConfig", "DoubleSlitResult", "Packet", "ScreenHistogram", "SlitBarrier", "WhichPath",
    "double_slit", "sweep_detector_energy", "visibility",
    "EntangledPairConfig", "EntangledPairReport", "entangled_pair",
    "DEFAULT_WIDTHS_NM", "localization_energy_ev", "localization_table",
]
