"""Minimum kinetic energy needed to localize a field to a given width."""

from __future__ import annotations

from typing import Sequence

from ..collapse import collapse_threshold
from ..errors import ConfigError, NonpositiveWidth
from ..wavefield import SI_ELECTRON, UnitSystem

NANOMETRE = 1e-9
DEFAULT_WIDTHS_NM = (1.0, 0.1, 0.01, 0.001)


def localization_energy_ev(width: float, units: UnitSystem = SI_ELECTRON) -> float:
    """``hbar^2 / (8 m width^2)`` in electronvolts (``width`` in the system's length unit)."""
    if units.ev is None:
        raise ConfigError(f"unit system {units.label!r} has no electronvolt conversion")
    return collapse_threshold(width, units) / units.ev


def localization_table(units: UnitSystem = SI_ELECTRON, widths: Sequence[float] | None = None,
                       length_unit: float = NANOMETRE) -> list[tuple[float, float]]:
    """Rows ``(width, energy_ev)``; widths are given in multiples of ``length_unit``."""
    widths = DEFAULT_WIDTHS_NM if widths is None else tuple(widths)
    for w in widths:
        if not w > 0:
            raise NonpositiveWidth(f"width must be positive, got {w}")
    return [(float(w), localization_energy_ev(w * length_unit, units)) for w in widths]
