from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .wavefield import GridSpec


@dataclass(frozen=True)
class InteractionEvent:
    """A localized transfer of kinetic energy to the field.

    ``extent`` is the standard deviation of the Gaussian energy-density bump
    centered at ``center``.  ``aperture`` optionally restricts where the
    interaction can localize the field: a box with one ``(lo, hi)`` pair per
    axis.  ``None`` means the whole domain.
    """

    t: float
    center: float | tuple[float, ...]
    extent: float
    energy: float
    aperture: tuple | None = None
    label: str = ""

    def __post_init__(self):
        if self.energy < 0:
            raise ConfigError(f"event energy must be non-negative, got {self.energy}")
        if not self.extent > 0:
            raise ConfigError(f"event extent must be positive, got {self.extent}")

    def aperture_mask(self, grid: GridSpec) -> np.ndarray | None:
        if self.aperture is None:
            return None
        return grid.region_mask(self.aperture)


def energy_density(event: InteractionEvent, grid: GridSpec) -> np.ndarray:
    """Gaussian energy-density profile whose integral is ``event.energy``."""
    center = np.broadcast_to(np.asarray(event.center, dtype=float), (grid.dim,))
    r2 = sum((x - c) ** 2 for x, c in zip(grid.mesh(), center))
    s2 = event.extent ** 2
    return event.energy * np.exp(-r2 / (2 * s2)) / (2 * np.pi * s2) ** (grid.dim / 2)
