"""Sub-threshold deformation of a wavefield.

A transfer of energy ``E`` below the collapse threshold ``E_c`` of a field of
width ``w0`` narrows it to ``w0 * (1 - (E / E_c)**gamma)``.  Sequences of such
transfers accumulate either additively or multiplicatively, with the
multiplicative form recomputing ``E_c`` from the current width.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .collapse import collapse_threshold
from .errors import ConfigError, EnergyAtOrAboveThreshold, TargetUnreachable, ZeroField
from .events import InteractionEvent
from .wavefield import NATURAL, UnitSystem, Wavefield, localization_width, normalize


class Mode(enum.Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


@dataclass(frozen=True)
class DeformationParams:
    gamma: float = 1.0
    mode: Mode = Mode.MULTIPLICATIVE
    # energy -> width decrement; additive mode only.  None selects
    # w0 * (E / E_c(w0))**gamma, which matches a single multiplicative step.
    additive_map: Callable[[float], float] | None = None

    def __post_init__(self):
        if not self.gamma >= 1:
            raise ConfigError(f"gamma must be >= 1, got {self.gamma}")
        if self.additive_map is not None and self.additive_map(0.0) != 0:
            raise ConfigError("additive_map(0) must be 0")


def deform_width(delta_x0: float, e: float, params: DeformationParams = DeformationParams(),
                 units: UnitSystem = NATURAL) -> float:
    e_c = collapse_threshold(delta_x0, units)
    if e < 0:
        raise ConfigError(f"energy must be non-negative, got {e}")
    if e >= e_c:
        raise EnergyAtOrAboveThreshold(f"E={e:.6g} meets the collapse threshold {e_c:.6g}")
    return delta_x0 * (1.0 - (e / e_c) ** params.gamma)


def deform_sequence(delta_x0: float, energies: Sequence[float],
                    params: DeformationParams = DeformationParams(),
                    units: UnitSystem = NATURAL) -> tuple[float, int | None]:
    """Fold a sequence of transfers into a final width.

    Returns ``(width, index)`` where ``index`` is the first event that meets
    or exceeds the threshold at the width current when it arrives (``None``
    if the field never collapses).  The returned width is the width just
    before that event.  In additive mode an event whose decrement would
    exhaust the remaining width also counts as the collapse point.
    """
    widths = width_trace(delta_x0, energies, params, units)
    index = len(widths) - 1
    return widths[-1], (index if index < len(energies) else None)


def _decrement(width: float, e: float, delta_x0: float, params: DeformationParams, units: UnitSystem) -> float:
    if params.additive_map is not None:
        return float(params.additive_map(e))
    return delta_x0 * (e / collapse_threshold(delta_x0, units)) ** params.gamma


def _collapses(width, e, delta_x0, params, units) -> bool:
    if e >= collapse_threshold(width, units):
        return True
    return params.mode is Mode.ADDITIVE and _decrement(width, e, delta_x0, params, units) >= width


def width_trace(delta_x0: float, energies: Sequence[float],
                params: DeformationParams = DeformationParams(),
                units: UnitSystem = NATURAL) -> list[float]:
    """Widths ``[w0, w1, ...]`` up to (not past) the collapse point."""
    if any(e < 0 for e in energies):
        raise ConfigError("energies must be non-negative")
    collapse_threshold(delta_x0, units)  # validates delta_x0
    widths = [float(delta_x0)]
    for e in energies:
        w = widths[-1]
        if _collapses(w, e, delta_x0, params, units):
            break
        if params.mode is Mode.MULTIPLICATIVE:
            w = w * (1.0 - (e / collapse_threshold(w, units)) ** params.gamma)
        else:
            w = w - _decrement(w, e, delta_x0, params, units)
        widths.append(w)
    return widths


def _envelope(psi: Wavefield, center, width: float) -> np.ndarray:
    center = np.broadcast_to(np.asarray(center, dtype=float), (psi.grid.dim,))
    env = np.ones((), dtype=float)
    for ax, c in zip(psi.grid.axes, center):
        env = np.multiply.outer(env, np.exp(-((ax - c) ** 2) / (4.0 * width * width)))
    return env


def target_width(current: float, energy: float, params: DeformationParams, units: UnitSystem) -> float:
    if params.mode is Mode.ADDITIVE and params.additive_map is not None:
        if energy >= collapse_threshold(current, units):
            raise EnergyAtOrAboveThreshold(f"E={energy:.6g} meets the collapse threshold")
        return current - float(params.additive_map(energy))
    return deform_width(current, energy, params, units)


def apply_deformation(psi: Wavefield, event: InteractionEvent,
                      params: DeformationParams = DeformationParams(),
                      units: UnitSystem = NATURAL, rtol: float = 1e-3) -> Wavefield:
    """Narrow ``psi`` with a Gaussian envelope centred on the event.

    The envelope width is found by bisection so that the localization width of
    the result matches the deformation law for ``event.energy``.  Phases are
    untouched.
    """
    if event.energy == 0:
        return psi
    current = localization_width(psi)
    target = target_width(current, event.energy, params, units)
    if target > current:
        raise TargetUnreachable(f"target width {target:.6g} exceeds current width {current:.6g}")
    if target <= 0:
        raise TargetUnreachable("deformation would remove the whole width")
    if current - target <= rtol * target:
        return psi

    def narrowed(s):
        return normalize(psi.replace(amps=psi.amps * _envelope(psi, event.center, s)))

    def width_at(s):
        try:
            field = narrowed(s)
        except ZeroField:
            return None, 0.0
        return field, localization_width(field)

    lo = 0.25 * min(psi.grid.dx)
    hi = 100.0 * max(b - a for a, b in zip(psi.grid.x_min, psi.grid.x_max))
    if width_at(lo)[1] > target:
        raise TargetUnreachable(f"target width {target:.6g} is below grid resolution")
    best = psi
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        candidate, w = width_at(mid)
        if candidate is not None:
            best = candidate
        if abs(w - target) <= rtol * target:
            break
        if w > target:
            hi = mid
        else:
            lo = mid
    return best
