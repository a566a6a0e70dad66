"""Born-rule location sampling, the collapse operator and collapse criteria."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NonpositiveWidth, ZeroField
from .events import InteractionEvent, energy_density
from .wavefield import NATURAL, UnitSystem, Wavefield, localization_width, normalize


class Shape(enum.Enum):
    GAUSSIAN = "gaussian"
    DELTA = "delta"


class Criterion(enum.Enum):
    THRESHOLD = "threshold"
    INDICATOR = "indicator"


@dataclass(frozen=True)
class CollapseOperator:
    """Localizing operator template.

    ``width`` is the amplitude-envelope parameter ``sigma_c`` of
    ``exp(-(x - x0)^2 / (4 sigma_c^2))``; ``None`` means two grid spacings.
    """

    width: float | None = None
    shape: Shape = Shape.GAUSSIAN

    def resolved_width(self, psi: Wavefield) -> float:
        dx = max(psi.grid.dx)
        width = 2.0 * dx if self.width is None else float(self.width)
        if self.shape is Shape.GAUSSIAN and width < dx:
            raise ConfigError(f"operator width {width} is below the grid spacing {dx}")
        return width


@dataclass(frozen=True)
class CollapsePolicy:
    criterion: Criterion = Criterion.THRESHOLD
    units: UnitSystem = NATURAL
    epsilon_c: float | None = None
    D: float | None = None
    operator: CollapseOperator = field(default_factory=CollapseOperator)

    def __post_init__(self):
        if self.criterion is Criterion.INDICATOR:
            if self.epsilon_c is None or self.D is None or not (self.epsilon_c > 0 and self.D > 0):
                raise ConfigError("indicator criterion needs epsilon_c > 0 and D > 0")


class BornSampler:
    """Categorical sampler over grid cells with probability ``|psi_i|^2 dV``.

    ``region`` (a boolean mask) restricts the support; probabilities are then
    renormalized inside it.
    """

    def __init__(self, psi: Wavefield, region: np.ndarray | None = None):
        p = psi.probabilities().ravel()
        if region is not None:
            p = np.where(np.asarray(region).ravel(), p, 0.0)
        cdf = np.cumsum(p)
        if not cdf.size or not cdf[-1] > 0:
            raise ZeroField("no probability mass to sample from")
        self.grid = psi.grid
        self.cdf = cdf

    def draw_index(self, rng: np.random.Generator) -> int:
        u = rng.random() * self.cdf[-1]
        return int(min(np.searchsorted(self.cdf, u, side="right"), self.cdf.size - 1))

    def draw_indices(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n) * self.cdf[-1]
        return np.minimum(np.searchsorted(self.cdf, u, side="right"), self.cdf.size - 1)

    def position(self, flat_index: int):
        return self.grid.point(np.unravel_index(flat_index, self.grid.shape))

    def draw(self, rng: np.random.Generator):
        return self.position(self.draw_index(rng))


def born_sample(psi: Wavefield, rng: np.random.Generator, region: np.ndarray | None = None):
    """Sample a grid-point position with probability ``|psi|^2 dV``."""
    return BornSampler(psi, region).draw(rng)


def apply_collapse(psi: Wavefield, x0, op: CollapseOperator = CollapseOperator()) -> Wavefield:
    """Apply the localizing operator at ``x0`` and renormalize."""
    grid = psi.grid
    idx = grid.nearest_index(x0)
    if op.shape is Shape.DELTA:
        a = psi.amps[idx]
        if abs(a) == 0:
            raise ZeroField(f"field vanishes at collapse site {x0}")
        amps = np.zeros(grid.shape, dtype=np.complex128)
        amps[idx] = a / abs(a) / np.sqrt(grid.dV)
        return Wavefield(grid, amps, psi.t)
    width = op.resolved_width(psi)
    center = grid.point(idx)
    center = (center,) if grid.dim == 1 else center
    # separable envelope: outer product of per-axis factors
    envelope = np.ones((), dtype=float)
    for ax, c in zip(grid.axes, center):
        envelope = np.multiply.outer(envelope, np.exp(-((ax - c) ** 2) / (4.0 * width * width)))
    try:
        return normalize(psi.replace(amps=psi.amps * envelope))
    except ZeroField:
        raise ZeroField(f"collapse operator at {x0} annihilates the field") from None


def collapse_threshold(delta_x: float, units: UnitSystem = NATURAL) -> float:
    """Minimum energy transfer that localizes a field of width ``delta_x``: hbar^2 / (8 m dx^2)."""
    if not delta_x > 0:
        raise NonpositiveWidth(f"width must be positive, got {delta_x}")
    return units.hbar ** 2 / (8.0 * units.mass * delta_x ** 2)


def field_threshold(psi: Wavefield, units: UnitSystem = NATURAL) -> float:
    """Collapse threshold at the live localization width of ``psi``."""
    width = localization_width(psi)
    if width <= 0:
        return float("inf")
    return collapse_threshold(width, units)


def gradient_density(psi: Wavefield) -> np.ndarray:
    """``|grad psi|^2`` from periodic central differences."""
    total = np.zeros(psi.grid.shape)
    for axis, d in enumerate(psi.grid.dx):
        g = (np.roll(psi.amps, -1, axis) - np.roll(psi.amps, 1, axis)) / (2.0 * d)
        total += np.abs(g) ** 2
    return total


def indicator_integral(psi: Wavefield, event: InteractionEvent, policy: CollapsePolicy) -> float:
    """Integral of ``|grad psi|^2`` over cells where the event's energy density exceeds ``epsilon_c``."""
    if policy.epsilon_c is None:
        raise ConfigError("indicator integral needs epsilon_c")
    active = energy_density(event, psi.grid) > policy.epsilon_c
    if not active.any():
        return 0.0
    return float(np.sum(gradient_density(psi)[active]) * psi.grid.dV)


def check_collapse(psi: Wavefield, event: InteractionEvent, policy: CollapsePolicy) -> bool:
    if policy.criterion is Criterion.THRESHOLD:
        return event.energy >= field_threshold(psi, policy.units)
    return indicator_integral(psi, event, policy) > policy.D
