"""Unitary split-operator propagation of a wavefield.

Each step applies half a potential phase, the full kinetic phase in
wavenumber space, then the second half of the potential phase (Strang
splitting).  The scheme is second order in ``dt`` and preserves the norm up
to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError, StepTooLarge
from .wavefield import NATURAL, GridSpec, UnitSystem, Wavefield

PHASE_GUARD = 0.5
HARD_BARRIER_HEIGHT = 1e6


class Potential:
    """Static potential evaluated on a grid."""

    kind = "abstract"

    def values(self, grid: GridSpec) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class FreePotential(Potential):
    kind = "free"

    def values(self, grid):
        return np.zeros(grid.shape)


@dataclass(frozen=True)
class HarmonicPotential(Potential):
    """``V = stiffness/2 * |x - center|^2``."""

    stiffness: float
    center: float | tuple[float, ...] = 0.0
    kind = "harmonic"

    def __post_init__(self):
        if not self.stiffness > 0:
            raise ConfigError("harmonic stiffness must be positive")

    def values(self, grid):
        center = np.broadcast_to(np.asarray(self.center, dtype=float), (grid.dim,))
        r2 = sum((x - c) ** 2 for x, c in zip(grid.mesh(), center))
        return 0.5 * self.stiffness * r2


@dataclass(frozen=True)
class BarrierPotential(Potential):
    """Wall of finite height across axis 0, optionally pierced by slits.

    The wall occupies ``|x - position| <= thickness/2``.  In 2D each slit is a
    ``(center, width)`` opening along axis 1.
    """

    position: float
    thickness: float
    height: float = HARD_BARRIER_HEIGHT
    slits: tuple[tuple[float, float], ...] = field(default=())
    kind = "barrier"

    def __post_init__(self):
        if not self.thickness > 0:
            raise ConfigError("barrier thickness must be positive")
        slits = tuple(sorted((float(c), float(w)) for c, w in self.slits))
        for c, w in slits:
            if not w > 0:
                raise ConfigError(f"slit width must be positive, got {w}")
        for (c1, w1), (c2, w2) in zip(slits, slits[1:]):
            if c1 + w1 / 2 >= c2 - w2 / 2:
                raise ConfigError("slits overlap")
        object.__setattr__(self, "slits", slits)

    def wall_mask(self, grid: GridSpec) -> np.ndarray:
        mesh = grid.mesh()
        wall = np.abs(mesh[0] - self.position) <= self.thickness / 2
        if self.slits:
            if grid.dim < 2:
                raise ConfigError("slits need a 2D grid")
            for c, w in self.slits:
                wall &= ~(np.abs(mesh[1] - c) <= w / 2)
        return wall

    def values(self, grid):
        return np.where(self.wall_mask(grid), self.height, 0.0)


@dataclass(frozen=True, eq=False)
class SampledPotential(Potential):
    array: np.ndarray
    kind = "sampled"

    def values(self, grid):
        v = np.asarray(self.array, dtype=float)
        if v.shape != grid.shape:
            raise ConfigError(f"sampled potential shape {v.shape} does not match grid {grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ConfigError("sampled potential has non-finite values")
        return v


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    n_steps: int
    units: UnitSystem = NATURAL

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 0:
            raise ConfigError("n_steps must be non-negative")


class Propagator:
    """Precomputed split-operator phases for one grid, potential and step size."""

    def __init__(self, grid: GridSpec, potential: Potential, dt: float, units: UnitSystem = NATURAL):
        v = potential.values(grid)
        vmax = float(np.max(np.abs(v))) if v.size else 0.0
        if vmax * abs(dt) / units.hbar >= PHASE_GUARD:
            raise StepTooLarge(
                f"max|V|*dt/hbar = {vmax * abs(dt) / units.hbar:.3g} exceeds {PHASE_GUARD}; reduce dt")
        self.grid = grid
        self.dt = dt
        k2 = sum(k ** 2 for k in grid.kmesh())
        self.half_potential = np.exp(-0.5j * dt * v / units.hbar)
        self.kinetic = np.exp(-0.5j * units.hbar * dt * k2 / units.mass)
        self.free = not np.any(v)

    def apply(self, amps: np.ndarray) -> np.ndarray:
        if self.free:
            return sfft.ifftn(sfft.fftn(amps) * self.kinetic)
        amps = amps * self.half_potential
        amps = sfft.ifftn(sfft.fftn(amps) * self.kinetic)
        return amps * self.half_potential

    def __call__(self, psi: Wavefield) -> Wavefield:
        return Wavefield(psi.grid, self.apply(psi.amps), psi.t + self.dt)


def step(psi: Wavefield, v: Potential, dt: float, units: UnitSystem = NATURAL) -> Wavefield:
    """Advance ``psi`` by one time step ``dt`` (negative ``dt`` runs backwards)."""
    if dt == 0:
        return psi
    return Propagator(psi.grid, v, dt, units)(psi)


def trajectory(psi: Wavefield, v: Potential, cfg: EvolutionConfig) -> Iterator[Wavefield]:
    """Yield the field after each of ``cfg.n_steps`` steps."""
    prop = Propagator(psi.grid, v, cfg.dt, cfg.units)
    t0, amps = psi.t, psi.amps
    for k in range(1, cfg.n_steps + 1):
        amps = prop.apply(amps)
        yield Wavefield(psi.grid, amps, t0 + k * cfg.dt)


def evolve(psi: Wavefield, v: Potential, cfg: EvolutionConfig) -> Wavefield:
    prop = Propagator(psi.grid, v, cfg.dt, cfg.units)
    amps = psi.amps
    for _ in range(cfg.n_steps):
        amps = prop.apply(amps)
    return Wavefield(psi.grid, amps, psi.t + cfg.n_steps * cfg.dt)


def evolve_until(psi: Wavefield, v: Potential, dt: float, units: UnitSystem,
                 stop: Callable[[Wavefield], bool], max_steps: int,
                 propagator: Propagator | None = None) -> tuple[Wavefield, int] | tuple[None, int]:
    """Step until ``stop(field)`` holds; returns the field and the step count.

    Returns ``(None, max_steps)`` if the condition is never met.
    """
    prop = propagator or Propagator(psi.grid, v, dt, units)
    t0, amps = psi.t, psi.amps
    current = psi
    for k in range(max_steps + 1):
        if k:
            amps = prop.apply(amps)
            current = Wavefield(psi.grid, amps, t0 + k * dt)
        if stop(current):
            return current, k
    return None, max_steps


def make_potential(kind: str, **params) -> Potential:
    kinds = {"free": FreePotential, "harmonic": HarmonicPotential, "barrier": BarrierPotential}
    try:
        cls = kinds[kind]
    except KeyError:
        raise ConfigError(f"unknown potential kind {kind!r}; expected one of {sorted(kinds)}") from None
    return cls(**params)


__all__: Sequence[str] = [
    "Potential", "FreePotential", "HarmonicPotential", "BarrierPotential", "SampledPotential",
    "EvolutionConfig", "Propagator", "step", "evolve", "trajectory", "evolve_until", "make_potential",
]
