"""Grid representation of a complex wavefield and its basic observables.

Grids are uniform and periodic: ``n`` points per axis spaced by
``dx = (x_max - x_min) / n`` starting at ``x_min``.  Arrays use ``ij``
indexing, so axis 0 is x and axis 1 is y.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.constants as const
import scipy.fft as sfft

from .errors import GridError, OutOfDomain, UnresolvableWidth, ZeroField

NORM_RTOL = 1e-12


@dataclass(frozen=True)
class UnitSystem:
    hbar: float
    mass: float
    label: str = "natural"
    # size of one electronvolt in this system's energy unit (None if unitless)
    ev: float | None = None

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise GridError(f"hbar and mass must be positive, got {self.hbar}, {self.mass}")


NATURAL = UnitSystem(hbar=1.0, mass=1.0, label="natural")
SI_ELECTRON = UnitSystem(hbar=const.hbar, mass=const.m_e, label="SI-electron", ev=const.electron_volt)

UNIT_SYSTEMS = {u.label: u for u in (NATURAL, SI_ELECTRON)}


def _per_axis(value, dim: int, name: str) -> tuple:
    if np.ndim(value) == 0:
        return (value,) * dim
    value = tuple(value)
    if len(value) != dim:
        raise GridError(f"{name} needs {dim} components, got {len(value)}")
    return value


def _frozen(arrays) -> tuple[np.ndarray, ...]:
    for a in arrays:
        a.setflags(write=False)
    return tuple(arrays)


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid in one or two dimensions."""

    n: tuple[int, ...]
    x_min: tuple[float, ...]
    x_max: tuple[float, ...]

    def __post_init__(self):
        if len(self.n) not in (1, 2) or not (len(self.n) == len(self.x_min) == len(self.x_max)):
            raise GridError("grid must be 1D or 2D with matching per-axis fields")
        for n, lo, hi in zip(self.n, self.x_min, self.x_max):
            n = int(n)
            if n < 8 or n & (n - 1):
                raise GridError(f"points per axis must be a power of two >= 8, got {n}")
            if not hi > lo:
                raise GridError(f"x_max must exceed x_min, got [{lo}, {hi}]")

    @classmethod
    def line(cls, n: int, x_min: float, x_max: float) -> "GridSpec":
        return cls((int(n),), (float(x_min),), (float(x_max),))

    @classmethod
    def plane(cls, n, x_range: Sequence[float], y_range: Sequence[float]) -> "GridSpec":
        nx, ny = _per_axis(n, 2, "n")
        return cls((int(nx), int(ny)), (float(x_range[0]), float(y_range[0])),
                   (float(x_range[1]), float(y_range[1])))

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(n) for n in self.n)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((hi - lo) / n for n, lo, hi in zip(self.n, self.x_min, self.x_max))

    @property
    def dV(self) -> float:
        return float(np.prod(self.dx))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(lo + d * np.arange(n) for n, lo, d in zip(self.shape, self.x_min, self.dx))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        return tuple(2.0 * np.pi * sfft.fftfreq(n, d) for n, d in zip(self.shape, self.dx))

    @cached_property
    def _mesh(self) -> tuple[np.ndarray, ...]:
        return _frozen(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def _kmesh(self) -> tuple[np.ndarray, ...]:
        return _frozen(np.meshgrid(*self.wavenumbers, indexing="ij"))

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays, one per axis (cached, read-only)."""
        return self._mesh

    def kmesh(self) -> tuple[np.ndarray, ...]:
        return self._kmesh

    def nearest_index(self, position) -> tuple[int, ...]:
        """Index of the grid point closest to ``position`` (clipped into the grid)."""
        pos = _per_axis(position, self.dim, "position")
        idx = []
        for p, lo, d, n in zip(pos, self.x_min, self.dx, self.shape):
            idx.append(int(np.clip(np.rint((p - lo) / d), 0, n - 1)))
        return tuple(idx)

    def point(self, index: Sequence[int]):
        coords = tuple(float(ax[i]) for ax, i in zip(self.axes, index))
        return coords[0] if self.dim == 1 else coords

    def region_mask(self, box) -> np.ndarray:
        """Boolean mask of points inside ``box``, one ``(lo, hi)`` pair per axis."""
        if self.dim == 1 and np.ndim(box[0]) == 0:
            box = (box,)
        mask = np.ones(self.shape, dtype=bool)
        for x, (lo, hi) in zip(self.mesh(), box):
            mask &= (x >= lo) & (x <= hi)
        return mask


@dataclass(frozen=True, eq=False)
class Wavefield:
    grid: GridSpec
    amps: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128)
        if amps.shape != self.grid.shape:
            raise GridError(f"amplitude shape {amps.shape} does not match grid {self.grid.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def density(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def probabilities(self) -> np.ndarray:
        """Cell probabilities ``|psi|^2 dV``."""
        return self.density() * self.grid.dV

    def replace(self, amps=None, t=None) -> "Wavefield":
        return Wavefield(self.grid, self.amps if amps is None else amps, self.t if t is None else t)


def norm(psi: Wavefield) -> float:
    return float(np.sum(psi.density()) * psi.grid.dV)


def normalize(psi: Wavefield) -> Wavefield:
    total = norm(psi)
    if not np.isfinite(total) or total <= 0.0:
        raise ZeroField("cannot normalize a field with zero norm")
    return psi.replace(amps=psi.amps / np.sqrt(total))


def gaussian_packet(grid: GridSpec, x0, sigma, k0=0.0, t: float = 0.0) -> Wavefield:
    """Normalized Gaussian packet ``exp(-(x-x0)^2/(4 sigma^2) + i k0 x)``.

    ``sigma`` is the standard deviation of ``|psi|^2``.  In 2D the packet is a
    product over axes and each argument may be a scalar or a per-axis pair.
    """
    x0 = _per_axis(x0, grid.dim, "x0")
    sigma = _per_axis(sigma, grid.dim, "sigma")
    k0 = _per_axis(k0, grid.dim, "k0")
    for c, s, lo, hi, d in zip(x0, sigma, grid.x_min, grid.x_max, grid.dx):
        if s < 2.0 * d:
            raise UnresolvableWidth(f"sigma={s} is below two grid spacings ({2 * d})")
        if c - 4.0 * s < lo or c + 4.0 * s > hi:
            raise OutOfDomain(f"packet at {c} with sigma={s} needs a 4-sigma margin inside [{lo}, {hi}]")
    amps = np.ones(grid.shape, dtype=np.complex128)
    for x, c, s, k in zip(grid.mesh(), x0, sigma, k0):
        amps = amps * np.exp(-((x - c) ** 2) / (4.0 * s * s) + 1j * k * x)
    return normalize(Wavefield(grid, amps, t))


def _moments(weights: np.ndarray, coords: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    total = weights.sum()
    mean = np.array([np.sum(weights * c) / total for c in coords])
    var = np.array([np.sum(weights * (c - m) ** 2) / total for c, m in zip(coords, mean)])
    return mean, np.sqrt(np.maximum(var, 0.0))


def _scalar_or_vector(values: np.ndarray, dim: int):
    return float(values[0]) if dim == 1 else values


def mean_position(psi: Wavefield):
    mean, _ = _moments(psi.density(), psi.grid.mesh())
    return _scalar_or_vector(mean, psi.grid.dim)


def position_spread(psi: Wavefield):
    """Standard deviation of the ``|psi|^2`` position distribution (per axis in 2D)."""
    _, sd = _moments(psi.density(), psi.grid.mesh())
    return _scalar_or_vector(sd, psi.grid.dim)


def to_momentum(psi: Wavefield) -> np.ndarray:
    """Unitary discrete transform to the wavenumber lattice (``fftfreq`` order)."""
    return sfft.fftn(psi.amps, norm="ortho")


def from_momentum(phi: np.ndarray, grid: GridSpec, t: float = 0.0) -> Wavefield:
    return Wavefield(grid, sfft.ifftn(phi, norm="ortho"), t)


def mean_momentum(psi: Wavefield, units: UnitSystem = NATURAL):
    weights = np.abs(to_momentum(psi)) ** 2
    mean, _ = _moments(weights, [units.hbar * k for k in psi.grid.kmesh()])
    return _scalar_or_vector(mean, psi.grid.dim)


def momentum_spread(psi: Wavefield, units: UnitSystem = NATURAL):
    """Standard deviation of ``|psi(p)|^2`` with ``p = hbar k`` (per axis in 2D)."""
    weights = np.abs(to_momentum(psi)) ** 2
    _, sd = _moments(weights, [units.hbar * k for k in psi.grid.kmesh()])
    return _scalar_or_vector(sd, psi.grid.dim)


def localization_width(psi: Wavefield) -> float:
    """Scalar width used for energy thresholds.

    Equals the position spread in 1D.  In 2D it is ``(sum_i dx_i^-2)^-1/2`` so
    that the kinetic localization energy summed over axes equals the 1D
    expression evaluated at this width.
    """
    spread = np.atleast_1d(position_spread(psi))
    if np.any(spread <= 0):
        return 0.0
    return float(np.sum(spread ** -2.0) ** -0.5)
