"""Two-slit experiment with optional which-path detectors.

The packet travels along x towards a wall with slits spaced along y.  With
detectors, one interaction event per open slit fires when the free-flight
centroid of the incoming packet reaches the wall.  Detection at the screen is
an interaction event on the half-space ``x >= screen_x`` that fires once at
least half of the transmitted probability lies beyond the screen plane.

Shots differ only through their random draws, so fields are evolved once per
distinct post-detector state and shared between shots that land on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks

from ..collapse import BornSampler, CollapsePolicy, apply_collapse, check_collapse, field_threshold
from ..deformation import DeformationParams
from ..errors import ConfigError, TooFewCounts
from ..events import InteractionEvent
from ..evolution import BarrierPotential, Propagator, evolve_until
from ..trajectory import (LogEntry, Outcome, collapse_region, collapsing_member, finish_outcomes, ordered_map,
                          settle_events)
from ..wavefield import NATURAL, GridSpec, UnitSystem, Wavefield, gaussian_packet

MIN_COUNTS = 100


@dataclass(frozen=True)
class Packet:
    x0: tuple[float, float] = (-6.0, 0.0)
    sigma: tuple[float, float] = (1.2, 1.5)
    k0: tuple[float, float] = (2 * np.pi, 0.0)


@dataclass(frozen=True)
class SlitBarrier:
    position: float = -1.0
    thickness: float = 0.4
    height: float = 150.0
    slits: tuple[tuple[float, float], ...] = ((-1.5, 0.5), (1.5, 0.5))
    blocked: tuple[int, ...] = ()

    def open_slits(self) -> list[tuple[float, float]]:
        return [s for i, s in enumerate(self.slits) if i not in self.blocked]

    def potential(self) -> BarrierPotential:
        return BarrierPotential(self.position, self.thickness, self.height, tuple(self.open_slits()))


@dataclass(frozen=True)
class WhichPath:
    """Detector at every open slit.

    Give either an absolute ``energy`` or ``fraction`` of the live collapse
    threshold at the crossing step.  ``extent`` defaults to half a slit width.
    """

    energy: float | None = None
    fraction: float | None = None
    extent: float | None = None

    def __post_init__(self):
        if (self.energy is None) == (self.fraction is None):
            raise ConfigError("which-path detectors need exactly one of energy or fraction")
        if (self.energy or 0) < 0 or (self.fraction or 0) < 0:
            raise ConfigError("detector energy must be non-negative")


@dataclass(frozen=True)
class DoubleSlitConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec.plane((256, 128), (-12.0, 12.0), (-8.0, 8.0)))
    packet: Packet = Packet()
    barrier: SlitBarrier = SlitBarrier()
    screen_x: float = 4.0
    which_path: WhichPath | None = None
    n_shots: int = 10_000
    seed0: int = 0
    dt: float = 0.003
    bins: int = 64
    max_steps: int = 5000
    screen_energy: float = 1e6
    units: UnitSystem = NATURAL
    policy: CollapsePolicy = CollapsePolicy()
    deform: DeformationParams = DeformationParams()

    def validate(self):
        g = self.grid
        if g.dim != 2:
            raise ConfigError("double-slit needs a 2D grid")
        if self.n_shots < 1:
            raise ConfigError("n_shots must be >= 1")
        if self.bins < 1 or g.shape[1] % self.bins:
            raise ConfigError(f"bins ({self.bins}) must divide the transverse point count {g.shape[1]}")
        if len(self.barrier.slits) != 2:
            raise ConfigError("the barrier must have two slits")
        if any(i not in (0, 1) for i in self.barrier.blocked):
            raise ConfigError("blocked slit indices must be 0 or 1")
        wall_back = self.barrier.position + self.barrier.thickness / 2
        if not self.screen_x > wall_back:
            raise ConfigError("screen must lie beyond the barrier")
        if not self.packet.x0[0] < self.barrier.position - self.barrier.thickness / 2:
            raise ConfigError("packet must start in front of the barrier")
        if not self.packet.k0[0] > 0:
            raise ConfigError("packet must move towards the barrier (k0_x > 0)")
        if self.policy.units != self.units:
            raise ConfigError("policy units differ from experiment units")
        self.barrier.potential()  # slit geometry checks


@dataclass
class ScreenHistogram:
    edges: np.ndarray
    counts: np.ndarray
    n_shots: int

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class DoubleSlitResult:
    histogram: ScreenHistogram
    visibility: float
    oracle: np.ndarray          # expected probability per bin
    tv_distance: float
    hits: np.ndarray            # transverse screen coordinate per shot (nan if never detected)
    slit_index: np.ndarray      # slit where the detectors collapsed the field, -1 if none
    crossing_log: list[list[LogEntry]]
    crossing_step: int
    crossing_threshold: float
    screen_field: Wavefield | None = None

    def __iter__(self):
        return iter((self.histogram, self.visibility))


def smooth3(counts: np.ndarray) -> np.ndarray:
    return np.convolve(np.asarray(counts, dtype=float), np.ones(3) / 3.0, mode="same")


def visibility(hist: ScreenHistogram, n_fringes: int = 5) -> float:
    """Fringe contrast ``(I_max - I_min) / (I_max + I_min)`` around the central fringe.

    Counts are smoothed with a 3-bin moving average.  Fringe maxima are peaks
    whose prominence exceeds twice the Poisson scale ``sqrt(max)``; the
    central maximum and its nearest neighbours (``n_fringes`` in total) are
    averaged into ``I_max`` and the deepest points between them into
    ``I_min``.  Without a fringe pair the contrast is 0.
    """
    counts = np.asarray(hist.counts, dtype=float)
    if counts.sum() < MIN_COUNTS:
        raise TooFewCounts(f"visibility needs at least {MIN_COUNTS} counts, got {counts.sum():g}")
    s = smooth3(counts)
    peaks, _ = find_peaks(s, prominence=2.0 * np.sqrt(s.max()))
    if len(peaks) < 2:
        return 0.0
    centre = int(np.argmax(s[peaks]))
    half = (n_fringes - 1) // 2
    chosen = peaks[max(0, centre - half): centre + half + 1]
    if len(chosen) < 2:
        return 0.0
    minima = [s[a:b + 1].min() for a, b in zip(chosen, chosen[1:])]
    i_max, i_min = float(np.mean(s[chosen])), float(np.mean(minima))
    if i_max + i_min <= 0:
        return 0.0
    return float(np.clip((i_max - i_min) / (i_max + i_min), 0.0, 1.0))


def crossing_step(cfg: DoubleSlitConfig) -> int:
    """Step at which the free-flight centroid of the incoming packet reaches the wall plane."""
    velocity = cfg.units.hbar * cfg.packet.k0[0] / cfg.units.mass
    return int(np.rint((cfg.barrier.position - cfg.packet.x0[0]) / velocity / cfg.dt))


def detector_events(cfg: DoubleSlitConfig, t: float, threshold: float) -> list[InteractionEvent]:
    wp = cfg.which_path
    if wp is None:
        return []
    energy = wp.energy if wp.energy is not None else wp.fraction * threshold
    b = cfg.barrier
    events = []
    for i, (c, w) in enumerate(b.slits):
        if i in b.blocked:
            continue
        aperture = ((b.position - b.thickness / 2, b.position + b.thickness / 2), (c - w / 2, c + w / 2))
        events.append(InteractionEvent(t, (b.position, c), wp.extent or w / 2, energy, aperture,
                                       label=f"slit{i}"))
    return events


def screen_event(cfg: DoubleSlitConfig, t: float) -> InteractionEvent:
    g = cfg.grid
    aperture = ((cfg.screen_x, g.x_max[0]), (g.x_min[1], g.x_max[1]))
    return InteractionEvent(t, (cfg.screen_x, 0.0), max(g.dx), cfg.screen_energy, aperture, label="screen")


def _arrived(cfg: DoubleSlitConfig):
    g = cfg.grid
    x = g.axes[0]
    beyond_wall = x > cfg.barrier.position + cfg.barrier.thickness / 2
    beyond_screen = x >= cfg.screen_x

    def stop(psi: Wavefield) -> bool:
        px = psi.density().sum(axis=1)
        transmitted = px[beyond_wall].sum() * g.dV
        return transmitted > 1e-6 and px[beyond_screen].sum() * g.dV >= 0.5 * transmitted

    return stop


@dataclass
class _Branch:
    sampler: BornSampler | None
    profile: np.ndarray          # expected bin probabilities given this branch
    field: Wavefield | None


def _screen_branch(cfg: DoubleSlitConfig, psi: Wavefield, prop: Propagator) -> _Branch:
    """Evolve one post-detector field to the screen and prepare its sampler."""
    screen_psi, _ = evolve_until(psi, None, cfg.dt, cfg.units, _arrived(cfg), cfg.max_steps, propagator=prop)
    empty = np.zeros(cfg.bins)
    if screen_psi is None:
        return _Branch(None, empty, None)
    ev = screen_event(cfg, screen_psi.t)
    if not check_collapse(screen_psi, ev, cfg.policy):
        return _Branch(None, empty, screen_psi)
    region = ev.aperture_mask(cfg.grid)
    sampler = BornSampler(screen_psi, region)
    cells = np.where(region, screen_psi.probabilities(), 0.0).sum(axis=0)
    profile = cells.reshape(cfg.bins, -1).sum(axis=1)
    return _Branch(sampler, profile / profile.sum(), screen_psi)


def double_slit(cfg: DoubleSlitConfig = DoubleSlitConfig(), threads: int | None = None) -> DoubleSlitResult:
    cfg.validate()
    g = cfg.grid
    psi0 = gaussian_packet(g, cfg.packet.x0, cfg.packet.sigma, cfg.packet.k0)
    prop = Propagator(g, cfg.barrier.potential(), cfg.dt, cfg.units)

    k_cross = crossing_step(cfg)
    amps = psi0.amps
    for _ in range(k_cross):
        amps = prop.apply(amps)
    t_cross = k_cross * cfg.dt
    psi_cross = Wavefield(g, amps, t_cross)
    threshold = field_threshold(psi_cross, cfg.units)

    events = detector_events(cfg, t_cross, threshold)
    settled, outcomes, group = settle_events(psi_cross, events, cfg.policy, cfg.deform)
    rngs = [np.random.default_rng(cfg.seed0 + s) for s in range(cfg.n_shots)]

    # which post-detector state each shot continues from
    if group:
        cross_sampler = BornSampler(settled, collapse_region(g, [events[i] for i in group]))
        keys = np.array([cross_sampler.draw_index(r) for r in rngs])
        distinct, inverse = np.unique(keys, return_inverse=True)
        starts = [apply_collapse(settled, cross_sampler.position(int(k)), cfg.policy.operator)
                  for k in distinct]
        exact_weights = np.diff(np.concatenate([[0.0], cross_sampler.cdf]))[distinct]
    else:
        distinct, inverse = np.array([-1]), np.zeros(cfg.n_shots, dtype=int)
        starts = [settled]
        exact_weights = np.array([1.0])

    branches = ordered_map(lambda psi: _screen_branch(cfg, psi, prop), starts, threads)

    y_cells = g.axes[1]
    hits = np.full(cfg.n_shots, np.nan)
    slit_index = np.full(cfg.n_shots, -1)
    crossing_log: list[list[LogEntry]] = []
    for s, (rng, b) in enumerate(zip(rngs, inverse)):
        location = None
        if group:
            key = int(distinct[b])
            location = g.point(np.unravel_index(key, g.shape))
            member = collapsing_member(g, events, group, location)
            slit_index[s] = int(events[member].label.removeprefix("slit"))
            done = finish_outcomes(outcomes, member)
        else:
            done = finish_outcomes(outcomes, None)
        crossing_log.append([LogEntry(ev, o, t_cross, location if o is Outcome.COLLAPSED else None)
                             for ev, o in zip(events, done)])
        branch = branches[b]
        if branch.sampler is not None:
            idx = branch.sampler.draw_index(rng)
            hits[s] = y_cells[np.unravel_index(idx, g.shape)[1]]

    dy = g.dx[1]
    per_bin = g.shape[1] // cfg.bins
    edges = g.x_min[1] - dy / 2 + dy * per_bin * np.arange(cfg.bins + 1)
    counts = np.histogram(hits[~np.isnan(hits)], bins=edges)[0]
    hist = ScreenHistogram(edges, counts, cfg.n_shots)

    w = exact_weights / exact_weights.sum()
    oracle = sum(wi * br.profile for wi, br in zip(w, branches))
    reached = counts.sum()
    tv = 0.5 * float(np.abs(counts / reached - oracle).sum()) if reached else float("nan")
    vis = visibility(hist) if reached >= MIN_COUNTS else float("nan")
    screen_field = branches[0].field if not group else None
    return DoubleSlitResult(hist, vis, oracle, tv, hits, slit_index, crossing_log, k_cross, threshold,
                            screen_field)


def sweep_detector_energy(cfg: DoubleSlitConfig, fractions: Sequence[float],
                          threads: int | None = None) -> list[DoubleSlitResult]:
    """Run the experiment once per detector energy, given as fractions of the crossing threshold."""
    out = []
    for f in fractions:
        wp = WhichPath(fraction=float(f), extent=cfg.which_path.extent if cfg.which_path else None)
        out.append(double_slit(replace(cfg, which_path=wp), threads))
    return out


