"""Event engine: unitary evolution interleaved with interaction events.

At each event the live field decides the outcome: a transfer at or above the
collapse criterion localizes the field at a Born-sampled site, a smaller
positive transfer deforms it, and a zero transfer does nothing.  Events that
snap to the same step are resolved together, so several detectors firing at
once produce at most one collapse.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .collapse import BornSampler, CollapsePolicy, apply_collapse, check_collapse
from .deformation import DeformationParams, apply_deformation
from .errors import ConfigError, UnsortedEvents
from .events import InteractionEvent
from .evolution import EvolutionConfig, Potential, Propagator
from .wavefield import GridSpec, Wavefield, position_spread

__all__ = [
    "InteractionEvent", "Outcome", "LogEntry", "TrajectoryResult", "run_trajectory",
    "run_ensemble", "resolve_events", "settle_events", "collapse_region", "thread_count",
]


class Outcome(enum.Enum):
    DEFORMED = "deformed"
    COLLAPSED = "collapsed"
    NO_EFFECT = "no_effect"


@dataclass(frozen=True)
class LogEntry:
    event: InteractionEvent
    outcome: Outcome
    t: float
    location: float | tuple[float, ...] | None = None


@dataclass
class TrajectoryResult:
    width_history: list[tuple[float, object]]
    events_log: list[LogEntry]
    final_field: Wavefield
    seed: int | None = None

    @property
    def collapses(self) -> list[LogEntry]:
        return [e for e in self.events_log if e.outcome is Outcome.COLLAPSED]


def as_rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng), (None if rng is None else int(rng))
    raise ConfigError(f"expected a numpy Generator or an integer seed, got {type(rng).__name__}")


def settle_events(psi: Wavefield, events: Sequence[InteractionEvent], policy: CollapsePolicy,
                  deform: DeformationParams) -> tuple[Wavefield, list[Outcome | None], list[int]]:
    """Apply the deterministic part of simultaneous events.

    Events are visited in order; deformations are applied as they come.  The
    first event meeting the collapse criterion stops the walk: it and every
    later event that also meets the criterion on the same field form the
    collapse group (returned as indices).  Outcomes of the group and of the
    events after it are left as ``None`` for :func:`finish_outcomes`.
    """
    outcomes: list[Outcome | None] = [None] * len(events)
    for i, ev in enumerate(events):
        if check_collapse(psi, ev, policy):
            group = [i] + [j for j in range(i + 1, len(events)) if check_collapse(psi, events[j], policy)]
            return psi, outcomes, group
        if ev.energy > 0:
            psi = apply_deformation(psi, ev, deform, policy.units)
            outcomes[i] = Outcome.DEFORMED
        else:
            outcomes[i] = Outcome.NO_EFFECT
    return psi, outcomes, []


def collapse_region(grid: GridSpec, events: Sequence[InteractionEvent]) -> np.ndarray | None:
    """Union of the events' apertures; ``None`` if any of them is unrestricted."""
    masks = [ev.aperture_mask(grid) for ev in events]
    if any(m is None for m in masks):
        return None
    return np.logical_or.reduce(masks)


def collapsing_member(grid: GridSpec, events: Sequence[InteractionEvent], group: Sequence[int], location) -> int:
    idx = grid.nearest_index(location)
    for i in group:
        mask = events[i].aperture_mask(grid)
        if mask is None or mask[idx]:
            return i
    return group[0]


def finish_outcomes(outcomes: list[Outcome | None], member: int | None) -> list[Outcome]:
    done = []
    for i, o in enumerate(outcomes):
        if i == member:
            done.append(Outcome.COLLAPSED)
        else:
            done.append(Outcome.NO_EFFECT if o is None else o)
    return done


def resolve_events(psi: Wavefield, events: Sequence[InteractionEvent], policy: CollapsePolicy,
                   deform: DeformationParams, rng: np.random.Generator, t: float | None = None,
                   ) -> tuple[Wavefield, list[LogEntry]]:
    """Resolve events that act on ``psi`` at the same instant."""
    t = psi.t if t is None else t
    psi, outcomes, group = settle_events(psi, events, policy, deform)
    member, location = None, None
    if group:
        region = collapse_region(psi.grid, [events[i] for i in group])
        location = BornSampler(psi, region).draw(rng)
        psi = apply_collapse(psi, location, policy.operator)
        member = collapsing_member(psi.grid, events, group, location)
    log = [LogEntry(ev, o, t, location if o is Outcome.COLLAPSED else None)
           for ev, o in zip(events, finish_outcomes(outcomes, member))]
    return psi, log


def _snap(events: Sequence[InteractionEvent], t0: float, cfg: EvolutionConfig) -> list[int]:
    steps = []
    for ev in events:
        k = int(np.rint((ev.t - t0) / cfg.dt))
        if not 0 <= k <= cfg.n_steps:
            raise ConfigError(f"event at t={ev.t} lies outside the run [{t0}, {t0 + cfg.n_steps * cfg.dt}]")
        steps.append(k)
    return steps


def run_trajectory(psi0: Wavefield, v: Potential, events: Sequence[InteractionEvent],
                   policy: CollapsePolicy, deform: DeformationParams, cfg: EvolutionConfig,
                   rng=None, record_every: int = 1) -> TrajectoryResult:
    """Evolve ``psi0`` for ``cfg.n_steps`` steps, resolving events on the way.

    Event times snap to the nearest step boundary; the log records the snapped
    time ``t0 + k*dt``.  ``rng`` is a numpy Generator or an integer seed.
    ``width_history`` holds ``(t, position_spread)`` every ``record_every``
    steps plus the final step (``record_every=0`` records the endpoints only).
    """
    if policy.units != cfg.units:
        raise ConfigError("collapse policy and evolution config use different unit systems")
    times = [ev.t for ev in events]
    if any(b < a for a, b in zip(times, times[1:])):
        raise UnsortedEvents("events must be sorted by time")
    for ev in events:
        if ev.extent < min(psi0.grid.dx):
            raise ConfigError(f"event extent {ev.extent} is below the grid spacing")
    gen, seed = as_rng(rng)
    t0 = psi0.t
    snapped = _snap(events, t0, cfg)
    by_step: dict[int, list[InteractionEvent]] = {}
    for k, ev in zip(snapped, events):
        by_step.setdefault(k, []).append(ev)

    prop = Propagator(psi0.grid, v, cfg.dt, cfg.units) if cfg.n_steps else None
    psi = psi0
    history: list[tuple[float, object]] = []
    log: list[LogEntry] = []
    for k in range(cfg.n_steps + 1):
        if k:
            psi = Wavefield(psi.grid, prop.apply(psi.amps), t0 + k * cfg.dt)
        if k in by_step:
            psi, entries = resolve_events(psi, by_step[k], policy, deform, gen, t=t0 + k * cfg.dt)
            log.extend(entries)
        if k == 0 or k == cfg.n_steps or (record_every and k % record_every == 0):
            history.append((psi.t, position_spread(psi)))
    return TrajectoryResult(history, log, psi, seed)


def thread_count(default: int | None = None) -> int:
    """Worker count from ``DOWSIM_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("DOWSIM_THREADS", "")
    try:
        n = int(raw) if raw.strip() else (default or 0)
    except ValueError:
        raise ConfigError(f"DOWSIM_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("DOWSIM_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def ordered_map(fn: Callable, items: Sequence, threads: int | None = None) -> list:
    """``map`` that may run on a thread pool but always returns results in input order."""
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_ensemble(seeds: Sequence[int], psi0: Wavefield, v: Potential, events: Sequence[InteractionEvent],
                 policy: CollapsePolicy, deform: DeformationParams, cfg: EvolutionConfig,
                 record_every: int = 1, threads: int | None = None) -> list[TrajectoryResult]:
    """One trajectory per seed, returned in seed order."""
    def one(seed):
        return run_trajectory(psi0, v, events, policy, deform, cfg, int(seed), record_every)
    return ordered_map(one, list(seeds), threads)
