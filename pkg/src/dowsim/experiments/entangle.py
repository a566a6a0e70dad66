"""Joint collapse of a two-coordinate wavefield on configuration space.

Axis 0 of the grid is particle A's coordinate and axis 1 is particle B's.
The initial field is ``exp(-(xa - xb)^2 / 4s^2) * exp(-(xa + xb)^2 / 4S^2)``.
For its ``|psi|^2``, ``xa - xb`` has standard deviation ``s`` and ``xa + xb``
has ``S``, so the coordinates correlate with
``rho = (S^2 - s^2) / (S^2 + s^2)`` and ``xb | xa`` has standard deviation
``s*S / sqrt(s^2 + S^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm as normal

from ..collapse import CollapsePolicy
from ..deformation import DeformationParams
from ..errors import ConfigError
from ..events import InteractionEvent
from ..evolution import EvolutionConfig, FreePotential
from ..trajectory import TrajectoryResult, ordered_map, run_trajectory
from ..wavefield import NATURAL, GridSpec, UnitSystem, Wavefield, normalize


@dataclass(frozen=True)
class EntangledPairConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec.plane(256, (-10.0, 10.0), (-10.0, 10.0)))
    s: float = 0.1
    S: float = 4.0
    n_shots: int = 10_000
    seed0: int = 0
    energy: float = 1e3           # transfer at the interaction site on A
    site_a: float = 0.0
    units: UnitSystem = NATURAL
    policy: CollapsePolicy = CollapsePolicy()
    marginal_bins: int = 40

    def validate(self):
        if self.grid.dim != 2:
            raise ConfigError("entangled pair needs a 2D configuration-space grid")
        if not (0 < self.s <= self.S):
            raise ConfigError("need 0 < s <= S")
        if self.n_shots < 1:
            raise ConfigError("n_shots must be >= 1")
        half = min(min(-lo, hi) for lo, hi in zip(self.grid.x_min, self.grid.x_max))
        if 4.0 * np.hypot(self.s, self.S) / 2 > half:
            raise ConfigError("grid too small for the pair state (need a 4-sigma margin)")
        if self.policy.units != self.units:
            raise ConfigError("policy units differ from experiment units")


def pair_state(grid: GridSpec, s: float, S: float) -> Wavefield:
    xa, xb = grid.mesh()
    amps = np.exp(-((xa - xb) ** 2) / (4 * s * s) - ((xa + xb) ** 2) / (4 * S * S))
    return normalize(Wavefield(grid, amps))


def analytic_correlation(s: float, S: float) -> float:
    return (S * S - s * s) / (S * S + s * s)


def analytic_conditional_spread(s: float, S: float) -> float:
    return s * S / np.hypot(s, S)


def analytic_marginal_sd(s: float, S: float) -> float:
    return np.hypot(s, S) / 2.0


@dataclass
class EntangledPairReport:
    samples: np.ndarray               # (n_shots, 2) collapse sites (xa, xb)
    correlation: float
    analytic_correlation: float
    conditional_spread: float
    analytic_conditional_spread: float
    marginal_tv: float
    events_per_shot: np.ndarray       # collapse entries in each shot's log
    first_shot: TrajectoryResult


def entangled_pair(cfg: EntangledPairConfig = EntangledPairConfig(), threads: int | None = None,
                   ) -> EntangledPairReport:
    cfg.validate()
    psi = pair_state(cfg.grid, cfg.s, cfg.S)
    # one interaction on A; the B component of the centre is unused by the threshold criterion
    event = InteractionEvent(0.0, (cfg.site_a, 0.0), max(cfg.grid.dx), cfg.energy, label="A")
    evo = EvolutionConfig(dt=1.0, n_steps=0, units=cfg.units)

    def shot(i):
        return run_trajectory(psi, FreePotential(), [event], cfg.policy, DeformationParams(), evo,
                              cfg.seed0 + i, record_every=0)

    def summary(i):
        # keep only the log: final fields are large
        hits = shot(i).collapses
        return (hits[0].location if hits else (np.nan, np.nan)), len(hits)

    first = shot(0)
    results = ordered_map(summary, list(range(cfg.n_shots)), threads)
    samples = np.array([loc for loc, _ in results], dtype=float)
    counts = np.array([n for _, n in results])

    ok = ~np.isnan(samples).any(axis=1)
    xa, xb = samples[ok, 0], samples[ok, 1]
    corr = float(np.corrcoef(xa, xb)[0, 1]) if ok.sum() > 2 else float("nan")
    slope, intercept = np.polyfit(xa, xb, 1) if ok.sum() > 2 else (np.nan, np.nan)
    resid = xb - (slope * xa + intercept)
    cond = float(np.std(resid))

    sd = analytic_marginal_sd(cfg.s, cfg.S)
    edges = np.linspace(-4 * sd, 4 * sd, cfg.marginal_bins + 1)
    expected = np.diff(normal.cdf(edges, scale=sd))
    empirical = np.histogram(xa, bins=edges)[0] / max(len(xa), 1)
    tv = 0.5 * float(np.abs(empirical - expected).sum() + abs(1 - empirical.sum() - (1 - expected.sum())))
    return EntangledPairReport(samples, corr, analytic_correlation(cfg.s, cfg.S), cond,
                               analytic_conditional_spread(cfg.s, cfg.S), tv, counts, first)
