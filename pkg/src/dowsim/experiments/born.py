"""Monte Carlo check of Born-rule location sampling."""

from __future__ import annotations

import numpy as np
from scipy.stats import chisquare

from ..collapse import BornSampler
from ..errors import ConfigError
from ..wavefield import GridSpec, Wavefield, gaussian_packet, normalize

MIN_EXPECTED = 5.0


def empirical_distribution(psi: Wavefield, n: int, rng: np.random.Generator) -> np.ndarray:
    """Cell frequencies of ``n`` Born draws, shaped like the grid."""
    idx = BornSampler(psi).draw_indices(rng, n)
    counts = np.bincount(idx, minlength=psi.amps.size)
    return counts.reshape(psi.grid.shape) / n


def pooled_chi2(counts: np.ndarray, p: np.ndarray) -> float:
    """Goodness-of-fit p-value; cells expecting fewer than 5 hits are pooled."""
    counts = np.asarray(counts, dtype=float).ravel()
    p = np.asarray(p, dtype=float).ravel()
    p = p / p.sum()
    expected = counts.sum() * p
    big = expected >= MIN_EXPECTED
    obs = list(counts[big])
    exp = list(expected[big])
    rest = expected[~big].sum()
    if rest > 0:
        obs.append(counts[~big].sum())
        exp.append(rest)
    if len(obs) < 2:
        return 1.0
    return float(chisquare(obs, exp).pvalue)


def born_check(psi: Wavefield, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Exact and empirical cell distributions with their TV distance and chi-square p-value."""
    p = psi.probabilities()
    p = p / p.sum()
    freq = empirical_distribution(psi, int(n), rng)
    tv = 0.5 * float(np.abs(freq - p).sum())
    return p, freq, tv, pooled_chi2(freq * n, p)


def born_convergence(psi: Wavefield, n: int, rng: np.random.Generator) -> tuple[float, float]:
    """Draw ``n`` Born samples and compare them with ``|psi|^2 dV``.

    Returns the total-variation distance between the empirical and exact cell
    distributions and a chi-square goodness-of-fit p-value.
    """
    _, _, tv, pvalue = born_check(psi, n, rng)
    return tv, pvalue


def two_peak_field(grid: GridSpec, split: float = 0.25, separation: float = 12.0,
                   sigma: float = 1.0) -> Wavefield:
    """Two disjoint Gaussian lumps with mass ``split`` left of the origin and ``1 - split`` right of it."""
    if not 0 < split < 1:
        raise ConfigError(f"split must lie in (0, 1), got {split}")
    left = gaussian_packet(grid, -separation / 2, sigma)
    right = gaussian_packet(grid, separation / 2, sigma)
    return normalize(left.replace(amps=np.sqrt(split) * left.amps + np.sqrt(1 - split) * right.amps))

