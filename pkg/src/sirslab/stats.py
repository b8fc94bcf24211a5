"""Distributional estimators: Gaussian KDE, two-sample KS distance,
normal-approximation confidence intervals and histogram distances."""

from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist
from typing import Optional, Tuple

import numpy as np


class DegenerateSampleError(ValueError):
    """All samples identical; the density estimate would be a point mass."""


@dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float


def silverman_bandwidth(samples: np.ndarray) -> float:
    """0.9 * min(sd, IQR/1.34) * n^(-1/5)."""
    x = np.asarray(samples, dtype=float)
    sd = float(np.std(x))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = q75 - q25
    scale = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * scale * x.size ** (-0.2)


def gaussian_kde(samples, bandwidth: Optional[float] = None,
                 grid_size: int = 512) -> DensityEstimate:
    """Gaussian-kernel density on a uniform grid spanning the sample range
    plus four bandwidths on each side."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if h <= 0:
        raise DegenerateSampleError("bandwidth is 0 (degenerate sample)")
    grid = np.linspace(x.min() - 4.0 * h, x.max() + 4.0 * h, grid_size)
    z = (grid[:, None] - x[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (x.size * h * np.sqrt(2.0 * np.pi))
    return DensityEstimate(grid=grid, density=density, bandwidth=h)


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    xa = np.sort(np.asarray(a, dtype=float))
    xb = np.sort(np.asarray(b, dtype=float))
    if xa.size == 0 or xb.size == 0:
        raise ValueError("both samples must be non-empty")
    allx = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, allx, side="right") / xa.size
    fb = np.searchsorted(xb, allx, side="right") / xb.size
    return float(np.max(np.abs(fa - fb)))


def mean_ci(samples, level: float = 0.95) -> Tuple[float, float]:
    """Sample mean with normal-approximation half-width z * sd / sqrt(n)."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    mean = float(np.mean(x))
    half = float(z * np.std(x, ddof=1) / np.sqrt(x.size))
    return mean, half


def total_variation(p, q) -> float:
    """TV distance between two probability vectors on the same bins."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("histograms must share their binning")
    return 0.5 * float(np.abs(p - q).sum())


def density_to_csv(est: DensityEstimate, path) -> None:
    np.savetxt(path, np.column_stack([est.grid, est.density]),
               delimiter=",", header="x,density", comments="", fmt="%.17g")
