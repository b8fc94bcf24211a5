"""Reproducible parallel Monte Carlo over trajectories.

Path i always draws from the stream keyed by (base_seed, i), so results do
not depend on scheduling.  Paths are processed in fixed-size chunks whose
boundaries depend only on the configuration, partial moments are computed by
per-path Welford updates inside each chunk, and chunk partials are merged
associatively in chunk order -- which makes the summary bitwise identical
for any worker count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .core import ModelParams, basic_reproduction_number
from .engine import (NegativeStateError, NumericalError, SimConfig,
                     Trajectory, _integrate)

FUNCTIONALS = ("disease_free_deviation",)


class EnsembleError(RuntimeError):
    """Per-path failures exceeded the ensemble's failure budget."""


@dataclass(frozen=True)
class EnsembleConfig:
    sim: SimConfig
    n_paths: int
    base_seed: int
    probe_times: Tuple[float, ...] = ()
    functional: str = "disease_free_deviation"
    failure_budget: int = 0
    n_jobs: int = 1
    chunk_size: int = 0  # 0 -> automatic; never depends on n_jobs

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.functional not in FUNCTIONALS:
            raise ValueError(f"unknown functional {self.functional!r}")
        grid = self.recorded_times()
        for t in self.probe_times:
            if not np.any(np.abs(grid - t) <= 1e-9 * max(1.0, abs(t))):
                raise ValueError(f"probe time {t} is not on the recorded grid")

    def recorded_times(self) -> np.ndarray:
        step = self.sim.dt * self.sim.record_stride
        return np.arange(self.sim.n_steps // self.sim.record_stride + 1) * step

    def probe_indices(self) -> np.ndarray:
        grid = self.recorded_times()
        return np.array([int(np.argmin(np.abs(grid - t)))
                         for t in self.probe_times], dtype=int)

    def resolved_chunk_size(self) -> int:
        if self.chunk_size:
            return int(self.chunk_size)
        n_rec = self.sim.n_steps // self.sim.record_stride + 1
        # keep each chunk's recorded block under ~200 MB
        cap = max(1, 8_000_000 // max(1, n_rec))
        return int(min(512, cap, self.n_paths))


@dataclass
class EnsembleSummary:
    times: np.ndarray
    mean: np.ndarray               # (n_rec, 3) per-time ensemble mean
    variance: np.ndarray           # (n_rec, 3) population variance
    functional: str
    functional_mean: np.ndarray    # (n_rec,) ensemble mean of the functional
    time_average_estimate: Optional[float]
    tail_average: Optional[float]  # same average over the last 10% of horizon
    probe_times: Tuple[float, ...]
    probe_samples: Dict[float, np.ndarray]  # time -> (n_paths, 3)
    clamp_rate: float
    n_paths: int
    failures: List[Tuple[int, str]] = field(default_factory=list)


def _functional_values(name: str, states: np.ndarray,
                       p: ModelParams) -> np.ndarray:
    """Tracked scalar functional, applied along the last (component) axis."""
    if name == "disease_free_deviation":
        return ((states[..., 0] - p.lam / p.mu) ** 2
                + states[..., 1] + states[..., 2])
    raise ValueError(f"unknown functional {name!r}")


def _chunk_stats(sim: SimConfig, base_seed: int, indices: Sequence[int],
                 probe_idx: np.ndarray, functional: str,
                 allow_failures: bool) -> dict:
    """Integrate one chunk of paths and reduce it to partial statistics."""
    seeds = [(base_seed, i) for i in indices]
    failures: List[Tuple[int, str]] = []
    try:
        res = _integrate(sim, seeds)
        blocks = [res]
        kept = list(indices)
    except (NegativeStateError, NumericalError):
        if not allow_failures:
            raise
        blocks = []
        kept = []
        for i in indices:
            try:
                blocks.append(_integrate(sim, [(base_seed, i)]))
                kept.append(i)
            except (NegativeStateError, NumericalError) as exc:
                failures.append((i, str(exc)))

    n_rec = sim.n_steps // sim.record_stride + 1
    count = 0
    mean = np.zeros((n_rec, 3))
    m2 = np.zeros((n_rec, 3))
    fmean = np.zeros(n_rec)
    probes = []
    clamp_total = 0
    for res in blocks:
        fvals = _functional_values(functional, res.states, sim.params)
        for j in range(res.states.shape[1]):
            x = res.states[:, j, :]
            count += 1
            delta = x - mean
            mean += delta / count
            m2 += delta * (x - mean)
            fmean += (fvals[:, j] - fmean) / count
        probes.append(res.states[probe_idx, :, :])
        clamp_total += int(res.clamp_events.sum())
    probe_block = (np.concatenate(probes, axis=1) if probes
                   else np.empty((probe_idx.size, 0, 3)))
    return dict(count=count, mean=mean, m2=m2, fmean=fmean,
                probes=probe_block, clamp_total=clamp_total,
                failures=failures)


def _merge(acc: dict, part: dict) -> dict:
    na, nb = acc["count"], part["count"]
    if nb == 0:
        acc["failures"] += part["failures"]
        acc["probes"].append(part["probes"])
        return acc
    if na == 0:
        merged = dict(part)
        merged["probes"] = acc["probes"] + [part["probes"]]
        merged["failures"] = acc["failures"] + list(part["failures"])
        merged["clamp_total"] = acc["clamp_total"] + part["clamp_total"]
        return merged
    n = na + nb
    delta = part["mean"] - acc["mean"]
    acc["mean"] = acc["mean"] + delta * (nb / n)
    acc["m2"] = acc["m2"] + part["m2"] + delta ** 2 * (na * nb / n)
    acc["fmean"] = acc["fmean"] + (part["fmean"] - acc["fmean"]) * (nb / n)
    acc["count"] = n
    acc["probes"].append(part["probes"])
    acc["clamp_total"] += part["clamp_total"]
    acc["failures"] += part["failures"]
    return acc


def _trapezoid_average(values: np.ndarray, times: np.ndarray) -> float:
    """(1/t_end) * integral of a uniformly sampled function."""
    if times.size < 2:
        raise ValueError("time average needs a positive horizon")
    h = times[1] - times[0]
    integral = h * (values.sum() - 0.5 * (values[0] + values[-1]))
    return float(integral / times[-1])


def run_ensemble(cfg: EnsembleConfig) -> EnsembleSummary:
    """Simulate ``n_paths`` independent trajectories and aggregate them.

    The output is independent of ``n_jobs``; see the module docstring.
    """
    sim = cfg.sim
    probe_idx = cfg.probe_indices()
    chunk = cfg.resolved_chunk_size()
    index_chunks = [range(lo, min(lo + chunk, cfg.n_paths))
                    for lo in range(0, cfg.n_paths, chunk)]
    jobs = (delayed(_chunk_stats)(sim, cfg.base_seed, list(ix), probe_idx,
                                  cfg.functional, cfg.failure_budget > 0)
            for ix in index_chunks)
    if cfg.n_jobs == 1:
        parts = [_chunk_stats(sim, cfg.base_seed, list(ix), probe_idx,
                              cfg.functional, cfg.failure_budget > 0)
                 for ix in index_chunks]
    else:
        parts = Parallel(n_jobs=cfg.n_jobs)(jobs)

    acc = dict(count=0, mean=None, m2=None, fmean=None, probes=[],
               clamp_total=0, failures=[])
    for part in parts:
        acc = _merge(acc, part)
    if len(acc["failures"]) > cfg.failure_budget:
        idx, msg = acc["failures"][0]
        raise EnsembleError(
            f"{len(acc['failures'])} path failures exceed budget "
            f"{cfg.failure_budget}; first: path {idx}: {msg}")
    count = acc["count"]
    if count == 0:
        raise EnsembleError("all paths failed")
    probe_all = np.concatenate(acc["probes"], axis=1)
    times = cfg.recorded_times()
    variance = acc["m2"] / count
    t_avg = tail = None
    if sim.t_end > 0:
        t_avg = _trapezoid_average(acc["fmean"], times)
        tail_n = max(2, int(round(0.1 * (times.size - 1))) + 1)
        tail = _trapezoid_average(acc["fmean"][-tail_n:],
                                  times[-tail_n:] - times[-tail_n])
    clamp_rate = acc["clamp_total"] / max(1, count * sim.n_steps * 3)
    return EnsembleSummary(
        times=times,
        mean=acc["mean"],
        variance=variance,
        functional=cfg.functional,
        functional_mean=acc["fmean"],
        time_average_estimate=t_avg,
        tail_average=tail,
        probe_times=cfg.probe_times,
        probe_samples={t: probe_all[j] for j, t in enumerate(cfg.probe_times)},
        clamp_rate=clamp_rate,
        n_paths=count,
        failures=acc["failures"],
    )


def time_average_functional(cfg: EnsembleConfig) -> float:
    """Finite-horizon estimate of the long-run time average of the tracked
    functional (ensemble mean integrated over [0, t_end] by trapezoid)."""
    if cfg.sim.t_end <= 0:
        raise ValueError("time average is undefined for t_end = 0")
    if (cfg.functional == "disease_free_deviation"
            and basic_reproduction_number(cfg.sim.params) >= 1.0):
        warnings.warn("disease-free functional tracked outside the "
                      "disease-free regime (R0 >= 1)", stacklevel=2)
    return run_ensemble(cfg).time_average_estimate


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    probs: np.ndarray


def occupation_measure(trajectory: Trajectory, burn_in: float,
                       bins=50, ranges=None) -> List[Histogram]:
    """Marginal occupation histograms of S, I, R over (burn_in, t_end].

    ``bins`` is an int or a per-component list of bin edge arrays; ``ranges``
    optionally fixes per-component (lo, hi) when ``bins`` is an int.  Each
    histogram is normalized to probability mass 1.
    """
    if burn_in >= trajectory.times[-1]:
        raise ValueError("burn_in must be smaller than the horizon")
    mask = trajectory.times > burn_in
    if not mask.any():
        raise ValueError("no recorded states after burn-in")
    states = trajectory.states
    if states.ndim == 1:
        states = states[:, None]
    out = []
    for c in range(states.shape[1]):
        b = bins[c] if isinstance(bins, (list, tuple)) else bins
        r = None if ranges is None else ranges[c]
        counts, edges = np.histogram(states[mask, c], bins=b, range=r)
        total = counts.sum()
        if total == 0:
            raise ValueError("empty occupation histogram")
        out.append(Histogram(edges=edges, probs=counts / total))
    return out
