"""Euler-Maruyama integration of the delayed SIRS system.

The three compartments share a single Brownian motion: every time step draws
exactly one standard normal per path and uses it in all three diffusion
terms.  Because of that, the pathwise sum S+I+R reproduces the reduced
total-population recursion up to floating rounding, which
``simulate_reduced_total`` exposes as an exactness oracle, and the linear
comparison process of ``simulate_comparison`` is driven by the same draws.

Trajectories are integrated in path batches (a single path is a batch of
one) so ensembles vectorize across paths without changing any per-path
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple, Union

import numpy as np

from .core import ModelParams
from .incidence import ConfigurationError, IncidenceSpec, evaluate_incidence

COMPONENTS = ("S", "I", "R")

CLAMP_TO_ZERO = "clamp"
FAIL_ON_NEGATIVE = "fail"

# a run is flagged when more than this fraction of steps clamped
CLAMP_FLAG_FRACTION = 1e-3

# draws are generated in blocks of roughly this many scalars per path batch
_DRAW_BLOCK = 1 << 21

Seed = Union[int, Tuple[int, int]]


class NumericalError(RuntimeError):
    """A state component became non-finite during integration."""

    def __init__(self, step: int, component: str, path: int = 0):
        self.step = step
        self.component = component
        self.path = path
        super().__init__(
            f"non-finite {component} at step {step} (path {path})")


class NegativeStateError(RuntimeError):
    """A component went negative under the fail-on-negative policy."""

    def __init__(self, step: int, component: str, path: int = 0):
        self.step = step
        self.component = component
        self.path = path
        super().__init__(
            f"{component} became negative at step {step} (path {path})")


def _stream(seed: Seed) -> np.random.Generator:
    """Counter-based stream for a scalar seed or a (base, index) pair."""
    if isinstance(seed, tuple):
        base, index = seed
    else:
        base, index = seed, 0
    key = np.array([int(base) % (1 << 64), int(index) % (1 << 64)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def brownian_increments(seed: Seed, n: int, dt: float) -> np.ndarray:
    """n Brownian increments xi_k*sqrt(dt), deterministic in (seed, n, dt)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    return _stream(seed).standard_normal(n) * math.sqrt(dt)


@dataclass(frozen=True)
class HistorySegment:
    """Grid-aligned values of one component on [t-tau, t], oldest first."""

    dt: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=float))
        if self.dt <= 0:
            raise ConfigurationError("segment dt must be > 0")
        if self.values.ndim != 1 or self.values.size < 1:
            raise ConfigurationError("segment values must be a 1-d sequence")
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError("segment contains non-finite values")


InitialHistory = Union[Tuple[float, float, float],
                       Callable[[float], Tuple[float, float, float]]]


@dataclass(frozen=True)
class SimConfig:
    """Everything a single-trajectory integration needs."""

    params: ModelParams
    incidence: IncidenceSpec
    t_end: float
    dt: float = 0.1
    initial_history: InitialHistory = (0.7, 0.3, 0.0)
    clamp_policy: str = CLAMP_TO_ZERO
    record_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("dt must be > 0")
        if self.t_end < 0:
            raise ConfigurationError("t_end must be >= 0")
        if self.clamp_policy not in (CLAMP_TO_ZERO, FAIL_ON_NEGATIVE):
            raise ConfigurationError(
                f"unknown clamp policy {self.clamp_policy!r}")
        if self.record_stride < 1 or int(self.record_stride) != self.record_stride:
            raise ConfigurationError("record_stride must be a positive integer")
        self.n_hist  # noqa: B018 - validates that tau sits on the grid
        n = self.n_steps
        if abs(n * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ConfigurationError(
                f"t_end={self.t_end} is not an integer multiple of dt={self.dt}")
        if n % self.record_stride != 0:
            raise ConfigurationError(
                "record_stride must divide the number of steps")
        if not callable(self.initial_history):
            s0, i0, r0 = self.initial_history
            if min(s0, i0, r0) < 0 or s0 + i0 + r0 <= 0:
                raise ConfigurationError(
                    "initial history must be non-negative with positive total")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def n_hist(self) -> int:
        n = int(round(self.params.tau / self.dt))
        if abs(n * self.dt - self.params.tau) > 1e-9 * max(1.0, self.params.tau):
            raise ConfigurationError(
                f"tau={self.params.tau} is not an integer multiple of dt={self.dt}")
        return n

    def history_grid(self) -> np.ndarray:
        """(n_hist+1, 3) initial values on the grid over [-tau, 0]."""
        n = self.n_hist
        theta = -self.params.tau + np.arange(n + 1) * self.dt
        if callable(self.initial_history):
            vals = np.array([self.initial_history(t) for t in theta], dtype=float)
            if vals.shape != (n + 1, 3):
                raise ConfigurationError(
                    "initial history callable must return (S, I, R) triples")
            if np.any(vals < 0) or vals[-1].sum() <= 0:
                raise ConfigurationError(
                    "initial history must be non-negative with positive total")
            return vals
        return np.tile(np.asarray(self.initial_history, dtype=float), (n + 1, 1))


@dataclass(frozen=True)
class Trajectory:
    """Recorded sample path.  ``states`` is (n, 3) for the full system or
    (n,) for the scalar reductions."""

    times: np.ndarray
    states: np.ndarray
    draws_consumed: int
    clamp_events: np.ndarray

    @property
    def flagged(self) -> bool:
        """True when clamping exceeded the discretization-stress threshold."""
        steps = max(1, self.draws_consumed)
        return bool(np.max(self.clamp_events, initial=0) > CLAMP_FLAG_FRACTION * steps)


def em_step(state: Tuple[float, float, float], segment: HistorySegment,
            p: ModelParams, h: IncidenceSpec, dt: float,
            xi: float) -> Tuple[float, float, float]:
    """One Euler-Maruyama step of the three-component system.

    ``xi`` is a standard normal draw shared by all three diffusion terms.
    No clamping happens at this level.
    """
    s, i, r = state
    hv = evaluate_incidence(h, segment)
    dw = xi * math.sqrt(dt)
    inc = p.beta * s * hv
    s1 = s + (p.lam - p.mu * s - inc + p.eta * r) * dt + p.sigma * s * dw
    i1 = i + (inc - (p.mu + p.gamma + p.delta) * i) * dt + p.sigma * i * dw
    r1 = r + (p.gamma * i - (p.mu + p.eta) * r) * dt + p.sigma * r * dw
    for name, v in zip(COMPONENTS, (s1, i1, r1)):
        if not math.isfinite(v):
            raise NumericalError(step=0, component=name)
    return (s1, i1, r1)


class _BatchResult:
    __slots__ = ("times", "states", "clamp_events", "n_steps", "i_full", "draws")

    def __init__(self, times, states, clamp_events, n_steps, i_full=None,
                 draws=None):
        self.times = times
        self.states = states              # (n_rec, n_paths, 3)
        self.clamp_events = clamp_events  # (n_paths, 3) int64
        self.n_steps = n_steps
        self.i_full = i_full              # (n_steps+1, n_paths) if requested
        self.draws = draws                # (n_steps, n_paths) if requested


def _integrate(cfg: SimConfig, seeds: Sequence[Seed], *,
               want_full_i: bool = False,
               want_draws: bool = False) -> _BatchResult:
    """Integrate one batch of paths with per-path noise streams."""
    p = cfg.params
    dt = cfg.dt
    sdt = math.sqrt(dt)
    n_steps = cfg.n_steps
    stride = cfg.record_stride
    n_hist = cfg.n_hist
    n_paths = len(seeds)
    clamp = cfg.clamp_policy == CLAMP_TO_ZERO

    hist = cfg.history_grid()
    S = np.full(n_paths, hist[-1, 0])
    I = np.full(n_paths, hist[-1, 1])
    R = np.full(n_paths, hist[-1, 2])
    buf = np.tile(hist[:, 1], (n_paths, 1))  # I history, oldest first

    spec = cfg.incidence
    kernel_w = None
    if spec.is_kernel:
        w = spec.grid_weights(dt)
        # buffer column n_hist - j holds phi(-s_j) with lag s_j = j*dt
        kernel_w = np.zeros(n_hist + 1)
        kernel_w[n_hist - np.arange(w.size)] = w

    n_rec = n_steps // stride + 1
    rec = np.empty((n_rec, n_paths, 3))
    rec[0, :, 0], rec[0, :, 1], rec[0, :, 2] = S, I, R
    clamp_events = np.zeros((n_paths, 3), dtype=np.int64)
    i_full = draws = None
    if want_full_i:
        i_full = np.empty((n_steps + 1, n_paths))
        i_full[0] = I
    if want_draws:
        draws = np.empty((n_steps, n_paths))

    gens = [_stream(s) for s in seeds]
    block = max(1, min(n_steps if n_steps else 1,
                       _DRAW_BLOCK // max(n_paths, 1)))
    dW = np.empty((block, n_paths))
    k = 0
    while k < n_steps:
        b = min(block, n_steps - k)
        for j, g in enumerate(gens):
            dW[:b, j] = g.standard_normal(b)
        dW[:b] *= sdt
        if want_draws:
            draws[k:k + b] = dW[:b]
        for t in range(b):
            step = k + t + 1
            if spec.kind == "dirac":
                hv = buf[:, 0]
            elif spec.kind == "saturated":
                x = buf[:, 0]
                hv = x / (1.0 + spec.alpha * x ** spec.q)
            else:
                hv = buf @ kernel_w
            dw = dW[t]
            inc = p.beta * S * hv
            S1 = S + (p.lam - p.mu * S - inc + p.eta * R) * dt + p.sigma * S * dw
            I1 = I + (inc - (p.mu + p.gamma + p.delta) * I) * dt + p.sigma * I * dw
            R1 = R + (p.gamma * I - (p.mu + p.eta) * R) * dt + p.sigma * R * dw
            for name, arr in zip(COMPONENTS, (S1, I1, R1)):
                if not np.all(np.isfinite(arr)):
                    bad = ~np.isfinite(arr)
                    raise NumericalError(step, name, int(np.argmax(bad)))
            if clamp:
                for ci, arr in enumerate((S1, I1, R1)):
                    neg = arr < 0.0
                    if neg.any():
                        clamp_events[neg, ci] += 1
                        np.maximum(arr, 0.0, out=arr)
            else:
                for name, arr in zip(COMPONENTS, (S1, I1, R1)):
                    neg = arr < 0.0
                    if neg.any():
                        raise NegativeStateError(step, name, int(np.argmax(neg)))
            S, I, R = S1, I1, R1
            buf[:, :-1] = buf[:, 1:]
            buf[:, -1] = I
            if want_full_i:
                i_full[step] = I
            if step % stride == 0:
                r_i = step // stride
                rec[r_i, :, 0], rec[r_i, :, 1], rec[r_i, :, 2] = S, I, R
        k += b

    times = np.arange(n_rec) * (dt * stride)
    return _BatchResult(times, rec, clamp_events, n_steps,
                        i_full=i_full, draws=draws)


def simulate_path(cfg: SimConfig, seed: Seed) -> Trajectory:
    """Integrate one sample path of (S, I, R) and record every
    ``record_stride``-th state."""
    res = _integrate(cfg, [seed])
    return Trajectory(
        times=res.times,
        states=res.states[:, 0, :],
        draws_consumed=res.n_steps,
        clamp_events=res.clamp_events[0].copy(),
    )


def simulate_reduced_total(cfg: SimConfig, seed: Seed) -> Trajectory:
    """Integrate the reduced total-population recursion

        N' = N + (lam - mu*N - delta*I)*dt + sigma*N*dW

    using the I-values and the draws of the paired full run with the same
    seed.  When no clamping triggers in the paired run, N matches S+I+R of
    the full recursion to floating rounding at every recorded time.
    """
    p = cfg.params
    dt = cfg.dt
    res = _integrate(cfg, [seed], want_full_i=True, want_draws=True)
    i_path = res.i_full[:, 0]
    dw = res.draws[:, 0]
    stride = cfg.record_stride
    out = np.empty(res.times.size)
    n = float(np.sum(cfg.history_grid()[-1]))
    out[0] = n
    for k in range(res.n_steps):
        n = n + (p.lam - p.mu * n - p.delta * i_path[k]) * dt + p.sigma * n * dw[k]
        if not math.isfinite(n):
            raise NumericalError(k + 1, "N")
        if (k + 1) % stride == 0:
            out[(k + 1) // stride] = n
    return Trajectory(times=res.times, states=out,
                      draws_consumed=res.n_steps,
                      clamp_events=np.zeros(1, dtype=np.int64))


def simulate_comparison(cfg: SimConfig, seed: Seed) -> Trajectory:
    """Integrate the dominating linear comparison process

        N~' = N~ + (lam - mu*N~)*dt + sigma*N~*dW

    from N~(0) = S(0)+I(0)+R(0), with the same draws as the paired full run.
    """
    res = simulate_comparison_batch(cfg, [seed])
    return Trajectory(times=res.times, states=res.states[:, 0],
                      draws_consumed=res.n_steps,
                      clamp_events=np.zeros(1, dtype=np.int64))


class _ComparisonBatch:
    __slots__ = ("times", "states", "n_steps")

    def __init__(self, times, states, n_steps):
        self.times = times
        self.states = states  # (n_rec, n_paths)
        self.n_steps = n_steps


def simulate_comparison_batch(cfg: SimConfig,
                              seeds: Sequence[Seed]) -> _ComparisonBatch:
    """Vectorized comparison process over a batch of paths (shared grid,
    per-path noise streams identical to the full engine's)."""
    p = cfg.params
    dt = cfg.dt
    sdt = math.sqrt(dt)
    n_steps = cfg.n_steps
    stride = cfg.record_stride
    n_paths = len(seeds)
    n0 = float(np.sum(cfg.history_grid()[-1]))

    n_rec = n_steps // stride + 1
    rec = np.empty((n_rec, n_paths))
    N = np.full(n_paths, n0)
    rec[0] = N
    gens = [_stream(s) for s in seeds]
    block = max(1, min(n_steps if n_steps else 1,
                       _DRAW_BLOCK // max(n_paths, 1)))
    dW = np.empty((block, n_paths))
    k = 0
    while k < n_steps:
        b = min(block, n_steps - k)
        for j, g in enumerate(gens):
            dW[:b, j] = g.standard_normal(b)
        dW[:b] *= sdt
        for t in range(b):
            step = k + t + 1
            N = N + (p.lam - p.mu * N) * dt + p.sigma * N * dW[t]
            if not np.all(np.isfinite(N)):
                raise NumericalError(step, "N", int(np.argmax(~np.isfinite(N))))
            if step % stride == 0:
                rec[step // stride] = N
        k += b
    times = np.arange(n_rec) * (dt * stride)
    return _ComparisonBatch(times, rec, n_steps)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV export with full double precision (17 significant digits)."""
    scalar = traj.states.ndim == 1
    header = "t,N" if scalar else "t,S,I,R"
    if scalar:
        data = np.column_stack([traj.times, traj.states])
    else:
        data = np.column_stack([traj.times, traj.states])
    np.savetxt(path, data, delimiter=",", header=header, comments="",
               fmt="%.17g")
