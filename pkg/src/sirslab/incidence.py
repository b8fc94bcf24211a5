"""Incidence functionals acting on the infected-compartment history.

The built-in kinds are:

* ``dirac``       -- discrete delay, H(phi) = phi(-tau)
* ``uniform``     -- distributed delay with a flat kernel on [0, tau]
* ``exponential`` -- distributed delay with a truncated exponential kernel
* ``tabulated``   -- distributed delay with a user-supplied kernel table
* ``saturated``   -- saturation form phi(-tau) / (1 + alpha*phi(-tau)^q)

Distributed-delay kernels are discretized with the left-endpoint rule on the
engine grid and renormalized so the discrete weights sum to exactly 1, which
makes the evaluation reproduce constants exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class ConfigurationError(ValueError):
    """An incidence spec or a segment does not match the engine grid."""


KINDS = ("dirac", "uniform", "exponential", "tabulated", "saturated")


@dataclass(frozen=True)
class IncidenceSpec:
    """Declarative description of an incidence functional.

    ``rate`` applies to the exponential kernel, ``alpha``/``q`` to the
    saturated form and ``table`` (rows of (s, f(s)) with s in [0, tau]) to
    the tabulated kernel.  Use the classmethod constructors.
    """

    kind: str
    tau: float
    rate: Optional[float] = None
    alpha: Optional[float] = None
    q: Optional[float] = None
    table: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown incidence kind {self.kind!r}")
        if not self.tau >= 0:
            raise ConfigurationError("tau must be >= 0")
        if self.kind == "exponential" and (self.rate is None or self.rate < 0):
            raise ConfigurationError("exponential kernel requires rate >= 0")
        if self.kind == "saturated":
            if self.alpha is None or self.alpha < 0:
                raise ConfigurationError("saturated incidence requires alpha >= 0")
            if self.q is None or self.q < 1:
                raise ConfigurationError("saturated incidence requires q >= 1")
        if self.kind == "tabulated":
            tab = self.table
            if tab is None or np.asarray(tab).ndim != 2 or np.asarray(tab).shape[1] != 2:
                raise ConfigurationError("tabulated kernel requires a (n, 2) table")
            if np.any(np.asarray(tab)[:, 1] < 0):
                raise ConfigurationError("tabulated kernel values must be >= 0")

    @classmethod
    def dirac(cls, tau: float) -> "IncidenceSpec":
        return cls(kind="dirac", tau=tau)

    @classmethod
    def uniform(cls, tau: float) -> "IncidenceSpec":
        return cls(kind="uniform", tau=tau)

    @classmethod
    def exponential(cls, rate: float, tau: float) -> "IncidenceSpec":
        return cls(kind="exponential", tau=tau, rate=rate)

    @classmethod
    def saturated(cls, alpha: float, q: float, tau: float) -> "IncidenceSpec":
        return cls(kind="saturated", tau=tau, alpha=alpha, q=q)

    @classmethod
    def tabulated(cls, table, tau: float) -> "IncidenceSpec":
        return cls(kind="tabulated", tau=tau,
                   table=np.array(table, dtype=float))

    @classmethod
    def tabulated_from_file(cls, path, tau: float) -> "IncidenceSpec":
        """Load a two-column (s, f(s)) text table."""
        table = np.loadtxt(path, ndmin=2)
        return cls.tabulated(table, tau)

    @property
    def is_kernel(self) -> bool:
        """Distributed-delay kinds evaluated by quadrature."""
        return self.kind in ("uniform", "exponential", "tabulated")

    def grid_steps(self, dt: float) -> int:
        """Number of delay steps; tau must be an integer multiple of dt."""
        n = int(round(self.tau / dt))
        if abs(n * dt - self.tau) > 1e-9 * max(1.0, self.tau):
            raise ConfigurationError(
                f"tau={self.tau} is not an integer multiple of dt={dt}")
        return n

    def grid_weights(self, dt: float) -> np.ndarray:
        """Normalized quadrature weights w_j for lags s_j = j*dt, j=0..n-1.

        Left-endpoint discretization of the kernel on [0, tau), renormalized
        so the weights sum to 1.
        """
        if not self.is_kernel:
            raise ConfigurationError(f"{self.kind} has no quadrature weights")
        n = self.grid_steps(dt)
        if n == 0:
            raise ConfigurationError("kernel incidence requires tau > 0")
        s = np.arange(n) * dt
        if self.kind == "uniform":
            raw = np.ones(n)
        elif self.kind == "exponential":
            raw = np.exp(-self.rate * s)
        else:
            tab = self.table
            raw = np.interp(s, tab[:, 0], tab[:, 1])
        total = raw.sum()
        if total <= 0:
            raise ConfigurationError("kernel weights sum to zero on the grid")
        return raw / total


@dataclass(frozen=True)
class AssumptionAConstants:
    """Linear growth constant and bounded-domain Lipschitz constant."""

    c: float
    lipschitz: Callable[[float], float]


def _check_segment(spec: IncidenceSpec, segment) -> np.ndarray:
    values = np.asarray(segment.values, dtype=float)
    n = spec.grid_steps(segment.dt)
    if values.shape[-1] != n + 1:
        raise ConfigurationError(
            f"segment has {values.shape[-1]} values, expected {n + 1} "
            f"for tau={spec.tau}, dt={segment.dt}")
    if not np.all(np.isfinite(values)):
        raise ConfigurationError("segment contains non-finite values")
    return values


def evaluate_incidence(spec: IncidenceSpec, segment) -> float:
    """Apply the functional to a history segment (oldest value first).

    ``segment`` needs ``dt`` and ``values`` attributes covering [t-tau, t]
    inclusive on the engine grid.
    """
    values = _check_segment(spec, segment)
    if spec.kind == "dirac":
        return float(values[0])
    if spec.kind == "saturated":
        x = float(values[0])
        return x / (1.0 + spec.alpha * x ** spec.q)
    w = spec.grid_weights(segment.dt)
    # phi(-s_j) = values[n - j]; reversing puts lag order first
    return float(np.dot(w, values[::-1][: w.size]))


def saturated_lipschitz(alpha: float, q: float, m: float, grid: int = 20001) -> float:
    """Max of |d/dx x/(1 + alpha*x^q)| on [0, m], evaluated on a fine grid."""
    if m <= 0:
        return 1.0
    x = np.linspace(0.0, m, grid)
    xq = x ** q
    deriv = (1.0 + alpha * (1.0 - q) * xq) / (1.0 + alpha * xq) ** 2
    return float(np.max(np.abs(deriv)))


def assumption_a_constants(spec: IncidenceSpec) -> AssumptionAConstants:
    """Analytic growth/Lipschitz constants for the built-in functionals.

    The delay and kernel kinds are convex combinations of segment values, so
    c = 1 and L_m = 1 for every m.  The saturated form has c = 1 (it is
    dominated by the identity) and L_m from the derivative bound on [0, m].
    """
    if spec.kind == "saturated":
        alpha, q = spec.alpha, spec.q
        return AssumptionAConstants(
            c=1.0, lipschitz=lambda m: saturated_lipschitz(alpha, q, m))
    return AssumptionAConstants(c=1.0, lipschitz=lambda m: 1.0)
