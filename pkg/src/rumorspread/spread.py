"""Mean-field dynamics of the four-state rumor model.

States are densities over a homogeneous network:

* ``s``  - susceptible (has not heard the rumor)
* ``i``  - infected (spreads the rumor)
* ``r1`` - removed (knows it, does not care)
* ``r2`` - refuted (disbelieves it and spreads the correction)

The right-hand side cancels exactly term by term, so the total density is a
linear invariant and RK4 preserves it up to rounding.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterator

import numpy as np

from .errors import InvalidParams, NonFiniteState

STATE_TOL = 1e-9


@dataclass(frozen=True)
class StateVector:
    s: float
    i: float
    r1: float
    r2: float

    def __post_init__(self):
        values = self.as_tuple()
        if not all(math.isfinite(v) for v in values):
            raise InvalidParams(f"non-finite density in {values}")
        if any(v < -STATE_TOL or v > 1 + STATE_TOL for v in values):
            raise InvalidParams(f"density outside [0, 1]: {values}")
        if abs(sum(values) - 1.0) > STATE_TOL:
            raise InvalidParams(f"densities sum to {sum(values)!r}, expected 1")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.s, self.i, self.r1, self.r2)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)


@dataclass(frozen=True)
class ModelParams:
    """Transition probabilities and network/initial settings.

    Defaults are the configuration used for the reference simulation
    (N=10000, alpha=0.6, beta=0.3, delta=0.1, epsilon=0.2, theta=0.3,
    I(0)=0.01, <k>=1).

    ``delta`` is the infected -> removed probability on contact with a
    refuted node; ``theta`` is infected -> refuted on the same contact;
    ``epsilon`` is the per-step forgetting rate of spreaders.
    """

    alpha: float = 0.6
    beta: float = 0.3
    delta: float = 0.1
    epsilon: float = 0.2
    theta: float = 0.3
    k_avg: float = 1.0
    i0: float = 0.01
    n_population: int = 10_000

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("alpha", "beta", "delta", "epsilon", "theta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise InvalidParams(f"{name} must be in [0, 1], got {v!r}")
        if self.alpha + self.beta > 1.0 + 1e-12:
            raise InvalidParams(
                f"alpha + beta ≤ 1 violated ({self.alpha} + {self.beta})")
        if self.delta + self.theta > 1.0 + 1e-12:
            raise InvalidParams(
                f"delta + theta ≤ 1 violated ({self.delta} + {self.theta})")
        if not (math.isfinite(self.k_avg) and self.k_avg > 0):
            raise InvalidParams(f"k_avg must be > 0, got {self.k_avg!r}")
        # i0 == 0 is admitted: it is the zero-contagion fixed point.
        if not (math.isfinite(self.i0) and 0.0 <= self.i0 < 1.0):
            raise InvalidParams(f"i0 must be in [0, 1), got {self.i0!r}")
        if self.n_population <= 0:
            raise InvalidParams("n_population must be positive")

    def initial_state(self) -> StateVector:
        return StateVector(1.0 - self.i0, self.i0, 0.0, 0.0)


def _rhs(y: np.ndarray, p: ModelParams) -> np.ndarray:
    s, i, r1, r2 = y
    k = p.k_avg
    a, b = p.alpha, p.beta
    contact = k * (i + r2) * s
    ds = -contact
    di = (b * k * s - (p.delta + p.theta) * k * r2 - p.epsilon) * i
    dr1 = a * contact + p.delta * k * i * r2 + p.epsilon * (i + r2)
    dr2 = (k * s * ((1 - a - b) * i + (1 - a) * r2)
           + p.theta * k * i * r2 - p.epsilon * r2)
    return np.array([ds, di, dr1, dr2])


def derivatives(state: StateVector, params: ModelParams) -> tuple[float, float, float, float]:
    """Return ``(dS, dI, dR1, dR2)`` at ``state``."""
    d = _rhs(state.as_array(), params)
    return (float(d[0]), float(d[1]), float(d[2]), float(d[3]))


@dataclass(frozen=True)
class Trajectory:
    dt: float
    values: np.ndarray  # (n, 4): s, i, r1, r2
    rates: np.ndarray   # (n, 4): derivatives at each stored state
    params: ModelParams = field(default_factory=ModelParams)

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != 4 or len(self.values) == 0:
            raise ValueError("trajectory needs a non-empty (n, 4) state array")
        if self.rates.shape != self.values.shape:
            raise ValueError("rates and states must have the same shape")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    @property
    def states(self) -> list[StateVector]:
        return [StateVector(*map(float, row)) for row in self.values]

    @property
    def final(self) -> StateVector:
        return StateVector(*map(float, self.values[-1]))

    def __iter__(self) -> Iterator[StateVector]:
        return iter(self.states)

    @property
    def informed_fraction(self) -> float:
        """1 - S at the last stored step (fraction that ever heard the rumor)."""
        return 1.0 - float(self.values[-1, 0])

    def max_conservation_error(self) -> float:
        return float(np.max(np.abs(self.values.sum(axis=1) - 1.0)))


def _rk4_step(y: np.ndarray, h: float, p: ModelParams) -> np.ndarray:
    k1 = _rhs(y, p)
    k2 = _rhs(y + 0.5 * h * k1, p)
    k3 = _rhs(y + 0.5 * h * k2, p)
    k4 = _rhs(y + h * k3, p)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def simulate(params: ModelParams, dt: float = 0.01, horizon: float = 100.0,
             stop_below: float | None = 1e-8) -> Trajectory:
    """Integrate the mean-field equations with fixed-step RK4.

    Integration runs ``round(horizon / dt)`` steps, or stops early once the
    spreading densities ``i + r2`` fall below ``stop_below`` (pass ``None``
    to always cover the full horizon).  At least one step is always taken.

    Raises :class:`NonFiniteState` when a density leaves
    ``[-1e-9, 1 + 1e-9]`` or the total drifts from 1 by more than 1e-9,
    which signals an unstable step size.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidParams(f"dt must be > 0, got {dt!r}")
    if not horizon >= dt:
        raise InvalidParams(f"horizon must be ≥ dt, got {horizon!r}")
    n_steps = int(round(horizon / dt))

    y = params.initial_state().as_array()
    values = np.empty((n_steps + 1, 4))
    values[0] = y
    n = 1
    for step in range(1, n_steps + 1):
        y = _rk4_step(y, dt, params)
        if (not np.all(np.isfinite(y)) or np.any(y < -STATE_TOL)
                or np.any(y > 1 + STATE_TOL)):
            raise NonFiniteState(
                f"density left [0, 1] at t={step * dt:g}: {y.tolist()} "
                f"(dt={dt:g} too large?)")
        if abs(y.sum() - 1.0) >= STATE_TOL:
            raise NonFiniteState(
                f"total density drifted to {y.sum()!r} at t={step * dt:g}")
        values[n] = y
        n += 1
        if stop_below is not None and y[1] + y[3] < stop_below:
            break
    values = values[:n]
    rates = np.array([_rhs(row, params) for row in values])
    return Trajectory(dt=dt, values=values, rates=rates, params=params)


def new_insider_rate(traj: Trajectory) -> np.ndarray:
    """Rate at which people first hear the rumor, ``-dS/dt = <k>(I + R2)S``."""
    k = traj.params.k_avg
    s, i, r2 = traj.values[:, 0], traj.values[:, 1], traj.values[:, 3]
    return k * (i + r2) * s


def terminal_density(traj: Trajectory) -> float:
    return traj.informed_fraction


CSV_HEADER = ("t", "s", "i", "r1", "r2", "ds", "di", "dr1", "dr2")


def write_trajectory_csv(traj: Trajectory, path: str | PathLike[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for t, row, d in zip(traj.times, traj.values, traj.rates):
            w.writerow([f"{t:.12g}"] + [f"{v:.12g}" for v in row]
                       + [f"{v:.12g}" for v in d])


def read_trajectory_csv(path: str | PathLike[str], params: ModelParams | None = None) -> Trajectory:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected trajectory header {header}")
        rows = np.array([[float(x) for x in line] for line in r])
    dt = float(rows[1, 0] - rows[0, 0]) if len(rows) > 1 else 0.0
    return Trajectory(dt=dt, values=rows[:, 1:5], rates=rows[:, 5:9],
                      params=params or ModelParams())
