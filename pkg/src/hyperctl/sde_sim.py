"""Fixed-step trajectory generation with additive Gaussian noise.

``simulate`` runs Euler-Maruyama; ``deterministic_simulate`` runs classical
RK4 and serves as the zero-noise reference.  Both accept an optional
controller that switches on at its activation time.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BlowUpError, ConfigError, DomainError, ParseError

__all__ = [
    "NoiseSpec",
    "SimPlan",
    "Trajectory",
    "simulate",
    "deterministic_simulate",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "BLOWUP_LIMIT",
]

BLOWUP_LIMIT = 1e6


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ConfigError(f"sigma must be finite and >= 0, got {self.sigma}")


@dataclass(frozen=True)
class SimPlan:
    """Time schedule: record from ``t0``; infer on ``[t0, t1]``; control from ``t2``."""

    t0: float = 0.0
    t1: float = 5.0
    t2: float = 5.5
    t_end: float = 12.0
    dt: float = 1e-3
    dt_record: float = 1e-2

    def __post_init__(self):
        if not (self.t0 <= self.t1 <= self.t2 <= self.t_end):
            raise ConfigError(
                f"plan requires t0 <= t1 <= t2 <= t_end, got "
                f"{self.t0}, {self.t1}, {self.t2}, {self.t_end}"
            )
        if not (self.dt > 0 and self.dt_record > 0):
            raise ConfigError("dt and dt_record must be positive")
        ratio = self.dt_record / self.dt
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ConfigError(f"dt_record/dt must be a positive integer, got {ratio}")

    @property
    def stride(self) -> int:
        return int(round(self.dt_record / self.dt))

    @property
    def num_records(self) -> int:
        """Recorded samples, including the one at ``t0``."""
        return int(math.floor((self.t_end - self.t0) / self.dt_record + 1e-9)) + 1

    def step_index(self, t: float) -> int:
        """First integration step whose time is at or after ``t``."""
        return int(math.ceil((t - self.t0) / self.dt - 1e-9))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    control_log: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if times.ndim != 1 or states.ndim != 2 or states.shape[0] != times.size:
            raise DomainError(
                f"trajectory shape mismatch: times {times.shape}, states {states.shape}"
            )
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        if self.control_log is not None:
            log = np.asarray(self.control_log, dtype=float)
            if log.shape != states.shape:
                raise DomainError("control_log must match the states' shape")
            object.__setattr__(self, "control_log", log)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def dt_record(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        if self.times.size < 3:
            return True
        d = np.diff(self.times)
        return bool(np.all(np.abs(d - d[0]) <= rtol * abs(d[0]) + 1e-12 * abs(self.times).max()))

    def window_mask(self, ta: float, tb: float) -> np.ndarray:
        eps = 1e-9 * max(1.0, abs(ta), abs(tb))
        return (self.times >= ta - eps) & (self.times <= tb + eps)

    def window(self, ta: float, tb: float) -> "Trajectory":
        mask = self.window_mask(ta, tb)
        log = None if self.control_log is None else self.control_log[mask]
        return Trajectory(self.times[mask], self.states[mask], log)


def _control_fn(ctrl):
    if ctrl is None:
        return None, math.inf
    return ctrl.input, ctrl.active_from


def _check_x0(m, x0) -> np.ndarray:
    x = np.array(x0, dtype=float)
    if x.shape != (m.n,):
        raise DomainError(f"x0 must have shape ({m.n},), got {x.shape}")
    return x


def _check_ctrl(m, ctrl) -> None:
    if ctrl is not None and any(not 0 <= k < m.n for k in ctrl.controlled):
        raise DomainError("controlled nodes must be valid node indices")


def _blowup(x, t):
    if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > BLOWUP_LIMIT:
        raise BlowUpError(f"state diverged at t={t:.6g} (|x| > {BLOWUP_LIMIT:g} or non-finite)", t)


def simulate(m, x0, noise: NoiseSpec, plan: SimPlan, ctrl=None) -> Trajectory:
    """Euler-Maruyama integration of ``dx = (drift + u) dt + sigma dW``.

    Noise increments are drawn from a generator seeded by ``noise.rng_seed``
    in a fixed order that does not depend on ``ctrl``, so runs with and
    without a controller coincide exactly until the controller switches on.

    Raises:
        BlowUpError: when the state leaves ``|x| <= 1e6`` or turns non-finite.
    """
    x = _check_x0(m, x0)
    _check_ctrl(m, ctrl)
    n = m.n
    rng = np.random.default_rng(noise.rng_seed)
    dt, stride = plan.dt, plan.stride
    amp = noise.sigma * math.sqrt(dt)
    u_fn, t_on = _control_fn(ctrl)
    k_on = plan.step_index(t_on) if u_fn is not None else None

    records = plan.num_records
    times = plan.t0 + plan.dt_record * np.arange(records)
    states = np.empty((records, n))
    log = np.zeros((records, n)) if ctrl is not None else None

    k = 0
    for r in range(records):
        states[r] = x
        if log is not None and k >= k_on:
            log[r] = u_fn(x)
        if r == records - 1:
            break
        eta = rng.standard_normal((stride, n))
        for s in range(stride):
            drift = m.rhs(x)
            if u_fn is not None and k >= k_on:
                drift = drift + u_fn(x)
            x = x + drift * dt + amp * eta[s]
            k += 1
        _blowup(x, plan.t0 + k * dt)
    return Trajectory(times, states, log)


def deterministic_simulate(m, x0, plan: SimPlan, ctrl=None) -> Trajectory:
    """Classical fourth-order Runge-Kutta at step ``plan.dt``, no noise."""
    x = _check_x0(m, x0)
    _check_ctrl(m, ctrl)
    n = m.n
    dt, stride = plan.dt, plan.stride
    u_fn, t_on = _control_fn(ctrl)
    k_on = plan.step_index(t_on) if u_fn is not None else None

    def f(y, k):
        d = m.rhs(y)
        if u_fn is not None and k >= k_on:
            d = d + u_fn(y)
        return d

    records = plan.num_records
    times = plan.t0 + plan.dt_record * np.arange(records)
    states = np.empty((records, n))
    log = np.zeros((records, n)) if ctrl is not None else None
    k = 0
    for r in range(records):
        states[r] = x
        if log is not None and k >= k_on:
            log[r] = u_fn(x)
        if r == records - 1:
            break
        for _ in range(stride):
            k1 = f(x, k)
            k2 = f(x + 0.5 * dt * k1, k)
            k3 = f(x + 0.5 * dt * k2, k)
            k4 = f(x + dt * k3, k)
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            k += 1
        _blowup(x, plan.t0 + k * dt)
    return Trajectory(times, states, log)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    n = traj.n
    header = ["t"] + [f"x{i}" for i in range(n)]
    if traj.control_log is not None:
        header += [f"u{i}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in range(traj.times.size):
            row = [traj.times[r], *traj.states[r]]
            if traj.control_log is not None:
                row += list(traj.control_log[r])
            w.writerow([repr(float(v)) for v in row])


def read_trajectory_csv(path) -> Trajectory:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0] != "t":
        raise ParseError(f"{path}:1: expected header starting with 't'", 1)
    header = rows[0]
    xs = [c for c in header[1:] if c.startswith("x")]
    us = [c for c in header[1:] if c.startswith("u")]
    n = len(xs)
    if xs != [f"x{i}" for i in range(n)] or us not in ([], [f"u{i}" for i in range(n)]):
        raise ParseError(f"{path}:1: malformed header", 1)
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric value ({exc})") from None
    if data.size == 0:
        data = data.reshape(0, len(header))
    if data.shape[1] != len(header):
        raise ParseError(f"{path}: ragged rows")
    log = data[:, 1 + n:] if us else None
    return Trajectory(data[:, 0], data[:, 1:1 + n], log)
