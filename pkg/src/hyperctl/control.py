"""Droop (proportional) state feedback on a parsimonious node set."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import KuramotoModel, jacobian
from .errors import ConfigError, DomainError, NumericalError
from .sde_sim import Trajectory

__all__ = [
    "ControlLaw",
    "StabilityReport",
    "Deviation",
    "make_controller",
    "validate_gain",
    "closed_loop_jacobian",
    "steady_state_deviation",
    "wrap_phase",
]


@dataclass(frozen=True, eq=False)
class ControlLaw:
    """``u_k = -gain * (x_k - target_k)`` on ``controlled`` nodes from ``active_from`` on.

    The constructor accepts any gain so that probes (zero or negative gain)
    can be validated; :func:`make_controller` enforces ``gain > 0``.
    """

    gain: float
    target: np.ndarray
    controlled: tuple[int, ...]
    active_from: float = 0.0

    def __post_init__(self):
        target = np.array(self.target, dtype=float).reshape(-1)
        target.setflags(write=False)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "controlled", tuple(sorted(int(k) for k in self.controlled)))
        if any(not 0 <= k < target.size for k in self.controlled):
            raise DomainError("controlled nodes must index into the target vector")
        mask = np.zeros(target.size)
        mask[list(self.controlled)] = 1.0
        object.__setattr__(self, "_mask", mask)

    @property
    def n(self) -> int:
        return self.target.size

    def input(self, x) -> np.ndarray:
        return -self.gain * self._mask * (np.asarray(x, dtype=float) - self.target)


def make_controller(s, x_star, K: float, t2: float) -> ControlLaw:
    """Build the droop law for control set ``s`` (a ControlSet or node iterable)."""
    nodes = getattr(s, "nodes", s)
    nodes = sorted(int(v) for v in nodes)
    if not nodes:
        raise ConfigError("control set is empty")
    if not (math.isfinite(K) and K > 0):
        raise ConfigError(f"gain must be positive, got {K}")
    return ControlLaw(float(K), x_star, tuple(nodes), float(t2))


@dataclass(frozen=True)
class StabilityReport:
    gain: float
    controlled: tuple[int, ...]
    eigenvalues: np.ndarray
    allowed_zero_modes: int
    tol: float
    passed: bool

    @property
    def max_real(self) -> float:
        return float(np.max(self.eigenvalues.real))

    def __str__(self) -> str:
        lines = [
            f"gain: {self.gain!r}",
            "controlled: " + " ".join(map(str, self.controlled)),
            f"max_real_part: {self.max_real!r}",
            f"allowed_zero_modes: {self.allowed_zero_modes}",
            f"passed: {str(self.passed).lower()}",
            "spectrum:",
        ]
        for ev in sorted(self.eigenvalues, key=lambda z: (z.real, z.imag)):
            lines.append(f"  {ev.real!r} {ev.imag!r}")
        return "\n".join(lines)


def closed_loop_jacobian(m, law: ControlLaw) -> np.ndarray:
    if law.n != m.n:
        raise DomainError(f"controller is sized for {law.n} nodes, model has {m.n}")
    return jacobian(m, law.target) - law.gain * np.diag(law._mask)


def validate_gain(m, law: ControlLaw, tol: float = 1e-7) -> StabilityReport:
    """Linear stability of the closed loop at the controller's target.

    Every eigenvalue must have real part below ``-tol``, except that an
    unforced Kuramoto model may keep its single rotational zero mode.
    """
    J = closed_loop_jacobian(m, law)
    try:
        ev = np.linalg.eigvals(J)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise NumericalError("closed-loop spectrum is not finite")
    unforced = law.gain == 0 or not law.controlled
    allowed = 1 if isinstance(m, KuramotoModel) and unforced else 0
    near_zero = int(np.sum(np.abs(ev.real) <= tol))
    positive = int(np.sum(ev.real > tol))
    passed = positive == 0 and near_zero <= allowed
    return StabilityReport(float(law.gain), law.controlled, ev, allowed, tol, bool(passed))


def wrap_phase(d):
    """Map angles to ``(-pi, pi]``."""
    w = np.mod(np.asarray(d, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


@dataclass(frozen=True)
class Deviation:
    per_node: np.ndarray
    global_rms: float


def steady_state_deviation(traj: Trajectory, x_star, window, circular: bool = True) -> Deviation:
    """RMS distance to ``x_star`` per node over ``window``, and its quadratic mean."""
    sub = traj.window(*window)
    if sub.times.size == 0:
        raise ConfigError(f"window {tuple(window)} contains no samples")
    d = sub.states - np.asarray(x_star, dtype=float)
    if circular:
        d = wrap_phase(d)
    per_node = np.sqrt(np.mean(d**2, axis=0))
    return Deviation(per_node, float(np.sqrt(np.mean(per_node**2))))
