"""Drift of noisy hypernetworked systems and equilibrium utilities.

Two model families share the ``rhs(x)`` interface:

* :class:`KuramotoModel` -- third-order Kuramoto oscillators,
  ``dx_i = w_i + sum_j A_ij sin(x_j - x_i) + sum_jk A_ijk sin(x_j + x_k - 2 x_i)``.
* :class:`GenericModel` -- ``dx_i = f(x)_i + sum_j a_ij f2(x_i, x_j)
  + sum_jk a_ijk f3(x_i, x_j, x_k)`` with user-supplied interaction functions.

Phases are kept unwrapped on the real line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NotFoundError
from .hypergraph import Hypergraph

__all__ = [
    "KuramotoModel",
    "GenericModel",
    "kuramoto_rhs",
    "generic_rhs",
    "kuramoto_as_generic",
    "sync_state",
    "find_equilibrium",
    "jacobian",
    "H_FD",
]

H_FD = 1e-5


def _as_state(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DomainError(f"state must have shape ({n},), got {x.shape}")
    return x


@dataclass(frozen=True, eq=False)
class KuramotoModel:
    h: Hypergraph
    omega: np.ndarray
    _arrays: tuple = field(init=False, repr=False)

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float).reshape(-1)
        if omega.shape != (self.h.n,):
            raise DomainError(f"omega has length {omega.size}, expected {self.h.n}")
        if not np.all(np.isfinite(omega)):
            raise DomainError("omega must be finite")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "_arrays", self.h.edge_arrays())

    @property
    def n(self) -> int:
        return self.h.n

    def rhs(self, x) -> np.ndarray:
        return kuramoto_rhs(self, x)


def kuramoto_rhs(m: KuramotoModel, x) -> np.ndarray:
    """Evaluate the third-order Kuramoto drift at phases ``x``.

    Each stored 3-edge slot contributes separately, so a tail-symmetric pair
    ``(i, j, k)``/``(i, k, j)`` counts twice, as in the unrestricted double sum.
    """
    n = m.n
    x = _as_state(x, n)
    h2, t2, w2, h3, j3, k3, w3 = m._arrays
    dx = m.omega.copy()
    if h2.size:
        dx += np.bincount(h2, weights=w2 * np.sin(x[t2] - x[h2]), minlength=n)
    if h3.size:
        dx += np.bincount(h3, weights=w3 * np.sin(x[j3] + x[k3] - 2.0 * x[h3]), minlength=n)
    return dx


def _zero_unary(x):
    return np.zeros_like(x)


def _zero_binary(xi, xj):
    return np.zeros_like(xi)


def _zero_ternary(xi, xj, xk):
    return np.zeros_like(xi)


@dataclass(frozen=True, eq=False)
class GenericModel:
    """Diffusive hypernetwork with arbitrary smooth interaction functions.

    ``f1`` maps the whole state vector to per-node self terms (so per-node
    constants like natural frequencies fit); ``f2(xi, xj)`` and
    ``f3(xi, xj, xk)`` are evaluated vectorised over edge arrays.
    """

    h: Hypergraph
    f1: Callable = _zero_unary
    f2: Callable = _zero_binary
    f3: Callable = _zero_ternary
    _arrays: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_arrays", self.h.edge_arrays())

    @property
    def n(self) -> int:
        return self.h.n

    def rhs(self, x) -> np.ndarray:
        return generic_rhs(self, x)


def generic_rhs(m: GenericModel, x) -> np.ndarray:
    n = m.n
    x = _as_state(x, n)
    h2, t2, w2, h3, j3, k3, w3 = m._arrays
    dx = np.asarray(m.f1(x), dtype=float).copy()
    if dx.shape != (n,):
        raise DomainError(f"f1 returned shape {dx.shape}, expected ({n},)")
    if h2.size:
        dx += np.bincount(h2, weights=w2 * m.f2(x[h2], x[t2]), minlength=n)
    if h3.size:
        dx += np.bincount(h3, weights=w3 * m.f3(x[h3], x[j3], x[k3]), minlength=n)
    return dx


def kuramoto_as_generic(m: KuramotoModel) -> GenericModel:
    omega = m.omega
    return GenericModel(
        m.h,
        f1=lambda x: omega.copy(),
        f2=lambda xi, xj: np.sin(xj - xi),
        f3=lambda xi, xj, xk: np.sin(xj + xk - 2.0 * xi),
    )


def jacobian(m, x, h_fd: float = H_FD) -> np.ndarray:
    """Central finite-difference Jacobian ``J[i, j] = d rhs_i / d x_j``."""
    x = _as_state(x, m.n)
    J = np.empty((m.n, m.n))
    for j in range(m.n):
        e = np.zeros(m.n)
        e[j] = h_fd
        J[:, j] = (m.rhs(x + e) - m.rhs(x - e)) / (2.0 * h_fd)
    return J


def _residual(m, x) -> np.ndarray:
    r = m.rhs(x)
    if isinstance(m, KuramotoModel):
        r = r - r.mean()
    return r


def find_equilibrium(m, x0, tol: float = 1e-10, max_iter: int = 50) -> np.ndarray:
    """Newton iteration on the drift with a finite-difference Jacobian.

    For Kuramoto models the residual is taken in the co-rotating frame
    (mean frequency removed), so a phase-locked state counts as an
    equilibrium.  Linear systems are solved in the least-squares sense, which
    handles the rotational zero mode.

    Raises:
        NotFoundError: on divergence or when ``max_iter`` is exhausted.
    """
    x = _as_state(x0, m.n).copy()
    r = _residual(m, x)
    for _ in range(max_iter):
        if not np.all(np.isfinite(r)):
            break
        if np.max(np.abs(r), initial=0.0) <= tol:
            return x
        J = jacobian(m, x)
        if isinstance(m, KuramotoModel):
            J = J - J.mean(axis=0, keepdims=True)
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        x = x + step
        r = _residual(m, x)
    if np.all(np.isfinite(r)) and np.max(np.abs(r), initial=0.0) <= tol:
        return x
    raise NotFoundError(
        f"no equilibrium within tol={tol:g} after {max_iter} Newton steps "
        f"(final residual {np.max(np.abs(r), initial=0.0):.3g})"
    )


def sync_state(m: KuramotoModel, tol: float = 1e-12, max_iter: int = 50) -> np.ndarray:
    """Phase-locked state of a Kuramoto model, pinned so that ``x[0] == 0``.

    Identical frequencies give the all-zero state directly.  Otherwise Newton
    refinement from zero is run on ``rhs_i - rhs_0`` over ``x[1:]``.

    Raises:
        NotFoundError: if refinement does not converge.
    """
    n = m.n
    if n == 0 or np.all(m.omega == m.omega[0]):
        return np.zeros(n)
    y = np.zeros(n - 1)

    def resid(y):
        r = m.rhs(np.concatenate(([0.0], y)))
        return r[1:] - r[0]

    r = resid(y)
    for _ in range(max_iter):
        if not np.all(np.isfinite(r)):
            break
        if np.max(np.abs(r)) <= tol:
            return np.concatenate(([0.0], y))
        J = np.empty((n - 1, n - 1))
        for j in range(n - 1):
            e = np.zeros(n - 1)
            e[j] = H_FD
            J[:, j] = (resid(y + e) - resid(y - e)) / (2.0 * H_FD)
        y = y + np.linalg.lstsq(J, -r, rcond=None)[0]
        r = resid(y)
    # rounding can stall just above a very tight tol
    if np.all(np.isfinite(r)) and np.max(np.abs(r)) <= max(tol, 1e-10):
        return np.concatenate(([0.0], y))
    raise NotFoundError(
        f"phase-locked state not found after {max_iter} Newton steps "
        f"(residual {np.max(np.abs(r)):.3g})"
    )
