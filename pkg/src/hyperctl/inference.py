"""Hypergraph reconstruction from sampled trajectories.

The unknown drift of every node is Taylor-expanded around an equilibrium
estimate and fitted by sequentially thresholded least squares on a library of
centred monomials.  Structure is read off the surviving coefficients:

* a monomial whose variables other than the head ``i`` are exactly ``{j}``
  is evidence for the 2-edge ``(i, j)``;
* a monomial whose variables other than ``i`` are exactly ``{j, k}`` (the
  lowest such term is the cross product ``d_j * d_k``) is evidence for the
  3-edge ``(i, {j, k})``.  Pairwise-additive couplings never produce mixed
  ``j``/``k`` terms, so a non-zero mixed partial signals a genuine triad.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError
from .hypergraph import Edge2, Edge3, Hypergraph, format_weight, write_edge_list
from .sde_sim import Trajectory

__all__ = [
    "LibrarySpec",
    "Library",
    "SparseFit",
    "RegressionResult",
    "InferredHypergraph",
    "estimate_derivatives",
    "estimate_equilibrium",
    "build_library",
    "monomial_name",
    "stlsq",
    "infer_hypergraph",
    "extract_edges",
    "write_inferred",
    "write_regression_report",
    "MIN_WINDOW_SAMPLES",
]

MIN_WINDOW_SAMPLES = 5


@dataclass(frozen=True)
class LibrarySpec:
    """Monomial library settings.

    ``centering`` of ``None`` means "use the window mean".  With
    ``normalize`` set, columns are scaled to unit RMS before regression so a
    single threshold applies to every monomial degree; coefficients and
    scores are then in derivative units (contribution per typical excursion).
    """

    max_degree: int = 3
    include_cross_terms: bool = True
    centering: tuple | None = None
    normalize: bool = False

    def __post_init__(self):
        if self.max_degree < 1:
            raise ConfigError(f"max_degree must be >= 1, got {self.max_degree}")
        if self.centering is not None:
            object.__setattr__(self, "centering", tuple(float(v) for v in self.centering))


def monomial_name(mono: tuple[int, ...]) -> str:
    """Canonical column name, e.g. ``()`` -> ``1``, ``(0, 0, 3)`` -> ``x0^2*x3``."""
    if not mono:
        return "1"
    parts = []
    for v in sorted(set(mono)):
        p = mono.count(v)
        parts.append(f"x{v}" if p == 1 else f"x{v}^{p}")
    return "*".join(parts)


class Library(NamedTuple):
    theta: np.ndarray
    monomials: list[tuple[int, ...]]

    @property
    def names(self) -> list[str]:
        return [monomial_name(m) for m in self.monomials]


def _monomials(n: int, spec: LibrarySpec) -> list[tuple[int, ...]]:
    monos: list[tuple[int, ...]] = [()]
    for d in range(1, spec.max_degree + 1):
        for m in combinations_with_replacement(range(n), d):
            if spec.include_cross_terms or len(set(m)) == 1:
                monos.append(m)
    return monos


def build_library(states, spec: LibrarySpec) -> Library:
    """Design matrix of centred monomials, degree-major, lexicographic within a degree.

    ``states`` are raw samples; they are centred by ``spec.centering`` here
    (or by their own mean if no centering is given).
    """
    X = np.asarray(states, dtype=float)
    if X.ndim != 2:
        raise DomainError("states must be a (samples, n) matrix")
    n = X.shape[1]
    center = X.mean(axis=0) if spec.centering is None else np.asarray(spec.centering)
    if center.shape != (n,):
        raise DomainError(f"centering has shape {center.shape}, expected ({n},)")
    D = X - center
    monos = _monomials(n, spec)
    theta = np.empty((X.shape[0], len(monos)))
    cache: dict[tuple[int, ...], np.ndarray] = {(): np.ones(X.shape[0])}
    for c, m in enumerate(monos):
        if m not in cache:
            cache[m] = cache[m[:-1]] * D[:, m[-1]]
        theta[:, c] = cache[m]
    return Library(theta, monos)


def _moving_average(X: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return X
    kernel = np.ones(width) / width
    pad = width // 2
    Xp = np.pad(X, ((pad, width - 1 - pad), (0, 0)), mode="edge")
    return np.stack([np.convolve(Xp[:, c], kernel, mode="valid") for c in range(X.shape[1])], axis=1)


def estimate_derivatives(
    traj: Trajectory,
    window: tuple[float, float] | None = None,
    scheme: str = "central",
    smooth_width: int = 0,
):
    """Finite-difference derivative estimates inside ``window``.

    ``central``: ``(x[k+1] - x[k-1]) / (2 dt)`` on interior samples, both
    endpoints dropped.  ``forward``: ``(x[k+1] - x[k]) / dt`` aligned with
    ``x[k]``, last sample dropped; unlike central differences it is not
    correlated with the noise already contained in ``x[k]``.

    Returns:
        ``(times, states, derivatives)`` aligned row by row.

    Raises:
        ConfigError: fewer than five samples in the window, or non-uniform
        sampling.
    """
    sub = traj if window is None else traj.window(*window)
    if sub.times.size < MIN_WINDOW_SAMPLES:
        raise ConfigError(
            f"window holds {sub.times.size} samples; at least {MIN_WINDOW_SAMPLES} are required"
        )
    if not sub.is_uniform():
        raise ConfigError("derivative estimation requires uniform sampling")
    dt = sub.dt_record
    X = _moving_average(sub.states, smooth_width)
    if scheme == "central":
        dX = (X[2:] - X[:-2]) / (2.0 * dt)
        return sub.times[1:-1], X[1:-1], dX
    if scheme == "forward":
        dX = (X[1:] - X[:-1]) / dt
        return sub.times[:-1], X[:-1], dX
    raise ConfigError(f"unknown derivative scheme {scheme!r}")


def estimate_equilibrium(traj: Trajectory, window: tuple[float, float] | None = None) -> np.ndarray:
    """Per-node temporal mean over ``window``."""
    sub = traj if window is None else traj.window(*window)
    if sub.times.size == 0:
        raise ConfigError("empty window")
    return sub.states.mean(axis=0)


class SparseFit(NamedTuple):
    coef: np.ndarray
    residual_norm: float
    rank_deficient: bool
    iterations: int


def _solve(theta, y, active, ridge):
    coef = np.zeros(theta.shape[1])
    k = int(active.sum())
    if k == 0:
        return coef, False
    A = theta[:, active]
    b = y
    if ridge > 0:
        A = np.vstack([A, np.sqrt(ridge * theta.shape[0]) * np.eye(k)])
        b = np.concatenate([y, np.zeros(k)])
    sol, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    coef[active] = sol
    return coef, bool(rank < k)


def stlsq(theta, y, lam: float, max_iter: int = 25, ridge: float = 0.0) -> SparseFit:
    """Sequentially thresholded least squares.

    Alternates a fit on the active columns with hard thresholding of
    coefficients below ``lam`` until the active set stops changing.  The fit
    minimises ``mean((y - theta @ c)**2) + ridge * |c|**2``; with the default
    ``ridge=0`` it is plain least squares, and rank-deficient active sets get
    the minimum-norm solution and are flagged.
    """
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise ConfigError(f"threshold must be >= 0, got {lam}")
    if ridge < 0:
        raise ConfigError(f"ridge must be >= 0, got {ridge}")
    p = theta.shape[1]
    active = np.ones(p, dtype=bool)
    coef = np.zeros(p)
    deficient = False
    it = 0
    for it in range(1, max_iter + 1):
        coef, deficient = _solve(theta, y, active, ridge)
        new_active = np.abs(coef) >= lam
        coef[~new_active] = 0.0
        if np.array_equal(new_active, active):
            break
        active = new_active
    else:
        # iteration budget exhausted: refit on the last active set
        coef, deficient = _solve(theta, y, active, ridge)
        coef[np.abs(coef) < lam] = 0.0
    resid = float(np.linalg.norm(y - theta @ coef))
    return SparseFit(coef, resid, bool(deficient), it)


@dataclass
class RegressionResult:
    monomials: list[tuple[int, ...]]
    coefficients: np.ndarray  # (n, columns), exact zeros off the support
    residual_norm: np.ndarray  # per node
    threshold_used: float
    rank_deficient: list[bool]
    center: np.ndarray
    column_scale: np.ndarray  # ones unless the library was normalised
    exploration_radius: float
    samples: int
    window: tuple[float, float]
    last_sample_time: float
    wall_clock: float

    def coefficient_map(self, node: int) -> dict[str, float]:
        return {monomial_name(m): float(c) for m, c in zip(self.monomials, self.coefficients[node])}


@dataclass
class InferredHypergraph:
    """Inferred structure with confidence scores.

    ``edges2`` maps ``(head, tail)`` and ``edges3`` maps
    ``(head, frozenset({j, k}))`` to ``(weight, score)``: the signed and the
    absolute value of the largest contributing coefficient.
    """

    n: int
    edges2: dict = field(default_factory=dict)
    edges3: dict = field(default_factory=dict)

    @property
    def num_edges(self) -> int:
        return len(self.edges2) + len(self.edges3)

    def triads(self) -> set:
        return set(self.edges3)

    def pairs(self) -> set:
        return set(self.edges2)

    def to_hypergraph(self) -> Hypergraph:
        """One stored slot per unordered triad, tails ascending."""
        e2 = tuple(Edge2(h, t, w) for (h, t), (w, _) in sorted(self.edges2.items()))
        e3 = tuple(
            Edge3(h, tuple(sorted(tl)), w)
            for (h, tl), (w, _) in sorted(self.edges3.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1])))
        )
        return Hypergraph(self.n, e2, e3)

    def scores(self) -> dict:
        out = {(h, (t,)): s for (h, t), (_, s) in self.edges2.items()}
        out.update({(h, tuple(sorted(tl))): s for (h, tl), (_, s) in self.edges3.items()})
        return out


def extract_edges(n: int, monomials, coefficients) -> InferredHypergraph:
    """Read 2- and 3-edges off thresholded regression coefficients."""
    out = InferredHypergraph(n)
    for i in range(n):
        for m, c in zip(monomials, coefficients[i]):
            if c == 0.0 or not m:
                continue
            others = frozenset(m) - {i}
            if len(others) == 1:
                (j,) = others
                _keep(out.edges2, (i, j), c)
            elif len(others) == 2:
                _keep(out.edges3, (i, others), c)
    return out


def _keep(store: dict, key, c: float) -> None:
    if key not in store or abs(c) > store[key][1]:
        store[key] = (float(c), abs(float(c)))


def infer_hypergraph(
    traj,
    window: tuple[float, float],
    spec: LibrarySpec = LibrarySpec(),
    lam: float = 0.05,
    scheme: str = "central",
    smooth_width: int = 0,
    max_iter: int = 25,
    ridge: float = 0.0,
) -> tuple[InferredHypergraph, RegressionResult]:
    """Fit every node's drift on the window and extract edges.

    ``traj`` is one :class:`Trajectory` or a sequence of them (independent
    bursts, e.g. from different initial conditions); their rows are stacked.
    Only samples with ``window[0] <= t <= window[1]`` are used and derivative
    stencils never reach outside the window.  The library is centred on
    ``spec.centering`` or, when that is ``None``, on the window mean.
    """
    start = time.perf_counter()
    trajs = [traj] if isinstance(traj, Trajectory) else list(traj)
    if not trajs:
        raise ConfigError("no trajectories given")
    parts = [estimate_derivatives(tr, window, scheme=scheme, smooth_width=smooth_width) for tr in trajs]
    X = np.vstack([p[1] for p in parts])
    dX = np.vstack([p[2] for p in parts])
    n = X.shape[1]
    if spec.centering is None:
        center = np.vstack([tr.window(*window).states for tr in trajs]).mean(axis=0)
    else:
        center = np.asarray(spec.centering, dtype=float)
    lib = build_library(X, LibrarySpec(spec.max_degree, spec.include_cross_terms, tuple(center)))
    theta = lib.theta
    scale = np.ones(theta.shape[1])
    if spec.normalize:
        rms = np.sqrt(np.mean(theta**2, axis=0))
        scale = np.where(rms > 0, rms, 1.0)
        theta = theta / scale
    coefs = np.zeros((n, theta.shape[1]))
    resid = np.zeros(n)
    deficient = []
    for i in range(n):
        fit = stlsq(theta, dX[:, i], lam, max_iter=max_iter, ridge=ridge)
        coefs[i] = fit.coef
        resid[i] = fit.residual_norm
        deficient.append(fit.rank_deficient)
    inferred = extract_edges(n, lib.monomials, coefs)
    wall = time.perf_counter() - start
    result = RegressionResult(
        monomials=lib.monomials,
        coefficients=coefs,
        residual_norm=resid,
        threshold_used=float(lam),
        rank_deficient=deficient,
        center=center,
        column_scale=scale,
        exploration_radius=float(np.max(np.abs(X - center), initial=0.0)),
        samples=int(X.shape[0]),
        window=(float(window[0]), float(window[1])),
        last_sample_time=float(max(tr.window(*window).times[-1] for tr in trajs)),
        wall_clock=wall,
    )
    return inferred, result


def write_inferred(inferred: InferredHypergraph, path) -> None:
    """Edge-list file with a trailing confidence column."""
    write_edge_list(inferred.to_hypergraph(), path, scores=inferred.scores())


def write_regression_report(result: RegressionResult, path) -> None:
    """CSV of non-zero coefficients: ``node,monomial,coefficient``."""
    lines = ["node,monomial,coefficient"]
    for i in range(result.coefficients.shape[0]):
        for m, c in zip(result.monomials, result.coefficients[i]):
            if c != 0.0:
                lines.append(f"{i},{monomial_name(m)},{format_weight(c)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
