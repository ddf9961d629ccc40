"""Directed hypergraphs with pairwise and triadic edges.

A 2-edge ``(head, tail)`` means ``tail`` influences ``head``; a 3-edge
``(head, (j, k))`` means ``j`` and ``k`` jointly influence ``head``.  Nodes are
0-indexed.  Storage is sparse (edge lists) rather than dense adjacency tensors.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ConfigError, DomainError, ParseError

__all__ = [
    "Edge2",
    "Edge3",
    "Hypergraph",
    "in_neighbors",
    "is_leaf",
    "leaves",
    "directed_path_exists",
    "reachable_from",
    "connected_components",
    "is_unilaterally_connected",
    "random_hypergraph",
    "read_edge_list",
    "write_edge_list",
    "format_weight",
]


class Edge2(NamedTuple):
    head: int
    tail: int
    weight: float

    @property
    def tails(self) -> tuple[int, ...]:
        return (self.tail,)


class Edge3(NamedTuple):
    head: int
    tails: tuple[int, int]
    weight: float


@dataclass(frozen=True)
class Hypergraph:
    """Immutable directed hypergraph of order at most 3.

    Both tail orders of a triadic interaction are separate storage slots;
    the dynamics sums over every stored slot.
    """

    n: int
    edges2: tuple[Edge2, ...] = ()
    edges3: tuple[Edge3, ...] = ()
    _heads: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"node count must be non-negative, got {self.n}")
        e2 = tuple(Edge2(int(h), int(t), float(w)) for h, t, w in self.edges2)
        e3 = tuple(
            Edge3(int(h), (int(tl[0]), int(tl[1])), float(w)) for h, tl, w in self.edges3
        )
        seen2 = set()
        for e in e2:
            self._check_nodes(e.head, e.tail)
            if e.head == e.tail:
                raise DomainError(f"self-loop on node {e.head}")
            if e.weight == 0 or not math.isfinite(e.weight):
                raise DomainError(f"edge {e[:2]} has invalid weight {e.weight}")
            if (e.head, e.tail) in seen2:
                raise DomainError(f"duplicate 2-edge {(e.head, e.tail)}")
            seen2.add((e.head, e.tail))
        seen3 = set()
        for e in e3:
            j, k = e.tails
            self._check_nodes(e.head, j, k)
            if e.head in (j, k):
                raise DomainError(f"3-edge {(e.head, j, k)} has its head among its tails")
            if j == k:
                raise DomainError(f"3-edge {(e.head, j, k)} repeats a tail")
            if e.weight == 0 or not math.isfinite(e.weight):
                raise DomainError(f"edge {(e.head, j, k)} has invalid weight {e.weight}")
            if (e.head, j, k) in seen3:
                raise DomainError(f"duplicate 3-edge {(e.head, j, k)}")
            seen3.add((e.head, j, k))
        object.__setattr__(self, "edges2", e2)
        object.__setattr__(self, "edges3", e3)
        object.__setattr__(
            self, "_heads", frozenset(e.head for e in e2) | frozenset(e.head for e in e3)
        )

    def _check_nodes(self, *nodes: int) -> None:
        for v in nodes:
            if not 0 <= v < self.n:
                raise DomainError(f"node {v} out of range for n={self.n}")

    def check_node(self, i: int) -> int:
        i = int(i)
        self._check_nodes(i)
        return i

    @property
    def nodes(self) -> range:
        return range(self.n)

    @property
    def num_edges(self) -> int:
        return len(self.edges2) + len(self.edges3)

    def edges(self) -> tuple:
        return self.edges2 + self.edges3

    def edge_key_set(self) -> set:
        """Hashable structural keys ``(head, tails)`` of every stored edge."""
        return {(e.head, (e.tail,)) for e in self.edges2} | {
            (e.head, e.tails) for e in self.edges3
        }

    def triads(self) -> set[tuple[int, frozenset]]:
        """Unordered triadic interactions ``(head, {j, k})``."""
        return {(e.head, frozenset(e.tails)) for e in self.edges3}

    def pairs(self) -> set[tuple[int, int]]:
        return {(e.head, e.tail) for e in self.edges2}

    def influence_adjacency(self) -> list[set[int]]:
        """``adj[t]`` holds every head that tail ``t`` influences."""
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for e in self.edges2:
            adj[e.tail].add(e.head)
        for e in self.edges3:
            for t in e.tails:
                adj[t].add(e.head)
        return adj

    def dependency_adjacency(self) -> list[set[int]]:
        """``adj[h]`` holds every tail of an edge headed by ``h``."""
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for e in self.edges2:
            adj[e.head].add(e.tail)
        for e in self.edges3:
            adj[e.head].update(e.tails)
        return adj

    def relabel(self, perm) -> "Hypergraph":
        """Return the hypergraph with node ``v`` renamed to ``perm[v]``."""
        p = [int(v) for v in perm]
        if sorted(p) != list(range(self.n)):
            raise DomainError("relabel requires a permutation of range(n)")
        return Hypergraph(
            self.n,
            tuple(Edge2(p[e.head], p[e.tail], e.weight) for e in self.edges2),
            tuple(Edge3(p[e.head], (p[e.tails[0]], p[e.tails[1]]), e.weight) for e in self.edges3),
        )

    def edge_arrays(self):
        """Edge lists as numpy arrays for vectorised right-hand sides.

        Returns ``(h2, t2, w2, h3, j3, k3, w3)``.
        """
        h2 = np.array([e.head for e in self.edges2], dtype=np.intp)
        t2 = np.array([e.tail for e in self.edges2], dtype=np.intp)
        w2 = np.array([e.weight for e in self.edges2], dtype=float)
        h3 = np.array([e.head for e in self.edges3], dtype=np.intp)
        j3 = np.array([e.tails[0] for e in self.edges3], dtype=np.intp)
        k3 = np.array([e.tails[1] for e in self.edges3], dtype=np.intp)
        w3 = np.array([e.weight for e in self.edges3], dtype=float)
        return h2, t2, w2, h3, j3, k3, w3


def in_neighbors(h: Hypergraph, i: int) -> set:
    """Edges (of either order) whose head is ``i``."""
    i = h.check_node(i)
    return {e for e in h.edges() if e.head == i}


def is_leaf(h: Hypergraph, i: int) -> bool:
    """A leaf heads no edge: nothing in the network influences it."""
    i = h.check_node(i)
    return i not in h._heads


def leaves(h: Hypergraph) -> frozenset[int]:
    return frozenset(v for v in h.nodes if v not in h._heads)


def reachable_from(h: Hypergraph, i: int) -> set[int]:
    """Nodes ``j`` with a directed path from ``i`` to ``j`` (``i`` included).

    A path walks from an edge's head to one of its tails, i.e. against the
    direction of influence.  ``j`` reachable from ``i`` means an input applied
    at ``j`` propagates to ``i``.
    """
    i = h.check_node(i)
    adj = h.dependency_adjacency()
    seen = {i}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def directed_path_exists(h: Hypergraph, src: int, dst: int) -> bool:
    """True if an edge sequence leads from head ``src`` down to tail ``dst``.

    Reflexive: every node reaches itself through the empty path.
    """
    dst = h.check_node(dst)
    return dst in reachable_from(h, src)


def connected_components(h: Hypergraph) -> list[frozenset[int]]:
    """Weakly connected components, sorted by smallest member."""
    parent = list(range(h.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in h.edges():
        for t in e.tails:
            ra, rb = find(e.head), find(t)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, set[int]] = {}
    for v in h.nodes:
        groups.setdefault(find(v), set()).add(v)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def is_unilaterally_connected(h: Hypergraph) -> bool:
    """Pairwise test: every pair is joined by a path in at least one direction."""
    reach = [reachable_from(h, v) for v in h.nodes]
    return all(j in reach[i] or i in reach[j] for i in h.nodes for j in range(i + 1, h.n))


def random_hypergraph(
    n: int,
    p2: float,
    p3: float,
    weight_range: tuple[float, float] = (0.5, 1.5),
    rng_seed: int = 0,
) -> Hypergraph:
    """Sample a random directed hypergraph.

    Every ordered pair ``(i, j)`` becomes a 2-edge with probability ``p2``;
    every head ``i`` with unordered tail pair ``{j, k}`` becomes a 3-edge with
    probability ``p3``, stored in both tail orders with one shared weight.
    Weights are uniform on ``weight_range``.
    """
    if n < 2:
        raise ConfigError(f"random_hypergraph needs n >= 2, got {n}")
    for name, p in (("p2", p2), ("p3", p3)):
        if not (0.0 <= p <= 1.0):
            raise ConfigError(f"{name} must lie in [0, 1], got {p}")
    lo, hi = map(float, weight_range)
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ConfigError(f"empty weight interval {weight_range}")
    if lo <= 0.0 <= hi:
        # zero weights would silently delete edges
        raise ConfigError(f"weight interval {weight_range} must not contain 0")
    rng = np.random.default_rng(rng_seed)
    edges2 = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p2:
                edges2.append(Edge2(i, j, float(rng.uniform(lo, hi))))
    edges3 = []
    for i in range(n):
        for j in range(n):
            for k in range(j + 1, n):
                if i in (j, k):
                    continue
                if rng.random() < p3:
                    w = float(rng.uniform(lo, hi))
                    edges3.append(Edge3(i, (j, k), w))
                    edges3.append(Edge3(i, (k, j), w))
    return Hypergraph(n, tuple(edges2), tuple(edges3))


def format_weight(w: float) -> str:
    # repr round-trips doubles exactly
    return repr(float(w))


def write_edge_list(h: Hypergraph, path, scores: dict | None = None) -> None:
    """Write ``h`` in the line-oriented edge-list format.

    ``scores`` optionally maps ``(head, tails)`` keys to a confidence value
    written as a trailing column.
    """
    lines = [f"n={h.n}"]
    for e in h.edges2:
        line = f"2 {e.head} {e.tail} {format_weight(e.weight)}"
        if scores is not None:
            line += f" {format_weight(scores[(e.head, (e.tail,))])}"
        lines.append(line)
    for e in h.edges3:
        line = f"3 {e.head} {e.tails[0]} {e.tails[1]} {format_weight(e.weight)}"
        if scores is not None:
            line += f" {format_weight(scores[(e.head, e.tails)])}"
        lines.append(line)
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_lines(lines: Iterable[str], source: str):
    n = None
    edges2, edges3 = [], []
    keys = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            if not line.startswith("n="):
                raise ParseError(f"{source}:{lineno}: expected header 'n=<count>'", lineno)
            try:
                n = int(line[2:])
            except ValueError:
                raise ParseError(f"{source}:{lineno}: bad node count {line[2:]!r}", lineno) from None
            if n < 0:
                raise ParseError(f"{source}:{lineno}: negative node count", lineno)
            continue
        tok = line.split()
        try:
            order = int(tok[0])
            if order == 2 and len(tok) in (4, 5):
                head, tail = int(tok[1]), int(tok[2])
                weight = float(tok[3])
                tails = (tail,)
            elif order == 3 and len(tok) in (5, 6):
                head, tails = int(tok[1]), (int(tok[2]), int(tok[3]))
                weight = float(tok[4])
            else:
                raise ValueError
        except ValueError:
            raise ParseError(f"{source}:{lineno}: malformed edge line {raw.strip()!r}", lineno) from None
        for v in (head, *tails):
            if not 0 <= v < n:
                raise ParseError(f"{source}:{lineno}: node {v} out of range for n={n}", lineno)
        if head in tails or len(set(tails)) != len(tails):
            raise ParseError(f"{source}:{lineno}: repeated node in edge {raw.strip()!r}", lineno)
        if weight == 0 or not math.isfinite(weight):
            raise ParseError(f"{source}:{lineno}: invalid weight {tok[3 if order == 2 else 4]!r}", lineno)
        if (head, tails) in keys:
            raise ParseError(f"{source}:{lineno}: duplicate edge {(head, *tails)}", lineno)
        keys.add((head, tails))
        if order == 2:
            edges2.append(Edge2(head, tails[0], weight))
        else:
            edges3.append(Edge3(head, tails, weight))
    if n is None:
        raise ParseError(f"{source}: missing header 'n=<count>'", 0)
    return Hypergraph(n, tuple(edges2), tuple(edges3))


def read_edge_list(path) -> Hypergraph:
    """Parse an edge-list file; any trailing score column is ignored."""
    path = Path(path)
    return _parse_lines(path.read_text().splitlines(), str(path))
