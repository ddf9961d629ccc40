"""Minimal sets of controlled nodes and input-coverage checks.

An input applied at node ``s`` propagates along influence: from a tail to
the head of every edge containing it.  Node ``v`` is covered by a control
set ``S`` when a directed path (head to tail) leads from ``v`` to some
member of ``S``.  Leaves head no edge, so nothing reaches them and each one
must be controlled directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import DomainError, UnsupportedError
from .hypergraph import Hypergraph, connected_components, leaves, reachable_from

__all__ = [
    "ControlSet",
    "CoverageResult",
    "source_classes",
    "minimal_control_set",
    "coverage_check",
    "is_minimal",
    "MAX_MINIMALITY_SET",
]

MAX_MINIMALITY_SET = 12


@dataclass(frozen=True)
class ControlSet:
    """``nodes`` is S*; ``per_component`` maps each weak component to its picks.

    ``tie_broken`` lists nodes chosen as representatives of leafless source
    classes rather than as leaves.
    """

    nodes: frozenset[int]
    per_component: dict = field(default_factory=dict)
    tie_broken: frozenset[int] = frozenset()

    @property
    def leaves(self) -> frozenset[int]:
        return self.nodes - self.tie_broken

    def __str__(self) -> str:
        return "{" + ", ".join(str(v) for v in sorted(self.nodes)) + "}"


def _sccs(adj: list[set[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, iter(sorted(adj[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(sorted(adj[w]))))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    return out


def source_classes(h: Hypergraph) -> list[frozenset[int]]:
    """Strongly connected classes of the influence graph that nothing outside influences.

    Each one needs at least one controlled node.  Leaves are exactly the
    singleton source classes.
    """
    infl = h.influence_adjacency()
    comps = _sccs(infl)
    owner = {}
    for c, comp in enumerate(comps):
        for v in comp:
            owner[v] = c
    has_input = [False] * len(comps)
    for t in h.nodes:
        for hd in infl[t]:
            if owner[hd] != owner[t]:
                has_input[owner[hd]] = True
    return sorted((frozenset(c) for k, c in enumerate(comps) if not has_input[k]), key=min)


def minimal_control_set(h: Hypergraph) -> ControlSet:
    """All leaves, plus the lowest-indexed node of every leafless source class."""
    leaf_set = leaves(h)
    picks = set(leaf_set)
    tie = set()
    for cls in source_classes(h):
        if not (cls & leaf_set):
            v = min(cls)
            picks.add(v)
            tie.add(v)
    per_comp = {comp: frozenset(comp & picks) for comp in connected_components(h)}
    return ControlSet(frozenset(picks), per_comp, frozenset(tie))


@dataclass(frozen=True)
class CoverageResult:
    covered: bool
    uncovered: frozenset[int]
    witnesses: dict  # node -> path of nodes from it down to a controlled node

    def __bool__(self) -> bool:
        return self.covered


def _witness(h: Hypergraph, v: int, targets: set[int]) -> list[int] | None:
    adj = h.dependency_adjacency()
    prev = {v: None}
    queue = [v]
    for u in queue:
        if u in targets:
            path = []
            while u is not None:
                path.append(u)
                u = prev[u]
            return path[::-1]
        for w in sorted(adj[u]):
            if w not in prev:
                prev[w] = u
                queue.append(w)
    return None


def coverage_check(h: Hypergraph, s) -> CoverageResult:
    """Does an input on ``s`` reach every node?

    Returns the uncovered nodes and, for every covered node, a witness path
    of nodes from it down to a controlled node.
    """
    s = {h.check_node(v) for v in s}
    witnesses = {}
    uncovered = set()
    for v in h.nodes:
        path = _witness(h, v, s)
        if path is None:
            uncovered.add(v)
        else:
            witnesses[v] = path
    return CoverageResult(not uncovered, frozenset(uncovered), witnesses)


def _covers(reach: list[set[int]], s) -> bool:
    return all(reach[v] & s for v in range(len(reach)))


def is_minimal(h: Hypergraph, s) -> bool:
    """Exhaustively check that no proper subset of ``s`` still covers ``h``.

    Raises:
        DomainError: if ``s`` does not cover ``h`` in the first place.
        UnsupportedError: if ``|s|`` exceeds the exhaustive-search guard.
    """
    s = frozenset(h.check_node(v) for v in s)
    if len(s) > MAX_MINIMALITY_SET:
        raise UnsupportedError(
            f"is_minimal is exhaustive and limited to |s| <= {MAX_MINIMALITY_SET}, got {len(s)}"
        )
    reach = [reachable_from(h, v) for v in h.nodes]
    if not _covers(reach, s):
        raise DomainError("is_minimal requires a covering set")
    # coverage is monotone, so checking the maximal proper subsets suffices;
    # the full subset sweep keeps this an independent brute-force check
    for size in range(len(s)):
        for sub in combinations(sorted(s), size):
            if _covers(reach, set(sub)):
                return False
    return True
