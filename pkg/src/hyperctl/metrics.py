"""Ground truth versus inferred structure."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .errors import DomainError
from .hypergraph import Hypergraph, leaves

__all__ = ["EdgeMetrics", "HypergraphComparison", "compare_hypergraphs"]


@dataclass(frozen=True)
class EdgeMetrics:
    true: int
    inferred: int
    true_positive: int
    candidates: int

    @property
    def false_positive(self) -> int:
        return self.inferred - self.true_positive

    @property
    def tpr(self) -> float:
        # vacuous when nothing was there to find
        return self.true_positive / self.true if self.true else 1.0

    @property
    def fpr(self) -> float:
        negatives = self.candidates - self.true
        return self.false_positive / negatives if negatives else 0.0


@dataclass(frozen=True)
class HypergraphComparison:
    edges2: EdgeMetrics
    edges3: EdgeMetrics
    true_leaves: frozenset[int]
    inferred_leaves: frozenset[int]

    @property
    def leaf_match(self) -> bool:
        return self.true_leaves == self.inferred_leaves


def _structure(h) -> tuple[int, set, set, frozenset]:
    if isinstance(h, Hypergraph):
        return h.n, h.pairs(), h.triads(), leaves(h)
    hg = h.to_hypergraph()
    return h.n, h.pairs(), h.triads(), leaves(hg)


def compare_hypergraphs(truth, inferred) -> HypergraphComparison:
    """Edge-recovery rates and leaf agreement.

    3-edges are compared as unordered ``(head, {j, k})`` triads, so both tail
    orders of a symmetric pair count once.  False-positive rates are taken
    relative to all absent candidate edges.
    """
    n, p_true, t_true, l_true = _structure(truth)
    m, p_inf, t_inf, l_inf = _structure(inferred)
    if n != m:
        raise DomainError(f"node counts differ: truth has {n}, inferred has {m}")
    e2 = EdgeMetrics(len(p_true), len(p_inf), len(p_true & p_inf), n * (n - 1))
    e3 = EdgeMetrics(len(t_true), len(t_inf), len(t_true & t_inf), n * comb(n - 1, 2))
    return HypergraphComparison(e2, e3, l_true, l_inf)
