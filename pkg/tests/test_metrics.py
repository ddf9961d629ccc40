import pytest

from conftest import fig_left, fig_middle
from hyperctl.errors import DomainError
from hyperctl.hypergraph import Edge3, Hypergraph, random_hypergraph
from hyperctl.inference import InferredHypergraph
from hyperctl.metrics import compare_hypergraphs


def test_identity():
    h = random_hypergraph(8, 0.1, 0.1, rng_seed=0)
    c = compare_hypergraphs(h, h)
    assert c.edges2.tpr == c.edges3.tpr == 1.0
    assert c.edges2.fpr == c.edges3.fpr == 0.0
    assert c.leaf_match


def test_one_of_four_missing():
    triads = [(0, (1, 2)), (1, (2, 3)), (2, (0, 3)), (3, (0, 1))]
    truth = Hypergraph(4, (), tuple(Edge3(h, t, 1.0) for h, t in triads))
    inferred = InferredHypergraph(4, {}, {(h, frozenset(t)): (1.0, 1.0) for h, t in triads[:3]})
    c = compare_hypergraphs(truth, inferred)
    assert c.edges3.tpr == 0.75
    assert c.edges3.false_positive == 0


def test_both_tail_orders_count_once():
    c = compare_hypergraphs(fig_left(), Hypergraph(3, (), (Edge3(0, (2, 1), 1.0),)))
    assert c.edges3.true == 1 and c.edges3.tpr == 1.0


def test_leaf_match_despite_imperfect_edges():
    truth = fig_middle()
    inferred = InferredHypergraph(3, {(2, 0): (1.0, 1.0), (0, 2): (1.0, 1.0)}, {})
    c = compare_hypergraphs(truth, inferred)
    assert c.leaf_match and c.edges3.tpr == 0.0
    assert c.edges2.fpr == pytest.approx(1 / 5)


def test_mismatched_n():
    with pytest.raises(DomainError):
        compare_hypergraphs(Hypergraph(3), Hypergraph(4))
