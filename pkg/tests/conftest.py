"""Shared fixtures: the three hand-built example hypergraphs and brute-force oracles."""
import itertools

import pytest

from hyperctl.hypergraph import Edge2, Edge3, Hypergraph


def fig_left() -> Hypergraph:
    # one 3-edge with head 0 and tails {1, 2}, both tail orders stored
    return Hypergraph(3, (), (Edge3(0, (1, 2), 1.0), Edge3(0, (2, 1), 1.0)))


def fig_middle() -> Hypergraph:
    # as above plus a 2-edge feeding node 2 from node 0, leaving 1 the only leaf
    return Hypergraph(
        3, (Edge2(2, 0, 1.0),), (Edge3(0, (1, 2), 1.0), Edge3(0, (2, 1), 1.0))
    )


def fig_right() -> Hypergraph:
    # cyclic influence: every node is a head
    e3 = []
    for h, (j, k) in ((0, (1, 2)), (1, (0, 2)), (2, (0, 1))):
        e3 += [Edge3(h, (j, k), 1.0), Edge3(h, (k, j), 1.0)]
    return Hypergraph(3, (), tuple(e3))


@pytest.fixture
def panels():
    return {"left": fig_left(), "middle": fig_middle(), "right": fig_right()}


def brute_paths(h: Hypergraph, src: int, dst: int) -> bool:
    """Path oracle by enumerating edge sequences of length <= n over simple node walks.

    A path runs from a head to one of its tails, then from that tail (as the
    next head) onwards.  A node trivially reaches itself.
    """
    if src == dst:
        return True
    steps = {}
    for e in h.edges():
        steps.setdefault(e.head, set()).update(e.tails)
    for length in range(1, h.n):
        for mids in itertools.permutations([v for v in range(h.n) if v not in (src, dst)], length - 1):
            walk = (src, *mids, dst)
            if all(b in steps.get(a, ()) for a, b in zip(walk, walk[1:])):
                return True
    return False


def brute_leaves(h: Hypergraph) -> set:
    return {v for v in range(h.n) if not any(e.head == v for e in h.edges())}


def brute_covers(h: Hypergraph, s) -> bool:
    return all(any(brute_paths(h, v, c) for c in s) for v in range(h.n))


def random_small_hypergraph(rng, n_max=6) -> Hypergraph:
    n = int(rng.integers(1, n_max + 1))
    e2, e3 = [], []
    for h in range(n):
        for t in range(n):
            if h != t and rng.random() < 0.15:
                e2.append(Edge2(h, t, 1.0))
        for j, k in itertools.combinations(range(n), 2):
            if h not in (j, k) and rng.random() < 0.1:
                e3.append(Edge3(h, (j, k), 1.0))
    return Hypergraph(n, tuple(e2), tuple(e3))


def polynomial_system(seed: int, n: int = 5):
    """Sparse degree-2 drift on a random hypergraph with its ground truth.

    Each 2-edge contributes ``w (x_j - x_i)``, each stored 3-edge slot
    ``w x_j x_k``, and every node is damped by ``-3 x_i``.
    """
    import numpy as np

    from hyperctl.dynamics import GenericModel
    from hyperctl.hypergraph import random_hypergraph

    h = random_hypergraph(n, 0.15, 0.12, (0.5, 1.5), rng_seed=seed)
    return h, GenericModel(h, f1=lambda x: -3.0 * x, f2=lambda xi, xj: xj - xi, f3=lambda xi, xj, xk: xj * xk)


def noiseless_bursts(model, seed: int, bursts: int = 8, t_end: float = 0.4, spread: float = 1.0):
    """Short RK4 runs from scattered initial conditions (rich excitation)."""
    import numpy as np

    from hyperctl.sde_sim import SimPlan, deterministic_simulate

    rng = np.random.default_rng(seed)
    plan = SimPlan(0.0, t_end, t_end, t_end, 1e-3, 1e-3)
    return [deterministic_simulate(model, rng.uniform(-spread, spread, model.n), plan) for _ in range(bursts)]


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
