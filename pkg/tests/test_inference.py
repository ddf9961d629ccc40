import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import noiseless_bursts, polynomial_system
from hyperctl.errors import ConfigError
from hyperctl.inference import (
    LibrarySpec,
    build_library,
    estimate_derivatives,
    estimate_equilibrium,
    extract_edges,
    infer_hypergraph,
    monomial_name,
    stlsq,
    write_inferred,
    write_regression_report,
)
from hyperctl.hypergraph import read_edge_list
from hyperctl.metrics import compare_hypergraphs
from hyperctl.sde_sim import Trajectory


def test_library_columns():
    X = np.array([[1.0, 2.0], [3.0, -1.0]])
    lib = build_library(X, LibrarySpec(2, centering=(0.0, 0.0)))
    assert lib.names == ["1", "x0", "x1", "x0^2", "x0*x1", "x1^2"]
    np.testing.assert_allclose(lib.theta[0], [1, 1, 2, 1, 2, 4])
    no_cross = build_library(X, LibrarySpec(3, include_cross_terms=False, centering=(0.0, 0.0)))
    assert no_cross.names == ["1", "x0", "x1", "x0^2", "x1^2", "x0^3", "x1^3"]


def test_library_centering_defaults_to_mean():
    X = np.array([[1.0], [3.0]])
    lib = build_library(X, LibrarySpec(1))
    np.testing.assert_allclose(lib.theta[:, 1], [-1.0, 1.0])


def test_monomial_name():
    assert monomial_name(()) == "1"
    assert monomial_name((0, 0, 3)) == "x0^2*x3"


def test_derivatives_of_sine():
    t = np.arange(0, 2, 1e-3)
    traj = Trajectory(t, np.sin(t)[:, None])
    tc, _, d = estimate_derivatives(traj)
    np.testing.assert_allclose(d[:, 0], np.cos(tc), atol=1e-6)
    tf, _, d = estimate_derivatives(traj, scheme="forward")
    np.testing.assert_allclose(d[:, 0], np.cos(tf), atol=1e-3)
    assert tc.size == t.size - 2 and tf.size == t.size - 1


def test_derivatives_stay_inside_window():
    t = np.arange(0, 1.0001, 0.01)
    traj = Trajectory(t, t[:, None] ** 2)
    times, _, _ = estimate_derivatives(traj, window=(0.2, 0.5))
    assert times.min() > 0.2 - 1e-12 and times.max() < 0.5 + 1e-12


def test_derivative_errors():
    with pytest.raises(ConfigError):
        estimate_derivatives(Trajectory(np.arange(4.0), np.zeros((4, 1))))
    with pytest.raises(ConfigError):
        estimate_derivatives(Trajectory(np.array([0, 1, 2, 4, 5, 6.0]), np.zeros((6, 1))))
    with pytest.raises(ConfigError):
        estimate_derivatives(Trajectory(np.arange(10.0), np.zeros((10, 1))), scheme="spline")


def test_equilibrium_is_window_mean():
    t = np.arange(10.0)
    traj = Trajectory(t, np.column_stack([t, -t]))
    np.testing.assert_allclose(estimate_equilibrium(traj, (2, 4)), [3.0, -3.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_stlsq_exact_recovery(seed):
    rng = np.random.default_rng(seed)
    theta = rng.normal(size=(200, 8))
    true = np.zeros(8)
    idx = rng.choice(8, 3, replace=False)
    true[idx] = rng.choice([-1, 1], 3) * rng.uniform(0.5, 2.0, 3)
    fit = stlsq(theta, theta @ true, lam=0.1)
    np.testing.assert_allclose(fit.coef, true, atol=1e-10)
    assert not fit.rank_deficient


def test_stlsq_rank_deficient_flag():
    theta = np.ones((10, 2))
    fit = stlsq(theta, np.ones(10), lam=0.0)
    assert fit.rank_deficient


def test_stlsq_rejects_negative():
    with pytest.raises(ConfigError):
        stlsq(np.eye(3), np.ones(3), lam=-1)
    with pytest.raises(ConfigError):
        stlsq(np.eye(3), np.ones(3), lam=0.1, ridge=-1)


def test_stlsq_ridge_shrinks():
    rng = np.random.default_rng(0)
    theta = rng.normal(size=(100, 3))
    y = theta @ np.array([1.0, 0.0, 0.0])
    plain = stlsq(theta, y, 0.0).coef
    ridged = stlsq(theta, y, 0.0, ridge=1.0).coef
    assert abs(ridged[0]) < abs(plain[0])


def test_extract_edges_rule():
    monos = [(), (0,), (1,), (0, 1), (1, 2), (0, 1, 2)]
    coef = np.zeros((3, len(monos)))
    coef[0, 2] = 0.5  # x1 in node 0 -> 2-edge (0, 1)
    coef[0, 4] = -1.0  # x1*x2 in node 0 -> 3-edge (0; 1, 2)
    coef[1, 3] = 2.0  # x0*x1 in node 1 -> 2-edge (1, 0)
    coef[2, 5] = 0.3  # x0*x1*x2 in node 2 -> 3-edge (2; 0, 1)
    inf = extract_edges(3, monos, coef)
    assert inf.pairs() == {(0, 1), (1, 0)}
    assert inf.triads() == {(0, frozenset({1, 2})), (2, frozenset({0, 1}))}
    assert inf.edges3[(0, frozenset({1, 2}))] == (-1.0, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_noiseless_polynomial_recovery(seed):
    h, model = polynomial_system(seed)
    bursts = noiseless_bursts(model, seed)
    inf, res = infer_hypergraph(bursts, (0.0, 0.4), LibrarySpec(2, centering=(0.0,) * 5), lam=0.1)
    assert inf.triads() == h.triads()
    assert inf.pairs() == h.pairs()
    assert res.samples == len(bursts) * (bursts[0].times.size - 2)


def test_phase_isolation():
    _, model = polynomial_system(0)
    traj = noiseless_bursts(model, 0, bursts=1, t_end=0.4)[0]
    _, res = infer_hypergraph(traj, (0.0, 0.2), LibrarySpec(2), lam=0.1)
    assert res.last_sample_time <= 0.2 + 1e-12


def test_permutation_equivariance():
    h, model = polynomial_system(3)
    perm = [2, 4, 0, 1, 3]
    inv = np.argsort(perm)
    bursts = noiseless_bursts(model, 3)
    permuted = [Trajectory(b.times, b.states[:, inv]) for b in bursts]
    spec = LibrarySpec(2, centering=(0.0,) * 5)
    a, _ = infer_hypergraph(bursts, (0, 0.4), spec, lam=0.1)
    b, _ = infer_hypergraph(permuted, (0, 0.4), spec, lam=0.1)
    assert b.to_hypergraph().triads() == a.to_hypergraph().relabel(perm).triads()
    assert b.pairs() == a.to_hypergraph().relabel(perm).pairs()


def test_writers(tmp_path):
    h, model = polynomial_system(1)
    inf, res = infer_hypergraph(noiseless_bursts(model, 1), (0, 0.4), LibrarySpec(2, centering=(0.0,) * 5), lam=0.1)
    write_inferred(inf, tmp_path / "i.hg")
    back = read_edge_list(tmp_path / "i.hg")
    assert compare_hypergraphs(back, inf).edges3.tpr == 1.0
    write_regression_report(res, tmp_path / "r.csv")
    rows = (tmp_path / "r.csv").read_text().splitlines()
    assert rows[0] == "node,monomial,coefficient"
    assert len(rows) - 1 == int(np.count_nonzero(res.coefficients))
