import math

import numpy as np
import pytest

from hyperctl.control import ControlLaw
from hyperctl.dynamics import GenericModel, KuramotoModel
from hyperctl.errors import BlowUpError, ConfigError, ParseError
from hyperctl.hypergraph import Hypergraph, random_hypergraph
from hyperctl.sde_sim import (
    NoiseSpec,
    SimPlan,
    Trajectory,
    deterministic_simulate,
    read_trajectory_csv,
    simulate,
    write_trajectory_csv,
)


def linear(a):
    return GenericModel(Hypergraph(1), f1=lambda x: a * x)


def plan_to(t, dt, dt_record=None):
    return SimPlan(0.0, 0.0, 0.0, t, dt, dt if dt_record is None else dt_record)


def test_plan_validation():
    with pytest.raises(ConfigError):
        SimPlan(0, 2, 1, 3)
    with pytest.raises(ConfigError):
        SimPlan(dt=1e-3, dt_record=1.5e-3)
    p = SimPlan(0, 1, 2, 3, 1e-3, 1e-2)
    assert p.stride == 10 and p.num_records == 301
    assert p.step_index(2.0) == 2000


def test_rk4_matches_closed_form():
    traj = deterministic_simulate(linear(-1.0), [1.0], plan_to(1.0, 1e-2))
    assert traj.states[-1, 0] == pytest.approx(math.exp(-1.0), abs=1e-9)


def test_rk4_fourth_order():
    errs = []
    for dt in (0.1, 0.05, 0.025):
        x = deterministic_simulate(linear(-2.0), [1.0], plan_to(1.0, dt)).states[-1, 0]
        errs.append(abs(x - math.exp(-2.0)))
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(16, rel=0.15)


def test_euler_first_order():
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        x = simulate(linear(-1.0), [1.0], NoiseSpec(), plan_to(1.0, dt)).states[-1, 0]
        errs.append(abs(x - math.exp(-1.0)))
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(2, rel=0.05)


def test_noise_variance():
    # pure diffusion: Var x(T) = sigma^2 T
    g = GenericModel(Hypergraph(400))
    traj = simulate(g, np.zeros(400), NoiseSpec(0.5, 3), plan_to(2.0, 1e-2, 1.0))
    assert np.var(traj.states[-1]) == pytest.approx(0.25 * 2.0, rel=0.15)


def test_seed_reproducible_and_distinct():
    m = KuramotoModel(random_hypergraph(5, 0.2, 0.2, rng_seed=1), np.zeros(5))
    plan = plan_to(0.5, 1e-3, 1e-2)
    a = simulate(m, np.zeros(5), NoiseSpec(0.1, 7), plan)
    b = simulate(m, np.zeros(5), NoiseSpec(0.1, 7), plan)
    c = simulate(m, np.zeros(5), NoiseSpec(0.1, 8), plan)
    assert np.array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)


def test_controller_does_not_perturb_prefix():
    m = KuramotoModel(random_hypergraph(5, 0.2, 0.2, rng_seed=1), np.zeros(5))
    plan = SimPlan(0.0, 0.5, 1.0, 2.0, 1e-3, 1e-2)
    law = ControlLaw(3.0, np.zeros(5), (0, 2), active_from=1.0)
    free = simulate(m, np.ones(5), NoiseSpec(0.1, 4), plan)
    ctrl = simulate(m, np.ones(5), NoiseSpec(0.1, 4), plan, law)
    pre = free.times <= 1.0 + 1e-12
    assert np.array_equal(free.states[pre], ctrl.states[pre])
    assert not np.array_equal(free.states[~pre], ctrl.states[~pre])
    assert np.all(ctrl.control_log[free.times < 1.0 - 1e-12] == 0)
    assert np.all(ctrl.control_log[:, [1, 3, 4]] == 0)


def test_blow_up():
    with pytest.raises(BlowUpError) as info:
        simulate(linear(50.0), [1.0], NoiseSpec(), plan_to(5.0, 1e-2))
    assert 0 < info.value.time <= 5.0


def test_window_and_csv_round_trip(tmp_path):
    m = KuramotoModel(random_hypergraph(3, 0.5, 0.0, rng_seed=0), np.zeros(3))
    law = ControlLaw(1.0, np.zeros(3), (1,), 0.05)
    traj = simulate(m, np.array([0.1, 0.2, 0.3]), NoiseSpec(0.05, 1), plan_to(0.1, 1e-3, 1e-2), law)
    assert traj.window(0.02, 0.05).times.size == 4
    p = tmp_path / "t.csv"
    write_trajectory_csv(traj, p)
    back = read_trajectory_csv(p)
    assert np.array_equal(back.times, traj.times)
    assert np.array_equal(back.states, traj.states)
    assert np.array_equal(back.control_log, traj.control_log)


def test_csv_parse_error(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("t,x0\n0.0,abc\n")
    with pytest.raises(ParseError):
        read_trajectory_csv(p)


def test_trajectory_validation():
    with pytest.raises(Exception):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 1)))
