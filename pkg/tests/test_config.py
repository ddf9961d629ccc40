from pathlib import Path

import pytest

from hyperctl.config import ExperimentConfig, config_from_dict, load_config, read_omega_csv
from hyperctl.errors import ConfigError


def test_defaults_round_trip(tmp_path):
    p = tmp_path / "exp.toml"
    p.write_text("")
    cfg = load_config(p)
    assert cfg == ExperimentConfig(output_dir=tmp_path / "out")


def test_sections_and_lambda(tmp_path):
    raw = {
        "hypergraph": {"n": 6, "p3": 0.1, "seed": 4},
        "noise": {"sigma": 0.02, "seed": 9},
        "plan": {"t1": 2.0, "t2": 2.5, "t_end": 4.0},
        "inference": {"lambda": 0.2, "derivative": "central"},
        "control": {"gain": 3.0},
        "metrics": {"post_window": [3.0, 4.0]},
        "output": {"dir": "res"},
    }
    cfg = config_from_dict(raw, tmp_path)
    assert cfg.hypergraph.n == 6 and cfg.inference.lam == 0.2
    assert cfg.noise.rng_seed == 9 and cfg.plan.t_end == 4.0
    assert cfg.output_dir == tmp_path / "res"
    cfg.validate()


@pytest.mark.parametrize(
    "raw",
    [
        {"bogus": {}},
        {"noise": {"sigma": 0.1, "colour": "pink"}},
        {"noise": {"sigma": "loud"}},
        {"plan": {"t1": 9.0, "t2": 1.0}},
        {"metrics": {"post_window": [1.0]}},
    ],
)
def test_rejects(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_validate_catches_missing_files(tmp_path):
    cfg = config_from_dict({"hypergraph": {"file": "nope.hg"}}, tmp_path)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_with_seed():
    cfg = ExperimentConfig().with_seed(7)
    assert (cfg.hypergraph.seed, cfg.model.seed, cfg.noise.rng_seed) == (7, 1007, 7)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[noise\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_omega_csv(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("0.1\n-0.1\n")
    assert list(read_omega_csv(p, 2)) == [0.1, -0.1]
    with pytest.raises(ConfigError):
        read_omega_csv(p, 3)
