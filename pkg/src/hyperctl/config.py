"""Experiment configuration: a sectioned TOML file plus CLI overrides.

Every section is optional; missing keys take the defaults below, which
reproduce the 10-node closed-loop experiment.
"""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .sde_sim import NoiseSpec, SimPlan

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "HypergraphSource",
    "ModelConfig",
    "InferenceConfig",
    "ControlConfig",
    "ExperimentConfig",
    "load_config",
    "config_from_dict",
]


@dataclass(frozen=True)
class HypergraphSource:
    file: Path | None = None
    n: int = 10
    p2: float = 0.0
    p3: float = 0.04
    weight_min: float = 5.0
    weight_max: float = 15.0
    seed: int = 0


@dataclass(frozen=True)
class ModelConfig:
    """Natural frequencies and initial state.

    ``omega`` is ``"zero"``, ``"random"`` (uniform on
    ``[-omega_spread, omega_spread]`` with the mean removed), an explicit
    list, or a path to a single-column CSV.  The initial state is drawn
    uniformly on ``[-initial_spread, initial_spread]`` after the frequencies,
    from the same generator.
    """

    omega: object = "random"
    omega_spread: float = 0.1
    initial_spread: float = 0.5
    seed: int = 1000


@dataclass(frozen=True)
class InferenceConfig:
    max_degree: int = 2
    include_cross_terms: bool = True
    normalize: bool = True
    lam: float = 0.04
    ridge: float = 0.01
    derivative: str = "forward"
    smooth_width: int = 0


@dataclass(frozen=True)
class ControlConfig:
    gain: float = 5.0
    target: str = "estimated"
    enabled: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    hypergraph: HypergraphSource = field(default_factory=HypergraphSource)
    model: ModelConfig = field(default_factory=ModelConfig)
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(0.01, 0))
    plan: SimPlan = field(default_factory=lambda: SimPlan(0.0, 5.0, 5.5, 12.0, 1e-3, 1e-3))
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    post_window: tuple[float, float] = (8.0, 12.0)
    output_dir: Path = Path("out")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Re-seed generator, model and noise together (sweep convenience)."""
        return dataclasses.replace(
            self,
            hypergraph=dataclasses.replace(self.hypergraph, seed=seed),
            model=dataclasses.replace(self.model, seed=1000 + seed),
            noise=NoiseSpec(self.noise.sigma, seed),
        )

    def validate(self) -> None:
        hg = self.hypergraph
        if hg.file is not None and not Path(hg.file).is_file():
            raise ConfigError(f"hypergraph file {hg.file} does not exist")
        om = self.model.omega
        if isinstance(om, Path) and not om.is_file():
            raise ConfigError(f"omega file {om} does not exist")
        if self.inference.derivative not in ("central", "forward"):
            raise ConfigError(f"unknown derivative scheme {self.inference.derivative!r}")
        if self.control.target not in ("estimated", "true"):
            raise ConfigError("control.target must be 'estimated' or 'true'")
        if self.control.gain <= 0:
            raise ConfigError("control.gain must be positive")
        a, b = self.post_window
        if not (self.plan.t0 <= a < b <= self.plan.t_end + 1e-12):
            raise ConfigError(f"post_window {self.post_window} must lie inside the plan")


_SECTIONS = {"hypergraph", "model", "noise", "plan", "inference", "control", "metrics", "output"}


def _take(section: dict, name: str, allowed: set[str]) -> dict:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    return section


def config_from_dict(raw: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    unknown = set(raw) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")

    def rel(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base_dir / p

    try:
        hg = _take(raw.get("hypergraph", {}), "hypergraph",
                   {"file", "n", "p2", "p3", "weight_min", "weight_max", "seed"})
        hsrc = HypergraphSource(
            file=rel(hg["file"]) if "file" in hg else None,
            n=int(hg.get("n", 10)),
            p2=float(hg.get("p2", 0.0)),
            p3=float(hg.get("p3", 0.04)),
            weight_min=float(hg.get("weight_min", 5.0)),
            weight_max=float(hg.get("weight_max", 15.0)),
            seed=int(hg.get("seed", 0)),
        )
        md = _take(raw.get("model", {}), "model", {"omega", "omega_spread", "initial_spread", "seed"})
        omega = md.get("omega", "random")
        if isinstance(omega, str) and omega not in ("zero", "random"):
            omega = rel(omega)
        elif isinstance(omega, list):
            omega = tuple(float(v) for v in omega)
        model = ModelConfig(
            omega=omega,
            omega_spread=float(md.get("omega_spread", 0.1)),
            initial_spread=float(md.get("initial_spread", 0.5)),
            seed=int(md.get("seed", 1000)),
        )
        nz = _take(raw.get("noise", {}), "noise", {"sigma", "seed"})
        noise = NoiseSpec(float(nz.get("sigma", 0.01)), int(nz.get("seed", 0)))
        pl = _take(raw.get("plan", {}), "plan", {"t0", "t1", "t2", "t_end", "dt", "dt_record"})
        plan = SimPlan(
            float(pl.get("t0", 0.0)), float(pl.get("t1", 5.0)), float(pl.get("t2", 5.5)),
            float(pl.get("t_end", 12.0)), float(pl.get("dt", 1e-3)), float(pl.get("dt_record", 1e-3)),
        )
        inf = _take(raw.get("inference", {}), "inference",
                    {"max_degree", "include_cross_terms", "normalize", "lambda", "ridge",
                     "derivative", "smooth_width"})
        inference = InferenceConfig(
            max_degree=int(inf.get("max_degree", 2)),
            include_cross_terms=bool(inf.get("include_cross_terms", True)),
            normalize=bool(inf.get("normalize", True)),
            lam=float(inf.get("lambda", 0.04)),
            ridge=float(inf.get("ridge", 0.01)),
            derivative=str(inf.get("derivative", "forward")),
            smooth_width=int(inf.get("smooth_width", 0)),
        )
        ct = _take(raw.get("control", {}), "control", {"gain", "target", "enabled"})
        control = ControlConfig(
            float(ct.get("gain", 5.0)), str(ct.get("target", "estimated")), bool(ct.get("enabled", True))
        )
        mt = _take(raw.get("metrics", {}), "metrics", {"post_window"})
        pw = mt.get("post_window", [8.0, 12.0])
        out = _take(raw.get("output", {}), "output", {"dir"})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config value: {exc}") from None
    if len(pw) != 2:
        raise ConfigError("metrics.post_window needs two numbers")
    return ExperimentConfig(
        hypergraph=hsrc,
        model=model,
        noise=noise,
        plan=plan,
        inference=inference,
        control=control,
        post_window=(float(pw[0]), float(pw[1])),
        output_dir=rel(out.get("dir", "out")),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw, path.parent)


def read_omega_csv(path, n: int) -> np.ndarray:
    try:
        vals = [float(line.split(",")[0]) for line in Path(path).read_text().splitlines() if line.strip()]
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if len(vals) != n:
        raise ConfigError(f"{path}: expected {n} frequencies, found {len(vals)}")
    return np.array(vals)
