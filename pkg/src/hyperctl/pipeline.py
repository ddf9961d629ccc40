"""Three-phase closed loop: explore, infer, control.

1. Simulate the uncontrolled noisy system; samples on ``[t0, t1]`` feed inference.
2. Infer the hypergraph from those samples only.
3. Pick the control set from the *inferred* hypergraph, build a droop
   controller towards the estimated equilibrium, and re-run the same noise
   realisation with the controller switched on at ``t2``.

Ground truth is used for metrics only.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, read_omega_csv
from .control import ControlLaw, StabilityReport, make_controller, steady_state_deviation, validate_gain
from .controllability import ControlSet, minimal_control_set
from .dynamics import KuramotoModel, sync_state
from .errors import HyperctlError, PipelineError
from .hypergraph import Hypergraph, random_hypergraph, read_edge_list, write_edge_list
from .inference import (
    InferredHypergraph,
    LibrarySpec,
    RegressionResult,
    infer_hypergraph,
    write_inferred,
    write_regression_report,
)
from .metrics import HypergraphComparison, compare_hypergraphs
from .sde_sim import Trajectory, simulate, write_trajectory_csv

__all__ = [
    "ExperimentReport",
    "FittedModel",
    "build_truth",
    "build_model",
    "open_loop",
    "run_inference",
    "design_controller",
    "closed_loop",
    "run_pipeline",
    "write_plot_data",
]


def build_truth(cfg: ExperimentConfig) -> Hypergraph:
    src = cfg.hypergraph
    if src.file is not None:
        return read_edge_list(src.file)
    return random_hypergraph(src.n, src.p2, src.p3, (src.weight_min, src.weight_max), src.seed)


def build_model(cfg: ExperimentConfig, h: Hypergraph) -> tuple[KuramotoModel, np.ndarray]:
    """Kuramoto model and initial state; both drawn from the model seed."""
    mc = cfg.model
    rng = np.random.default_rng(mc.seed)
    if isinstance(mc.omega, str) and mc.omega == "zero":
        omega = np.zeros(h.n)
    elif isinstance(mc.omega, str) and mc.omega == "random":
        omega = rng.uniform(-mc.omega_spread, mc.omega_spread, h.n)
        omega -= omega.mean()
    elif isinstance(mc.omega, Path):
        omega = read_omega_csv(mc.omega, h.n)
    else:
        omega = np.asarray(mc.omega, dtype=float)
    x0 = rng.uniform(-mc.initial_spread, mc.initial_spread, h.n)
    return KuramotoModel(h, omega), x0


def open_loop(cfg: ExperimentConfig, model, x0) -> Trajectory:
    return simulate(model, x0, cfg.noise, cfg.plan)


def run_inference(cfg: ExperimentConfig, traj: Trajectory, window=None):
    ic = cfg.inference
    window = (cfg.plan.t0, cfg.plan.t1) if window is None else window
    spec = LibrarySpec(ic.max_degree, ic.include_cross_terms, None, ic.normalize)
    return infer_hypergraph(
        traj, window, spec, ic.lam, scheme=ic.derivative, smooth_width=ic.smooth_width, ridge=ic.ridge
    )


class FittedModel:
    """Polynomial drift identified by regression, usable wherever a model is."""

    def __init__(self, result: RegressionResult):
        self.result = result
        self.n = result.coefficients.shape[0]
        self._monos = result.monomials
        self._coef = result.coefficients / result.column_scale

    def rhs(self, x) -> np.ndarray:
        d = np.asarray(x, dtype=float) - self.result.center
        feats = np.array([np.prod(d[list(m)]) if m else 1.0 for m in self._monos])
        return self._coef @ feats


def design_controller(
    cfg: ExperimentConfig, model, inferred: InferredHypergraph, result: RegressionResult
) -> tuple[ControlSet, ControlLaw]:
    """Control set from the inferred structure; target from the data (or the true sync state)."""
    if inferred.num_edges == 0:
        raise PipelineError(
            "control",
            "no edges were inferred (the exploration window carries no excitation); "
            "refusing to design a controller",
        )
    cs = minimal_control_set(inferred.to_hypergraph())
    target = result.center if cfg.control.target == "estimated" else sync_state(model)
    return cs, make_controller(cs, target, cfg.control.gain, cfg.plan.t2)


def closed_loop(cfg: ExperimentConfig, model, x0, law: ControlLaw) -> Trajectory:
    return simulate(model, x0, cfg.noise, cfg.plan, law)


@dataclass
class ExperimentReport:
    n: int
    comparison: HypergraphComparison
    control_set: ControlSet | None
    target: np.ndarray
    rms_pre: float
    rms_post_controlled: float | None
    rms_post_uncontrolled: float
    prefix_identical: bool | None
    stability_true: StabilityReport | None
    stability_fitted: StabilityReport | None
    exploration_radius: float
    samples: int
    inference_seconds: float
    manifest: list[str] = field(default_factory=list)

    @property
    def rms_reduction(self) -> float | None:
        if self.rms_post_controlled is None:
            return None
        return self.rms_post_uncontrolled / self.rms_post_controlled

    def rows(self) -> list[tuple[str, str]]:
        c = self.comparison

        def nodes(s):
            return " ".join(str(v) for v in sorted(s)) if s else "-"

        def num(v):
            return "na" if v is None else repr(float(v))

        def flag(v):
            return "na" if v is None else str(bool(v)).lower()

        cs = self.control_set
        return [
            ("n", str(self.n)),
            ("edges2_true", str(c.edges2.true)),
            ("edges2_inferred", str(c.edges2.inferred)),
            ("edges2_tpr", num(c.edges2.tpr)),
            ("edges2_fpr", num(c.edges2.fpr)),
            ("edges3_true", str(c.edges3.true)),
            ("edges3_inferred", str(c.edges3.inferred)),
            ("edges3_tpr", num(c.edges3.tpr)),
            ("edges3_fpr", num(c.edges3.fpr)),
            ("true_leaves", nodes(c.true_leaves)),
            ("inferred_leaves", nodes(c.inferred_leaves)),
            ("leaf_match", flag(c.leaf_match)),
            ("control_set", nodes(cs.nodes) if cs else "na"),
            ("tie_broken", nodes(cs.tie_broken) if cs else "na"),
            ("rms_pre", num(self.rms_pre)),
            ("rms_post_controlled", num(self.rms_post_controlled)),
            ("rms_post_uncontrolled", num(self.rms_post_uncontrolled)),
            ("rms_reduction", num(self.rms_reduction)),
            ("prefix_identical", flag(self.prefix_identical)),
            ("gain_valid_true_model", flag(self.stability_true and self.stability_true.passed)),
            ("gain_valid_fitted_model", flag(self.stability_fitted and self.stability_fitted.passed)),
            ("exploration_radius", num(self.exploration_radius)),
            ("inference_samples", str(self.samples)),
            ("manifest", " ".join(self.manifest)),
        ]

    def to_text(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.rows())

    def to_csv(self) -> str:
        return "metric,value\n" + "".join(f"{k},{v}\n" for k, v in self.rows())


def _write_equilibrium(x, path) -> None:
    Path(path).write_text("node,x_hat\n" + "".join(f"{i},{float(v)!r}\n" for i, v in enumerate(x)))


def write_plot_data(path, trajectories: dict[str, Trajectory]) -> None:
    """Long-format CSV ``run,t,node,x,u`` for external plotting."""
    lines = ["run,t,node,x,u"]
    for name, tr in trajectories.items():
        for r, t in enumerate(tr.times):
            for i in range(tr.n):
                u = 0.0 if tr.control_log is None else tr.control_log[r, i]
                lines.append(f"{name},{float(t)!r},{i},{float(tr.states[r, i])!r},{float(u)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _phase(name: str, fn, *args):
    try:
        return fn(*args)
    except PipelineError:
        raise
    except HyperctlError as exc:
        raise PipelineError(name, str(exc)) from exc


def run_pipeline(cfg: ExperimentConfig, emit_plot_data: bool = False, log=None) -> ExperimentReport:
    """Run all phases and write artifacts under ``cfg.output_dir``.

    Raises:
        PipelineError: naming the failed phase; artifacts written before the
        failure are kept.
    """
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: list[str] = []

    def emit(name):
        manifest.append(name)
        return out / name

    plan = cfg.plan
    truth = _phase("setup", build_truth, cfg)
    write_edge_list(truth, emit("truth.hg"))
    model, x0 = _phase("setup", build_model, cfg, truth)

    traj_open = _phase("exploration", open_loop, cfg, model, x0)
    write_trajectory_csv(traj_open, emit("trajectory_open.csv"))

    t_start = time.perf_counter()
    inferred, result = _phase("inference", run_inference, cfg, traj_open)
    inference_seconds = time.perf_counter() - t_start
    write_inferred(inferred, emit("inferred.hg"))
    write_regression_report(result, emit("regression.csv"))
    _write_equilibrium(result.center, emit("equilibrium.csv"))
    (out / "timing.txt").write_text(f"inference_seconds: {inference_seconds!r}\n")
    comparison = compare_hypergraphs(truth, inferred)
    x_hat = result.center

    cs = law = None
    traj = traj_open
    st_true = st_fit = None
    prefix = None
    rms_post_ctrl = None
    if cfg.control.enabled:
        cs, law = _phase("control", design_controller, cfg, model, inferred, result)
        st_true = _phase("control", validate_gain, model, law)
        st_fit = _phase("control", validate_gain, FittedModel(result), law)
        emit("stability.txt").write_text(str(st_true) + "\n")
        traj = _phase("control", closed_loop, cfg, model, x0, law)
        upto = traj.times <= plan.t2 + 1e-9
        prefix = bool(np.array_equal(traj.states[upto], traj_open.states[upto]))
        rms_post_ctrl = steady_state_deviation(traj, law.target, cfg.post_window).global_rms
        x_hat = law.target
    write_trajectory_csv(traj, emit("trajectory.csv"))
    if emit_plot_data:
        runs = {"uncontrolled": traj_open}
        if cfg.control.enabled:
            runs["controlled"] = traj
        write_plot_data(emit("plot_data.csv"), runs)

    report = ExperimentReport(
        n=truth.n,
        comparison=comparison,
        control_set=cs,
        target=np.asarray(x_hat),
        rms_pre=steady_state_deviation(traj, x_hat, (plan.t0, plan.t1)).global_rms,
        rms_post_controlled=rms_post_ctrl,
        rms_post_uncontrolled=steady_state_deviation(traj_open, x_hat, cfg.post_window).global_rms,
        prefix_identical=prefix,
        stability_true=st_true,
        stability_fitted=st_fit,
        exploration_radius=result.exploration_radius,
        samples=result.samples,
        inference_seconds=inference_seconds,
    )
    manifest += ["report.txt", "report.csv"]
    report.manifest = list(manifest)
    (out / "report.txt").write_text(report.to_text())
    (out / "report.csv").write_text(report.to_csv())
    if log is not None:
        log(f"inference wall-clock: {inference_seconds:.3f} s")
    return report
