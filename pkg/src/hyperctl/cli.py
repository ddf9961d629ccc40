"""Command-line front end: every stage standalone, plus the full pipeline.

Exit codes: 0 success, 1 domain/config/usage error, 2 numerical failure.
Stages that need model parameters read them from ``--config`` (defaults
otherwise), so chaining ``generate``, ``simulate``, ``infer`` and ``control``
with one config reproduces the ``pipeline`` artifacts exactly.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_config
from .controllability import coverage_check, minimal_control_set
from .errors import ConfigError, HyperctlError, NumericalError, PipelineError
from .hypergraph import read_edge_list, write_edge_list
from .metrics import compare_hypergraphs
from .pipeline import (
    build_model,
    build_truth,
    closed_loop,
    open_loop,
    run_inference,
    run_pipeline,
    _write_equilibrium,
)
from .control import make_controller, validate_gain
from .inference import write_inferred, write_regression_report
from .sde_sim import NoiseSpec, read_trajectory_csv, write_trajectory_csv

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _window(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None
    return a, b


def _add_config(p, seed=True):
    p.add_argument("--config", type=Path, help="experiment config file (TOML)")
    if seed:
        p.add_argument("--seed", type=int, help="re-seed generator, model and noise together")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hyperctl", description="Infer and control noisy dynamics on directed hypergraphs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="draw a random directed hypergraph")
    _add_config(p)
    p.add_argument("--n", type=int, help="number of nodes")
    p.add_argument("--p2", type=float, help="2-edge probability")
    p.add_argument("--p3", type=float, help="3-edge probability")
    p.add_argument("--weight-min", type=float, help="lower weight bound")
    p.add_argument("--weight-max", type=float, help="upper weight bound")
    p.add_argument("--out", type=Path, required=True, help="edge-list file to write")

    p = sub.add_parser("simulate", help="simulate the uncontrolled noisy system")
    _add_config(p)
    p.add_argument("--hypergraph", type=Path, required=True, help="ground-truth edge list")
    p.add_argument("--sigma", type=float, help="noise intensity")
    p.add_argument("--t-end", type=float, help="final time")
    p.add_argument("--dt", type=float, help="integration step")
    p.add_argument("--dt-record", type=float, help="recording interval")
    p.add_argument("--out", type=Path, required=True, help="trajectory CSV to write")

    p = sub.add_parser("infer", help="infer a hypergraph from a trajectory")
    _add_config(p, seed=False)
    p.add_argument("--traj", type=Path, required=True, help="trajectory CSV")
    p.add_argument("--window", type=_window, help="inference window A:B (default t0:t1)")
    p.add_argument("--lambda", dest="lam", metavar="LAMBDA", type=float, help="sparsity threshold")
    p.add_argument("--max-degree", type=int, help="library degree")
    p.add_argument("--ridge", type=float, help="ridge regularisation")
    p.add_argument("--derivative", choices=["forward", "central"], help="finite-difference scheme")
    p.add_argument("--out", type=Path, default=Path("inferred.hg"), help="inferred edge list")
    p.add_argument("--regression", type=Path, help="also write nonzero coefficients here")
    p.add_argument("--equilibrium", type=Path, help="also write the estimated equilibrium here")

    p = sub.add_parser("controlset", help="minimal control set and coverage certificate")
    p.add_argument("--hypergraph", type=Path, required=True, help="edge list (true or inferred)")

    p = sub.add_parser("control", help="closed-loop simulation with droop control on S*")
    _add_config(p)
    p.add_argument("--hypergraph", type=Path, required=True, help="ground-truth edge list (the plant)")
    p.add_argument("--inferred", type=Path, required=True, help="inferred edge list (selects S*)")
    p.add_argument("--equilibrium", type=Path, required=True, help="target state CSV (node,x_hat)")
    p.add_argument("--sigma", type=float, help="noise intensity")
    p.add_argument("--gain", type=float, help="droop gain K")
    p.add_argument("--out", type=Path, required=True, help="closed-loop trajectory CSV")
    p.add_argument("--stability", type=Path, help="also write the gain validation report")

    p = sub.add_parser("pipeline", help="explore, infer and control in one run")
    _add_config(p)
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--sigma", type=float, help="noise intensity")
    p.add_argument("--lambda", dest="lam", metavar="LAMBDA", type=float, help="sparsity threshold")
    p.add_argument("--gain", type=float, help="droop gain K")
    p.add_argument("--no-control", action="store_true", help="skip the control phase")
    p.add_argument("--emit-plot-data", action="store_true", help="write plot_data.csv")

    p = sub.add_parser("compare", help="edge and leaf metrics of inferred vs true")
    p.add_argument("--truth", type=Path, required=True, help="ground-truth edge list")
    p.add_argument("--inferred", type=Path, required=True, help="inferred edge list")
    return ap


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config is not None else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    rep = dataclasses.replace
    if getattr(args, "sigma", None) is not None:
        cfg = rep(cfg, noise=NoiseSpec(args.sigma, cfg.noise.rng_seed))
    if getattr(args, "lam", None) is not None:
        cfg = rep(cfg, inference=rep(cfg.inference, lam=args.lam))
    if getattr(args, "gain", None) is not None:
        cfg = rep(cfg, control=rep(cfg.control, gain=args.gain))
    return cfg


def _need(*paths) -> None:
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise ConfigError(f"{p} does not exist")


def _cmd_generate(args) -> None:
    cfg = _config(args)
    hs = cfg.hypergraph
    over = {k: getattr(args, k) for k in ("n", "p2", "p3", "weight_min", "weight_max")
            if getattr(args, k) is not None}
    hs = dataclasses.replace(hs, file=None, **over)
    h = build_truth(dataclasses.replace(cfg, hypergraph=hs))
    write_edge_list(h, args.out)
    print(f"wrote {args.out}: n={h.n}, {len(h.edges2)} 2-edges, {len(h.edges3)} 3-edges")


def _plant(cfg, path):
    h = read_edge_list(path)
    return build_model(cfg, h)


def _cmd_simulate(args) -> None:
    _need(args.hypergraph)
    cfg = _config(args)
    over = {k: getattr(args, k) for k in ("t_end", "dt", "dt_record") if getattr(args, k) is not None}
    if over:
        cfg = dataclasses.replace(cfg, plan=dataclasses.replace(cfg.plan, **over))
    model, x0 = _plant(cfg, args.hypergraph)
    traj = open_loop(cfg, model, x0)
    write_trajectory_csv(traj, args.out)
    print(f"wrote {args.out}: {traj.times.size} samples of {traj.n} nodes")


def _cmd_infer(args) -> None:
    _need(args.traj)
    cfg = _config(args)
    over = {"max_degree": args.max_degree, "ridge": args.ridge, "derivative": args.derivative}
    over = {k: v for k, v in over.items() if v is not None}
    if over:
        cfg = dataclasses.replace(cfg, inference=dataclasses.replace(cfg.inference, **over))
    traj = read_trajectory_csv(args.traj)
    inferred, result = run_inference(cfg, traj, args.window)
    write_inferred(inferred, args.out)
    if args.regression is not None:
        write_regression_report(result, args.regression)
    if args.equilibrium is not None:
        _write_equilibrium(result.center, args.equilibrium)
    n2, n3 = len(inferred.edges2), len(inferred.edges3)
    print(f"wrote {args.out}: {n2} 2-edges, {n3} 3-edge triads from {result.samples} samples")


def _cmd_controlset(args) -> None:
    _need(args.hypergraph)
    h = read_edge_list(args.hypergraph)
    cs = minimal_control_set(h)
    cov = coverage_check(h, cs.nodes)
    print(f"S* = {cs}")
    for comp, chosen in sorted(cs.per_component.items(), key=lambda kv: min(kv[0])):
        print(f"component {{{', '.join(map(str, sorted(comp)))}}}: controls {{{', '.join(map(str, sorted(chosen)))}}}")
    if cs.tie_broken:
        print("tie-broken: " + " ".join(map(str, sorted(cs.tie_broken))))
    print(f"covered: {str(cov.covered).lower()}")
    for v in sorted(cov.witnesses):
        print(f"  {v}: " + " -> ".join(map(str, cov.witnesses[v])))


def _read_target(path, n: int) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    try:
        vals = [float(line.split(",")[1]) for line in lines[1:] if line.strip()]
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed equilibrium file ({exc})") from None
    if len(vals) != n:
        raise ConfigError(f"{path}: expected {n} entries, found {len(vals)}")
    return np.array(vals)


def _cmd_control(args) -> None:
    _need(args.hypergraph, args.inferred, args.equilibrium)
    cfg = _config(args)
    model, x0 = _plant(cfg, args.hypergraph)
    cs = minimal_control_set(read_edge_list(args.inferred))
    law = make_controller(cs, _read_target(args.equilibrium, model.n), cfg.control.gain, cfg.plan.t2)
    report = validate_gain(model, law)
    if args.stability is not None:
        args.stability.write_text(str(report) + "\n")
    traj = closed_loop(cfg, model, x0, law)
    write_trajectory_csv(traj, args.out)
    print(f"S* = {cs}; gain {law.gain:g} {'passes' if report.passed else 'FAILS'} validation")
    print(f"wrote {args.out}")


def _cmd_pipeline(args) -> None:
    _need(args.config)
    cfg = _config(args)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output_dir=args.out)
    if args.no_control:
        cfg = dataclasses.replace(cfg, control=dataclasses.replace(cfg.control, enabled=False))
    report = run_pipeline(cfg, emit_plot_data=args.emit_plot_data)
    sys.stdout.write(report.to_text())
    print(f"inference_wall_clock_seconds: {report.inference_seconds:.3f}")


def _cmd_compare(args) -> None:
    _need(args.truth, args.inferred)
    c = compare_hypergraphs(read_edge_list(args.truth), read_edge_list(args.inferred))
    for name, e in (("2-edges", c.edges2), ("3-edges", c.edges3)):
        print(f"{name}: true={e.true} inferred={e.inferred} tp={e.true_positive} "
              f"tpr={e.tpr:.4f} fpr={e.fpr:.4f}")
    fmt = lambda s: "{" + ", ".join(map(str, sorted(s))) + "}"  # noqa: E731
    print(f"leaves: true={fmt(c.true_leaves)} inferred={fmt(c.inferred_leaves)} "
          f"match={str(c.leaf_match).lower()}")


_COMMANDS = {
    "generate": _cmd_generate,
    "simulate": _cmd_simulate,
    "infer": _cmd_infer,
    "controlset": _cmd_controlset,
    "control": _cmd_control,
    "pipeline": _cmd_pipeline,
    "compare": _cmd_compare,
}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, PipelineError) and exc.__cause__ is not None:
        exc = exc.__cause__
    return 2 if isinstance(exc, NumericalError) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except (HyperctlError, OSError) as exc:
        print(f"hyperctl {args.command}: error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
