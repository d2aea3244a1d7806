"""Command-line harness.

Subcommands: solve | compare | ratecheck | diagnose. Each takes a JSON
config (--config), writes its outputs into --out, and exits 0 only when
every run terminated by discrepancy or breakdown and all built-in checks
passed (1 = config/IO error, 2 = iteration cap or failed check).
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from .cgne import run_cgne
from .exceptions import DataFormatError, DimensionError, NumericalError
from .experiments import (
    RateCheckConfig,
    run_compare,
    run_diagnostics,
    run_ratecheck,
)
from .problems import (
    Problem,
    add_noise,
    load_problem,
    load_vector,
    multiplication_problem,
    random_problem,
)
from .sine import run_sine
from .stopping import StoppingRule

DEFAULT_DELTA_GRID = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5]

_OK = ("discrepancy", "breakdown")


class ConfigError(ValueError):
    pass


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return cfg


def _build_problem(cfg, seed_override=None):
    pc = dict(cfg.get("problem", {}))
    kind = pc.get("kind", "multiplication")
    if seed_override is not None:
        pc["seed"] = seed_override
    if kind == "multiplication":
        n = int(pc.get("n", 4096))
        exponent = float(pc.get("exponent", 1.0))
        delta = float(pc.get("delta", 1e-3))
        noise = pc.get("noise", "constant")
        problem = multiplication_problem(n, exponent, 0.0)
        if delta > 0:
            y_delta = add_noise(
                problem.y_delta, delta, noise,
                seed=int(pc.get("seed", 0)), space=problem.range_space,
            )
            problem = Problem(
                operator=problem.operator, y_delta=y_delta, delta=delta,
                truth=problem.truth, source_mu=problem.source_mu,
                source_rho=problem.source_rho,
            )
        return problem
    if kind == "random":
        return random_problem(
            rows=int(pc["rows"]),
            cols=int(pc["cols"]),
            decay=pc.get("decay", "geometric"),
            rate=float(pc.get("rate", 0.5)),
            seed=int(pc.get("seed", 0)),
            delta=float(pc.get("delta", 0.0)),
            noise_mode=pc.get("noise", "random-direction"),
        )
    if kind == "files":
        if "operator" not in pc or "data" not in pc:
            raise ConfigError(
                "problem kind 'files' needs 'operator' and 'data' paths"
            )
        return load_problem(pc["operator"], pc["data"], pc)
    raise ConfigError(f"unknown problem kind {kind!r}")


def _build_rule(cfg, problem):
    tau = float(cfg.get("tau", 1.001))
    delta = cfg.get("delta")
    delta = problem.delta if delta is None else float(delta)
    max_iters = cfg.get("max_iters")
    return StoppingRule(tau=tau, delta=delta,
                        max_iters=None if max_iters is None else int(max_iters))


def _load_x0(cfg):
    path = cfg.get("x0")
    return None if path is None else load_vector(path)


def _write_json(out_dir, name, payload):
    path = Path(out_dir) / name
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
    return path


def _write_csv(out_dir, name, header, rows):
    path = Path(out_dir) / name
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def cmd_solve(cfg, out_dir):
    problem = _build_problem(cfg, cfg.get("_seed_override"))
    rule = _build_rule(cfg, problem)
    x0 = _load_x0(cfg)
    history = bool(cfg.get("history", False))
    solver = cfg.get("solver", "sine")
    if solver == "sine":
        gamma = float(cfg.get("gamma", 1e-3))
        report = run_sine(problem, gamma, rule, x0=x0, keep_history=history)
    elif solver == "cgne":
        report = run_cgne(problem, rule, x0=x0, keep_history=history)
    else:
        raise ConfigError(f"unknown solver {solver!r}")
    _write_json(out_dir, "report.json", {"config": cfg, "report": report.to_dict()})
    if report.error_history is not None:
        rows = [
            (m, rn, en)
            for m, (rn, en) in enumerate(
                zip(report.residual_history, report.error_history)
            )
        ]
        _write_csv(out_dir, "residuals.csv", ["m", "residual", "error"], rows)
    else:
        rows = list(enumerate(report.residual_history))
        _write_csv(out_dir, "residuals.csv", ["m", "residual"], rows)
    print(
        f"{solver}: stopping index {report.stopping_index} "
        f"({report.terminated_by}), final residual {report.final_residual:.6e}"
    )
    return 0 if report.terminated_by in _OK else 2


def cmd_compare(cfg, out_dir):
    problem = _build_problem(cfg, cfg.get("_seed_override"))
    rule = _build_rule(cfg, problem)
    gamma = float(cfg.get("gamma", 1e-3))
    result = run_compare(problem, gamma, rule)
    _write_json(out_dir, "report.json", {"config": cfg, "report": result.to_dict()})
    rows = [
        (m, rs, rc, int(dom))
        for m, (rs, rc, dom) in enumerate(
            zip(result.residuals_sine, result.residuals_cgne, result.dominance)
        )
    ]
    _write_csv(
        out_dir, "residuals.csv",
        ["m", "residual_sine", "residual_cgne", "dominance"], rows,
    )
    print(
        f"stopping indices: sine {result.stopping_index_sine} "
        f"({result.terminated_by_sine}), cgne {result.stopping_index_cgne} "
        f"({result.terminated_by_cgne}); dominance "
        f"{'holds' if result.dominance_all else 'VIOLATED'}"
    )
    ok = (
        result.terminated_by_sine in _OK
        and result.terminated_by_cgne in _OK
        and result.dominance_all
        and result.stopping_index_sine <= result.stopping_index_cgne
    )
    return 0 if ok else 2


def cmd_ratecheck(cfg, out_dir):
    config = RateCheckConfig(
        delta_grid=tuple(cfg.get("delta_grid", DEFAULT_DELTA_GRID)),
        mu=float(cfg.get("mu", 0.5)),
        tau=float(cfg.get("tau", 1.001)),
        gamma=float(cfg.get("gamma", 1e-3)),
        n=int(cfg.get("n", 4096)),
        max_iters=cfg.get("max_iters"),
    )
    result = run_ratecheck(config)
    _write_json(out_dir, "report.json", {"config": cfg, "report": result.to_dict()})
    rows = [
        (r.delta, r.stopping_index, r.error, int(r.flagged)) for r in result.records
    ]
    _write_csv(out_dir, "ratecheck.csv",
               ["delta", "stopping_index", "error", "flagged"], rows)
    slope = "n/a" if result.slope is None else f"{result.slope:.4f}"
    print(f"rate check (mu={config.mu}): fitted slope {slope}, "
          f"{sum(r.flagged for r in result.records)} flagged records")
    return 0 if result.flagged_fraction <= 0.2 else 2


def cmd_diagnose(cfg, out_dir):
    if not cfg.get("history", False):
        raise ConfigError(
            "diagnostics need the run history: set \"history\": true in the "
            "config (or pass --history)"
        )
    problem = _build_problem(cfg, cfg.get("_seed_override"))
    rule = _build_rule(cfg, problem)
    gamma = float(cfg.get("gamma", 1e-3))
    report = run_diagnostics(problem, gamma, rule)
    _write_json(out_dir, "diagnostics.json",
                {"config": cfg, "report": report.to_dict()})
    n_ritz = len(report.ritz)
    inter_ok = all(report.interlacing) if report.interlacing else True
    print(
        f"diagnostics: {n_ritz} spectra, interlacing "
        f"{'all true' if inter_ok else 'VIOLATED'}, "
        f"max orthogonality violation "
        f"{max(report.orthogonality['max_galerkin'], report.orthogonality['max_conjugacy']):.3e}"
    )
    ok = report.terminated_by in _OK and inter_ok
    return 0 if ok else 2


_COMMANDS = {
    "solve": cmd_solve,
    "compare": cmd_compare,
    "ratecheck": cmd_ratecheck,
    "diagnose": cmd_diagnose,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sinereg",
        description="Shift-and-invert regularization experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the problem seed")
        p.add_argument("--history", action="store_true",
                       help="retain per-iteration vector history")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        if args.seed is not None:
            cfg["_seed_override"] = args.seed
        if args.history:
            cfg["history"] = True
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out_dir)
    except (ConfigError, DataFormatError, DimensionError, NumericalError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
