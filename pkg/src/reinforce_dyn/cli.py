"""Command-line front end.

Subcommands ``simulate``, ``flow``, ``equilibria`` and ``phase-scan`` each take
``--config <json>`` and an optional ``--out-dir`` overriding the config's
``out_dir``. Exit codes: 0 success, 1 I/O failure, 2 configuration error
(nothing is written), 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config
from .equilibria import Equilibrium, a_of_beta, check_conditions, find_all, w_of_beta
from .errors import ConfigError, NoSmallRoot, OutOfRange, ReinforceError
from .flow import integrate, lyapunov_monotone_check
from .model import InteractionModel, lyapunov_L, random_point
from .sim import ensemble, run, run_z_walks

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def fmt(value) -> str:
    """17-significant-digit decimal; integers stay integers, NaN is ``nan``."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, allow_nan=False, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def point_columns(m: int, d: int) -> list[str]:
    return [f"x_{i + 1}_{v + 1}" for i in range(m) for v in range(d)]


def equilibrium_record(eq: Equilibrium) -> dict:
    return {
        "point": eq.point,
        "residual": eq.residual,
        "eigenvalues": [[float(z.real), float(z.imag)] for z in eq.stability.eigenvalues],
        "classification": eq.stability.classification.value,
        "basin_hits": eq.basin_hits,
    }


def nearest(equilibria: list[Equilibrium], x) -> tuple[Equilibrium, float]:
    dists = [float(np.max(np.abs(eq.point - x))) for eq in equilibria]
    k = int(np.argmin(dists))
    return equilibria[k], dists[k]


def _solve(model: InteractionModel, cfg: ExperimentConfig) -> list[Equilibrium]:
    s = cfg.solver
    return find_all(model, s.n_starts, s.seed, dedup_tol=s.dedup_tol, max_iter=s.max_iter, tol=s.tol)


# -- commands ------------------------------------------------------------------

def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    model = cfg.model.build()
    with_L = not model.allow_asymmetric
    header = ["n", "tau_n", *point_columns(model.m, model.d)] + (["L"] if with_L else [])
    equilibria = _solve(model, cfg)
    out.mkdir(parents=True, exist_ok=True)

    def one(seed: int) -> dict:
        res = run(model, seed, cfg.n_steps, cfg.record_stride)
        samples = res.samples
        flat = samples.reshape(len(samples), -1)
        cols = [res.sample_n[:, None], res.sample_tau[:, None], flat]
        if with_L:
            cols.append(np.asarray(lyapunov_L(model, samples))[:, None])
        rows = [[int(r[0]), *r[1:]] for r in np.hstack(cols).tolist()]
        write_csv(out / f"simulate_seed{seed}.csv", header, rows)
        final = res.final.occupation
        eq, dist = nearest(equilibria, final)
        entry = {
            "seed": seed,
            "final_point": final,
            "nearest_equilibrium": eq.point,
            "nearest_classification": eq.stability.classification.value,
            "distance": dist,
            "martingale_sum": res.martingale_sum,
            "martingale_max_norm": res.martingale_max_norm,
            "dyadic_increments": res.dyadic_increments(),
        }
        if cfg.model.preset == "three-walk-z":
            z = run_z_walks(cfg.model.beta, seed, cfg.n_steps)
            entry["empirical_step_probs"] = z.empirical_step_probs
            entry["drift"] = z.drift
        return entry

    results = ensemble(one, cfg.seeds)
    summary = {
        "command": "simulate",
        "model": asdict(cfg.model),
        "n_steps": cfg.n_steps,
        "equilibria": [equilibrium_record(eq) for eq in equilibria],
        "runs": [results[s] for s in cfg.seeds],
    }
    write_json(out / "simulate_summary.json", summary)
    return EXIT_OK


def cmd_flow(cfg: ExperimentConfig, out: Path) -> int:
    model = cfg.model.build()
    ode = cfg.ode
    if ode.x0 is not None:
        x0 = np.asarray(ode.x0)
    else:
        x0 = random_point(np.random.default_rng(ode.seed), model.m, model.d)
    traj = integrate(model, x0, ode.dt, ode.t_end, ode.record_every)
    with_L = traj.lyapunov is not None
    header = ["t", *point_columns(model.m, model.d)] + (["L"] if with_L else [])
    cols = [traj.times[:, None], traj.points.reshape(len(traj), -1)]
    if with_L:
        cols.append(traj.lyapunov[:, None])
    equilibria = _solve(model, cfg)
    eq, dist = nearest(equilibria, traj.final)
    report = lyapunov_monotone_check(model, traj) if with_L else None

    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "flow.csv", header, np.hstack(cols).tolist())
    write_json(out / "flow_summary.json", {
        "command": "flow",
        "model": asdict(cfg.model),
        "x0": x0,
        "violations": None if report is None else report.violations,
        "max_increase": None if report is None else report.max_increase,
        "final_point": traj.final,
        "nearest_equilibrium": eq.point,
        "distance": dist,
    })
    return EXIT_OK


def cmd_equilibria(cfg: ExperimentConfig, out: Path) -> int:
    model = cfg.model.build()
    equilibria = _solve(model, cfg)
    conditions = check_conditions(model, seed=cfg.solver.seed)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "equilibria.json", {
        "command": "equilibria",
        "model": asdict(cfg.model),
        "equilibria": [equilibrium_record(eq) for eq in equilibria],
        "conditions": asdict(conditions),
    })
    return EXIT_OK


def _root_or_nan(fn, beta: float) -> float:
    try:
        return fn(beta)
    except (OutOfRange, NoSmallRoot):
        return math.nan


def cmd_phase_scan(cfg: ExperimentConfig, out: Path) -> int:
    if cfg.beta_grid is None:
        raise ConfigError("beta_grid: required for phase-scan")
    if cfg.model.preset == "explicit":
        raise ConfigError("model.preset: phase-scan needs a beta-parametrised preset")
    rows = []
    for beta in cfg.beta_grid:
        equilibria = _solve(cfg.model.build(beta), cfg)
        rows.append([
            beta,
            len(equilibria),
            sum(eq.stable for eq in equilibria),
            _root_or_nan(a_of_beta, beta),
            _root_or_nan(w_of_beta, beta),
        ])
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "phase_scan.csv", ["beta", "n_equilibria", "n_stable", "a_or_nan", "w_or_nan"], rows)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "flow": cmd_flow,
    "equilibria": cmd_equilibria,
    "phase-scan": cmd_phase_scan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reinforce-dyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment JSON")
        p.add_argument("--out-dir", default=None, help="output directory (overrides out_dir)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.model.preset != "explicit" and cfg.model.beta is None and args.command != "phase-scan":
            raise ConfigError("model.beta: required for this command")
        out = Path(args.out_dir if args.out_dir is not None else cfg.out_dir)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, ReinforceError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
