"""Command line interface: run / connect / solve / diagnose / bench."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .connection1d import check_equal_actions, connect_all, fit_decay
from .diagnostics import (
    extract_level_curves,
    interface_width,
    l1_blowdown_distance,
    localization_distance,
    lower_bound_certificate,
    triple_point,
)
from .disk import DiskGrid, build_test_function, energy
from .errors import TriodeLabError
from .fieldio import dump_field, load_field, write_csv, write_json
from .minimize2d import SolveConfig, minimize
from .potential import PotentialSpec, estimate_constants, poly_derivative
from . import kernels
from .sweep import run as run_sweep


def _spec_from_args(args) -> PotentialSpec:
    if args.kind == "cubic":
        return PotentialSpec()
    return PotentialSpec(
        kind="perturbed-cubic", s=args.s, rho=args.rho,
        center=(args.center_x, args.center_y),
    )


def _add_potential_args(p):
    p.add_argument("--kind", default="cubic", choices=["cubic", "perturbed-cubic"])
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=0.2)
    p.add_argument("--center-x", type=float, default=0.0)
    p.add_argument("--center-y", type=float, default=0.0)


def cmd_run(args) -> int:
    if args.config:
        config = ExperimentConfig.from_file(args.config)
    else:
        config = ExperimentConfig.default()
    manifest = run_sweep(config, out_root=args.out_root)
    checks = manifest["acceptance"]
    for name, ok in checks.items():
        if name != "all":
            print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    print(f"run directory: {manifest['run_dir']}")
    return 0 if checks["all"] and not manifest["stage_errors"] else 1


def cmd_connect(args) -> int:
    spec = _spec_from_args(args)
    profiles = connect_all(spec, args.half_length, args.nodes)
    eq = check_equal_actions(spec, tol=args.tol, profiles=profiles)
    decay = {
        f"{i+1}{j+1}": {
            side: {"amplitude": f.amplitude, "rate": f.rate, "residual": f.residual}
            for side, f in fit_decay(p, spec).items()
        }
        for (i, j), p in profiles.items()
    }
    out = {"equal_actions": eq, "decay": decay}
    if args.out:
        write_json(args.out, out)
    if args.profiles_dir:
        d = Path(args.profiles_dir)
        for (i, j), p in profiles.items():
            write_csv(
                d / f"profile_{i+1}{j+1}.csv",
                ["eta", "u1", "u2"],
                [(float(e), float(v[0]), float(v[1])) for e, v in zip(p.eta, p.values)],
            )
    print(json.dumps(eq, indent=2))
    return 0 if eq["passed"] else 1


def cmd_solve(args) -> int:
    spec = _spec_from_args(args)
    profiles = None
    if args.init in ("test-function", "rotated-test-function"):
        profiles = connect_all(spec)
    cfg = SolveConfig(
        epsilon=args.epsilon,
        n=args.grid,
        c0=args.c0,
        init=args.init,
        step_rule=args.step_rule,
        tol_energy=args.tol_e,
        tol_grad=args.tol_g,
        max_iter=args.max_iter,
        starts=args.starts,
        seed=args.seed,
    )
    fld, rep = minimize(cfg, spec, profiles=profiles)
    if args.out:
        dump_field(args.out, fld)
    report = {
        "energy": rep.final_energy,
        "iterations": rep.iterations,
        "stop_reason": rep.stop_reason,
        "converged": rep.converged,
        "grad_max_norm": rep.grad_max_norm,
        "sup_u": rep.sup_u,
        "sup_eps_grad": rep.sup_eps_grad,
    }
    if args.report:
        write_json(args.report, report)
    print(json.dumps(report, indent=2))
    return 0 if rep.converged else 1


def cmd_diagnose(args) -> int:
    fld = load_field(args.field)
    spec = fld.spec
    constants = estimate_constants(spec)
    eq = check_equal_actions(spec)
    sigma = eq["sigma"]
    report = {"epsilon": fld.epsilon, "energy": energy(fld, spec), "sigma": sigma}
    csv_dir = Path(args.csv_dir) if args.csv_dir else None
    try:
        cert = lower_bound_certificate(fld, spec, sigma, constants)
        report["certificate"] = {
            "value": cert.value, "y_star": cert.y_star, "alpha": cert.alpha,
            "k_measure": cert.k_measure, "m_measure": cert.m_measure,
            "beta": cert.beta, "terms": cert.terms,
        }
        if csv_dir:
            write_csv(
                csv_dir / "lambda_rows.csv",
                ["y", "lam1", "lam2", "lam3", "row_measure"],
                [
                    (float(y), float(l[0]), float(l[1]), float(l[2]), float(m))
                    for y, l, m in zip(
                        cert.lambdas["y"], cert.lambdas["lam"],
                        cert.lambdas["row_measure"],
                    )
                ],
            )
    except TriodeLabError as exc:
        report["certificate_error"] = str(exc)
    try:
        geom = extract_level_curves(
            fld, args.gamma, sigma=sigma, big_c_w=constants.big_c_w
        )
        loc = localization_distance(geom, fld)
        width = interface_width(geom, fld, samples=args.width_samples)
        report["localization"] = {
            "max_dist": loc["max_dist"], "center_offset": loc["center_offset"],
        }
        report["width"] = {"max_ratio": width["max_ratio"]}
        if csv_dir:
            for i, fam in enumerate(geom.families):
                rows = []
                for pid, poly in enumerate(fam):
                    rows += [(pid, float(p[0]), float(p[1])) for p in poly]
                write_csv(csv_dir / f"gamma{i+1}.csv", ["polyline", "x", "y"], rows)
            write_csv(
                csv_dir / "r1_samples.csv", ["family", "x", "y", "r1"],
                width["samples"],
            )
        tp = triple_point(geom, fld)
        report["triple_point"] = {
            "p": [float(v) for v in tp.p],
            "dist_pq": tp.dist_pq, "dist_pr": tp.dist_pr,
        }
    except TriodeLabError as exc:
        report["geometry_error"] = str(exc)
    l1 = l1_blowdown_distance(fld)
    report["l1_blowdown"] = {"fixed": l1["fixed"], "best": l1["best"]}
    if args.out:
        write_json(args.out, report)
    print(json.dumps(report, indent=2))
    return 0


def cmd_bench(args) -> int:
    spec = PotentialSpec()
    grid = DiskGrid(args.grid)
    rng = np.random.default_rng(0)
    values = 0.5 * rng.standard_normal((grid.n, grid.n, 2))
    base = spec.coeffs
    coeffs = np.stack([base, poly_derivative(base, 0), poly_derivative(base, 1)])
    bump = spec.bump_params
    results = {}
    for name in ("numpy", "numba"):
        try:
            backend = (
                kernels.numpy_backend if name == "numpy" else kernels.numba_backend
            )
            if backend is None:
                continue
            backend.energy_and_grad(
                values, grid.cell_inside, grid.interior, grid.h, args.epsilon,
                coeffs, bump,
            )
            t0 = time.perf_counter()
            for _ in range(args.iters):
                e, _ = backend.energy_and_grad(
                    values, grid.cell_inside, grid.interior, grid.h, args.epsilon,
                    coeffs, bump,
                )
            dt = (time.perf_counter() - t0) / args.iters
            results[name] = dt
            print(f"{name:6s}: {dt*1e3:8.3f} ms/iter (energy={e:.6f})")
        except Exception as exc:  # pragma: no cover
            print(f"{name:6s}: unavailable ({exc})")
    if len(results) == 2:
        print(f"speedup: {results['numpy'] / results['numba']:.1f}x")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="triode-lab",
        description="Vector Allen-Cahn triple-junction laboratory on the unit disk",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("config", nargs="?", default=None)
    p.add_argument("--out-root", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("connect", help="1D connections, actions and decay fits")
    _add_potential_args(p)
    p.add_argument("--half-length", type=float, default=12.0)
    p.add_argument("--nodes", type=int, default=1024)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default=None)
    p.add_argument("--profiles-dir", default=None)
    p.set_defaults(func=cmd_connect)

    p = sub.add_parser("solve", help="minimize the clamped disk energy")
    _add_potential_args(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--c0", type=float, default=0.4)
    p.add_argument("--init", default="test-function")
    p.add_argument("--step-rule", default="bb", choices=["bb", "fixed"])
    p.add_argument("--tol-e", type=float, default=1e-11)
    p.add_argument("--tol-g", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=500_000)
    p.add_argument("--starts", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="field dump path prefix")
    p.add_argument("--report", default=None, help="JSON report path")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("diagnose", help="diagnostics for a stored field dump")
    p.add_argument("--field", required=True, help="field dump path prefix")
    p.add_argument("--gamma", type=float, default=0.35)
    p.add_argument("--width-samples", type=int, default=50)
    p.add_argument("--out", default=None)
    p.add_argument("--csv-dir", default=None)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("bench", help="compare numba and numpy kernel throughput")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--iters", type=int, default=50)
    p.set_defaults(func=cmd_bench)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
