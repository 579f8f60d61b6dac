"""End-to-end experiment orchestration: connect -> solve -> diagnose.

One run directory per configuration (named by the config hash) holding
field dumps, per-epsilon JSON reports and CSVs, a top-level summary.csv
with one row per epsilon, and a manifest with file hashes, stage wall
times and the evaluated acceptance checks.  Stage failures are recorded
and the pipeline continues where possible.
"""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np

from . import __version__ as pkg_version
from . import kernels
from .config import ExperimentConfig
from .connection1d import (
    check_equal_actions,
    connect_all,
    fit_decay,
    minimize_action,
)
from .diagnostics import (
    discretize_interface,
    extract_level_curves,
    interface_width,
    l1_blowdown_distance,
    lemma61_event,
    localization_distance,
    lower_bound_certificate,
    triple_point,
    lambda_rows,
)
from .disk import DiskGrid, Field, bilinear, build_test_function, energy
from .errors import ScaleLimitError, TriodeLabError
from .fieldio import dump_field, sha256_file, write_csv, write_json
from .minimize2d import SolveConfig, minimize
from .potential import estimate_constants

SUMMARY_COLUMNS = [
    "epsilon", "n_grid", "h", "sigma", "energy", "energy_test",
    "certificate_value", "y_star", "center_offset", "localization_max",
    "width_max_ratio", "dist_pq", "dist_pr", "l1_fixed", "l1_best",
    "iterations", "stop_reason", "converged", "sup_u", "sup_eps_grad",
]
SUMMARY_FORMAT_VERSION = 1


def _timed(store: dict, name: str):
    class _Ctx:
        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *exc):
            store[name] = store.get(name, 0.0) + time.perf_counter() - self.t0
            return False

    return _Ctx()


def run(config: ExperimentConfig, out_root=None) -> dict:
    """Execute the full pipeline; returns the manifest dictionary."""
    config.validate()
    spec = config.potential_spec()
    root = Path(out_root if out_root is not None else config["sweep"]["output_root"])
    out_dir = root / f"run-{config.digest()}"
    out_dir.mkdir(parents=True, exist_ok=True)

    times: dict = {}
    errors: dict = {}
    manifest = {
        "format_version": SUMMARY_FORMAT_VERSION,
        "package_version": pkg_version,
        "backend": kernels.backend_name(),
        "config_hash": config.digest(),
        "config": config.canonical_text(),
        "run_dir": str(out_dir),
        "files": {},
        "stage_errors": errors,
        "wall_times": times,
    }

    with _timed(times, "constants"):
        constants = estimate_constants(spec)
    manifest["constants"] = {
        "c_w": constants.c_w,
        "big_c_w": constants.big_c_w,
        "delta_w": constants.delta_w,
        "c1": constants.c1,
        "c2": constants.c2,
        "coercivity_radius": constants.coercivity_radius,
    }

    ccfg = config["connection"]
    with _timed(times, "connect"):
        profiles = connect_all(spec, ccfg["half_length"], ccfg["nodes"])
        eq = check_equal_actions(spec, profiles=profiles)
        sigma = eq["sigma"]
        refined = minimize_action(
            spec, 0, 1, half_length=1.5 * ccfg["half_length"], n=2 * ccfg["nodes"]
        )
        eq["refinement_rel_change"] = abs(refined.action - profiles[(0, 1)].action) / sigma
        decay = {
            f"{i+1}{j+1}": {
                side: {
                    "amplitude": fit.amplitude,
                    "rate": fit.rate,
                    "residual": fit.residual,
                }
                for side, fit in fit_decay(p, spec, delta_half=constants.delta_w / 2).items()
            }
            for (i, j), p in profiles.items()
        }
    write_json(out_dir / "connect.json", {"equal_actions": eq, "decay": decay})
    for (i, j), p in profiles.items():
        write_csv(
            out_dir / f"profile_{i+1}{j+1}.csv",
            ["eta", "u1", "u2"],
            [(float(e), float(v[0]), float(v[1])) for e, v in zip(p.eta, p.values)],
        )

    ladder = config.epsilons()
    scfg = config["solve"]
    dcfg = config["diagnostics"]
    c0 = config["sweep"]["c0"]
    seed = config["sweep"]["seed"]

    rows = []
    metrics = []
    prev_field = None
    for eps in ladder:
        n = config.grid_size(eps)
        tag = f"eps{eps:g}".replace(".", "p")
        row = {c: "" for c in SUMMARY_COLUMNS}
        row.update({"epsilon": eps, "n_grid": n, "h": 2.0 / (n - 1), "sigma": sigma})
        metric = {"epsilon": eps}
        grid = DiskGrid(n)

        with _timed(times, f"solve_{tag}"):
            utest = build_test_function(grid, eps, c0, spec, profiles)
            e_test = energy(utest, spec)
            warm = None
            if prev_field is not None:
                x, y = grid.coords()
                cand = bilinear(
                    prev_field.grid, prev_field.values, np.stack([x, y], axis=-1)
                )
                f_cand = Field(grid, cand.copy(), eps, c0, spec)
                f_cand.clamp_boundary()
                if energy(f_cand, spec) < e_test:
                    warm = f_cand.values
            cfg = SolveConfig(
                epsilon=eps,
                n=n,
                c0=c0,
                init="test-function",
                step_rule=scfg["step_rule"],
                tol_energy=scfg["tol_energy"],
                tol_grad=scfg["tol_grad"] or None,
                max_iter=scfg["max_iterations"],
                starts=scfg["starts"],
                seed=seed,
            )
            fld, rep = minimize(cfg, spec, profiles=profiles, warm_values=warm)
        prev_field = fld
        dump_field(out_dir / f"field_{tag}", fld)
        row.update(
            {
                "energy": rep.final_energy,
                "energy_test": e_test,
                "iterations": rep.iterations,
                "stop_reason": rep.stop_reason,
                "converged": rep.converged,
                "sup_u": rep.sup_u,
                "sup_eps_grad": rep.sup_eps_grad,
            }
        )
        metric.update({"energy": rep.final_energy, "energy_test": e_test})

        report = {
            "epsilon": eps,
            "n": n,
            "energy": rep.final_energy,
            "energy_test": e_test,
            "solve": {
                "iterations": rep.iterations,
                "stop_reason": rep.stop_reason,
                "converged": rep.converged,
                "grad_max_norm": rep.grad_max_norm,
                "sup_u": rep.sup_u,
                "sup_eps_grad": rep.sup_eps_grad,
                "start_energies": rep.start_energies,
            },
        }

        with _timed(times, f"diagnose_{tag}"):
            lam = lambda_rows(fld)
            write_csv(
                out_dir / f"lambda_rows_{tag}.csv",
                ["y", "lam1", "lam2", "lam3", "row_measure"],
                [
                    (float(y), float(l[0]), float(l[1]), float(l[2]), float(m))
                    for y, l, m in zip(lam["y"], lam["lam"], lam["row_measure"])
                ],
            )
            try:
                cert = lower_bound_certificate(fld, spec, sigma, constants)
                row["certificate_value"] = cert.value
                row["y_star"] = cert.y_star
                metric.update({"certificate": cert.value, "y_star": cert.y_star})
                report["certificate"] = {
                    "value": cert.value,
                    "y_star": cert.y_star,
                    "alpha": cert.alpha,
                    "k_measure": cert.k_measure,
                    "m_measure": cert.m_measure,
                    "beta": cert.beta,
                    "terms": cert.terms,
                    "tolerance": cert.tolerance,
                }
                write_csv(
                    out_dir / f"certificate_{tag}.csv",
                    ["term", "value"],
                    [("value", cert.value), ("y_star", cert.y_star)]
                    + list(cert.terms.items()),
                )
            except TriodeLabError as exc:
                errors[f"certificate_{tag}"] = str(exc)

            try:
                geom = extract_level_curves(
                    fld,
                    dcfg["gamma"],
                    sigma=sigma,
                    big_c_w=constants.big_c_w,
                    gamma0_proxy=dcfg["gamma0_proxy"],
                )
                for i, fam in enumerate(geom.families):
                    out_rows = []
                    for pid, poly in enumerate(fam):
                        out_rows += [
                            (pid, float(p[0]), float(p[1])) for p in poly
                        ]
                    write_csv(
                        out_dir / f"gamma{i+1}_{tag}.csv",
                        ["polyline", "x", "y"],
                        out_rows,
                    )
                loc = localization_distance(geom, fld)
                row["localization_max"] = loc["max_dist"]
                row["center_offset"] = loc["center_offset"]
                metric.update(
                    {
                        "localization": loc["max_dist"],
                        "center_offset": loc["center_offset"],
                    }
                )
                report["localization"] = {
                    "max_dist": loc["max_dist"],
                    "center": [float(v) for v in loc["center"]],
                    "center_offset": loc["center_offset"],
                }
                width = interface_width(geom, fld, samples=dcfg["width_samples"])
                write_csv(
                    out_dir / f"r1_samples_{tag}.csv",
                    ["family", "x", "y", "r1"],
                    width["samples"],
                )
                row["width_max_ratio"] = width["max_ratio"]
                metric["width_ratio"] = width["max_ratio"]
                report["width"] = {
                    "max_ratio": width["max_ratio"],
                    "median_ratio": width["median_ratio"],
                }

                try:
                    tp = triple_point(geom, fld)
                    c0_meas = max(
                        width["max_ratio"], tp.dist_pq / eps, tp.dist_pr / eps
                    )
                    row["dist_pq"] = tp.dist_pq
                    row["dist_pr"] = tp.dist_pr
                    metric.update(
                        {
                            "dist_pq": tp.dist_pq,
                            "dist_pr": tp.dist_pr,
                            "c0_measured": c0_meas,
                        }
                    )
                    report["triple_point"] = {
                        "p": [float(v) for v in tp.p],
                        "q": [float(v) for v in tp.q],
                        "r": [float(v) for v in tp.r],
                        "dist_pq": tp.dist_pq,
                        "dist_pr": tp.dist_pr,
                        "alpha_start": tp.alpha_start,
                        "alpha_end": tp.alpha_end,
                        "c0_measured": c0_meas,
                    }
                    y0 = lemma61_event(geom, fld, c0_meas)
                    report["lemma61_row"] = y0
                    metric["lemma61_row"] = y0
                    try:
                        # the greedy step 8*C0*eps only fits on the curve for
                        # the finest ladder members; a scale-limit outcome is
                        # an expected diagnostic, recorded in the report
                        fams = discretize_interface(
                            geom, fld, dcfg["families_level"], c0_meas
                        )
                        report["discretization"] = {
                            "k": fams["k"],
                            "step": fams["step"],
                            "n_points": int(fams["z_points"].shape[0]),
                            "p_eps": [float(v) for v in fams["p_eps"]],
                            "q_family": fams["q_family"].tolist(),
                            "r_family": fams["r_family"].tolist(),
                            "min_pairwise_family": fams["min_pairwise_family"],
                            "violations": fams["violations"],
                        }
                        metric["discretization_ok"] = not fams["violations"]
                        write_csv(
                            out_dir / f"discretization_{tag}.csv",
                            ["x", "y", "closer_to"],
                            [
                                (float(p[0]), float(p[1]), 2 if z2 else 3)
                                for p, z2 in zip(fams["z_points"], fams["in_z2"])
                            ],
                        )
                    except ScaleLimitError as exc:
                        report["discretization_error"] = str(exc)
                    except TriodeLabError as exc:
                        errors[f"discretization_{tag}"] = str(exc)
                except TriodeLabError as exc:
                    errors[f"triple_point_{tag}"] = str(exc)
            except TriodeLabError as exc:
                errors[f"levels_{tag}"] = str(exc)

            l1 = l1_blowdown_distance(fld)
            row["l1_fixed"] = l1["fixed"]
            row["l1_best"] = l1["best"]
            metric.update({"l1_fixed": l1["fixed"], "l1_best": l1["best"]})
            report["l1_blowdown"] = {
                "fixed": l1["fixed"],
                "best": l1["best"],
                "best_center": [float(v) for v in l1["best_center"]],
                "best_orientation": float(l1["best_orientation"]),
            }

        write_json(out_dir / f"report_{tag}.json", report)
        rows.append([row[c] for c in SUMMARY_COLUMNS])
        metrics.append(metric)

    write_csv(out_dir / "summary.csv", SUMMARY_COLUMNS, rows)
    manifest["acceptance"] = evaluate_acceptance(metrics, eq, sigma)
    manifest["sigma"] = sigma

    for path in sorted(out_dir.iterdir()):
        if path.name != "manifest.json" and path.is_file():
            manifest["files"][path.name] = sha256_file(path)
    write_json(out_dir / "manifest.json", manifest)
    return manifest


def _ratio_spread(vals) -> float:
    vals = [v for v in vals if v is not None]
    if not vals or min(vals) <= 0:
        return math.inf
    return max(vals) / min(vals)


def evaluate_acceptance(metrics, eq, sigma) -> dict:
    """Ladder-level acceptance checks (the pytest suite re-runs these and
    adds the single-field oracles)."""
    eps = [m["epsilon"] for m in metrics]
    checks = {}

    checks["equal_actions"] = (
        eq["max_rel_deviation"] <= 1e-6
        and eq.get("refinement_rel_change", math.inf) <= 1e-4
    )

    up = [(m["energy_test"] - 3 * sigma) / m["epsilon"] for m in metrics]
    checks["upper_bound"] = all(v > 0 for v in up) and _ratio_spread(up) <= 3.0

    certs = [m.get("certificate") for m in metrics]
    if all(c is not None for c in certs):
        gaps = [
            (3 * sigma - c) / math.sqrt(e) for c, e in zip(certs, eps)
        ]
        checks["lower_bound_certificate"] = (
            all(c <= m["energy"] + 0.02 * abs(m["energy"]) for c, m in zip(certs, metrics))
            and _ratio_spread(gaps) <= 5.0
        )
        bracket = all(
            c <= m["energy"] <= m["energy_test"] + 1e-12
            for c, m in zip(certs, metrics)
        )
        dev = [abs(m["energy"] - 3 * sigma) for m in metrics]
        checks["energy_bracket"] = bracket and all(
            b < a for a, b in zip(dev, dev[1:])
        )
    else:
        checks["lower_bound_certificate"] = False
        checks["energy_bracket"] = False

    ys = [m.get("y_star") for m in metrics]
    if all(v is not None for v in ys):
        fam = [abs(v) / e**0.25 for v, e in zip(ys, eps)]
        checks["junction_center"] = _ratio_spread(fam) <= 5.0
    else:
        checks["junction_center"] = False

    loc = [m.get("localization") for m in metrics]
    if all(v is not None for v in loc):
        fam = [v / e**0.25 for v, e in zip(loc, eps)]
        checks["localization"] = _ratio_spread(fam) <= 5.0
    else:
        checks["localization"] = False

    wr = [m.get("width_ratio") for m in metrics]
    if all(v is not None for v in wr):
        checks["width"] = all(b <= 2.0 * a for a, b in zip(wr, wr[1:]))
    else:
        checks["width"] = False

    last = metrics[-1]
    checks["triple_point"] = (
        last.get("dist_pq") is not None
        and last.get("dist_pr") is not None
        and max(last["dist_pq"], last["dist_pr"])
        <= last.get("c0_measured", 0.0) * last["epsilon"] + 1e-12
    )
    checks["discretization"] = bool(last.get("discretization_ok"))

    l1 = [m.get("l1_best") for m in metrics]
    if all(v is not None for v in l1):
        checks["gamma_limit_trend"] = all(
            b < a for a, b in zip(l1, l1[1:])
        ) and l1[-1] < 0.5 * l1[0]
    else:
        checks["gamma_limit_trend"] = False

    checks["all"] = all(bool(v) for k, v in checks.items() if k != "all")
    return checks
