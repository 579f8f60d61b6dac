"""Acceptance gate: every ladder-level criterion at its stated tolerance.

Each test prints one [ACCEPT] line so the suite output doubles as the
acceptance report.  The expensive default ladder runs once per session
(see conftest.default_run).
"""

import csv
import json
import math

import numpy as np
import pytest

from triodelab.config import ExperimentConfig
from triodelab.disk import energy, energy_gradient
from triodelab.fieldio import load_field
from triodelab.minimize2d import SolveConfig, minimize
from triodelab.potential import PotentialSpec, eval_w, grad_w
from triodelab.sweep import run


def _accept(name, ok, detail=""):
    print(f"[ACCEPT] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def _rows(run_dir):
    with open(run_dir / "summary.csv") as f:
        return list(csv.DictReader(f))


def _spread(vals):
    return max(vals) / min(vals) if min(vals) > 0 else math.inf


def test_equal_actions(default_run):
    _, run_dir, _ = default_run
    with open(run_dir / "connect.json") as f:
        eq = json.load(f)["equal_actions"]
    _accept(
        "equal-actions",
        eq["max_rel_deviation"] <= 1e-6
        and eq["refinement_rel_change"] <= 1e-4,
        f"dev={eq['max_rel_deviation']:.2e} refine={eq['refinement_rel_change']:.2e}",
    )


def test_upper_bound(default_run):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    sigma = float(rows[0]["sigma"])
    ratios = [
        (float(r["energy_test"]) - 3 * sigma) / float(r["epsilon"]) for r in rows
    ]
    _accept(
        "upper-bound",
        all(v > 0 for v in ratios) and _spread(ratios) <= 3.0,
        f"ratios={[round(v, 4) for v in ratios]} spread={_spread(ratios):.2f}",
    )


def test_lower_bound_certificate(default_run):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    sigma = float(rows[0]["sigma"])
    sound = all(
        float(r["certificate_value"])
        <= float(r["energy"]) + 0.02 * abs(float(r["energy"]))
        for r in rows
    )
    gaps = [
        (3 * sigma - float(r["certificate_value"])) / math.sqrt(float(r["epsilon"]))
        for r in rows
    ]
    _accept(
        "lower-bound-certificate",
        sound and _spread(gaps) <= 5.0,
        f"sound={sound} gap-spread={_spread(gaps):.2f}",
    )


def test_energy_bracket(default_run):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    sigma = float(rows[0]["sigma"])
    bracket = all(
        float(r["certificate_value"])
        <= float(r["energy"])
        <= float(r["energy_test"]) + 1e-12
        for r in rows
    )
    dev = [abs(float(r["energy"]) - 3 * sigma) for r in rows]
    _accept(
        "energy-bracket",
        bracket and all(b < a for a, b in zip(dev, dev[1:])),
        f"bracket={bracket} |E-3sigma|={[round(v, 5) for v in dev]}",
    )


def test_junction_center(default_run):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    fam = [
        abs(float(r["y_star"])) / float(r["epsilon"]) ** 0.25 for r in rows
    ]
    _accept(
        "junction-center",
        _spread(fam) <= 5.0,
        f"|y*|/eps^(1/4)={[round(v, 3) for v in fam]} spread={_spread(fam):.2f}",
    )


def test_localization(default_run):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    fam = [
        float(r["localization_max"]) / float(r["epsilon"]) ** 0.25 for r in rows
    ]
    _accept(
        "localization",
        _spread(fam) <= 5.0,
        f"dist/eps^(1/4)={[round(v, 3) for v in fam]} spread={_spread(fam):.2f}",
    )


def test_width(default_run):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    ratios = [float(r["width_max_ratio"]) for r in rows]
    ok = all(b <= 2.0 * a for a, b in zip(ratios, ratios[1:]))
    _accept("width", ok, f"max r1/eps={[round(v, 3) for v in ratios]}")


def test_triple_point(default_run):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    eps = float(rows[-1]["epsilon"])
    tag = f"eps{eps:g}".replace(".", "p")
    with open(run_dir / f"report_{tag}.json") as f:
        report = json.load(f)
    tp = report.get("triple_point")
    ok = tp is not None and tp["alpha_start"] <= 0 <= tp["alpha_end"]
    detail = "missing"
    if tp:
        worst = max(tp["dist_pq"], tp["dist_pr"])
        ok = ok and worst <= tp["c0_measured"] * eps + 1e-12
        detail = (
            f"dPQ={tp['dist_pq']:.4f} dPR={tp['dist_pr']:.4f} "
            f"C0*eps={tp['c0_measured'] * eps:.4f}"
        )
    _accept("triple-point", ok, detail)


def test_discretization(default_run):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    eps = float(rows[-1]["epsilon"])
    tag = f"eps{eps:g}".replace(".", "p")
    with open(run_dir / f"report_{tag}.json") as f:
        report = json.load(f)
    disc = report.get("discretization")
    ok = disc is not None and not disc["violations"] and disc["k"] == 1
    detail = "missing"
    if disc:
        tp = np.array(report["triple_point"]["p"])
        c0eps = report["triple_point"]["c0_measured"] * eps
        q = np.array(disc["q_family"])
        r = np.array(disc["r_family"])
        ok = ok and len(q) == 2 and len(r) == 2
        fam = np.concatenate([q, r])
        pd = np.linalg.norm(fam[:, None] - fam[None, :], axis=-1)
        np.fill_diagonal(pd, np.inf)
        ok = ok and pd.min() >= 6 * c0eps - 2e-2
        p_eps = np.array(disc["p_eps"])
        for j, pt in enumerate(np.array(disc["q_family"]), start=1):
            ok = ok and np.linalg.norm(pt - p_eps) <= (32 * j + 1) * c0eps + 1e-2
        detail = (
            f"n_points={disc['n_points']} min-sep={pd.min():.4f} "
            f"6*C0*eps={6 * c0eps:.4f}"
        )
    _accept("discretization", ok, detail)


def test_gamma_limit_trend(default_run):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    l1 = [float(r["l1_best"]) for r in rows]
    ok = all(b < a for a, b in zip(l1, l1[1:])) and l1[-1] < 0.5 * l1[0]
    _accept("gamma-limit-trend", ok, f"L1={[round(v, 4) for v in l1]}")


def test_numerical_soundness_gradient(default_run, spec):
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    tag = f"eps{float(rows[0]['epsilon']):g}".replace(".", "p")
    fld = load_field(run_dir / f"field_{tag}")
    rng = np.random.default_rng(41)
    _, g = energy_gradient(fld, spec)
    t = 1e-6
    worst = 0.0
    for _ in range(20):
        v = rng.standard_normal(fld.values.shape)
        v[~fld.grid.interior] = 0.0
        v /= np.linalg.norm(v)
        fp, fm = fld.copy(), fld.copy()
        fp.values = fld.values + t * v
        fm.values = fld.values - t * v
        num = (energy(fp, spec) - energy(fm, spec)) / (2 * t)
        ana = float(np.sum(g * v))
        worst = max(worst, abs(num - ana) / (1.0 + abs(num)))
    _accept("gradient-dot-product", worst <= 1e-6, f"worst rel err={worst:.2e}")


def test_numerical_soundness_grad_w(spec):
    rng = np.random.default_rng(43)
    worst = 0.0
    for u in rng.uniform(-2, 2, size=(100, 2)):
        g = grad_w(spec, u)
        ref = np.zeros(2)
        for k in range(2):
            up, um = u.copy(), u.copy()
            up[k] += 1e-6
            um[k] -= 1e-6
            ref[k] = (eval_w(spec, up) - eval_w(spec, um)) / 2e-6
        worst = max(worst, np.linalg.norm(g - ref) / (1.0 + np.linalg.norm(ref)))
    _accept("grad-w-finite-differences", worst <= 1e-6, f"worst={worst:.2e}")


def test_numerical_soundness_determinism(tmp_path):
    cfg = ExperimentConfig.from_text(
        f"[sweep]\nepsilons = 0.4\noutput_root = {tmp_path}\n"
        "[solve]\nmax_iterations = 40000\n"
    )
    m1 = run(cfg, out_root=tmp_path / "a")
    m2 = run(cfg, out_root=tmp_path / "b")
    s1 = (tmp_path / "a" / f"run-{cfg.digest()}" / "summary.csv").read_bytes()
    s2 = (tmp_path / "b" / f"run-{cfg.digest()}" / "summary.csv").read_bytes()
    same_fields = (
        m1["files"]["field_eps0p4.bin"] == m2["files"]["field_eps0p4.bin"]
    )
    _accept(
        "run-determinism", s1 == s2 and same_fields,
        "byte-identical summary and field dumps",
    )


def test_minimizer_energy_window(default_run):
    # measured bracket for each member: certificate <= E <= E(u_test)
    _, run_dir, _ = default_run
    rows = _rows(run_dir)
    for r in rows:
        assert float(r["certificate_value"]) <= float(r["energy"])
        assert float(r["energy"]) <= float(r["energy_test"]) + 1e-12
        assert r["converged"] == "True"


def test_ladder_start_selection_never_hurts(default_run, spec, profiles):
    # each member starts from the lower-energy of {competitor, warm interp};
    # the chosen start can never need more iterations than the cold start
    _, run_dir, config = default_run
    rows = _rows(run_dir)
    last = rows[-1]
    cfg = SolveConfig(
        epsilon=float(last["epsilon"]),
        n=int(last["n_grid"]),
        c0=config["sweep"]["c0"],
        init="test-function",
    )
    _, cold = minimize(cfg, spec, profiles=profiles)
    assert int(last["iterations"]) <= cold.iterations
    assert float(last["energy"]) <= cold.final_energy + 1e-12


def test_primary_suite_independent_of_plots():
    import triodelab

    for mod in list(vars(triodelab).values()):
        name = getattr(mod, "__name__", "")
        assert "plot" not in str(name)
