import hashlib
import json
import math

import numpy as np
import pytest


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


SUMMARY_COLUMNS = [
    "epsilon", "n_grid", "h", "sigma", "energy", "energy_test",
    "certificate_value", "y_star", "center_offset", "localization_max",
    "width_max_ratio", "dist_pq", "dist_pr", "l1_fixed", "l1_best",
    "iterations", "stop_reason", "converged", "sup_u", "sup_eps_grad",
]


@pytest.fixture(scope="session")
def synth_run(tmp_path_factory):
    """A miniature run directory following the public file contract."""
    run_dir = tmp_path_factory.mktemp("synthrun") / "run-cafe"
    run_dir.mkdir()
    sigma = 1.8371
    eps_rows = []
    for eps, n in ((0.2, 21), (0.1, 21)):
        tag = f"eps{eps:g}".replace(".", "p")
        xs = np.linspace(-1, 1, n)
        x, y = np.meshgrid(xs, xs, indexing="xy")
        ang = np.mod(np.arctan2(y, x) - math.pi / 2, 2 * math.pi)
        wells = np.array(
            [[1.0, 0.0], [-0.5, 0.5 * math.sqrt(3)], [-0.5, -0.5 * math.sqrt(3)]]
        )
        vals = np.where(
            (ang < 2 * math.pi / 3)[..., None],
            wells[0],
            np.where((ang < 4 * math.pi / 3)[..., None], wells[2], wells[1]),
        ).astype(float)
        raw = vals.tobytes()
        (run_dir / f"field_{tag}.bin").write_bytes(raw)
        (run_dir / f"field_{tag}.json").write_text(
            json.dumps(
                {
                    "format_version": 1,
                    "n": n,
                    "h": 2.0 / (n - 1),
                    "epsilon": eps,
                    "c0": 0.4,
                    "potential": {"kind": "cubic"},
                    "sha256": hashlib.sha256(raw).hexdigest(),
                }
            )
        )
        for fam, x0 in ((1, -0.02), (2, 0.02), (3, 0.0)):
            poly = [(0, x0 + 0.01 * k, -0.9 + 0.09 * k) for k in range(20)]
            _write_csv(
                run_dir / f"gamma{fam}_{tag}.csv",
                ["polyline", "x", "y"],
                [(p, float(px), float(py)) for p, px, py in poly],
            )
        report = {
            "epsilon": eps,
            "localization": {"center": [0.01, -0.01], "center_offset": 0.014},
            "triple_point": {
                "p": [0.0, 0.05],
                "q": [0.05, 0.05],
                "r": [-0.05, 0.05],
                "dist_pq": 0.05,
                "dist_pr": 0.05,
                "alpha_start": -1.0,
                "alpha_end": 1.0,
                "c0_measured": 1.3,
            },
        }
        (run_dir / f"report_{tag}.json").write_text(json.dumps(report))
        _write_csv(
            run_dir / f"discretization_{tag}.csv",
            ["x", "y", "closer_to"],
            [(0.0, 0.3, 2), (0.0, -0.3, 3)],
        )
        eps_rows.append(
            [
                eps, n, 2.0 / (n - 1), sigma, 3 * sigma - 0.02 * eps,
                3 * sigma + 0.3 * eps, 3 * sigma - 2.0, -0.4, 0.014,
                0.1 * eps**0.25, 1.3, 0.05, 0.05, 0.4 * eps, 0.35 * eps,
                100, "energy-stall", True, 1.0, 3.0,
            ]
        )
    _write_csv(run_dir / "summary.csv", SUMMARY_COLUMNS, eps_rows)
    (run_dir / "manifest.json").write_text(json.dumps({"config_hash": "cafe"}))
    return run_dir
