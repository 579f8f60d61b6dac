import os
from pathlib import Path

import pytest

from triodelab.config import ExperimentConfig
from triodelab.connection1d import check_equal_actions, connect_all
from triodelab.potential import PotentialSpec, estimate_constants
from triodelab.sweep import run

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def spec():
    return PotentialSpec()


@pytest.fixture(scope="session")
def constants(spec):
    return estimate_constants(spec)


@pytest.fixture(scope="session")
def profiles(spec):
    return connect_all(spec)


@pytest.fixture(scope="session")
def sigma(spec, profiles):
    return check_equal_actions(spec, profiles=profiles)["sigma"]


@pytest.fixture(scope="session")
def default_run():
    """The full default ladder; reused by every acceptance criterion.

    Set TRIODE_LAB_REUSE_RUN=1 to reuse an existing complete run directory
    (useful while iterating locally; CI recomputes).
    """
    config = ExperimentConfig.default()
    out_root = REPO_ROOT / "runs"
    run_dir = out_root / f"run-{config.digest()}"
    manifest_path = run_dir / "manifest.json"
    if os.environ.get("TRIODE_LAB_REUSE_RUN") == "1" and manifest_path.exists():
        import json

        with open(manifest_path) as f:
            return json.load(f), run_dir, config
    manifest = run(config, out_root=out_root)
    return manifest, run_dir, config


@pytest.fixture(scope="session")
def field02(spec, profiles):
    """Converged minimizer at eps=0.2 on the rule grid (fast, reused widely)."""
    from triodelab.minimize2d import SolveConfig, minimize

    cfg = SolveConfig(epsilon=0.2, n=51, c0=0.4)
    fld, rep = minimize(cfg, spec, profiles=profiles)
    assert rep.converged
    return fld


@pytest.fixture(scope="session")
def mini_config_text():
    return """
[sweep]
epsilons = 0.4 0.3
output_root = {root}

[solve]
max_iterations = 60000
"""
