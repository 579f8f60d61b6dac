"""Secondary acceptance: all four figure kinds render from the real default
run directory and are pixel-identical across reruns.

The run directory is produced by the primary CLI (`triode-lab run`); if it
is absent this test builds it through that external interface.
"""

import subprocess
from pathlib import Path

import pytest

from triodeplots import FIGURE_KINDS, FigureSpec, render

REPO_ROOT = Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def default_run_dir():
    runs = REPO_ROOT / "runs"
    candidates = sorted(runs.glob("run-*/summary.csv")) if runs.exists() else []
    for summary in candidates:
        text = summary.read_text().splitlines()
        if len(text) == 4:  # header + three ladder rows
            return summary.parent
    proc = subprocess.run(
        ["triode-lab", "run", "--out-root", str(runs)],
        capture_output=True,
        text=True,
        timeout=3600,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    candidates = sorted(runs.glob("run-*/summary.csv"))
    assert candidates, "triode-lab run produced no run directory"
    return candidates[0].parent


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_render_default_run(default_run_dir, tmp_path, kind):
    a = tmp_path / f"{kind}-a.png"
    b = tmp_path / f"{kind}-b.png"
    render(FigureSpec(run_dir=default_run_dir, kind=kind, out_path=a))
    render(FigureSpec(run_dir=default_run_dir, kind=kind, out_path=b))
    ok = a.exists() and a.stat().st_size > 1000 and a.read_bytes() == b.read_bytes()
    print(f"[ACCEPT] figure-{kind}: {'PASS' if ok else 'FAIL'}")
    assert ok
