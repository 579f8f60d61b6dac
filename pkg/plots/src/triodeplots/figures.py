"""Publication-style figures from a triode-lab run directory.

Figures consume only the public run-directory contract (summary.csv,
report_*.json, gamma*_*.csv, field dumps); run directories are never
written to.  Rendering is deterministic: fixed style, fixed dpi, no
timestamps, so identical inputs give pixel-identical images.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

STYLE_VERSION = 1
FIGURE_KINDS = ("bracket", "scalings", "field-map", "junction")
LEG_ANGLES = (0.5 * math.pi, 7.0 * math.pi / 6.0, 11.0 * math.pi / 6.0)
SECTOR_COLORS = ["#c23b3b", "#3f9e4d", "#3b5fc2"]  # a1 red, a2 green, a3 blue


class MissingInputError(FileNotFoundError):
    """Input artifact absent; the message names the producing subcommand."""


@dataclass
class FigureSpec:
    run_dir: Path
    kind: str
    out_path: Path
    epsilon: float | None = None
    dpi: int = 150
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        self.run_dir = Path(self.run_dir)
        self.out_path = Path(self.out_path)
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; want {FIGURE_KINDS}")


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise MissingInputError(
            f"missing {path.name}; generate it with `{producer}`"
        )
    return path


def _read_summary(run_dir: Path):
    path = _require(run_dir / "summary.csv", "triode-lab run <config>")
    with open(path) as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise MissingInputError(
            "summary.csv has no rows; rerun `triode-lab run <config>`"
        )
    return rows


def _tag(eps: float) -> str:
    return f"eps{eps:g}".replace(".", "p")


def _pick_epsilon(rows, epsilon):
    eps_list = [float(r["epsilon"]) for r in rows]
    if epsilon is None:
        return eps_list[-1]
    if epsilon not in eps_list:
        raise MissingInputError(
            f"epsilon {epsilon} not in run (have {eps_list}); "
            "rerun `triode-lab run <config>`"
        )
    return epsilon


def _load_field(run_dir: Path, eps: float):
    prefix = run_dir / f"field_{_tag(eps)}"
    _require(prefix.with_suffix(".json"), "triode-lab run <config>")
    _require(prefix.with_suffix(".bin"), "triode-lab run <config>")
    with open(prefix.with_suffix(".json")) as f:
        sidecar = json.load(f)
    n = sidecar["n"]
    values = np.frombuffer(
        prefix.with_suffix(".bin").read_bytes(), dtype=np.float64
    ).reshape(n, n, 2)
    return values, sidecar


def _load_polylines(run_dir: Path, fam: int, eps: float):
    path = _require(
        run_dir / f"gamma{fam}_{_tag(eps)}.csv", "triode-lab run <config>"
    )
    polys = {}
    with open(path) as f:
        for row in csv.DictReader(f):
            polys.setdefault(int(row["polyline"]), []).append(
                (float(row["x"]), float(row["y"]))
            )
    return [np.array(p) for p in polys.values()]


def _new_axes(spec: FigureSpec, square=False):
    plt.rcdefaults()
    plt.rcParams.update(
        {
            "figure.figsize": (6.4, 4.8) if not square else (6.0, 6.0),
            "font.size": 10,
            "axes.grid": True,
            "grid.alpha": 0.3,
            "svg.hashsalt": "triode-plots",
        }
    )
    plt.rcParams.update(spec.style)
    fig, ax = plt.subplots()
    return fig, ax


def _finish(fig, spec: FigureSpec):
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=spec.dpi, metadata={"Software": "triode-plots"})
    plt.close(fig)
    return spec.out_path


def render_bracket(spec: FigureSpec):
    rows = _read_summary(spec.run_dir)
    eps = np.array([float(r["epsilon"]) for r in rows])
    sigma = float(rows[0]["sigma"])
    fig, ax = _new_axes(spec)
    ax.plot(eps, [float(r["energy"]) for r in rows], "o-", label="energy(u_eps)")
    ax.plot(
        eps, [float(r["energy_test"]) for r in rows], "s-", label="energy(u_test)"
    )
    ax.plot(
        eps,
        [float(r["certificate_value"]) for r in rows],
        "^-",
        label="lower-bound certificate",
    )
    ax.axhline(3 * sigma, color="k", lw=1, ls="--", label="3 sigma")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("energy")
    ax.set_xscale("log")
    ax.invert_xaxis()
    ax.legend()
    ax.set_title("Energy bracket across the epsilon ladder")
    return _finish(fig, spec)


def render_scalings(spec: FigureSpec):
    rows = _read_summary(spec.run_dir)
    eps = np.array([float(r["epsilon"]) for r in rows])
    fig, ax = _new_axes(spec)
    ax.plot(
        eps,
        [abs(float(r["y_star"])) / float(r["epsilon"]) ** 0.25 for r in rows],
        "o-",
        label="|y*| / eps^(1/4)",
    )
    ax.plot(
        eps,
        [
            float(r["localization_max"]) / float(r["epsilon"]) ** 0.25
            for r in rows
        ],
        "s-",
        label="dist(I, T) / eps^(1/4)",
    )
    ax.plot(
        eps,
        [float(r["width_max_ratio"]) for r in rows],
        "^-",
        label="max r1 / eps",
    )
    ax.set_xlabel("epsilon")
    ax.set_ylabel("scaled diagnostic")
    ax.set_xscale("log")
    ax.invert_xaxis()
    ax.legend()
    ax.set_title("Scaling-ratio stability")
    return _finish(fig, spec)


def render_field_map(spec: FigureSpec):
    rows = _read_summary(spec.run_dir)
    eps = _pick_epsilon(rows, spec.epsilon)
    values, sidecar = _load_field(spec.run_dir, eps)
    wells = np.array(
        [[1.0, 0.0], [-0.5, 0.5 * math.sqrt(3)], [-0.5, -0.5 * math.sqrt(3)]]
    )
    dists = np.stack([np.linalg.norm(values - w, axis=-1) for w in wells])
    label = np.argmin(dists, axis=0).astype(float)
    n = sidecar["n"]
    xs = np.linspace(-1, 1, n)
    x, y = np.meshgrid(xs, xs, indexing="xy")
    label[np.hypot(x, y) > 1.0] = np.nan

    fig, ax = _new_axes(spec, square=True)
    ax.grid(False)
    cmap = ListedColormap(SECTOR_COLORS)
    ax.imshow(
        label,
        origin="lower",
        extent=(-1, 1, -1, 1),
        cmap=cmap,
        vmin=-0.5,
        vmax=2.5,
        interpolation="nearest",
        alpha=0.55,
    )
    for fam in (1, 2, 3):
        for poly in _load_polylines(spec.run_dir, fam, eps):
            ax.plot(poly[:, 0], poly[:, 1], color="k", lw=1.0)
    report_path = spec.run_dir / f"report_{_tag(eps)}.json"
    if report_path.exists():
        with open(report_path) as f:
            report = json.load(f)
        center = np.array(report.get("localization", {}).get("center", [0.0, 0.0]))
        for ang in LEG_ANGLES:
            d = np.array([math.cos(ang), math.sin(ang)])
            cd = float(center @ d)
            t = -cd + math.sqrt(max(cd * cd + 1 - float(center @ center), 0.0))
            seg = np.stack([center, center + t * d])
            ax.plot(seg[:, 0], seg[:, 1], "w--", lw=1.2)
    ax.add_patch(plt.Circle((0, 0), 1.0, fill=False, color="k", lw=1.2))
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    ax.set_aspect("equal")
    ax.set_title(f"Nearest-well map and level curves, eps={eps:g}")
    return _finish(fig, spec)


def render_junction(spec: FigureSpec):
    rows = _read_summary(spec.run_dir)
    eps = _pick_epsilon(rows, spec.epsilon)
    report_path = _require(
        spec.run_dir / f"report_{_tag(eps)}.json", "triode-lab run <config>"
    )
    with open(report_path) as f:
        report = json.load(f)
    fig, ax = _new_axes(spec, square=True)
    for fam, color in zip((1, 2, 3), SECTOR_COLORS):
        for poly in _load_polylines(spec.run_dir, fam, eps):
            ax.plot(poly[:, 0], poly[:, 1], color=color, lw=1.2)
    disc_path = spec.run_dir / f"discretization_{_tag(eps)}.csv"
    if disc_path.exists():
        with open(disc_path) as f:
            pts = [
                (float(r["x"]), float(r["y"]), int(r["closer_to"]))
                for r in csv.DictReader(f)
            ]
        for x, y, cls in pts:
            ax.plot(x, y, "o", ms=5, color=SECTOR_COLORS[cls - 1], mec="k")
    tp = report.get("triple_point")
    if tp:
        ax.plot(*tp["p"], "k*", ms=12, label="P")
        ax.plot(*tp["q"], "kD", ms=6, label="Q")
        ax.plot(*tp["r"], "ks", ms=6, label="R")
        ax.legend(loc="upper right")
    ax.add_patch(plt.Circle((0, 0), 1.0, fill=False, color="k", lw=1.0))
    ax.set_aspect("equal")
    ax.set_title(f"Outer a1-curve discretization, eps={eps:g}")
    return _finish(fig, spec)


RENDERERS = {
    "bracket": render_bracket,
    "scalings": render_scalings,
    "field-map": render_field_map,
    "junction": render_junction,
}


def render(spec: FigureSpec) -> Path:
    return RENDERERS[spec.kind](spec)
