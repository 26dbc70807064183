"""Render the solver's figure CSVs to multi-panel images.

Figure 1 is a pair of side-by-side loci panels in the (c, pi) plane; figures
2-5 are four-panel grids showing the consumption-multiplier decomposition
against the trap length. Input is read strictly from the delimited datasets,
whose '#'-prefixed provenance line is reproduced as the image caption, so a
rendered file is fully traceable to the parameter vector that produced it.

Styling is pinned (no timestamps, fixed fonts and sizes) so re-rendering the
same CSV is byte-stable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

#: fixed style: deterministic output, no interactive state
STYLE = {
    "figure.figsize": (9.0, 6.0),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "elbcap-figures",
}

LOCI_COLUMNS = {"panel", "curve", "c", "pi"}
DECOMP_COLUMNS = {"L", "m_waste", "q_deter", "q_exit", "total"}

TITLES = {
    1: "Impact effects of a government investment shock",
    2: "Multiplier decomposition: stable eigenvalues, stochastic exit",
    3: "Multiplier decomposition: one unstable eigenvalue, stochastic exit",
    4: "Multiplier decomposition: two unstable eigenvalues, deterministic exit",
    5: "Multiplier decomposition: one unstable eigenvalue, deterministic exit",
}

PANEL_ORDER = (
    ("total", "Consumption multiplier"),
    ("q_deter", "Inside the trap (perfect foresight)"),
    ("m_waste", "Public consumption component"),
    ("q_exit", "Anticipated effects upon exit"),
)


class SchemaError(ValueError):
    """Input CSV does not match the documented figure schema."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: int
    csv_path: Path
    image_path: Path


@dataclass(frozen=True)
class Dataset:
    provenance: str
    rows: list[dict]


def read_dataset(path: Path, required: set[str]) -> Dataset:
    if not path.exists():
        raise SchemaError(f"{path}: input CSV does not exist")
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith("#"):
            raise SchemaError(f"{path}: missing '#' provenance comment line")
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty CSV, no header row")
        missing = required - set(reader.fieldnames)
        if missing:
            raise SchemaError(f"{path}: missing column(s) {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    for row in rows:
        for col in required - {"panel", "curve"}:
            try:
                float(row[col])
            except (TypeError, ValueError):
                raise SchemaError(
                    f"{path}: column {col!r} has non-numeric value {row[col]!r}"
                ) from None
    return Dataset(provenance=first.lstrip("# ").strip(), rows=rows)


def _caption(fig, provenance: str) -> None:
    fig.text(0.5, 0.005, provenance, ha="center", va="bottom",
             fontsize=6, color="0.35", wrap=True)


def _render_loci(spec: FigureSpec) -> None:
    data = read_dataset(spec.csv_path, LOCI_COLUMNS)
    panels = []
    for row in data.rows:
        if row["panel"] not in panels:
            panels.append(row["panel"])
    fig, axes = plt.subplots(1, len(panels), figsize=STYLE["figure.figsize"])
    if len(panels) == 1:
        axes = [axes]
    curve_style = {
        "as_base": dict(color="tab:red", ls="--", label="price-setting, no shock"),
        "as_shift": dict(color="tab:red", ls="-", label="price-setting, shock"),
        "ad_base": dict(color="tab:blue", ls="--", label="demand, no shock"),
        "ad_shift": dict(color="tab:blue", ls="-", label="demand, shock"),
    }
    for ax, panel in zip(axes, panels):
        rows = [r for r in data.rows if r["panel"] == panel]
        for curve, style in curve_style.items():
            pts = [(float(r["c"]), float(r["pi"])) for r in rows if r["curve"] == curve]
            if pts:
                ax.plot([p[0] for p in pts], [p[1] for p in pts], **style)
        for curve, marker, label in (("eq_base", "o", "no shock"),
                                     ("eq_shift", "s", "with shock")):
            pts = [(float(r["c"]), float(r["pi"])) for r in rows if r["curve"] == curve]
            if pts:
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker,
                        color="black", ms=5, label=f"equilibrium, {label}")
        ax.set_title(panel.replace("_", " "))
        ax.set_xlabel("consumption deviation")
        ax.set_ylabel("inflation deviation")
    axes[0].legend(loc="best")
    fig.suptitle(TITLES[spec.figure_id])
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    _caption(fig, data.provenance)
    fig.savefig(spec.image_path, metadata={"Software": "render-figures"})
    plt.close(fig)


def _render_decomposition(spec: FigureSpec) -> None:
    data = read_dataset(spec.csv_path, DECOMP_COLUMNS)
    L = [float(r["L"]) for r in data.rows]
    fig, axes = plt.subplots(2, 2, figsize=STYLE["figure.figsize"], sharex=True)
    for ax, (column, title) in zip(axes.ravel(), PANEL_ORDER):
        ax.plot(L, [float(r[column]) for r in data.rows], color="tab:blue")
        ax.axhline(0.0, color="0.4", lw=0.8)
        ax.set_title(title)
    for ax in axes[1]:
        ax.set_xlabel("expected trap length L (quarters)")
    fig.suptitle(TITLES[spec.figure_id])
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    _caption(fig, data.provenance)
    fig.savefig(spec.image_path, metadata={"Software": "render-figures"})
    plt.close(fig)


def render(spec: FigureSpec) -> Path:
    """Render one figure CSV to its image file; returns the image path."""
    if spec.figure_id not in TITLES:
        raise SchemaError(f"figure id {spec.figure_id} not in 1..5")
    with plt.rc_context(STYLE):
        if spec.figure_id == 1:
            _render_loci(spec)
        else:
            _render_decomposition(spec)
    return spec.image_path
