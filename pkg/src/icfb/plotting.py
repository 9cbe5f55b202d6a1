"""Figure rendering for the CLI report path.

Every figure is written next to its delimited/structured output file.  PNG
metadata is stripped so repeated runs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .regions import RateRegion

_SAVE_KW = dict(dpi=120, metadata={"Software": None, "Date": None})


def render_regions(
    regions: Sequence[tuple[str, RateRegion]],
    path: str | Path,
    title: str | None = None,
) -> None:
    """Overlay one or more rate-region polygons on the (R1, R2) plane."""
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    for i, (label, region) in enumerate(regions):
        verts = list(region.vertices())
        if not verts:
            continue
        xs = [v[0] for v in verts] + [verts[0][0]]
        ys = [v[1] for v in verts] + [verts[0][1]]
        color = f"C{i}"
        ax.fill(xs, ys, alpha=0.25, color=color)
        ax.plot(xs, ys, marker="o", markersize=3, color=color, label=label)
    ax.set_xlabel("R1 [bits/use]")
    ax.set_ylabel("R2 [bits/use]")
    if title:
        ax.set_title(title)
    if regions:
        ax.legend(loc="upper right", fontsize=8)
    ax.grid(True, alpha=0.3)
    ax.set_xlim(left=0)
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_sweep(rows: Iterable[dict], path: str | Path, title: str | None = None) -> None:
    """Sum-rate surface over the (p1, p2) sweep grid."""
    rows = list(rows)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    p1s = sorted({r["p1"] for r in rows})
    for p1 in p1s:
        pts = sorted((r["p2"], r["sumrate"]) for r in rows if r["p1"] == p1)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", markersize=3,
                label=f"p1={p1:g}")
    ax.set_xlabel("p2")
    ax.set_ylabel("sum-rate [bits/use]")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
