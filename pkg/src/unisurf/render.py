"""Schematic figures: grid layouts, diagrams as labelled boxes, stage audits.

These are debugging pictures only.  Output is byte-stable across runs
(fixed SVG hash salt, no timestamps).
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402
from matplotlib.ticker import LogLocator, ScalarFormatter  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "unisurf"
matplotlib.rcParams["svg.fonttype"] = "none"  # keep labels as text

# cells with more slots than this are drawn without text
_TEXT_LIMIT = 400
_COLORS = {"annulus": "#8fb8de", "disk": "#f2c57c", "fake": "#e6e6e6"}


def _short(x, n=28) -> str:
    t = str(x)
    return t if len(t) <= n else t[: n - 3] + "..."


def save(fig, path) -> None:
    path = str(path)
    meta = {"Date": None} if path.endswith(".svg") else {"Software": None}
    if path.endswith(".pdf"):
        meta = {"CreationDate": None, "Producer": None}
    fig.savefig(path, metadata=meta)
    plt.close(fig)


def grid_figure(grid):
    """One square per cell, split into its slots; fakes are grey."""
    n1, n2 = grid.n1, grid.n2
    nslots = len(grid.cells[0]) if grid.cells else 1
    text = n1 * n2 * nslots <= _TEXT_LIMIT
    scale = 2.2 if text else max(0.15, 8 / max(n1, n2))
    fig, ax = plt.subplots(figsize=(max(3, n2 * scale), max(3, n1 * scale)))
    for k, cell in enumerate(grid.cells):
        r, c = divmod(k, n2)
        y0 = n1 - 1 - r
        ax.add_patch(Rectangle((c, y0), 1, 1, fill=False, lw=1.2))
        for s, (name, slot) in enumerate(cell):
            h = 1 / nslots
            y = y0 + 1 - (s + 1) * h
            col = _COLORS["fake"] if slot.fake else _COLORS.get(slot.kind, "white")
            ax.add_patch(Rectangle((c + 0.04, y + 0.02 * h), 0.92, 0.96 * h, color=col, lw=0))
            if text:
                what = "fake" if slot.fake else slot.source
                ax.text(c + 0.07, y + h / 2, f"{name} {what}  {_short(slot.label)}", va="center", fontsize=6, family="monospace")
    ax.set_xlim(0, n2)
    ax.set_ylim(0, n1)
    ax.set_aspect("equal")
    ax.set_xticks([i + 0.5 for i in range(n2)], [str(i) for i in range(n2)] if n2 <= 60 else [])
    ax.set_yticks([n1 - 0.5 - i for i in range(n1)], [str(i) for i in range(n1)] if n1 <= 60 else [])
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    ax.set_title(f"grid {n1} x {n2}, degree {grid.degree}")
    fig.tight_layout()
    return fig


def diagram_figure(diag):
    """Pieces as boxes on a square layout, bands as arrows between them."""
    n = max(1, len(diag.pieces))
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    text = n <= _TEXT_LIMIT
    fig, ax = plt.subplots(figsize=(max(3, 2.4 * cols), max(2.5, 1.3 * rows)))
    where = {}
    for k, p in enumerate(diag.pieces):
        r, c = divmod(k, cols)
        x, y = c * 2.4, (rows - 1 - r) * 1.3
        where[p.id] = (x + 1, y + 0.5)
        col = _COLORS["fake"] if p.fake else _COLORS.get(p.kind, "white")
        ax.add_patch(Rectangle((x + 0.1, y + 0.1), 1.8, 0.8, color=col))
        if text:
            ax.text(x + 1, y + 0.5, f"{p.id}\n{_short(p.label, 22)}", ha="center", va="center", fontsize=6, family="monospace")
    for b in diag.bands:
        x0, y0 = where[b.start]
        x1, y1 = where[b.end] if b.end else (x0 + 0.6, y0 + 0.55)
        rad = 0.0 if b.end != b.start else 0.8
        ax.annotate(
            "", (x1, y1 + (0.4 if b.end == b.start else 0)), (x0, y0 + (0.4 if b.end == b.start else 0)),
            arrowprops=dict(arrowstyle="->", lw=0.8, connectionstyle=f"arc3,rad={rad}"),
        )
        if text:
            ax.text((x0 + x1) / 2, (y0 + y1) / 2 + 0.45, f"{b.id} [{len(b.events)}]", fontsize=6, ha="center")
    ax.set_xlim(0, cols * 2.4)
    ax.set_ylim(0, rows * 1.3 + 0.4)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(f"degree {diag.degree}, {len(diag.pieces)} pieces, {len(diag.bands)} bands")
    fig.tight_layout()
    return fig


def audit_figure(rows):
    """Covering Euler characteristic and degree per stage."""
    names = [a.stage for a in rows]
    xs = range(len(rows))
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 5.5), sharex=True)
    top.plot(xs, [a.chi for a in rows], "o-", label="computed")
    top.plot(xs, [a.expected for a in rows], "k--", lw=0.8, label="expected")
    for x, a in zip(xs, rows):
        if not a.ok:
            top.plot([x], [a.chi], "rx", ms=10)
    top.set_ylabel("chi of cover")
    top.legend(fontsize=7)
    bottom.plot(xs, [a.degree for a in rows], "s-", color="tab:orange")
    bottom.set_yscale("log", base=2)
    bottom.yaxis.set_major_locator(LogLocator(base=2))
    bottom.yaxis.set_major_formatter(ScalarFormatter())
    bottom.yaxis.set_minor_locator(plt.NullLocator())
    bottom.set_ylabel("degree")
    bottom.set_xticks(list(xs), names, rotation=35, ha="right", fontsize=7)
    fig.tight_layout()
    return fig
