"""Hasse diagrams of finite frames rendered to image files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .dot import PALETTE, cover_edges  # noqa: E402
from .modal import KripkeFrame  # noqa: E402


def levels(frame: KripkeFrame) -> dict:
    """Height of each world: length of the longest strict chain below it."""
    acc = frame.access
    strict = {w: [v for v in frame.worlds if (v, w) in acc and (w, v) not in acc]
              for w in frame.worlds}
    height = {}

    def visit(w):
        if w not in height:
            height[w] = 1 + max((visit(v) for v in strict[w]), default=-1)
        return height[w]

    for w in frame.worlds:
        visit(w)
    return height


def plot_frame(frame: KripkeFrame, path, colors: dict | None = None, title: str | None = None):
    height = levels(frame)
    rows = {}
    for w in frame.worlds:
        rows.setdefault(height[w], []).append(w)
    pos = {}
    for h, ws in rows.items():
        for i, w in enumerate(ws):
            pos[w] = (i - (len(ws) - 1) / 2, h)

    width = max(len(ws) for ws in rows.values())
    fig, ax = plt.subplots(figsize=(max(4, 1.4 * width), max(3, 1.3 * len(rows))))
    for a, b in cover_edges(frame):
        (x0, y0), (x1, y1) = pos[a], pos[b]
        ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                    arrowprops=dict(arrowstyle="-|>", color="0.4", lw=1, shrinkA=14, shrinkB=14))
    for w, (x, y) in pos.items():
        face = colors.get(w, "white") if colors else "white"
        ax.text(x, y, w, ha="center", va="center", fontsize=9,
                bbox=dict(boxstyle="round,pad=0.35", fc=face, ec="0.2"))
    xs = [p[0] for p in pos.values()]
    ax.set_xlim(min(xs) - 0.8, max(xs) + 0.8)
    ax.set_ylim(-0.6, max(rows) + 0.6)
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_general(g, path, title: str | None = None):
    colors = {w: PALETTE[g.block_of[w] % len(PALETTE)] for w in g.kripke.worlds}
    return plot_frame(g.kripke, path, colors, title)
