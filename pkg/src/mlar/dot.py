"""Graphviz DOT text for systems, frames and general frames."""
from __future__ import annotations

from .general_frame import GeneralFrame
from .modal import KripkeFrame
from .ts import TransitionSystem

PALETTE = ("#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f", "#cab2d6",
           "#ffff99", "#1f78b4", "#33a02c", "#e31a1c", "#ff7f00")


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def ts_to_dot(ts: TransitionSystem, name: str = "ts") -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;"]
    for i, s in enumerate(ts.sorted_initial()):
        lines.append(f"  __init{i} [shape=point, style=invis];")
        lines.append(f"  __init{i} -> {_q(s)};")
    for s in ts.states:
        props = ",".join(sorted(ts.labels[s]))
        lines.append(f"  {_q(s)} [label={_q(s + chr(10) + '{' + props + '}')}];")
    for a, b in ts.sorted_transitions():
        lines.append(f"  {_q(a)} -> {_q(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cover_edges(frame: KripkeFrame) -> list:
    """Access pairs left after dropping loops and pairs implied through a third
    world outside both endpoints' clusters."""
    acc = frame.access

    def same_cluster(a, b):
        return (a, b) in acc and (b, a) in acc

    out = []
    for a, b in frame.sorted_access():
        if a == b:
            continue
        implied = any(c not in (a, b) and not same_cluster(c, a) and not same_cluster(c, b)
                      and (a, c) in acc and (c, b) in acc for c in frame.worlds)
        if not implied:
            out.append((a, b))
    return out


def frame_to_dot(frame: KripkeFrame, name: str = "frame", fill: dict | None = None) -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=BT;"]
    for w in frame.worlds:
        style = f", style=filled, fillcolor={_q(fill[w])}" if fill else ""
        lines.append(f"  {_q(w)} [shape=box{style}];")
    for a, b in cover_edges(frame):
        lines.append(f"  {_q(a)} -> {_q(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def block_colors(g: GeneralFrame) -> dict:
    return {w: PALETTE[g.block_of[w] % len(PALETTE)] for w in g.kripke.worlds}


def general_to_dot(g: GeneralFrame, name: str = "lattice") -> str:
    return frame_to_dot(g.kripke, name, block_colors(g))
