"""Labelings of a finite frame by CTL sentences, and countermodel transfer.

A labeling assigns a sentence to each node of a finite rooted frame so
that, from the anchor world of a general frame, every reachable world
satisfies exactly one sentence and the sentences reachable from there
mirror the nodes reachable in the finite frame. A countermodel on the
finite frame then carries over to the general frame.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from itertools import product
from typing import Mapping, Sequence

from . import ctl
from .control import truth_set
from .errors import FormatError, InvariantError, MlarError
from .general_frame import GeneralFrame, eval_worlds
from .modal import (KripkeFrame, ModalFormula, eval_modal, fpf_points, fpf_world, frame_from_dict,
                    gen_fpf, gen_lollipop, gen_preboolean, lollipop_world, order_iso, parse_modal,
                    preboolean_world, show_modal, STAR)


@dataclass(frozen=True, eq=False)
class Labeling:
    frame: KripkeFrame
    root: str
    phi: Mapping[str, ctl.Formula]
    target: GeneralFrame | None = None
    anchor: str | None = None

    def on(self, target: GeneralFrame, anchor: str) -> "Labeling":
        return replace(self, target=target, anchor=anchor)


@dataclass(frozen=True)
class FiniteCountermodel:
    frame: KripkeFrame
    valuation: Mapping[str, tuple]
    root: str
    formula: ModalFormula


@dataclass(frozen=True)
class LabelingVerdict:
    ok: bool
    condition: int | None = None
    detail: tuple = ()

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "valid labeling"
        return f"condition {self.condition} fails: {self.detail}"


def _extensions(l: Labeling) -> dict:
    return {v: truth_set(l.target, l.phi[v]) for v in l.frame.worlds}


def verify_labeling(l: Labeling) -> LabelingVerdict:
    if l.target is None or l.anchor is None:
        raise MlarError("labeling has no target frame or anchor")
    if set(l.phi) != set(l.frame.worlds):
        raise MlarError("labeling must give one sentence per frame node")
    ext = _extensions(l)
    g = l.target.kripke
    for d in g.successors(l.anchor):
        hits = [v for v in l.frame.worlds if d in ext[v]]
        if len(hits) != 1:
            return LabelingVerdict(False, 1, (d, tuple(hits)))
        w = hits[0]
        ups = g.successors(d)
        for v in l.frame.worlds:
            reach = any(e in ext[v] for e in ups)
            if reach != l.frame.sees(w, v):
                return LabelingVerdict(False, 2, (d, w, v))
    if l.anchor not in ext[l.root]:
        return LabelingVerdict(False, 3, (l.anchor, l.root))
    return LabelingVerdict(True)


def labeling_quotient(l: Labeling):
    """Frame of sentence classes above the anchor, and the source frame cut to
    nodes whose sentence holds somewhere above the anchor."""
    ext = _extensions(l)
    g = l.target.kripke
    above = set(g.successors(l.anchor))
    used = [v for v in l.frame.worlds if ext[v] & above]
    acc = [(a, b) for a in used for b in used
           if any(g.sees(x, y) for x in ext[a] & above for y in ext[b] & above)]
    quotient = KripkeFrame.build(used, acc)
    source = KripkeFrame.build(used, [(a, b) for a, b in l.frame.access if a in used and b in used])
    return quotient, source


def quotient_matches(l: Labeling) -> bool:
    q, s = labeling_quotient(l)
    return order_iso(q, s) is not None


@dataclass(frozen=True)
class Transfer:
    worlds: dict       # proposition -> world ids of the target frame
    formulas: dict     # proposition -> CTL sentence defining that set


def transfer_countermodel(l: Labeling, cm: FiniteCountermodel) -> Transfer:
    """Carry a finite countermodel to the target frame.

    Each proposition becomes the disjunction of the sentences of the nodes
    where it held. The result is checked to falsify the formula at the anchor.
    """
    verdict = verify_labeling(l)
    if not verdict:
        raise MlarError(f"labeling is not valid: {verdict}")
    if cm.root != l.root:
        raise MlarError(f"countermodel root {cm.root} is not the labeling root {l.root}")
    if set(cm.frame.worlds) != set(l.frame.worlds) or cm.frame.access != l.frame.access:
        raise MlarError("countermodel lives on a different frame")
    if eval_modal(cm.frame, cm.valuation, cm.root, cm.formula):
        raise MlarError("the countermodel does not falsify its formula")
    formulas, worlds = {}, {}
    for p, nodes in cm.valuation.items():
        order = [v for v in l.frame.worlds if v in set(nodes)]
        formulas[p] = ctl.disj(l.phi[v] for v in order)
        worlds[p] = sorted(truth_set(l.target, formulas[p]), key=l.target.kripke.index.__getitem__)
    if eval_worlds(l.target, worlds, l.anchor, cm.formula):
        raise InvariantError("transferred valuation does not falsify the formula at the anchor")
    return Transfer(worlds, formulas)


# -- constructors --------------------------------------------------------------

def _literal(f, positive):
    return f if positive else ctl.Not(f)


def build_preboolean_labeling(buttons: Sequence[ctl.Formula],
                              switches: Sequence[ctl.Formula]) -> Labeling:
    """Node ``(I, J)`` gets the exact truth pattern I of the buttons and J of the
    switches. The cluster index of a node encodes J as a bitmask."""
    n, m = len(buttons), len(switches)
    frame = gen_preboolean(n, 1 << m)
    phi = {}
    for I, J in product(range(1 << n), range(1 << m)):
        parts = [_literal(b, I >> i & 1) for i, b in enumerate(buttons)]
        parts += [_literal(s, J >> j & 1) for j, s in enumerate(switches)]
        phi[preboolean_world(I, J, n)] = ctl.conj(parts)
    return Labeling(frame, preboolean_world(0, 0, n), phi)


def build_lollipop_labeling(buttons: Sequence[ctl.Formula], B: ctl.Formula,
                            rswitches: Sequence[ctl.Formula]) -> Labeling:
    """Like the pre-Boolean labeling with every sentence conjoined with !B, plus
    the extra top node labelled B. Switches are assumed off at the anchor."""
    n, m = len(buttons), len(rswitches)
    frame = gen_lollipop(n, m)
    phi = {STAR: B}
    for I, J in product(range(1 << n), range(1 << m)):
        parts = [_literal(b, I >> i & 1) for i, b in enumerate(buttons)]
        parts += [_literal(s, J >> j & 1) for j, s in enumerate(rswitches)]
        phi[lollipop_world(I, J, n, m)] = ctl.conj(parts + [ctl.Not(B)])
    return Labeling(frame, lollipop_world(0, 0, n, m), phi)


def build_fpf_labeling(decisions: Sequence[tuple]) -> Labeling:
    """Partial function f gets l_i where f(i)=0, r_i where f(i)=1, and
    !l_i & !r_i where f is undefined."""
    n = len(decisions)
    frame = gen_fpf(n)
    phi = {}
    for f in fpf_points(n):
        parts = []
        for (lam, delta), v in zip(decisions, f):
            if v == 0:
                parts.append(lam)
            elif v == 1:
                parts.append(delta)
            else:
                parts += [ctl.Not(lam), ctl.Not(delta)]
        phi[fpf_world(f)] = ctl.conj(parts)
    return Labeling(frame, fpf_world((None,) * n), phi)


# -- files ---------------------------------------------------------------------

def labeling_to_dict(l: Labeling) -> dict:
    return {"frame": l.frame.to_dict(), "root": l.root,
            "phi": {v: ctl.to_str(l.phi[v]) for v in l.frame.worlds}}


def labeling_from_dict(data: Mapping) -> Labeling:
    if set(data) != {"frame", "root", "phi"}:
        raise FormatError("labeling needs exactly the keys 'frame', 'root', 'phi'")
    frame = frame_from_dict(data["frame"])
    if data["root"] not in frame.index:
        raise FormatError(f"root {data['root']!r} is not a frame node")
    phi = {v: ctl.parse_ctl(s) for v, s in data["phi"].items()}
    return Labeling(frame, data["root"], phi)


def countermodel_to_dict(cm: FiniteCountermodel) -> dict:
    return {"frame": cm.frame.to_dict(), "valuation": {p: list(v) for p, v in cm.valuation.items()},
            "root": cm.root, "formula": show_modal(cm.formula)}


def countermodel_from_dict(data: Mapping) -> FiniteCountermodel:
    if set(data) != {"frame", "valuation", "root", "formula"}:
        raise FormatError("countermodel needs the keys 'frame', 'valuation', 'root', 'formula'")
    frame = frame_from_dict(data["frame"])
    val = {p: tuple(v) for p, v in data["valuation"].items()}
    for p, v in val.items():
        bad = [x for x in v if x not in frame.index]
        if bad:
            raise FormatError(f"valuation of {p!r} names unknown nodes {bad}")
    return FiniteCountermodel(frame, val, data["root"], parse_modal(data["formula"]))


def load_json(path):
    with open(path) as fh:
        return json.load(fh)
