"""Canonical forms for small coloured digraphs, used for isomorphism tests.

Colours are refined by in/out neighbour colour multisets; remaining ties
are broken by individualising each member of the first non-singleton
cell in turn and keeping the lexicographically least certificate.
"""
from __future__ import annotations

from dataclasses import dataclass

from .ts import TransitionSystem


@dataclass(frozen=True)
class CanonicalForm:
    certificate: tuple
    order: tuple      # node identifiers in canonical position order

    def __eq__(self, other):
        return isinstance(other, CanonicalForm) and self.certificate == other.certificate

    def __hash__(self):
        return hash(self.certificate)


def _refine(nodes, colour, succ, pred):
    while True:
        sig = {v: (colour[v], tuple(sorted(colour[w] for w in succ[v])),
                   tuple(sorted(colour[w] for w in pred[v]))) for v in nodes}
        keys = sorted(set(sig.values()))
        rank = {k: i for i, k in enumerate(keys)}
        new = {v: rank[sig[v]] for v in nodes}
        if len(keys) == len(set(colour.values())):
            return new
        colour = new


def canonical_graph(nodes, edges, node_key) -> CanonicalForm:
    nodes = list(nodes)
    succ = {v: [] for v in nodes}
    pred = {v: [] for v in nodes}
    for a, b in edges:
        succ[a].append(b)
        pred[b].append(a)
    keys = sorted({node_key(v) for v in nodes})
    rank = {k: i for i, k in enumerate(keys)}
    start = _refine(nodes, {v: rank[node_key(v)] for v in nodes}, succ, pred)
    edge_list = list(edges)
    best = [None, None]

    def certify(colour):
        order = sorted(nodes, key=colour.__getitem__)
        pos = {v: i for i, v in enumerate(order)}
        cert = (tuple(node_key(v) for v in order),
                tuple(sorted((pos[a], pos[b]) for a, b in edge_list)))
        if best[0] is None or cert < best[0]:
            best[0], best[1] = cert, tuple(order)

    def search(colour):
        cells: dict = {}
        for v in nodes:
            cells.setdefault(colour[v], []).append(v)
        target = next((c for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            certify(colour)
            return
        for v in cells[target]:
            split = {w: 2 * colour[w] + (0 if w == v else 1) for w in nodes}
            search(_refine(nodes, split, succ, pred))

    search(start)
    return CanonicalForm(best[0], best[1])


def canonical_form(ts: TransitionSystem) -> CanonicalForm:
    return canonical_graph(ts.states, ts.transitions,
                           lambda s: (tuple(sorted(ts.labels[s])), s in ts.initial))


def iso_check(a: TransitionSystem, b: TransitionSystem) -> dict | None:
    """A label-, edge- and initial-preserving bijection from a to b, or None."""
    if len(a.states) != len(b.states) or len(a.transitions) != len(b.transitions):
        return None
    ca, cb = canonical_form(a), canonical_form(b)
    if ca != cb:
        return None
    return dict(zip(ca.order, cb.order))
