"""Property-based checks on random small systems."""
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from mlar import ctl
from mlar.bisim import bisim_classes
from mlar.ts import (AbstractionWitness, Partition, TransitionSystem, find_abstraction, is_abstraction,
                     path_isolating_refinement, quotient)

from strategies import actl, formulas, systems


@st.composite
def partitioned(draw):
    ts = draw(systems())
    groups = {}
    for s in ts.states:
        groups.setdefault(ts.labels[s], []).append(s)
    blocks = []
    for members in groups.values():
        tags = draw(st.lists(st.integers(0, 2), min_size=len(members), max_size=len(members)))
        by_tag = {}
        for s, t in zip(members, tags):
            by_tag.setdefault(t, []).append(s)
        blocks += by_tag.values()
    return ts, Partition.of(ts, blocks)


@st.composite
def split_refinement(draw, ts):
    """A random refinement that splits one state into two copies."""
    x = draw(st.sampled_from(ts.states))
    copies = {s: [s] for s in ts.states}
    copies[x] = [x, x + "'"]
    states = [c for s in ts.states for c in copies[s]]
    edges = set()
    for a, b in ts.transitions:
        for ca in copies[a]:
            edges.add((ca, draw(st.sampled_from(copies[b]))))
    initial = set()
    for s in ts.initial:
        initial |= set(draw(st.lists(st.sampled_from(copies[s]), min_size=1, unique=True)))
    labels = {c: ts.labels[s] for s in ts.states for c in copies[s]}
    fine = TransitionSystem.build(states, edges, initial, labels, ts.ap)
    mapping = {c: s for s in ts.states for c in copies[s]}
    return AbstractionWitness(fine, ts, mapping)


def _label_traces(ts, length):
    out = set()

    def go(s, trace):
        trace = trace + (ts.labels[s],)
        if len(trace) == length:
            out.add(trace)
            return
        for t in ts.succ[s]:
            go(t, trace)

    for s in ts.initial:
        go(s, ())
    return out


@settings(max_examples=100)
@given(partitioned())
def test_quotient_is_abstraction_and_found_by_search(data):
    ts, p = data
    q, w = quotient(ts, p)
    assert is_abstraction(w)
    assert find_abstraction(q, ts).found


@settings(max_examples=100)
@given(partitioned())
def test_trace_containment(data):
    ts, p = data
    q, _ = quotient(ts, p)
    for k in (1, 2, 3, 4):
        assert _label_traces(ts, k) <= _label_traces(q, k)


@settings(max_examples=100)
@given(partitioned())
def test_composition(data):
    ts, p = data
    q, inner = quotient(ts, p)
    groups = {}
    for s in q.states:
        groups.setdefault(q.labels[s], []).append(s)
    merged = Partition.of(q, list(groups.values()))
    _, outer = quotient(q, merged)
    assert is_abstraction(inner.compose(outer))


@settings(max_examples=100)
@given(partitioned(), actl())
def test_actl_preserved_downwards(data, f):
    ts, p = data
    q, _ = quotient(ts, p)
    if ctl.holds(q, f):
        assert ctl.holds(ts, f)


@settings(max_examples=100)
@given(systems(), formulas(depth=3))
def test_bisimilar_states_agree(ts, f):
    bp = bisim_classes([ts])
    got = ctl.check_ctl(ts, f).states
    for x in ts.states:
        for y in ts.states:
            if bp.same((0, x), (0, y)):
                assert (x in got) == (y in got)


@settings(max_examples=100)
@given(systems())
def test_distinguishing_formula_separates(ts):
    bp = bisim_classes([ts])
    for x in ts.states:
        for y in ts.states:
            if not bp.same((0, x), (0, y)):
                f = ctl.distinguishing_formula(bp, (0, x), (0, y))
                got = ctl.check_ctl(ts, f).states
                assert x in got and y not in got


def _first_lasso(ts, start):
    path = [start]
    while True:
        nxt = min(ts.succ[path[-1]])
        if nxt in path:
            return path, path.index(nxt)
        path.append(nxt)


@settings(max_examples=50)
@given(systems(), st.data())
def test_path_isolation_truths_survive_splitting(ts, data):
    lassos = {s: _first_lasso(ts, s) for s in ts.initial}
    r, w = path_isolating_refinement(ts, lassos)
    assert is_abstraction(w)
    fs = data.draw(st.lists(formulas(depth=4), min_size=1, max_size=20))
    true_here = [f for f in fs if ctl.holds(r, f)]
    assume(true_here)
    for _ in range(10):
        split = data.draw(split_refinement(r))
        assert is_abstraction(split)
        for f in true_here:
            assert ctl.holds(split.fine, f)
