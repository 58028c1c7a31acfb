"""Finite labelled transition systems and abstraction functions between them.

A system refines another (``coarse ⤳ fine``) when a surjective map from the
fine states onto the coarse ones preserves labels and sends the fine
transition relation and initial set *exactly* onto the coarse ones.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import FormatError, MlarError

_TS_KEYS = ("states", "initial", "ap", "labels", "transitions")


@dataclass(frozen=True, eq=False)
class TransitionSystem:
    states: tuple
    transitions: frozenset
    initial: frozenset
    ap: tuple
    labels: Mapping[str, frozenset]

    @classmethod
    def build(cls, states: Iterable[str], transitions: Iterable[tuple],
              initial: Iterable[str], labels: Mapping[str, Iterable[str]],
              ap: Iterable[str] | None = None) -> "TransitionSystem":
        states = tuple(states)
        if len(set(states)) != len(states):
            raise FormatError("duplicate state identifiers")
        known = set(states)
        trans = frozenset((a, b) for a, b in transitions)
        for a, b in trans:
            if a not in known or b not in known:
                raise FormatError(f"transition {a!r}->{b!r} mentions an unknown state")
        init = frozenset(initial)
        if not init <= known:
            raise FormatError(f"unknown initial states {sorted(init - known)}")
        lab = {s: frozenset(labels.get(s, ())) for s in states}
        extra = set(labels) - known
        if extra:
            raise FormatError(f"labels for unknown states {sorted(extra)}")
        used = set().union(*lab.values()) if lab else set()
        ap = tuple(sorted(set(ap) if ap is not None else used))
        if not used <= set(ap):
            raise FormatError(f"labels use propositions outside ap: {sorted(used - set(ap))}")
        return cls(states, trans, init, ap, lab)

    @cached_property
    def succ(self) -> dict:
        out = {s: [] for s in self.states}
        order = {s: i for i, s in enumerate(self.states)}
        for a, b in self.transitions:
            out[a].append(b)
        for s in out:
            out[s].sort(key=order.__getitem__)
        return out

    @cached_property
    def pred(self) -> dict:
        out = {s: [] for s in self.states}
        order = {s: i for i, s in enumerate(self.states)}
        for a, b in self.transitions:
            out[b].append(a)
        for s in out:
            out[s].sort(key=order.__getitem__)
        return out

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    def sorted_transitions(self) -> list:
        idx = self.index
        return sorted(self.transitions, key=lambda t: (idx[t[0]], idx[t[1]]))

    def sorted_initial(self) -> list:
        return [s for s in self.states if s in self.initial]

    def reachable(self) -> list:
        seen = set(self.initial)
        queue = deque(self.sorted_initial())
        while queue:
            s = queue.popleft()
            for t in self.succ[s]:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return [s for s in self.states if s in seen]

    def with_ap(self, ap: Iterable[str]) -> "TransitionSystem":
        return TransitionSystem.build(self.states, self.transitions, self.initial,
                                      self.labels, set(self.ap) | set(ap))

    def rename(self, mapping: Mapping[str, str]) -> "TransitionSystem":
        return TransitionSystem.build(
            [mapping[s] for s in self.states],
            [(mapping[a], mapping[b]) for a, b in self.transitions],
            [mapping[s] for s in self.initial],
            {mapping[s]: l for s, l in self.labels.items()}, self.ap)

    def to_dict(self) -> dict:
        return {
            "states": list(self.states),
            "initial": self.sorted_initial(),
            "ap": list(self.ap),
            "labels": {s: sorted(self.labels[s]) for s in self.states},
            "transitions": [list(t) for t in self.sorted_transitions()],
        }

    def __repr__(self):
        return (f"TransitionSystem({len(self.states)} states, "
                f"{len(self.transitions)} transitions, ap={list(self.ap)})")


def validate(ts: TransitionSystem) -> list[str]:
    """Return a list of diagnostics; empty means the system is usable."""
    problems = []
    if not ts.states:
        problems.append("no states")
    if not ts.initial:
        problems.append("empty initial set")
    for s in ts.states:
        if not ts.succ[s]:
            problems.append(f"terminal state {s}")
    return problems


def ts_from_dict(data: Mapping) -> TransitionSystem:
    if not isinstance(data, Mapping):
        raise FormatError("transition system must be a JSON object")
    unknown = set(data) - set(_TS_KEYS)
    if unknown:
        raise FormatError(f"unknown keys {sorted(unknown)}")
    missing = [k for k in ("states", "initial", "transitions") if k not in data]
    if missing:
        raise FormatError(f"missing keys {missing}")
    for t in data["transitions"]:
        if not (isinstance(t, (list, tuple)) and len(t) == 2):
            raise FormatError(f"malformed transition {t!r}")
    return TransitionSystem.build(data["states"], [tuple(t) for t in data["transitions"]],
                                  data["initial"], data.get("labels", {}), data.get("ap"))


def load_ts(path) -> TransitionSystem:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from None
    return ts_from_dict(data)


def dump_ts(ts: TransitionSystem, path=None) -> str:
    text = json.dumps(ts.to_dict(), indent=2) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# -- partitions and quotients ------------------------------------------------

@dataclass(frozen=True)
class Partition:
    subject: TransitionSystem = field(repr=False)
    blocks: tuple

    @classmethod
    def of(cls, ts: TransitionSystem, blocks: Iterable[Iterable[str]]) -> "Partition":
        blocks = [frozenset(b) for b in blocks]
        seen = set()
        for b in blocks:
            if not b:
                raise FormatError("empty block")
            if b & seen:
                raise FormatError(f"state {sorted(b & seen)[0]} appears in two blocks")
            seen |= b
        if seen != set(ts.states):
            missing = [s for s in ts.states if s not in seen]
            if missing:
                raise FormatError(f"states not covered: {missing}")
            raise FormatError(f"unknown states {sorted(seen - set(ts.states))}")
        idx = ts.index
        blocks.sort(key=lambda b: min(idx[s] for s in b))
        return cls(ts, tuple(blocks))

    @classmethod
    def discrete(cls, ts):
        return cls.of(ts, [[s] for s in ts.states])

    def block_of(self) -> dict:
        return {s: i for i, b in enumerate(self.blocks) for s in b}

    def refines(self, other: "Partition") -> bool:
        """True when every block of self lies inside a block of other."""
        where = other.block_of()
        return all(len({where[s] for s in b}) == 1 for b in self.blocks)

    def members(self, i) -> list:
        idx = self.subject.index
        return sorted(self.blocks[i], key=idx.__getitem__)

    def describe(self) -> str:
        return "|".join(",".join(self.members(i)) for i in range(len(self.blocks)))


@dataclass(frozen=True, eq=False)
class AbstractionWitness:
    fine: TransitionSystem
    coarse: TransitionSystem
    mapping: Mapping[str, str]

    def compose(self, outer: "AbstractionWitness") -> "AbstractionWitness":
        """Witness for ``outer.coarse ⤳ self.fine`` given self.coarse is outer.fine."""
        return AbstractionWitness(self.fine, outer.coarse,
                                  {s: outer.mapping[t] for s, t in self.mapping.items()})


def block_name(members: Sequence[str]) -> str:
    return members[0] if len(members) == 1 else "+".join(members)


def quotient(ts: TransitionSystem, p: Partition):
    if p.subject is not ts and p.subject.states != ts.states:
        raise MlarError("partition belongs to a different system")
    names = []
    for i, block in enumerate(p.blocks):
        members = p.members(i)
        labs = {ts.labels[s] for s in members}
        if len(labs) != 1:
            raise MlarError(f"block {{{', '.join(members)}}} is not label-uniform")
        names.append(block_name(members))
    where = p.block_of()
    mapping = {s: names[where[s]] for s in ts.states}
    q = TransitionSystem.build(
        names,
        {(mapping[a], mapping[b]) for a, b in ts.transitions},
        {mapping[s] for s in ts.initial},
        {names[i]: ts.labels[p.members(i)[0]] for i in range(len(names))},
        ts.ap)
    return q, AbstractionWitness(ts, q, mapping)


# -- verdicts ----------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    ok: bool
    condition: str = ""
    detail: tuple = ()

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "true"
        extra = f" {self.detail}" if self.detail else ""
        return f"false: {self.condition}{extra}"


def is_abstraction(w: AbstractionWitness) -> Verdict:
    fine, coarse, f = w.fine, w.coarse, w.mapping
    cset = set(coarse.states)
    for s in fine.states:
        if s not in f or f[s] not in cset:
            return Verdict(False, "map not total", (s,))
    hit = set(f.values())
    for c in coarse.states:
        if c not in hit:
            return Verdict(False, "not surjective", (c,))
    for s in fine.states:
        if fine.labels[s] != coarse.labels[f[s]]:
            return Verdict(False, "labels differ", (s, f[s]))
    image = {(f[a], f[b]) for a, b in fine.transitions}
    for a, b in fine.sorted_transitions():
        if (f[a], f[b]) not in coarse.transitions:
            return Verdict(False, "transition image not in coarse relation", (a, b))
    for a, b in coarse.sorted_transitions():
        if (a, b) not in image:
            return Verdict(False, "coarse transition not induced", (a, b))
    init_image = {f[s] for s in fine.initial}
    for s in fine.sorted_initial():
        if f[s] not in coarse.initial:
            return Verdict(False, "initial image not initial", (s, f[s]))
    for c in coarse.sorted_initial():
        if c not in init_image:
            return Verdict(False, "coarse initial state not induced", (c,))
    return Verdict(True)


@dataclass(frozen=True)
class SearchResult:
    status: str  # "found" | "none" | "inconclusive"
    witness: AbstractionWitness | None = None
    nodes: int = 0

    @property
    def found(self):
        return self.status == "found"

    def __bool__(self):
        return self.found


def find_abstraction(coarse: TransitionSystem, fine: TransitionSystem,
                     budget: int = 10**6) -> SearchResult:
    """Search for an abstraction function from ``fine`` onto ``coarse``.

    Depth-first over fine states in breadth-first order from the initial
    states; each fine state may only go to a coarse state with the same
    label (and an initial one, if it is initial). Branches are cut when
    an assigned edge has no coarse counterpart or when too few unassigned
    states of some label remain to cover the coarse states of that label.
    """
    if len(coarse.states) > len(fine.states):
        return SearchResult("none")
    cl = {c: coarse.labels[c] for c in coarse.states}
    by_label: dict = {}
    for c in coarse.states:
        by_label.setdefault(cl[c], []).append(c)
    fine_by_label: dict = {}
    for s in fine.states:
        fine_by_label.setdefault(fine.labels[s], []).append(s)
    for lab, cs in by_label.items():
        if len(fine_by_label.get(lab, ())) < len(cs):
            return SearchResult("none")
    for lab in fine_by_label:
        if lab not in by_label:
            return SearchResult("none")

    cand = {}
    for s in fine.states:
        opts = by_label[fine.labels[s]]
        if s in fine.initial:
            opts = [c for c in opts if c in coarse.initial]
        if not opts:
            return SearchResult("none")
        cand[s] = opts

    order = []
    seen = set()
    for root in fine.sorted_initial() + list(fine.states):
        if root in seen:
            continue
        seen.add(root)
        queue = deque([root])
        while queue:
            s = queue.popleft()
            order.append(s)
            for t in fine.succ[s] + fine.pred[s]:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)

    ctrans = coarse.transitions
    mapping: dict = {}
    hits = {c: 0 for c in coarse.states}
    uncovered = {lab: len(cs) for lab, cs in by_label.items()}
    remaining = {lab: len(v) for lab, v in fine_by_label.items()}
    nodes = 0

    def consistent(s, c):
        for t in fine.succ[s]:
            if t in mapping and (c, mapping[t]) not in ctrans:
                return False
            if t == s and (c, c) not in ctrans:
                return False
        for t in fine.pred[s]:
            if t in mapping and (mapping[t], c) not in ctrans:
                return False
        return True

    def complete():
        image = {(mapping[a], mapping[b]) for a, b in fine.transitions}
        if image != ctrans:
            return False
        return {mapping[s] for s in fine.initial} == coarse.initial

    class Budget(Exception):
        pass

    def search(k):
        nonlocal nodes
        if k == len(order):
            return complete()
        s = order[k]
        lab = fine.labels[s]
        for c in cand[s]:
            nodes += 1
            if nodes > budget:
                raise Budget
            if not consistent(s, c):
                continue
            fresh = hits[c] == 0
            remaining[lab] -= 1
            if fresh:
                uncovered[lab] -= 1
            if uncovered[lab] <= remaining[lab]:
                mapping[s] = c
                hits[c] += 1
                if search(k + 1):
                    return True
                hits[c] -= 1
                del mapping[s]
            remaining[lab] += 1
            if fresh:
                uncovered[lab] += 1
        return False

    try:
        ok = search(0)
    except Budget:
        return SearchResult("inconclusive", nodes=nodes)
    if not ok:
        return SearchResult("none", nodes=nodes)
    return SearchResult("found", AbstractionWitness(fine, coarse, dict(mapping)), nodes)


def identity_witness(ts: TransitionSystem) -> AbstractionWitness:
    return AbstractionWitness(ts, ts, {s: s for s in ts.states})


# -- refinements ---------------------------------------------------------------

def common_refinement(t: TransitionSystem, w1: AbstractionWitness, w2: AbstractionWitness):
    """Product of two abstractions of ``t``: one state per distinct pair of images."""
    if w1.fine is not t or w2.fine is not t:
        if w1.fine.states != t.states or w2.fine.states != t.states:
            raise MlarError("both witnesses must start from the given system")
    f1, f2 = w1.mapping, w2.mapping
    pair_name = {}
    names = []
    for s in t.states:
        key = (f1[s], f2[s])
        if key not in pair_name:
            pair_name[key] = f"({key[0]},{key[1]})"
            names.append(key)
    to = {s: pair_name[(f1[s], f2[s])] for s in t.states}
    prod = TransitionSystem.build(
        [pair_name[k] for k in names],
        {(to[a], to[b]) for a, b in t.transitions},
        {to[s] for s in t.initial},
        {pair_name[(f1[s], f2[s])]: t.labels[s] for s in t.states},
        t.ap)
    p1 = AbstractionWitness(prod, w1.coarse, {pair_name[k]: k[0] for k in names})
    p2 = AbstractionWitness(prod, w2.coarse, {pair_name[k]: k[1] for k in names})
    return prod, p1, p2


def _lasso_positions(t: TransitionSystem, start, lasso):
    if isinstance(lasso, tuple) and len(lasso) == 2 and isinstance(lasso[1], int):
        path, loop = list(lasso[0]), lasso[1]
    else:
        path, loop = list(lasso), None
    if not path or path[0] != start:
        raise MlarError(f"lasso for {start} must start at {start}")
    for a, b in zip(path, path[1:]):
        if (a, b) not in t.transitions:
            raise MlarError(f"lasso step {a}->{b} is not a transition")
    last = path[-1]
    if loop is None:
        loop = next((i for i, s in enumerate(path) if (last, s) in t.transitions), None)
        if loop is None:
            raise MlarError(f"lasso ending in {last} cannot close a cycle")
    elif not 0 <= loop < len(path) or (last, path[loop]) not in t.transitions:
        raise MlarError(f"lasso closing step {last}->{path[loop] if 0 <= loop < len(path) else loop} is invalid")
    return path, loop


def path_isolating_refinement(t: TransitionSystem, lassos: Mapping[str, object]):
    """Disjoint union of a non-initial copy of ``t`` and one lasso per initial state.

    A lasso is either ``(path, loop_index)``, meaning the last state steps
    back to ``path[loop_index]``, or a plain path, closed at the earliest
    position holding a successor of its last state.
    """
    states, trans, init, labels, mapping = [], set(), set(), {}, {}
    for s in t.states:
        c = f"{s}~"
        states.append(c)
        labels[c] = t.labels[s]
        mapping[c] = s
    for a, b in t.transitions:
        trans.add((f"{a}~", f"{b}~"))
    for start in t.sorted_initial():
        if start not in lassos:
            raise MlarError(f"no lasso for initial state {start}")
        path, loop = _lasso_positions(t, start, lassos[start])
        names = [f"{start}/{i}:{s}" for i, s in enumerate(path)]
        for n, s in zip(names, path):
            states.append(n)
            labels[n] = t.labels[s]
            mapping[n] = s
        trans.update(zip(names, names[1:]))
        trans.add((names[-1], names[loop]))
        init.add(names[0])
    for s in lassos:
        if s not in t.initial:
            raise MlarError(f"lasso given for non-initial state {s}")
    r = TransitionSystem.build(states, trans, init, labels, t.ap)
    return r, AbstractionWitness(r, t, mapping)


def disjoint_union(systems: Sequence[TransitionSystem]):
    """Union with states tagged by position; returns (system, list of name maps)."""
    states, trans, init, labels, maps = [], [], [], {}, []
    ap = set()
    for i, ts in enumerate(systems):
        m = {s: f"{i}:{s}" for s in ts.states}
        maps.append(m)
        states += [m[s] for s in ts.states]
        trans += [(m[a], m[b]) for a, b in ts.transitions]
        init += [m[s] for s in ts.initial]
        labels.update({m[s]: ts.labels[s] for s in ts.states})
        ap |= set(ts.ap)
    return TransitionSystem.build(states, trans, init, labels, ap), maps
