"""Buttons, switches and decisions on a general frame, and their independence.

Every check quantifies over the worlds the anchor ``c`` sees. A CTL
formula is turned into the set of worlds whose system satisfies it, and
the modal pattern is checked directly on those sets. The ``naive_*``
functions re-derive each verdict by evaluating the defining modal formula
with ``eval_worlds``; the two paths are compared in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from . import ctl
from .general_frame import GeneralFrame, eval_worlds
from .modal import Box, Conj, Dia, Impl, Neg, Var, Verum, parse_modal


@dataclass(frozen=True)
class ControlVerdict:
    kind: str
    verdict: bool
    counterexample: tuple | None = None
    reason: str = ""
    notes: dict = field(default_factory=dict)

    def __bool__(self):
        return self.verdict

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "verdict": self.verdict,
               "counterexample": list(self.counterexample) if self.counterexample else None}
        if self.reason:
            out["reason"] = self.reason
        out.update(self.notes)
        return out


def truth_set(g: GeneralFrame, f: ctl.Formula) -> frozenset:
    return frozenset(g.kripke.unmask(g.worlds_satisfying(f)))


def _up(g: GeneralFrame, w) -> list:
    return g.kripke.successors(w)


def _above(g, c, within):
    ds = _up(g, c)
    return ds if within is None else [d for d in ds if d in within]


def _button_sets(g, c, V, kind, within=None, weak=False):
    for d in _above(g, c, within):
        if d in V:
            for e in _up(g, d):
                if e not in V:
                    return ControlVerdict(kind, False, (d, e), "truth drops")
    if weak:
        if not any(e in V for e in _up(g, c)):
            return ControlVerdict(kind, False, (c,), "never reachable")
    else:
        for d in _above(g, c, within):
            if not any(e in V for e in _up(g, d)):
                return ControlVerdict(kind, False, (d,), "never reachable")
    return ControlVerdict(kind, True, notes={"pushed": c in V})


def is_pure_button(g: GeneralFrame, c: str, beta: ctl.Formula, within=None) -> ControlVerdict:
    """[](b -> []b) and []<>b at ``c``; ``notes['pushed']`` says whether b holds at c."""
    return _button_sets(g, c, truth_set(g, beta), "pure-button", within)


def is_pure_weak_button(g: GeneralFrame, c: str, lam: ctl.Formula) -> ControlVerdict:
    """[](b -> []b) and <>b at ``c``."""
    return _button_sets(g, c, truth_set(g, lam), "pure-weak-button", weak=True)


def _switch_sets(g, c, S, within, kind="switch"):
    for d in _above(g, c, within):
        ups = _up(g, d)
        if not any(e in S for e in ups):
            return ControlVerdict(kind, False, (d,), "cannot turn on")
        if not any(e not in S for e in ups):
            return ControlVerdict(kind, False, (d,), "cannot turn off")
    return ControlVerdict(kind, True, notes={"on": c in S})


def is_switch(g: GeneralFrame, c: str, sigma: ctl.Formula, within=None) -> ControlVerdict:
    """[](<>s & <>!s) at ``c``.

    ``within`` narrows the worlds the outer box ranges over (the inner
    diamonds still see the whole frame); used for budgeted sub-frames of
    truncated gadgets.
    """
    return _switch_sets(g, c, truth_set(g, sigma), within)


def _restricted_sets(g, c, S, Bset, within, kind="restricted-switch"):
    for d in _above(g, c, within):
        if d in Bset:
            continue
        ups = [e for e in _up(g, d) if e not in Bset]
        if not any(e in S for e in ups):
            return ControlVerdict(kind, False, (d,), "cannot turn on without the restrictor")
        if not any(e not in S for e in ups):
            return ControlVerdict(kind, False, (d,), "cannot turn off without the restrictor")
    return ControlVerdict(kind, True, notes={"on": c in S})


def is_restricted_switch(g: GeneralFrame, c: str, sigma: ctl.Formula, B: ctl.Formula,
                         within=None) -> ControlVerdict:
    """[](!B -> (<>(s & !B) & <>(!s & !B))) at ``c``.

    ``notes['restrictor_is_pure_button']`` reports whether B is a pure
    button at ``c``, which the pattern presupposes.
    """
    Bset = truth_set(g, B)
    v = _restricted_sets(g, c, truth_set(g, sigma), Bset, within)
    button = _button_sets(g, c, Bset, "pure-button")
    return ControlVerdict(v.kind, v.verdict, v.counterexample, v.reason,
                          dict(v.notes, restrictor_is_pure_button=button.verdict))


def is_decision(g: GeneralFrame, c: str, lam: ctl.Formula, delta: ctl.Formula) -> ControlVerdict:
    """l | r an unpushed pure button, [](!l | !r), and [](<>l & <>r | l | r)."""
    L, R = truth_set(g, lam), truth_set(g, delta)
    either = _button_sets(g, c, L | R, "pure-button")
    if not either:
        return ControlVerdict("decision", False, either.counterexample,
                              f"clause 1: l | r is not a pure button ({either.reason})")
    if c in L | R:
        return ControlVerdict("decision", False, (c,), "clause 1: l | r already pushed")
    for d in _up(g, c):
        if d in L and d in R:
            return ControlVerdict("decision", False, (d,), "clause 2: both sides hold")
    for d in _up(g, c):
        if d in L or d in R:
            continue
        ups = _up(g, d)
        if not (any(e in L for e in ups) and any(e in R for e in ups)):
            return ControlVerdict("decision", False, (d,), "clause 3: a side is unreachable")
    return ControlVerdict("decision", True)


# -- independence --------------------------------------------------------------

def truth_vectors(g: GeneralFrame, formulas: Sequence[ctl.Formula]) -> dict:
    """world -> tuple of booleans, one per formula."""
    sets = [truth_set(g, f) for f in formulas]
    return {w: tuple(w in s for s in sets) for w in g.kripke.worlds}


def _bits(vec) -> int:
    return sum(1 << i for i, v in enumerate(vec) if v)


def _members(bits: int, n: int) -> list:
    return [i for i in range(n) if bits >> i & 1]


def _supersets(bits: int, n: int):
    free = [i for i in range(n) if not bits >> i & 1]
    for k in range(1 << len(free)):
        yield bits | sum(1 << free[j] for j in range(len(free)) if k >> j & 1)


def _pattern_check(kind, g, c, n, m, vec, targets_of, guard=None, within=None, budget=10**7):
    """Shared driver: ``vec[w] = (I, J)`` bitmasks, ``targets_of(I, J)`` lists (I1, J1)."""
    if (1 << (2 * (n + m))) > budget:
        return ControlVerdict(kind, False, None, "inconclusive: pattern budget exceeded",
                              {"inconclusive": True})
    ds = [d for d in _above(g, c, within) if guard is None or guard(d)]
    reach = {}
    for d in ds:
        reach[d] = {vec[e] for e in _up(g, d) if guard is None or guard(e)}
    patterns = sorted({vec[d] for d in ds})
    for p in patterns:
        holders = [d for d in ds if vec[d] == p]
        for target in sorted(targets_of(*p)):
            for d in holders:
                if target not in reach[d]:
                    I0, J0 = p
                    I1, J1 = target
                    return ControlVerdict(kind, False, (
                        d, _members(I0, n), _members(J0, m), _members(I1, n), _members(J1, m)),
                        "target pattern unreachable")
    return ControlVerdict(kind, True)


def check_independence(g: GeneralFrame, c: str, buttons: Sequence[ctl.Formula],
                       switches: Sequence[ctl.Formula], within=None) -> ControlVerdict:
    """For every d >= c with exact pattern (I0, J0), every (I1 >= I0, J1) is reachable."""
    n, m = len(buttons), len(switches)
    tv = truth_vectors(g, list(buttons) + list(switches))
    vec = {w: (_bits(v[:n]), _bits(v[n:])) for w, v in tv.items()}
    return _pattern_check("independence", g, c, n, m, vec,
                          lambda I, J: [(I1, J1) for I1 in _supersets(I, n) for J1 in range(1 << m)],
                          within=within)


def check_independence_until(g: GeneralFrame, c: str, buttons: Sequence[ctl.Formula],
                             B: ctl.Formula, rswitches: Sequence[ctl.Formula],
                             within=None) -> ControlVerdict:
    """As ``check_independence`` with both sides guarded by !B."""
    n, m = len(buttons), len(rswitches)
    tv = truth_vectors(g, list(buttons) + list(rswitches))
    vec = {w: (_bits(v[:n]), _bits(v[n:])) for w, v in tv.items()}
    Bset = truth_set(g, B)
    return _pattern_check("independence-until", g, c, n, m, vec,
                          lambda I, J: [(I1, J1) for I1 in _supersets(I, n) for J1 in range(1 << m)],
                          guard=lambda w: w not in Bset, within=within)


def check_decision_independence(g: GeneralFrame, c: str,
                                decisions: Sequence[tuple]) -> ControlVerdict:
    """For every d >= c with pattern (I0, J0), each (I1, J1) with I0 <= I1,
    J0 <= J1 and I1, J1 disjoint is reachable."""
    n = len(decisions)
    tv = truth_vectors(g, [l for l, _ in decisions] + [r for _, r in decisions])
    vec = {w: (_bits(v[:n]), _bits(v[n:])) for w, v in tv.items()}

    def targets(I, J):
        if I & J:
            return []
        return [(I1, J1) for I1 in _supersets(I, n) if not I1 & J
                for J1 in _supersets(J, n) if not I1 & J1]

    return _pattern_check("decision-independence", g, c, n, n, vec, targets)


# -- naive cross-checks --------------------------------------------------------

def _holds(g, c, sets, text):
    return eval_worlds(g, sets, c, parse_modal(text))


def naive_pure_button(g, c, beta) -> bool:
    return _holds(g, c, {"b": truth_set(g, beta)}, "[](b -> []b) & []<>b")


def naive_pure_weak_button(g, c, lam) -> bool:
    return _holds(g, c, {"b": truth_set(g, lam)}, "[](b -> []b) & <>b")


def naive_switch(g, c, sigma) -> bool:
    return _holds(g, c, {"s": truth_set(g, sigma)}, "[](<>s & <>!s)")


def naive_restricted_switch(g, c, sigma, B) -> bool:
    sets = {"s": truth_set(g, sigma), "B": truth_set(g, B)}
    return _holds(g, c, sets, "[](!B -> (<>(s & !B) & <>(!s & !B)))")


def naive_decision(g, c, lam, delta) -> bool:
    sets = {"l": truth_set(g, lam), "r": truth_set(g, delta)}
    return _holds(g, c, sets, "!(l | r) & [](l | r -> [](l | r)) & []<>(l | r)"
                              " & [](!l | !r) & [](<>l & <>r | l | r)")


def _pattern(names, bits):
    out = Verum()
    for i, p in enumerate(names):
        atom = Var(p)
        out = Conj(out, atom if bits >> i & 1 else Neg(atom))
    return out


def naive_independence(g, c, buttons, switches, B=None) -> bool:
    n, m = len(buttons), len(switches)
    bn = [f"b{i}" for i in range(n)]
    sn = [f"s{j}" for j in range(m)]
    sets = {p: truth_set(g, f) for p, f in zip(bn + sn, list(buttons) + list(switches))}
    guard = Verum()
    if B is not None:
        sets["B"] = truth_set(g, B)
        guard = Neg(Var("B"))
    for I0, J0 in product(range(1 << n), range(1 << m)):
        for I1 in _supersets(I0, n):
            for J1 in range(1 << m):
                pre = Conj(Conj(_pattern(bn, I0), _pattern(sn, J0)), guard)
                post = Conj(Conj(_pattern(bn, I1), _pattern(sn, J1)), guard)
                if not eval_worlds(g, sets, c, Box(Impl(pre, Dia(post)))):
                    return False
    return True


def naive_decision_independence(g, c, decisions) -> bool:
    n = len(decisions)
    ln = [f"l{i}" for i in range(n)]
    rn = [f"r{i}" for i in range(n)]
    sets = {}
    for i, (l, r) in enumerate(decisions):
        sets[ln[i]], sets[rn[i]] = truth_set(g, l), truth_set(g, r)
    for I1 in range(1 << n):
        for J1 in range(1 << n):
            if I1 & J1:
                continue
            for I0 in range(1 << n):
                if I0 & ~I1:
                    continue
                for J0 in range(1 << n):
                    if J0 & ~J1:
                        continue
                    pre = Conj(_pattern(ln, I0), _pattern(rn, J0))
                    post = Conj(_pattern(ln, I1), _pattern(rn, J1))
                    if not eval_worlds(g, sets, c, Box(Impl(pre, Dia(post)))):
                        return False
    return True
