"""CTL formulas: parsing, printing, normal form and explicit-state checking.

Grammar (loosest first)::

    f ::= f -> f            right associative
        | f | f
        | f & f
        | !f | EX f | AX f | EF f | AF f | EG f | AG f
        | E[f U f] | A[f U f]
        | true | false | ident | (f)
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator

from .bisim import BisimPartition
from .errors import EvaluationError, MlarError, ParseError
from .syntax import TokenStream
from .ts import TransitionSystem


class Formula:
    __slots__ = ()

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    name: str


@dataclass(frozen=True, repr=False)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


class PathFormula:
    __slots__ = ()


@dataclass(frozen=True)
class Next(PathFormula):
    arg: Formula


@dataclass(frozen=True)
class Until(PathFormula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Finally(PathFormula):
    arg: Formula


@dataclass(frozen=True)
class Globally(PathFormula):
    arg: Formula


@dataclass(frozen=True, repr=False)
class Exists(Formula):
    path: PathFormula


@dataclass(frozen=True, repr=False)
class Forall(Formula):
    path: PathFormula


Formula.__repr__ = lambda self: f"<CTL {to_str(self)}>"

FALSE = Not(Top())
_UNARY = {"EX": (Exists, Next), "AX": (Forall, Next), "EF": (Exists, Finally),
          "AF": (Forall, Finally), "EG": (Exists, Globally), "AG": (Forall, Globally)}
RESERVED = set(_UNARY) | {"E", "A", "U", "true", "false"}
_OPS = ("->", "!", "&", "|", "(", ")", "[", "]")


# -- constructors --------------------------------------------------------------

def EX(f): return Exists(Next(f))
def AX(f): return Forall(Next(f))
def EF(f): return Exists(Finally(f))
def AF(f): return Forall(Finally(f))
def EG(f): return Exists(Globally(f))
def AG(f): return Forall(Globally(f))
def EU(a, b): return Exists(Until(a, b))
def AU(a, b): return Forall(Until(a, b))


def conj(parts) -> Formula:
    parts = list(dict.fromkeys(parts))
    if not parts:
        return Top()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts) -> Formula:
    parts = list(dict.fromkeys(parts))
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def neg(f: Formula) -> Formula:
    return f.arg if isinstance(f, Not) else Not(f)


# -- parsing -------------------------------------------------------------------

def parse_ctl(text: str) -> Formula:
    ts = TokenStream(text, _OPS)
    f = _implication(ts)
    if ts.peek.kind != "end":
        ts.fail(f"unexpected {ts.peek.text!r}")
    return f


def _implication(ts):
    left = _disjunction(ts)
    if ts.accept("->"):
        return Implies(left, _implication(ts))
    return left


def _disjunction(ts):
    f = _conjunction(ts)
    while ts.accept("|"):
        f = Or(f, _conjunction(ts))
    return f


def _conjunction(ts):
    f = _unary(ts)
    while ts.accept("&"):
        f = And(f, _unary(ts))
    return f


def _unary(ts):
    if ts.accept("!"):
        return Not(_unary(ts))
    if ts.accept("("):
        f = _implication(ts)
        ts.expect(")")
        return f
    tok = ts.peek
    if tok.kind != "ident":
        ts.fail(f"expected a formula, found {tok.text or 'end of input'!r}")
    ts.next()
    if tok.text in _UNARY:
        quant, path = _UNARY[tok.text]
        return quant(path(_unary(ts)))
    if tok.text in ("E", "A"):
        ts.expect("[")
        left = _implication(ts)
        ts.expect("ident", "U")
        right = _implication(ts)
        ts.expect("]")
        return (Exists if tok.text == "E" else Forall)(Until(left, right))
    if tok.text == "true":
        return Top()
    if tok.text == "false":
        return FALSE
    if tok.text == "U":
        raise ParseError("'U' outside E[..] or A[..]", tok.pos, ts.text)
    return Atom(tok.text)


# -- printing ------------------------------------------------------------------

_LEVEL = {Implies: 1, Or: 2, And: 3}


def to_str(f: Formula) -> str:
    return _show(f, 0)


def _wrap(s, cond):
    return f"({s})" if cond else s


def _show(f, ctx):
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        if isinstance(f.arg, Top):
            return "false"
        return "!" + _show(f.arg, 4)
    kind = type(f)
    if kind in _LEVEL:
        lvl = _LEVEL[kind]
        op = {Implies: "->", Or: "|", And: "&"}[kind]
        if kind is Implies:
            s = f"{_show(f.left, lvl + 1)} {op} {_show(f.right, lvl)}"
        else:
            s = f"{_show(f.left, lvl)} {op} {_show(f.right, lvl + 1)}"
        return _wrap(s, ctx > lvl)
    q = "E" if isinstance(f, Exists) else "A"
    p = f.path
    if isinstance(p, Until):
        return f"{q}[{_show(p.left, 0)} U {_show(p.right, 0)}]"
    letter = {Next: "X", Finally: "F", Globally: "G"}[type(p)]
    return f"{q}{letter} {_show(p.arg, 4)}"


# -- structure -----------------------------------------------------------------

def atoms(f: Formula) -> set:
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, Top):
        return set()
    return set().union(*(atoms(c) for c in children(f)))


def children(f: Formula) -> tuple:
    if isinstance(f, (Top, Atom)):
        return ()
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, (And, Or, Implies)):
        return (f.left, f.right)
    p = f.path
    return (p.left, p.right) if isinstance(p, Until) else (p.arg,)


def temporal_depth(f: Formula) -> int:
    inner = max((temporal_depth(c) for c in children(f)), default=0)
    return inner + (1 if isinstance(f, (Exists, Forall)) else 0)


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


def normalize(f: Formula) -> Formula:
    """Rewrite into the core: true, atoms, !, &, EX, AX, E[U], A[U]."""
    if isinstance(f, (Top, Atom)):
        return f
    if isinstance(f, Not):
        return neg(normalize(f.arg))
    if isinstance(f, And):
        return And(normalize(f.left), normalize(f.right))
    if isinstance(f, Or):
        return neg(And(neg(normalize(f.left)), neg(normalize(f.right))))
    if isinstance(f, Implies):
        return neg(And(normalize(f.left), neg(normalize(f.right))))
    q = type(f)
    p = f.path
    if isinstance(p, Next):
        return q(Next(normalize(p.arg)))
    if isinstance(p, Until):
        return q(Until(normalize(p.left), normalize(p.right)))
    if isinstance(p, Finally):
        return q(Until(Top(), normalize(p.arg)))
    dual = Forall if q is Exists else Exists
    return neg(dual(Until(Top(), neg(normalize(p.arg)))))


# -- model checking ------------------------------------------------------------

@dataclass(frozen=True)
class SatSet:
    formula: Formula
    system: TransitionSystem
    states: frozenset

    @property
    def holds(self) -> bool:
        return self.system.initial <= self.states

    def sorted(self) -> list:
        return [s for s in self.system.states if s in self.states]


def check_ctl(ts: TransitionSystem, f: Formula) -> SatSet:
    missing = atoms(f) - set(ts.ap)
    if missing:
        raise EvaluationError(f"unknown atoms {sorted(missing)}")
    return SatSet(f, ts, frozenset(sat(ts, normalize(f), {})))


def holds(ts: TransitionSystem, f: Formula) -> bool:
    return check_ctl(ts, f).holds


def sat(ts: TransitionSystem, f: Formula, memo: dict) -> frozenset:
    """Satisfying states of a core formula, memoised per subformula."""
    if f in memo:
        return memo[f]
    if isinstance(f, Top):
        out = frozenset(ts.states)
    elif isinstance(f, Atom):
        out = frozenset(s for s in ts.states if f.name in ts.labels[s])
    elif isinstance(f, Not):
        out = frozenset(ts.states) - sat(ts, f.arg, memo)
    elif isinstance(f, And):
        out = sat(ts, f.left, memo) & sat(ts, f.right, memo)
    else:
        p = f.path
        if isinstance(p, Next):
            inner = sat(ts, p.arg, memo)
            if isinstance(f, Exists):
                out = frozenset(s for s in ts.states if any(t in inner for t in ts.succ[s]))
            else:
                out = frozenset(s for s in ts.states if all(t in inner for t in ts.succ[s]))
        elif isinstance(p, Until):
            out = _until(ts, sat(ts, p.left, memo), sat(ts, p.right, memo),
                         isinstance(f, Forall))
        else:
            raise MlarError(f"formula not in core form: {to_str(f)}")
    memo[f] = out
    return out


def _until(ts, keep, goal, universal):
    z = set(goal)
    pending = {s: len(ts.succ[s]) for s in ts.states}
    stack = list(z)
    while stack:
        t = stack.pop()
        for s in ts.pred[t]:
            if s in z or s not in keep:
                continue
            if universal:
                pending[s] -= 1
                if pending[s] > 0:
                    continue
            z.add(s)
            stack.append(s)
    return frozenset(z)


# -- separating formulas -------------------------------------------------------

def distinguishing_formula(bp: BisimPartition, s, t, _memo=None) -> Formula:
    """A formula true at node ``s`` and false at node ``t``.

    Nodes are ``(system index, state)`` pairs of ``bp``. The nesting depth
    of the result is bounded by the number of refinement rounds.
    """
    memo = {} if _memo is None else _memo
    if (s, t) in memo:
        return memo[(s, t)]
    k = bp.separation_round(s, t)
    if k is None:
        raise MlarError(f"{s} and {t} are bisimilar")
    if k == 0:
        ls = bp.systems[s[0]].labels[s[1]]
        lt = bp.systems[t[0]].labels[t[1]]
        extra = sorted(ls - lt)
        out = Atom(extra[0]) if extra else Not(Atom(sorted(lt - ls)[0]))
    else:
        prev = bp.rounds[k - 1]
        s_succ, t_succ = bp.successors(s), bp.successors(t)
        t_blocks = {prev[x] for x in t_succ}
        lone = next((x for x in s_succ if prev[x] not in t_blocks), None)
        if lone is not None:
            out = EX(conj(distinguishing_formula(bp, lone, y, memo) for y in _reps(t_succ, prev)))
        else:
            s_blocks = {prev[x] for x in s_succ}
            lone = next(y for y in t_succ if prev[y] not in s_blocks)
            out = Not(EX(conj(distinguishing_formula(bp, lone, x, memo)
                              for x in _reps(s_succ, prev))))
    memo[(s, t)] = out
    return out


def _reps(nodes, block):
    seen, out = set(), []
    for n in nodes:
        if block[n] not in seen:
            seen.add(block[n])
            out.append(n)
    return out


# -- enumeration ---------------------------------------------------------------

_UNARY_BUILDERS = (Not, EX, AX, EF, AF, EG, AG)
_BINARY_BUILDERS = (And, Or, EU, AU)


def enumerate_formulas(ap, max_size: int) -> Iterator[Formula]:
    """All formulas up to ``max_size`` constructors, smallest first, in a fixed order."""
    layers = [[], [Top()] + [Atom(a) for a in sorted(ap)]]
    yield from layers[1]
    for n in range(2, max_size + 1):
        layer = []
        for build in _UNARY_BUILDERS:
            layer.extend(build(g) for g in layers[n - 1])
        for build in _BINARY_BUILDERS:
            for i in range(1, n - 1):
                layer.extend(build(a, b) for a, b in product(layers[i], layers[n - 1 - i]))
        layers.append(layer)
        yield from layer
