"""Propositional modal logic over finite Kripke frames.

Worlds sets are handled as integer bitmasks internally (bit ``i`` is the
``i``-th world in declaration order).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Mapping

from .errors import EvaluationError, FormatError
from .iso import canonical_graph
from .syntax import TokenStream


class ModalFormula:
    __slots__ = ()

    def __str__(self):
        return show_modal(self)

    def __repr__(self):
        return f"<modal {show_modal(self)}>"


@dataclass(frozen=True, repr=False)
class Verum(ModalFormula):
    pass


@dataclass(frozen=True, repr=False)
class Var(ModalFormula):
    name: str


@dataclass(frozen=True, repr=False)
class Neg(ModalFormula):
    arg: ModalFormula


@dataclass(frozen=True, repr=False)
class Conj(ModalFormula):
    left: ModalFormula
    right: ModalFormula


@dataclass(frozen=True, repr=False)
class Disj(ModalFormula):
    left: ModalFormula
    right: ModalFormula


@dataclass(frozen=True, repr=False)
class Impl(ModalFormula):
    left: ModalFormula
    right: ModalFormula


@dataclass(frozen=True, repr=False)
class Dia(ModalFormula):
    arg: ModalFormula


def Box(f: ModalFormula) -> ModalFormula:
    """Necessity, stored as its dual."""
    return Neg(Dia(Neg(f)))


# -- parsing and printing ------------------------------------------------------

_OPS = ("->", "!", "&", "|", "(", ")", "<>", "[]")


def parse_modal(text: str) -> ModalFormula:
    ts = TokenStream(text, _OPS)
    f = _implication(ts)
    if ts.peek.kind != "end":
        ts.fail(f"unexpected {ts.peek.text!r}")
    return f


def _implication(ts):
    left = _disjunction(ts)
    if ts.accept("->"):
        return Impl(left, _implication(ts))
    return left


def _disjunction(ts):
    f = _conjunction(ts)
    while ts.accept("|"):
        f = Disj(f, _conjunction(ts))
    return f


def _conjunction(ts):
    f = _unary(ts)
    while ts.accept("&"):
        f = Conj(f, _unary(ts))
    return f


def _unary(ts):
    if ts.accept("!"):
        return Neg(_unary(ts))
    if ts.accept("<>"):
        return Dia(_unary(ts))
    if ts.accept("[]"):
        return Box(_unary(ts))
    if ts.accept("("):
        f = _implication(ts)
        ts.expect(")")
        return f
    tok = ts.peek
    if tok.kind != "ident":
        ts.fail(f"expected a formula, found {tok.text or 'end of input'!r}")
    ts.next()
    if tok.text == "true":
        return Verum()
    if tok.text == "false":
        return Neg(Verum())
    return Var(tok.text)


def _is_box(f):
    return isinstance(f, Neg) and isinstance(f.arg, Dia) and isinstance(f.arg.arg, Neg)


def show_modal(f: ModalFormula, ctx: int = 0) -> str:
    if isinstance(f, Verum):
        return "true"
    if isinstance(f, Var):
        return f.name
    if _is_box(f):
        return "[]" + show_modal(f.arg.arg.arg, 4)
    if isinstance(f, Neg):
        return "false" if isinstance(f.arg, Verum) else "!" + show_modal(f.arg, 4)
    if isinstance(f, Dia):
        return "<>" + show_modal(f.arg, 4)
    lvl, op = {Impl: (1, "->"), Disj: (2, "|"), Conj: (3, "&")}[type(f)]
    if isinstance(f, Impl):
        s = f"{show_modal(f.left, lvl + 1)} {op} {show_modal(f.right, lvl)}"
    else:
        s = f"{show_modal(f.left, lvl)} {op} {show_modal(f.right, lvl + 1)}"
    return f"({s})" if ctx > lvl else s


def props(f: ModalFormula) -> list:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            out.add(g.name)
        elif isinstance(g, (Neg, Dia)):
            stack.append(g.arg)
        elif isinstance(g, (Conj, Disj, Impl)):
            stack += [g.left, g.right]
    return sorted(out)


AXIOMS = {
    "T": parse_modal("p -> <>p"),
    "4": parse_modal("<><>p -> <>p"),
    ".2": parse_modal("<>[]p -> []<>p"),
    ".1": parse_modal("[]<>p -> <>[]p"),
    "K": parse_modal("[](p -> q) -> ([]p -> []q)"),
    "Grz": parse_modal("[]([](p -> []p) -> p) -> p"),
}


# -- frames --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KripkeFrame:
    worlds: tuple
    access: frozenset

    @classmethod
    def build(cls, worlds, access) -> "KripkeFrame":
        worlds = tuple(worlds)
        if len(set(worlds)) != len(worlds):
            raise FormatError("duplicate world identifiers")
        known = set(worlds)
        acc = frozenset((a, b) for a, b in access)
        for a, b in acc:
            if a not in known or b not in known:
                raise FormatError(f"access pair {a!r}->{b!r} mentions an unknown world")
        return cls(worlds, acc)

    @cached_property
    def index(self) -> dict:
        return {w: i for i, w in enumerate(self.worlds)}

    @cached_property
    def succ_mask(self) -> list:
        masks = [0] * len(self.worlds)
        for a, b in self.access:
            masks[self.index[a]] |= 1 << self.index[b]
        return masks

    @property
    def full(self) -> int:
        return (1 << len(self.worlds)) - 1

    def successors(self, w) -> list:
        m = self.succ_mask[self.index[w]]
        return [v for i, v in enumerate(self.worlds) if m >> i & 1]

    def sees(self, a, b) -> bool:
        return (a, b) in self.access

    def mask(self, ws) -> int:
        out = 0
        for w in ws:
            out |= 1 << self.index[w]
        return out

    def unmask(self, m: int) -> list:
        return [w for i, w in enumerate(self.worlds) if m >> i & 1]

    def sorted_access(self) -> list:
        idx = self.index
        return sorted(self.access, key=lambda p: (idx[p[0]], idx[p[1]]))

    def to_dict(self) -> dict:
        return {"worlds": list(self.worlds), "access": [list(p) for p in self.sorted_access()]}

    def __repr__(self):
        return f"KripkeFrame({len(self.worlds)} worlds, {len(self.access)} pairs)"


def frame_from_dict(data: Mapping) -> KripkeFrame:
    if not isinstance(data, Mapping) or set(data) - {"worlds", "access"}:
        raise FormatError("frame must be an object with keys 'worlds' and 'access'")
    return KripkeFrame.build(data["worlds"], [tuple(p) for p in data.get("access", [])])


def load_frame(path) -> KripkeFrame:
    with open(path) as fh:
        return frame_from_dict(json.load(fh))


def dump_frame(frame: KripkeFrame, path=None) -> str:
    text = json.dumps(frame.to_dict(), indent=2) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def extension(frame: KripkeFrame, masks: Mapping[str, int], f: ModalFormula) -> int:
    """Bitmask of worlds where ``f`` holds, given a bitmask per proposition."""
    if isinstance(f, Verum):
        return frame.full
    if isinstance(f, Var):
        if f.name not in masks:
            raise EvaluationError(f"valuation has no entry for {f.name!r}")
        return masks[f.name]
    if isinstance(f, Neg):
        return frame.full & ~extension(frame, masks, f.arg)
    if isinstance(f, Dia):
        inner = extension(frame, masks, f.arg)
        out = 0
        for i, m in enumerate(frame.succ_mask):
            if m & inner:
                out |= 1 << i
        return out
    a = extension(frame, masks, f.left)
    b = extension(frame, masks, f.right)
    if isinstance(f, Conj):
        return a & b
    if isinstance(f, Disj):
        return a | b
    return (frame.full & ~a) | b


def eval_modal(frame: KripkeFrame, val: Mapping[str, object], world, f: ModalFormula) -> bool:
    masks = {p: frame.mask(ws) for p, ws in val.items()}
    return bool(extension(frame, masks, f) >> frame.index[world] & 1)


@dataclass(frozen=True)
class Countermodel:
    valuation: dict      # proposition -> tuple of worlds
    world: str


@dataclass(frozen=True)
class Validity:
    status: str          # "valid" | "invalid" | "inconclusive"
    countermodel: Countermodel | None = None
    required: int = 0    # valuations needed, reported when inconclusive

    @property
    def valid(self):
        return self.status == "valid"


def valid_on_frame(frame: KripkeFrame, f: ModalFormula, budget: int = 2**20,
                   at=None) -> Validity:
    """Exhaustive validity over every valuation of the formula's propositions.

    With ``at`` given, only truth at that world is required.
    """
    ps = props(f)
    n = len(frame.worlds)
    required = 2 ** (n * len(ps))
    if required > budget:
        return Validity("inconclusive", required=required)
    need = frame.full if at is None else 1 << frame.index[at]
    for combo in product(range(1 << n), repeat=len(ps)):
        masks = dict(zip(ps, combo))
        bad = need & ~extension(frame, masks, f)
        if bad:
            i = (bad & -bad).bit_length() - 1
            val = {p: tuple(frame.unmask(m)) for p, m in masks.items()}
            return Validity("invalid", Countermodel(val, frame.worlds[i]))
    return Validity("valid")


@dataclass(frozen=True)
class PropertyResult:
    holds: bool
    counterexample: tuple | None = None

    def __bool__(self):
        return self.holds


def frame_properties(frame: KripkeFrame) -> dict:
    ws = frame.worlds
    R = frame.access
    succ = {w: frame.successors(w) for w in ws}
    out = {}
    bad = next((w for w in ws if (w, w) not in R), None)
    out["reflexive"] = PropertyResult(bad is None, None if bad is None else (bad,))
    bad = next(((a, b, c) for a in ws for b in succ[a] for c in succ[b] if (a, c) not in R), None)
    out["transitive"] = PropertyResult(bad is None, bad)
    bad = None
    for w in ws:
        for u, v in combinations(succ[w], 2):
            if not set(succ[u]) & set(succ[v]):
                bad = (w, u, v)
                break
        if bad:
            break
    out["directed"] = PropertyResult(bad is None, bad)
    top = next((m for m in ws if all((w, m) in R for w in ws)), None)
    out["has_greatest"] = PropertyResult(top is not None, None if top is None else (top,))
    bad = next(((a, b) for a in ws for b in succ[a] if a != b and (b, a) in R), None)
    out["antisymmetric"] = PropertyResult(bad is None, bad)
    return out


# -- frame families ------------------------------------------------------------

def set_name(bits: int, n: int) -> str:
    return "{" + ",".join(str(i) for i in range(n) if bits >> i & 1) + "}"


def preboolean_world(I: int, i: int, n: int) -> str:
    return f"{set_name(I, n)}.{i}"


def gen_preboolean(n: int, c: int) -> KripkeFrame:
    """Subsets of ``n`` elements, each blown up into a cluster of ``c`` copies."""
    pts = [(I, i) for I in range(1 << n) for i in range(c)]
    name = {p: preboolean_world(p[0], p[1], n) for p in pts}
    acc = [(name[a], name[b]) for a in pts for b in pts if a[0] & ~b[0] == 0]
    return KripkeFrame.build([name[p] for p in pts], acc)


STAR = "*"


def lollipop_world(I: int, J: int, n: int, m: int) -> str:
    return f"({set_name(I, n)},{set_name(J, m)})"


def gen_lollipop(n: int, m: int) -> KripkeFrame:
    """Pre-Boolean part over ``n`` with clusters indexed by subsets of ``m``,
    topped by one extra world that every world sees."""
    pts = [(I, J) for I in range(1 << n) for J in range(1 << m)]
    name = {p: lollipop_world(p[0], p[1], n, m) for p in pts}
    acc = [(name[a], name[b]) for a in pts for b in pts if a[0] & ~b[0] == 0]
    acc += [(name[a], STAR) for a in pts] + [(STAR, STAR)]
    return KripkeFrame.build([name[p] for p in pts] + [STAR], acc)


def fpf_world(f: tuple) -> str:
    return "".join("?" if v is None else str(v) for v in f) or "-"


def fpf_points(n: int) -> list:
    return list(product((None, 0, 1), repeat=n))


def gen_fpf(n: int) -> KripkeFrame:
    """Partial functions from ``n`` into {0,1}, ordered by extension."""
    pts = fpf_points(n)

    def extends(g, f):
        return all(a is None or a == b for a, b in zip(f, g))

    acc = [(fpf_world(f), fpf_world(g)) for f in pts for g in pts if extends(g, f)]
    return KripkeFrame.build([fpf_world(f) for f in pts], acc)


def chain(k: int) -> KripkeFrame:
    ws = [str(i) for i in range(k)]
    return KripkeFrame.build(ws, [(ws[i], ws[j]) for i in range(k) for j in range(i, k)])


def order_iso(a: KripkeFrame, b: KripkeFrame) -> dict | None:
    """A bijection preserving the access relation in both directions, or None."""
    if len(a.worlds) != len(b.worlds) or len(a.access) != len(b.access):
        return None
    ca = canonical_graph(a.worlds, a.access, lambda w: 0)
    cb = canonical_graph(b.worlds, b.access, lambda w: 0)
    if ca != cb:
        return None
    return dict(zip(ca.order, cb.order))
