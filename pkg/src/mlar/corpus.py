"""Generators for the example systems and the gadget families built on them.

Infinite constructions enter only as truncations. Where a truncation cuts
an infinite path, a self-loop sink carrying a fresh label keeps every state
non-terminal.
"""
from __future__ import annotations

from itertools import combinations

from . import ctl
from .ctl import AG, AX, EG, EX, And, Atom, Not, parse_ctl
from .errors import InvariantError, MlarError
from .general_frame import GeneralFrame, World, build_general_frame, enumerate_abstractions
from .iso import iso_check
from .modal import fpf_points, fpf_world
from .ts import Partition, TransitionSystem, is_abstraction, AbstractionWitness

FAMILIES = ("fig1_t1", "fig1_t2", "fig1_s_trunc", "fig2_s", "fig2_t1", "fig2_t2", "fig2_t3",
            "buttons", "switch_trunc", "rswitch_trunc", "decision_chain", "pruned_subframe")
MAX_STATES = 14
MAX_WORLDS = 40


def _ts(states, edges, initial, labels, ap=None):
    return TransitionSystem.build(states, edges, initial, labels, ap)


# -- the two small examples ----------------------------------------------------

def fig1_t1() -> TransitionSystem:
    """Counter abstracted to its sign."""
    n, z, p = "x<0", "x=0", "x>0"
    return _ts([n, z, p], [(z, n), (z, p), (n, n), (n, z), (p, p), (p, z)], [z],
               {z: ["x0"]}, ["x0"])


def fig1_t2() -> TransitionSystem:
    """Counter abstracted to {<-1, -1, 0, 1, >1}."""
    s = ["x<-1", "x=-1", "x=0", "x=1", "x>1"]
    e = [(s[0], s[0]), (s[4], s[4])]
    e += [(s[i], s[i + 1]) for i in range(4)] + [(s[i + 1], s[i]) for i in range(4)]
    return _ts(s, e, ["x=0"], {"x=0": ["x0"]}, ["x0"])


def fig1_s_trunc(depth: int = 3) -> TransitionSystem:
    """Integer counter clamped to [-depth, depth]; the ends loop on themselves."""
    if depth < 1:
        raise MlarError("depth must be at least 1")
    names = {k: f"x={k}" for k in range(-depth, depth + 1)}
    edges = []
    for k in names:
        edges.append((names[k], names[max(k - 1, -depth)]))
        edges.append((names[k], names[min(k + 1, depth)]))
    return _ts(list(names.values()), edges, ["x=0"], {"x=0": ["x0"]}, ["x0"])


def fig2_s() -> TransitionSystem:
    return _ts(["a0", "a1", "a2", "b"],
               [("a0", "a1"), ("a0", "a2"), ("a1", "b"), ("a2", "b"), ("b", "b")],
               ["a0"], {"a0": ["a"], "a1": ["a"], "a2": ["a"], "b": ["b"]})


def fig2_t1() -> TransitionSystem:
    """a0 and a2 merged."""
    return _ts(["a02'", "a1'", "b'"],
               [("a02'", "a02'"), ("a02'", "a1'"), ("a02'", "b'"), ("a1'", "b'"), ("b'", "b'")],
               ["a02'"], {"a02'": ["a"], "a1'": ["a"], "b'": ["b"]})


def fig2_t2() -> TransitionSystem:
    """a1 and a2 merged."""
    return _ts(["a0''", "a12''", "b''"],
               [("a0''", "a12''"), ("a12''", "b''"), ("b''", "b''")],
               ["a0''"], {"a0''": ["a"], "a12''": ["a"], "b''": ["b"]})


def fig2_t3() -> TransitionSystem:
    """All a-states merged."""
    return _ts(["a012'''", "b'''"],
               [("a012'''", "a012'''"), ("a012'''", "b'''"), ("b'''", "b'''")],
               ["a012'''"], {"a012'''": ["a"], "b'''": ["b"]})


FIG2_NAMES = {"S": fig2_s, "T1": fig2_t1, "T2": fig2_t2, "T3": fig2_t3}


def fig2_namer(q: TransitionSystem):
    for name, build in FIG2_NAMES.items():
        if iso_check(q, build()) is not None:
            return name
    return None


def fig2_frame(mode: str = "iso", relation: str = "search") -> GeneralFrame:
    """All finite abstractions of the four-state example, worlds named S, T1, T2, T3."""
    enum = enumerate_abstractions(fig2_s(), mode, namer=fig2_namer if mode == "iso" else None)
    return build_general_frame(enum.worlds, relation)


# -- buttons -------------------------------------------------------------------

def buttons(n: int) -> TransitionSystem:
    """``s`` fans out to ``n`` two-state chains ``ai.1 -> ai.2`` that end in ``f``."""
    states = ["s", "f"]
    edges = [("f", "f")]
    labels = {"s": ["s"], "f": ["f"]}
    for i in range(1, n + 1):
        one, two = f"a{i}.1", f"a{i}.2"
        states += [one, two]
        edges += [("s", one), (one, two), (two, "f")]
        labels[one] = labels[two] = [f"a{i}"]
    if n == 0:
        edges.append(("s", "f"))   # keep s from being terminal
    return _ts(states, edges, ["s"], labels)


def button_formula(i: int) -> ctl.Formula:
    a = Atom(f"a{i}")
    return EX(And(a, EX(And(a, AX(Atom("f"))))))


def button_formulas(n: int) -> list:
    return [button_formula(i) for i in range(1, n + 1)]


def button_lattice(n: int, cap: int = 4, relation: str = "search") -> GeneralFrame:
    """Every abstraction of ``buttons(n)``; only the pairs can merge, so 2**n worlds."""
    if n > cap:
        raise MlarError(f"n={n} exceeds cap {cap}")
    enum = enumerate_abstractions(buttons(n), "iso", max_worlds=max(MAX_WORLDS, 2 ** n))
    if not enum.complete:
        raise MlarError(enum.reason)
    return build_general_frame(enum.worlds, relation)


def bottom_world(g: GeneralFrame) -> str:
    """The world that sees every other world."""
    for w in g.kripke.worlds:
        if all((w, v) in g.kripke.access for v in g.kripke.worlds):
            return w
    raise MlarError("frame has no least world")


# -- truncated switches --------------------------------------------------------

PATHS = 2
SWITCH_LENGTH = 3


def switch_trunc(K: int = 2) -> TransitionSystem:
    """Switch gadget for path length 3, with ``K`` copies of two paths each.

    Every path ``bk.l.1 -> bk.l.2 -> bk.l.3 -> f`` can be left through
    ``xk.l`` towards the start of the other path of the same copy.
    """
    states, edges, labels = ["s", "f"], [("f", "f")], {"s": ["s"], "f": ["f"]}
    for k in range(K):
        for l in range(PATHS):
            chain_ = [f"b{k}.{l}.{h}" for h in range(1, SWITCH_LENGTH + 1)]
            x = f"x{k}.{l}"
            states += chain_ + [x]
            for st in chain_:
                labels[st] = ["b"]
            labels[x] = ["x"]
            edges += [("s", chain_[0]), (chain_[0], x), (chain_[-1], "f")]
            edges += list(zip(chain_, chain_[1:]))
            edges += [(x, f"b{k}.{o}.1") for o in range(PATHS) if o != l]
    return _ts(states, edges, ["s"], labels)


def switch_formula(j: int = SWITCH_LENGTH) -> ctl.Formula:
    inner = And(Atom("b"), AX(Atom("f")))
    for _ in range(j - 2):
        inner = AX(inner)
    phi = AX(ctl.Implies(Atom("b"), inner))
    return EX(And(phi, AX(ctl.Implies(Atom("x"), AX(Not(phi))))))


def _switch_partition(seed, isolated):
    """Partition where the paths in ``isolated[k]`` keep their own states and the
    other paths of copy ``k`` share one b-class and one x-class."""
    blocks = [["s"], ["f"]]
    for k, iso in enumerate(isolated):
        pooled_b, pooled_x = [], []
        for l in range(PATHS):
            bs = [f"b{k}.{l}.{h}" for h in range(1, SWITCH_LENGTH + 1)]
            if l in iso:
                blocks += [[b] for b in bs] + [[f"x{k}.{l}"]]
            else:
                pooled_b += bs
                pooled_x.append(f"x{k}.{l}")
        if pooled_b:
            blocks += [pooled_b, pooled_x]
    return Partition.of(seed, blocks)


def switch_frame(K: int = 2, relation: str = "search") -> GeneralFrame:
    """Structured sub-lattice of the truncated switch gadget.

    Each copy either pools all its paths or isolates some of them. Worlds are
    identified up to isomorphism and named by the sorted tuple of per-copy
    isolated-path counts, e.g. ``c0-1``.

    The switch pattern breaks on this frame, but only at the top world,
    where every path of every copy is isolated and the switch can never be
    turned on again. It holds from every other world, in particular from
    every world that still has a fully pooled copy (``switch_budget``).
    """
    from .iso import canonical_form
    from .ts import quotient
    from itertools import product

    seed = switch_trunc(K)
    options = [frozenset(c) for r in range(PATHS + 1) for c in combinations(range(PATHS), r)]
    by_form: dict = {}
    for choice in product(options, repeat=K):
        p = _switch_partition(seed, choice)
        q, _ = quotient(seed, p)
        key = canonical_form(q)
        name = "c" + "-".join(str(c) for c in sorted(len(x) for x in choice))
        if key in by_form:
            by_form[key][2].append(p.blocks)
        else:
            by_form[key] = (name, q, [p.blocks])
    worlds = sorted(by_form.values(), key=lambda w: w[0])
    return build_general_frame([World(n, q, tuple(prov)) for n, q, prov in worlds], relation)


def switch_budget(g: GeneralFrame) -> list:
    """Worlds of ``switch_frame`` that still have a fully pooled copy."""
    return [w for w in g.world_ids() if "0" in w[1:].split("-")]


# -- restricted switches -------------------------------------------------------

def rswitch_trunc(K: int = 2, pairs: int = 0) -> TransitionSystem:
    """Restricted-switch gadget for one index with ``K`` triples.

    ``s`` reaches every ``tk``; the t-chain ``t0 -> t1 -> ...`` ends in a
    self-loop; each ``tk`` starts a triple ``rk.1 -> rk.2 -> rk.3 -> f``.
    With ``pairs > 0`` that many button pairs hang off the same ``s``.
    """
    states, edges = ["s", "f"], [("f", "f")]
    labels = {"s": ["s"], "f": ["f"]}
    for k in range(K):
        t = f"t{k}"
        trip = [f"r{k}.{h}" for h in range(1, 4)]
        states += [t] + trip
        labels[t] = ["t"]
        for st in trip:
            labels[st] = ["b", "b1", f"b1k{k}"]
        edges += [("s", t), (t, trip[0]), (trip[-1], "f")] + list(zip(trip, trip[1:]))
        edges.append((t, f"t{k + 1}") if k + 1 < K else (t, t))
    for i in range(1, pairs + 1):
        one, two = f"a{i}.1", f"a{i}.2"
        states += [one, two]
        edges += [("s", one), (one, two), (two, "f")]
        labels[one] = labels[two] = [f"a{i}"]
    return _ts(states, edges, ["s"], labels)


RESTRICTOR = parse_ctl("EX (t & EG (t & !EX EX f))")
RSWITCH = parse_ctl("EX EX (b1 & !EX f & !EX (b1 & AX (b1 & AX f)))")


def rswitch_collapsed(K: int, pairs: int = 0) -> Partition:
    """Partition merging every triple (and every button pair)."""
    seed = rswitch_trunc(K, pairs)
    blocks = [["s"], ["f"]] + [[f"t{k}"] for k in range(K)]
    blocks += [[f"r{k}.{h}" for h in range(1, 4)] for k in range(K)]
    blocks += [[f"a{i}.1", f"a{i}.2"] for i in range(1, pairs + 1)]
    return Partition.of(seed, blocks)


def rswitch_frame(K: int = 2, pairs: int = 0, relation: str = "search") -> GeneralFrame:
    """Every refinement of the collapsed gadget inside the truncated one.

    Triples are told apart by their labels, so nothing is identified up to
    isomorphism: 5**K * 2**pairs worlds.

    Because the t-chain ends in a self-loop, the restrictor holds exactly
    when the last triple has its first and third states apart. The
    restricted-switch pattern breaks from every world where the last triple
    still has them together and triple 0 has its middle state on its own
    (partitions 13|2 or 1|2|3). From there the switch can no longer be turned
    on without pushing the restrictor. ``rswitch_budget`` lists the worlds
    where triple 0 can still be turned on.
    """
    seed = rswitch_trunc(K, pairs)
    enum = enumerate_abstractions(seed, "iso", max_states=MAX_STATES + 4,
                                  max_worlds=5 ** K * 2 ** pairs,
                                  below=rswitch_collapsed(K, pairs))
    if not enum.complete:
        raise MlarError(enum.reason)
    return build_general_frame(enum.worlds, relation)


def rswitch_budget(g: GeneralFrame) -> list:
    """Worlds whose triple 0 still has its middle state merged with a neighbour."""
    out = []
    for w in g.worlds:
        blocks = w.partitions[0]
        mid = next(b for b in blocks if "r0.2" in b)
        if len(mid) > 1:
            out.append(w.id)
    return out


# -- decisions -----------------------------------------------------------------

def decision_chain(n: int) -> TransitionSystem:
    """``s`` then ``n`` diamonds ``a_i | b_i -> c_i``, ending in a self-loop sink ``f``."""
    states = ["s"]
    labels = {"s": ["s"], "f": ["f"]}
    edges = []
    prev = "s"
    for i in range(n):
        a, b, c = f"a{i}", f"b{i}", f"c{i}"
        states += [a, b, c]
        labels[a], labels[b], labels[c] = [a], [b], ["c"]
        edges += [(prev, a), (prev, b), (a, c), (b, c)]
        prev = c
    states.append("f")
    edges += [(prev, "f"), ("f", "f")]
    return _ts(states, edges, ["s"], labels)


def pruned_refinement(n: int, point: tuple) -> TransitionSystem:
    """Refinement of ``decision_chain(n)`` where a_i is unreachable when
    ``point[i] == 0`` and b_i when ``point[i] == 1``.

    The predecessor of a pruned state keeps every other edge; a fresh
    unreachable copy of it carries the single edge into the pruned state,
    so every original transition is still induced.
    """
    base = decision_chain(n)
    states = list(base.states)
    labels = dict(base.labels)
    edges = set(base.transitions)
    for i, v in enumerate(point):
        if v is None:
            continue
        pred = "s" if i == 0 else f"c{i - 1}"
        gone = f"a{i}" if v == 0 else f"b{i}"
        copy = f"{pred}^{gone}"
        states.append(copy)
        labels[copy] = base.labels[pred]
        edges.discard((pred, gone))
        edges.add((copy, gone))
    r = _ts(states, edges, ["s"], labels, base.ap)
    back = {s: s.split("^")[0] for s in r.states}
    verdict = is_abstraction(AbstractionWitness(r, base, back))
    if not verdict:
        raise InvariantError(f"pruned refinement is not a refinement: {verdict}")
    return r


def decision_formulas(n: int) -> list:
    """``(λ_i, δ_i)``: a_i unreachable, b_i unreachable."""
    return [(AG(Not(Atom(f"a{i}"))), AG(Not(Atom(f"b{i}")))) for i in range(n)]


def pruned_subframe(n: int, cap: int = 3, relation: str = "search"):
    """Frame of all pruned refinements; worlds are named like the partial
    functions they encode (``?`` undecided, ``0`` a_i gone, ``1`` b_i gone)."""
    if n > cap:
        raise MlarError(f"n={n} exceeds cap {cap}")
    worlds = [World(fpf_world(p), pruned_refinement(n, p)) for p in fpf_points(n)]
    g = build_general_frame(worlds, "search" if relation == "coarsen" else relation)
    return g, decision_formulas(n)


# -- dispatch ------------------------------------------------------------------

def parse_name(name: str):
    """Split ``family:1,2`` into ``("family", [1, 2])``."""
    family, _, rest = name.partition(":")
    if family not in FAMILIES:
        raise MlarError(f"unknown family {family!r}")
    try:
        args = [int(x) for x in rest.split(",") if x.strip()]
    except ValueError:
        raise MlarError(f"bad parameters in {name!r}") from None
    if any(a < 0 for a in args):
        raise MlarError("parameters must be non-negative")
    return family, args


def gen(name: str):
    """Build a corpus object from a ``family[:params]`` name."""
    family, args = parse_name(name)
    builders = {
        "fig1_t1": fig1_t1, "fig1_t2": fig1_t2, "fig1_s_trunc": fig1_s_trunc,
        "fig2_s": fig2_s, "fig2_t1": fig2_t1, "fig2_t2": fig2_t2, "fig2_t3": fig2_t3,
        "buttons": buttons, "switch_trunc": switch_trunc, "rswitch_trunc": rswitch_trunc,
        "decision_chain": decision_chain,
        "pruned_subframe": lambda n=1: pruned_subframe(n)[0],
    }
    try:
        out = builders[family](*args)
    except TypeError:
        raise MlarError(f"wrong number of parameters for {family}") from None
    if isinstance(out, TransitionSystem) and len(out.states) > 64:
        raise MlarError(f"{family} with {args} is too large")
    return out
