"""Frames whose worlds are finite abstractions of a seed system.

Access is refinement (``c`` sees ``d`` when ``d`` refines ``c``). Valuations
are restricted to sets of worlds that some CTL formula carves out, so two
worlds whose initial states fall into the same bisimulation classes can
never be told apart by a valuation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

from . import ctl
from .bisim import bisim_classes
from .errors import EvaluationError, FormatError, InvariantError, MlarError
from .iso import canonical_form
from .modal import KripkeFrame, ModalFormula, extension, props
from .ts import Partition, TransitionSystem, quotient, ts_from_dict, validate, find_abstraction


@dataclass(frozen=True, eq=False)
class World:
    id: str
    system: TransitionSystem
    partitions: tuple = ()      # provenance: each entry is a tuple of frozenset blocks of seed states

    @property
    def description(self) -> str:
        if not self.partitions:
            return ""
        return "|".join(",".join(sorted(b)) for b in self.partitions[0])


@dataclass(frozen=True)
class Enumeration:
    worlds: list
    complete: bool
    reason: str = ""


def _set_partitions(items: Sequence) -> list:
    """Set partitions of ``items`` via restricted growth strings, in RGS order."""
    n = len(items)
    out = []

    def grow(rgs, top):
        if len(rgs) == n:
            blocks = [[] for _ in range(top + 1)]
            for x, b in zip(items, rgs):
                blocks[b].append(x)
            out.append(blocks)
            return
        for b in range(top + 2):
            grow(rgs + [b], max(top, b))

    if n == 0:
        return [[]]
    grow([0], 0)
    return out


def label_uniform_partitions(seed: TransitionSystem, below: Partition | None = None) -> list:
    """Every label-uniform partition of the seed (finer than ``below`` if given),
    finest first, ties broken by the restricted growth string over state order."""
    groups: dict = {}
    where = below.block_of() if below is not None else {}
    for s in seed.states:
        groups.setdefault((seed.labels[s], where.get(s)), []).append(s)
    per_group = [_set_partitions(members) for members in groups.values()]
    idx = seed.index
    parts = []
    for combo in product(*per_group):
        blocks = [frozenset(b) for choice in combo for b in choice]
        blocks.sort(key=lambda b: min(idx[s] for s in b))
        rgs = [0] * len(seed.states)
        for i, b in enumerate(blocks):
            for s in b:
                rgs[idx[s]] = i
        parts.append((-len(blocks), rgs, blocks))
    parts.sort(key=lambda p: (p[0], p[1]))
    return [Partition(seed, tuple(p[2])) for p in parts]


def enumerate_abstractions(seed: TransitionSystem, mode: str = "iso", max_states: int = 14,
                           max_worlds: int = 40, below: Partition | None = None,
                           namer: Callable | None = None) -> Enumeration:
    """Quotients of the seed by label-uniform partitions.

    ``mode="iso"`` keeps one world per isomorphism class (recording every
    partition that produced it); ``mode="partition"`` keeps one world per
    partition. ``namer`` may return a display id for a world's system.
    """
    if mode not in ("iso", "partition"):
        raise MlarError(f"unknown mode {mode!r}")
    problems = validate(seed)
    if problems:
        raise MlarError(f"invalid seed: {'; '.join(problems)}")
    if len(seed.states) > max_states:
        return Enumeration([], False, f"seed has {len(seed.states)} states (cap {max_states})")
    worlds: list = []
    by_form: dict = {}
    complete, reason = True, ""
    for p in label_uniform_partitions(seed, below):
        q, _ = quotient(seed, p)
        key = canonical_form(q) if mode == "iso" else None
        if key is not None and key in by_form:
            k = by_form[key]
            worlds[k] = (worlds[k][0], worlds[k][1] + (p.blocks,))
            continue
        if len(worlds) >= max_worlds:
            complete, reason = False, f"more than {max_worlds} worlds"
            break
        if key is not None:
            by_form[key] = len(worlds)
        worlds.append((q, (p.blocks,)))
    out = []
    used = set()
    for k, (q, prov) in enumerate(worlds):
        wid = namer(q) if namer else None
        if not wid or wid in used:
            wid = f"W{k}"
        used.add(wid)
        out.append(World(wid, q, prov))
    return Enumeration(out, complete, reason)


def _finer(q_blocks, p_blocks) -> bool:
    where = {s: i for i, b in enumerate(p_blocks) for s in b}
    return all(len({where[s] for s in b}) == 1 for b in q_blocks)


def _closure(ids, pairs) -> set:
    reach = {w: {w} for w in ids}
    for a, b in pairs:
        reach[a].add(b)
    changed = True
    while changed:
        changed = False
        for a in ids:
            new = set().union(*(reach[b] for b in reach[a]))
            if new != reach[a]:
                reach[a] = new
                changed = True
    return {(a, b) for a in ids for b in reach[a]}


def compute_access(worlds: Sequence[World], relation: str = "search", budget: int = 10**6):
    """Return (access pairs, inconclusive pairs)."""
    ids = [w.id for w in worlds]
    if relation == "search":
        acc, unsure = set(), []
        for c in worlds:
            for d in worlds:
                if c is d:
                    acc.add((c.id, d.id))
                    continue
                res = find_abstraction(c.system, d.system, budget)
                if res.found:
                    acc.add((c.id, d.id))
                elif res.status == "inconclusive":
                    unsure.append((c.id, d.id))
        return acc, unsure
    if relation == "coarsen":
        if any(not w.partitions for w in worlds):
            raise MlarError("coarsen relation needs partition provenance on every world")
        pairs = [(c.id, d.id) for c in worlds for d in worlds
                 if any(_finer(q, p) for p in c.partitions for q in d.partitions)]
        return _closure(ids, pairs), []
    raise MlarError(f"unknown relation {relation!r}")


@dataclass(frozen=True)
class AdmissibleSet:
    worlds: int                 # bitmask over frame worlds
    classes: frozenset          # initial-state classes whose down-set this is
    formula: ctl.Formula        # CTL formula with exactly this extension


@dataclass(eq=False)
class GeneralFrame:
    worlds: list
    kripke: KripkeFrame
    inconclusive: list = field(default_factory=list)
    name_size: int = 3

    @cached_property
    def by_id(self) -> dict:
        return {w.id: w for w in self.worlds}

    @cached_property
    def bisim(self):
        return bisim_classes([w.system for w in self.worlds])

    @cached_property
    def initial_classes(self) -> dict:
        bp = self.bisim
        return {w.id: frozenset(bp.block_of[(i, s)] for s in w.system.initial)
                for i, w in enumerate(self.worlds)}

    @cached_property
    def blocks(self) -> list:
        groups: dict = {}
        for w in self.worlds:
            groups.setdefault(self.initial_classes[w.id], []).append(w.id)
        return list(groups.values())

    @cached_property
    def block_of(self) -> dict:
        return {w: i for i, b in enumerate(self.blocks) for w in b}

    @cached_property
    def class_list(self) -> list:
        seen = []
        for w in self.worlds:
            for c in sorted(self.initial_classes[w.id]):
                if c not in seen:
                    seen.append(c)
        return seen

    @cached_property
    def class_formulas(self) -> dict:
        """One CTL formula per initial-state class, true exactly on that class
        among the initial states of all worlds."""
        bp = self.bisim
        rep = {}
        for i, w in enumerate(self.worlds):
            for s in w.system.sorted_initial():
                rep.setdefault(bp.block_of[(i, s)], (i, s))
        memo: dict = {}
        return {c: ctl.conj(ctl.distinguishing_formula(bp, rep[c], rep[d], memo)
                            for d in self.class_list if d != c)
                for c in self.class_list}

    def worlds_satisfying(self, f: ctl.Formula) -> int:
        """Bitmask of worlds whose system satisfies ``f``."""
        m = 0
        for i, w in enumerate(self.worlds):
            if ctl.check_ctl(w.system, f).holds:
                m |= 1 << i
        return m

    def down_set(self, classes) -> int:
        m = 0
        for i, w in enumerate(self.worlds):
            if self.initial_classes[w.id] <= classes:
                m |= 1 << i
        return m

    @property
    def exact_blocks(self) -> bool:
        """True when every block-closed set of worlds is CTL-definable
        (each world's initial states are pairwise bisimilar)."""
        return all(len(c) == 1 for c in self.initial_classes.values())

    @cached_property
    def block_formulas(self) -> dict:
        out = {}
        for i, b in enumerate(self.blocks):
            classes = self.initial_classes[b[0]]
            f = ctl.disj(self.class_formulas[c] for c in sorted(classes))
            if self.down_set(classes) == self.kripke.mask(b):
                out[i] = f
        return out

    def named_sets(self) -> list:
        """Admissible sets named by the smallest CTL formulas, in enumeration order."""
        ap = sorted(set().union(*(set(w.system.ap) for w in self.worlds)))
        memos = [dict() for _ in self.worlds]
        seen, out = set(), []
        total = self.admissible_upper_bound()
        for f in ctl.enumerate_formulas(ap, self.name_size):
            core = ctl.normalize(f)
            m = 0
            for i, w in enumerate(self.worlds):
                if w.system.initial <= ctl.sat(w.system, core, memos[i]):
                    m |= 1 << i
            if m not in seen:
                seen.add(m)
                out.append((m, f))
                if len(seen) >= total:
                    break
        return out

    def admissible_upper_bound(self) -> int:
        return 2 ** len(self.class_list)

    @cached_property
    def admissible_sets(self) -> list:
        """Every CTL-definable set of worlds, each with a defining formula.

        Sets named by small formulas come first; the rest follow in binary
        order over the initial-state classes.
        """
        out, seen = [], set()
        for m, f in self.named_sets():
            out.append(AdmissibleSet(m, self._classes_of(m), f))
            seen.add(m)
        cls = self.class_list
        for bits in range(1 << len(cls)):
            chosen = frozenset(c for k, c in enumerate(cls) if bits >> k & 1)
            m = self.down_set(chosen)
            if m in seen:
                continue
            seen.add(m)
            f = ctl.disj(self.class_formulas[c] for c in cls if c in chosen)
            out.append(AdmissibleSet(m, chosen, f))
        return out

    def _classes_of(self, m: int) -> frozenset:
        return frozenset().union(*(self.initial_classes[w] for w in self.kripke.unmask(m)))

    def blocks_of_mask(self, m: int) -> list:
        return sorted({self.block_of[w] for w in self.kripke.unmask(m)})

    def mask_of_blocks(self, block_ids: Iterable[int]) -> int:
        return self.kripke.mask(w for b in block_ids for w in self.blocks[b])

    def world_ids(self) -> list:
        return [w.id for w in self.worlds]


def build_general_frame(worlds: Sequence[World], relation: str = "search",
                        budget: int = 10**6) -> GeneralFrame:
    acc, unsure = compute_access(worlds, relation, budget)
    kripke = KripkeFrame.build([w.id for w in worlds], acc)
    return GeneralFrame(list(worlds), kripke, unsure)


# -- evaluation ----------------------------------------------------------------

def _masks_from_blocks(g: GeneralFrame, v: Mapping[str, Iterable[int]]) -> dict:
    masks = {}
    admissible = {a.worlds for a in g.admissible_sets} if not g.exact_blocks else None
    for p, blocks in v.items():
        blocks = list(blocks)
        for b in blocks:
            if not 0 <= b < len(g.blocks):
                raise EvaluationError(f"no block {b}")
        m = g.mask_of_blocks(blocks)
        if admissible is not None and m not in admissible:
            raise EvaluationError(f"valuation of {p!r} is not CTL-definable")
        masks[p] = m
    return masks


def eval_general(g: GeneralFrame, v: Mapping[str, Iterable[int]], world: str,
                 f: ModalFormula) -> bool:
    """Truth of ``f`` at ``world`` under a valuation given as block indices."""
    masks = _masks_from_blocks(g, v)
    return bool(extension(g.kripke, masks, f) >> g.kripke.index[world] & 1)


def eval_worlds(g: GeneralFrame, v: Mapping[str, Iterable[str]], world: str,
                f: ModalFormula) -> bool:
    """Like ``eval_general`` but with each proposition given as a set of worlds."""
    masks = {p: g.kripke.mask(ws) for p, ws in v.items()}
    return bool(extension(g.kripke, masks, f) >> g.kripke.index[world] & 1)


@dataclass(frozen=True)
class GeneralValidity:
    status: str                       # "valid" | "invalid" | "inconclusive"
    world: str | None = None
    valuation: dict | None = None     # proposition -> sorted block indices
    worlds: dict | None = None        # proposition -> world ids
    witnesses: dict | None = None     # proposition -> CTL formula
    required: int = 0

    @property
    def valid(self):
        return self.status == "valid"


def valid_on_general(g: GeneralFrame, f: ModalFormula, at: str | None = None,
                     budget: int = 2**20) -> GeneralValidity:
    ps = props(f)
    bound = g.admissible_upper_bound() ** len(ps)
    if bound > budget:
        return GeneralValidity("inconclusive", required=bound)
    sets = g.admissible_sets
    need = g.kripke.full if at is None else 1 << g.kripke.index[at]
    for combo in product(sets, repeat=len(ps)):
        masks = {p: a.worlds for p, a in zip(ps, combo)}
        bad = need & ~extension(g.kripke, masks, f)
        if not bad:
            continue
        i = (bad & -bad).bit_length() - 1
        witnesses = {p: a.formula for p, a in zip(ps, combo)}
        for p, a in zip(ps, combo):
            if g.worlds_satisfying(a.formula) != a.worlds:
                raise InvariantError(f"witness for {p} does not define its valuation")
        return GeneralValidity(
            "invalid", g.worlds[i].id,
            {p: g.blocks_of_mask(m) for p, m in masks.items()},
            {p: g.kripke.unmask(m) for p, m in masks.items()},
            witnesses)
    return GeneralValidity("valid")


# -- files ---------------------------------------------------------------------

def bundle_to_dict(g: GeneralFrame) -> dict:
    worlds = []
    for w in g.worlds:
        entry = {"id": w.id, "system": w.system.to_dict()}
        if w.partitions:
            entry["partition"] = [sorted(b) for b in w.partitions[0]]
        worlds.append(entry)
    return {
        "worlds": worlds,
        "access": [list(p) for p in g.kripke.sorted_access()],
        "blocks": g.blocks,
        "block_formulas": {str(i): ctl.to_str(f) for i, f in sorted(g.block_formulas.items())},
    }


def bundle_from_dict(data: Mapping) -> GeneralFrame:
    if not isinstance(data, Mapping):
        raise FormatError("bundle must be a JSON object")
    unknown = set(data) - {"worlds", "access", "blocks", "block_formulas"}
    if unknown:
        raise FormatError(f"unknown keys {sorted(unknown)}")
    worlds = []
    for entry in data["worlds"]:
        if set(entry) - {"id", "system", "partition"}:
            raise FormatError(f"unknown world keys {sorted(set(entry) - {'id', 'system', 'partition'})}")
        prov = (tuple(frozenset(b) for b in entry["partition"]),) if "partition" in entry else ()
        worlds.append(World(entry["id"], ts_from_dict(entry["system"]), prov))
    kripke = KripkeFrame.build([w.id for w in worlds], [tuple(p) for p in data["access"]])
    g = GeneralFrame(worlds, kripke)
    if "blocks" in data:
        given = sorted(sorted(b) for b in data["blocks"])
        if given != sorted(sorted(b) for b in g.blocks):
            raise FormatError("stored blocks disagree with the world systems")
    return g


def save_bundle(g: GeneralFrame, path) -> str:
    text = json.dumps(bundle_to_dict(g), indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def load_bundle(path) -> GeneralFrame:
    with open(path) as fh:
        return bundle_from_dict(json.load(fh))
