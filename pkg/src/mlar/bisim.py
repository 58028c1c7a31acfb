"""Bisimulation classes over the disjoint union of several systems.

Refinement proceeds in rounds: round 0 groups states by label, and round
k+1 splits every block by the set of round-k blocks reachable in one
step. The per-round assignment is kept so that a separating CTL formula
can be rebuilt for any pair of states that end in different blocks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ts import TransitionSystem


@dataclass(frozen=True, eq=False)
class BisimPartition:
    systems: tuple
    nodes: tuple            # (system index, state) in declaration order
    rounds: tuple           # per round: dict node -> block id
    splits: tuple           # (round, block id, cause) for every executed split

    @property
    def block_of(self) -> dict:
        return self.rounds[-1]

    @property
    def blocks(self) -> list:
        out: dict = {}
        for n in self.nodes:
            out.setdefault(self.block_of[n], []).append(n)
        return [out[k] for k in sorted(out)]

    def same(self, a, b) -> bool:
        return self.block_of[a] == self.block_of[b]

    def separation_round(self, a, b) -> int | None:
        for k, r in enumerate(self.rounds):
            if r[a] != r[b]:
                return k
        return None

    def successors(self, node) -> list:
        i, s = node
        return [(i, t) for t in self.systems[i].succ[s]]


def _rank(nodes, key):
    ids: dict = {}
    out = {}
    for n in nodes:
        k = key(n)
        if k not in ids:
            ids[k] = len(ids)
        out[n] = ids[k]
    return out


def bisim_classes(systems: Sequence[TransitionSystem]) -> BisimPartition:
    systems = tuple(systems)
    nodes = tuple((i, s) for i, ts in enumerate(systems) for s in ts.states)
    ap = sorted(set().union(*(set(ts.ap) for ts in systems)) if systems else ())
    current = _rank(nodes, lambda n: tuple(sorted(systems[n[0]].labels[n[1]])))
    rounds = [current]
    splits = [(0, None, "label " + ",".join(ap))] if len(set(current.values())) > 1 else []
    while True:
        prev = rounds[-1]
        succ_blocks = {n: frozenset(prev[(n[0], t)] for t in systems[n[0]].succ[n[1]])
                       for n in nodes}
        nxt = _rank(nodes, lambda n: (prev[n], tuple(sorted(succ_blocks[n]))))
        if len(set(nxt.values())) == len(set(prev.values())):
            break
        k = len(rounds)
        members: dict = {}
        for n in nodes:
            members.setdefault(prev[n], set()).add(nxt[n])
        for b in sorted(members):
            if len(members[b]) > 1:
                splits.append((k, b, "EX"))
        rounds.append(nxt)
    return BisimPartition(systems, nodes, tuple(rounds), tuple(splits))
