"""s-barriers: pairs of disjoint k-cliques whose connecting edges form a cut."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

from .graphs import EvolvingGraph, Graph, force_barrier

__all__ = ["BarrierWitness", "verify_barrier", "find_barrier", "iter_barriers", "force_barrier", "seed_barrier"]


@dataclass(frozen=True)
class BarrierWitness:
    clique1: tuple[int, ...]
    clique2: tuple[int, ...]
    s: int
    cut_verified: bool = True

    def to_record(self) -> dict:
        return {"clique1": list(self.clique1), "clique2": list(self.clique2), "s": self.s}


def _check_clique(g: Graph, c: tuple[int, ...]) -> None:
    nbr = g.neighbor_sets
    for i, a in enumerate(c):
        g._check_vertex(a)
        for b in c[i + 1:]:
            if b not in nbr[a]:
                raise ValueError(f"{c} is not a clique: {a}-{b} missing")


def _sides_reconnect(g: Graph, c1: set[int], c2: set[int]) -> bool:
    """True if c1 reaches c2 without using an edge between them.

    Every vertex reaches c1 | c2 without such edges, so this decides whether
    deleting them leaves the graph connected. Both sides are searched in
    lockstep so the cost is that of the smaller side.
    """
    owner = {v: 0 for v in c1}
    owner.update((v, 1) for v in c2)
    home = (c1, c2)
    queues = (deque(c1), deque(c2))
    while queues[0] and queues[1]:
        for side in (0, 1):
            u = queues[side].popleft()
            other = home[1 - side]
            for v in g.adj[u]:
                seen = owner.get(v)
                if seen is None:
                    owner[v] = side
                    queues[side].append(v)
                elif seen != side and not (u in home[side] and v in other):
                    return True
            if not queues[side]:
                return False
    return False


def verify_barrier(g: Graph, clique1, clique2) -> BarrierWitness | None:
    """Witness if the clique1-clique2 edges form a cut, else None.

    ``s`` is the smallest degree over the 2k vertices.
    """
    c1, c2 = tuple(sorted(clique1)), tuple(sorted(clique2))
    if len(c1) != len(c2) or not c1:
        raise ValueError("barrier cliques must be non-empty and equally sized")
    if set(c1) & set(c2):
        raise ValueError("barrier cliques must be disjoint")
    _check_clique(g, c1)
    _check_clique(g, c2)
    if _sides_reconnect(g, set(c1), set(c2)):
        return None
    s = min(g.degree(v) for v in c1 + c2)
    return BarrierWitness(c1, c2, s, True)


def _candidates(g: EvolvingGraph) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(C, D) pairs shaped like the seed pattern: D is a registered clique whose
    members were all born into cliques inside C | D, with C a k-set."""
    k = g.k
    members = g.clique_members.tolist()
    birth = g.birth_clique.tolist()
    seen = set()
    for d in members:
        if d[0] < k:
            continue
        dset = set(d)
        u = set()
        for v in d:
            u.update(members[birth[v]])
        u -= dset
        if len(u) != k:
            continue
        key = (tuple(sorted(u)), tuple(d))
        if key not in seen:
            seen.add(key)
            yield key


def iter_barriers(g: EvolvingGraph, s_min: int = 0) -> Iterator[BarrierWitness]:
    """Verified barriers among the seed-pattern candidates. Sound, not complete."""
    g.require_registry()
    deg = g.degrees
    nbr = g.neighbor_sets
    for c, d in _candidates(g):
        both = c + d
        if min(int(deg[v]) for v in both) < s_min:
            continue
        try:
            _check_clique(g, c)
        except ValueError:
            continue
        cset, dset = set(c), set(d)
        # a common neighbour outside C | D always reconnects the sides
        shortcut = any(
            w not in cset and w not in dset and not cset.isdisjoint(nbr[w])
            for v in d
            for w in g.adj[v]
        )
        if shortcut:
            continue
        w = verify_barrier(g, c, d)
        if w is not None:
            yield w


def find_barrier(g: EvolvingGraph, s_min: int = 0, strongest: bool = False) -> BarrierWitness | None:
    """First verified barrier with s >= s_min, or the one with largest s."""
    if s_min > g.n:
        return None
    if not strongest:
        return next(iter_barriers(g, s_min), None)
    return max(iter_barriers(g, s_min), key=lambda w: w.s, default=None)


def seed_barrier(g: EvolvingGraph) -> BarrierWitness | None:
    """Check the seed clique against the first k newborns (the forced pattern)."""
    k = g.k
    if g.n < 2 * k:
        return None
    c, d = tuple(range(k)), tuple(range(k, 2 * k))
    try:
        return verify_barrier(g, c, d)
    except ValueError:
        return None
