"""Highway forest, fast edges, pieces and nice/bad vertices.

Everything here is a pure function of a finished :class:`EvolvingGraph` and a
cut round ``m``: vertices born by round m are *traditional*, later ones
*modern*.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import EvolvingGraph, Family, Graph, InvalidParameterError, edge_clique_counts


@dataclass(frozen=True)
class HighwayForest:
    m: int
    family: Family
    parent: np.ndarray  # over vertices of G(m); -1 for seeds
    root: np.ndarray
    depth: np.ndarray
    heights: tuple[int, ...]  # one per seed, in seed order

    @property
    def max_height(self) -> int:
        return max(self.heights)

    def edges(self) -> list[tuple[int, int]]:
        """Forest edges as (younger, older)."""
        return [(x, int(p)) for x, p in enumerate(self.parent.tolist()) if p >= 0]


def _uses_active_counts(g: EvolvingGraph) -> bool:
    return g.family is Family.APOLLONIAN


def build_highway_forest(g: EvolvingGraph, m: int) -> HighwayForest:
    """Join each vertex born by round m to the birth-clique member sharing most cliques.

    Clique counts are taken in the round-m graph (active cliques only for
    Apollonian networks). Ties go to the earliest-born member.
    """
    g.require_registry()
    if not 1 <= m <= g.steps:
        raise InvalidParameterError(f"cut round m={m} outside 1..{g.steps}")
    g1 = g.truncated(m)
    counts = edge_clique_counts(g1, active_only=_uses_active_counts(g))
    k = g.k
    nv = k + m
    parent = np.full(nv, -1, dtype=np.int64)
    root = np.arange(nv, dtype=np.int64)
    depth = np.zeros(nv, dtype=np.int64)
    for x in range(k, nv):
        best_u, best_c = -1, -1
        for u in g.birth_members(x):  # sorted, so ties keep the earliest
            c = counts.get((u, x), 0)
            if c > best_c:
                best_u, best_c = u, c
        parent[x] = best_u
        root[x] = root[best_u]
        depth[x] = depth[best_u] + 1
    heights = tuple(int(depth[root == r].max()) for r in range(k))
    return HighwayForest(m, g.family, parent, root, depth, heights)


def forest_problems(g: EvolvingGraph, forest: HighwayForest) -> list[str]:
    """Well-formedness violations (empty when the forest is as constructed)."""
    k = g.k
    out = []
    roots = set(forest.root.tolist())
    if roots != set(range(k)):
        out.append(f"roots {sorted(roots)} are not exactly the seeds")
    if (forest.parent[:k] != -1).any():
        out.append("a seed has a parent")
    for x in range(k, len(forest.parent)):
        if int(forest.parent[x]) not in g.birth_members(x):
            out.append(f"parent of {x} is outside its birth clique")
    n_trees = int((forest.parent == -1).sum())
    if n_trees != k:
        out.append(f"{n_trees} trees instead of {k}")
    return out


def clique_bound(g: EvolvingGraph) -> tuple[int, int]:
    """(degree threshold, minimum clique count) as a pair of integers.

    A forest edge xy (x younger) whose x has degree >= threshold in the round-m
    graph must lie in at least the returned count of cliques; the count is
    returned doubled so the half-integer bounds stay exact.
    """
    k = g.k
    if g.family is Family.KTREE:
        return 2 * k - 1, k * k - k
    return 2 * k - 1, (k - 1) ** 2


def verify_forest_clique_bound(g: EvolvingGraph, forest: HighwayForest) -> list[tuple[int, int, int]]:
    """Forest edges that break the deterministic clique-count bound.

    Returns (x, y, count) triples; the bound says this list is always empty.
    """
    g1 = g.truncated(forest.m)
    counts = edge_clique_counts(g1, active_only=_uses_active_counts(g))
    threshold, twice_bound = clique_bound(g)
    deg = g1.degrees
    bad = []
    for x, y in forest.edges():
        if deg[x] >= threshold:
            c = counts.get((y, x), 0)
            if 2 * c < twice_bound:
                bad.append((x, y, c))
    return bad


def classify_fast_edges(g: Graph, edges, tau: float) -> np.ndarray:
    """Edge uv is fast if u, v or a common neighbour has degree <= tau (degrees in g)."""
    deg = g.degrees
    nbr = g.neighbor_sets
    low = deg <= tau
    low_nbrs: dict[int, list[int]] = {}
    out = []
    for u, v in edges:
        if v not in nbr[u]:
            raise ValueError(f"({u}, {v}) is not an edge")
        if low[u] or low[v]:
            out.append(True)
            continue
        lu = low_nbrs.get(u)
        if lu is None:
            lu = low_nbrs[u] = [w for w in g.adj[u] if low[w]]
        nv = nbr[v]
        out.append(any(w in nv for w in lu))
    return np.asarray(out, dtype=bool)


def non_fast_fraction(g: EvolvingGraph, forest: HighwayForest, tau: float) -> float:
    """Share of forest edges that are not fast: an empirical stand-in for p_S."""
    edges = forest.edges()
    if not edges:
        return 0.0
    return float(1 - classify_fast_edges(g, edges, tau).mean())


@dataclass(frozen=True)
class PieceDecomposition:
    m: int
    base_cliques: np.ndarray  # registry ids of the round-m cliques, one per piece
    piece_of: np.ndarray  # per vertex; -1 for traditional vertices
    representatives: np.ndarray  # earliest-born member of each base clique
    piece_sizes: np.ndarray  # modern vertices per piece

    @property
    def num_pieces(self) -> int:
        return len(self.base_cliques)

    def vertex_counts(self, k: int) -> np.ndarray:
        """Vertices per piece including the k base-clique vertices."""
        return self.piece_sizes + k


def decompose_pieces(g: EvolvingGraph, m: int) -> PieceDecomposition:
    """Assign each modern vertex to the round-m clique its birth ancestry grew from."""
    g.require_registry()
    if not 0 <= m <= g.steps:
        raise InvalidParameterError(f"cut round m={m} outside 0..{g.steps}")
    created = g.clique_created
    deact = g.clique_deactivated
    early = created <= m
    if g.family is Family.APOLLONIAN:
        base_mask = early & ((deact < 0) | (deact > m))
    else:
        base_mask = early
    base = np.flatnonzero(base_mask)
    piece_of_clique = np.full(g.num_cliques, -1, dtype=np.int64)
    piece_of_clique[base] = np.arange(len(base))
    parents = g.clique_parent
    late = np.flatnonzero(~early)
    # parents precede children in the registry, and a round's cliques share one parent
    if len(late):
        pc = piece_of_clique
        for t_first in range(late[0], g.num_cliques, g.k):
            pc[t_first:t_first + g.k] = pc[parents[t_first]]
    nv = g.k + m
    piece_of = np.full(g.n, -1, dtype=np.int64)
    if g.n > nv:
        piece_of[nv:] = piece_of_clique[g.birth_clique[nv:]]
    sizes = np.bincount(piece_of[nv:], minlength=len(base)) if g.n > nv else np.zeros(len(base), np.int64)
    reps = g.clique_members[base].min(axis=1)
    return PieceDecomposition(m, base, piece_of, reps, sizes.astype(np.int64))


@dataclass(frozen=True)
class NiceReport:
    tau: float
    traditional_nice: np.ndarray  # over vertices of G(m)
    piece_nice: np.ndarray
    vertex_nice: np.ndarray  # over all vertices
    sigma: np.ndarray  # nice modern vertices

    @property
    def bad_count(self) -> int:
        return int((~self.vertex_nice).sum())

    @property
    def bad_fraction(self) -> float:
        return self.bad_count / len(self.vertex_nice)

    @property
    def modern_bad_fraction(self) -> float:
        nv = len(self.traditional_nice)
        modern = self.vertex_nice[nv:]
        return float((~modern).mean()) if len(modern) else 0.0


def classify_nice(g: EvolvingGraph, forest: HighwayForest, pieces: PieceDecomposition, tau: float) -> NiceReport:
    """Nice traditional vertices reach a seed along fast forest edges; nice pieces
    have a nice representative and only modern vertices of degree <= tau."""
    if forest.m != pieces.m:
        raise InvalidParameterError("forest and pieces use different cut rounds")
    k = g.k
    nv = k + forest.m
    edges = forest.edges()
    fast = classify_fast_edges(g, edges, tau) if edges else np.zeros(0, bool)
    trad = np.zeros(nv, dtype=bool)
    trad[:k] = True
    for (x, y), ok in zip(edges, fast.tolist()):  # edges come in birth order
        trad[x] = ok and trad[y]
    deg = g.degrees
    modern_pieces = pieces.piece_of[nv:]
    heavy = np.zeros(pieces.num_pieces, dtype=bool)
    if len(modern_pieces):
        over = deg[nv:] > tau
        heavy[np.unique(modern_pieces[over])] = True
    piece_nice = trad[pieces.representatives] & ~heavy
    vertex_nice = np.empty(g.n, dtype=bool)
    vertex_nice[:nv] = trad
    vertex_nice[nv:] = piece_nice[modern_pieces] if len(modern_pieces) else []
    sigma = nv + np.flatnonzero(vertex_nice[nv:])
    return NiceReport(tau, trad, piece_nice, vertex_nice, sigma)
