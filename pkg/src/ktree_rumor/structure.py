"""Structural measurements: clustering, diameter, draft, expansion, max degree."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .graphs import EvolvingGraph, Graph
from .pushpull import DisconnectedGraphError

EXACT_EXPANSION_LIMIT = 24
EXACT_DIAMETER_LIMIT = 100_000


class UndefinedMetricError(ValueError):
    pass


class GraphTooLargeError(ValueError):
    pass


def neighborhood_edge_counts(g: Graph) -> np.ndarray:
    """|<N(u)>|: number of edges with both ends adjacent to u, per vertex."""
    a = g.adjacency_matrix
    return np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() // 2


def clustering_coefficient(g: Graph, exact: bool = True) -> Fraction | float:
    """Mean over vertices of |<N(u)>| / C(deg(u), 2).

    Rational when ``exact``; large graphs should pass ``exact=False``.
    """
    deg = g.degrees
    if g.n == 0 or deg.min() < 2:
        raise UndefinedMetricError("clustering needs every vertex to have degree >= 2")
    tri = neighborhood_edge_counts(g)
    if not exact:
        return float(np.mean(tri / (deg * (deg - 1) / 2)))
    # group by (triangles, degree) so the rational sum has few terms
    pairs, mult = np.unique(np.stack([tri, deg], axis=1), axis=0, return_counts=True)
    total = sum(
        (Fraction(int(t) * int(c), comb(int(d), 2)) for (t, d), c in zip(pairs, mult)), Fraction(0)
    )
    return total / g.n


def _bfs_distances(g: Graph, source: int) -> np.ndarray:
    d = shortest_path(g.adjacency_matrix, directed=False, unweighted=True, indices=source)
    if np.isinf(d).any():
        raise DisconnectedGraphError("graph is disconnected")
    return d.astype(np.int64)


def diameter(g: Graph) -> int:
    """Exact diameter by eccentricity bounding.

    Each BFS tightens per-vertex eccentricity bounds; vertices whose upper
    bound cannot beat the best eccentricity seen are dropped.
    """
    n = g.n
    if n > EXACT_DIAMETER_LIMIT:
        raise GraphTooLargeError(f"exact diameter limited to {EXACT_DIAMETER_LIMIT} vertices")
    if n == 1:
        return 0
    lower = np.zeros(n, dtype=np.int64)
    upper = np.full(n, n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    best = 0
    pick_high = True
    deg = g.degrees
    v = int(np.argmax(deg))
    while alive.any():
        dist = _bfs_distances(g, v)
        ecc = int(dist.max())
        best = max(best, ecc)
        lower = np.maximum(lower, np.maximum(dist, ecc - dist))
        upper = np.minimum(upper, ecc + dist)
        alive[v] = False
        alive &= upper > best
        if not alive.any():
            break
        idx = np.flatnonzero(alive)
        if pick_high:
            v = int(idx[np.argmax(upper[idx])])
        else:
            v = int(idx[np.argmin(lower[idx])])
        pick_high = not pick_high
    return best


def eccentricity_sample(g: Graph, sources, rng=None) -> int:
    """Lower bound on the diameter from a few BFS runs plus a double sweep.

    ``sources`` is either an iterable of vertices or a count of random ones.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if isinstance(sources, (int, np.integer)):
        sources = rng.choice(g.n, size=min(int(sources), g.n), replace=False).tolist()
    best = 0
    for s in sources:
        dist = _bfs_distances(g, int(s))
        far = int(np.argmax(dist))
        best = max(best, int(dist[far]), int(_bfs_distances(g, far).max()))
    return best


def diameter_estimate(g: Graph, rng=None, exact_limit: int = EXACT_DIAMETER_LIMIT, samples: int = 4) -> tuple[int, bool]:
    """(value, exact): exact diameter when small enough, else a sampled lower bound."""
    if g.n <= exact_limit:
        return diameter(g), True
    return eccentricity_sample(g, samples, rng), False


def draft_labels(g: EvolvingGraph) -> tuple[np.ndarray, np.ndarray]:
    """Draft of every vertex and every registered clique.

    Seeds and the seed clique have draft 0; a newborn gets its birth clique's
    draft plus one; a clique's draft is the largest draft among its members.
    """
    g.require_registry()
    k = g.k
    vdraft = np.zeros(g.n, dtype=np.int64)
    cdraft = np.zeros(g.num_cliques, dtype=np.int64)
    birth = g.birth_clique
    members = g.clique_members
    # cliques created in round t are exactly those made by vertex k + t - 1
    first_of_round = np.searchsorted(g.clique_created, np.arange(g.steps + 2))
    for t in range(1, g.steps + 1):
        x = k + t - 1
        vdraft[x] = cdraft[birth[x]] + 1
        lo, hi = first_of_round[t], first_of_round[t + 1]
        cdraft[lo:hi] = vdraft[members[lo:hi]].max(axis=1)
    return vdraft, cdraft


def max_degree(g: Graph) -> int:
    return int(g.degrees.max()) if g.n else 0


@dataclass(frozen=True)
class ExpansionReport:
    vertex_expansion: Fraction
    conductance: Fraction
    witness_set_alpha: frozenset[int]
    witness_set_phi: frozenset[int]
    exact: bool


def vertex_boundary(g: Graph, s: set[int] | frozenset[int]) -> set[int]:
    out = set()
    for u in s:
        out.update(g.adj[u])
    return out - set(s)


def cut_edges(g: Graph, s: set[int] | frozenset[int]) -> int:
    return sum(1 for u in s for v in g.adj[u] if v not in s)


def volume(g: Graph, s) -> int:
    return int(sum(len(g.adj[u]) for u in s))


def _popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x).astype(np.int64)


def exact_expansion(g: Graph) -> ExpansionReport:
    """Exact vertex expansion and conductance by enumerating every subset.

    Subset data is built by doubling: the arrays for masks below 2^i are
    extended to 2^(i+1) by adding vertex i.
    """
    n = g.n
    if n > EXACT_EXPANSION_LIMIT:
        raise GraphTooLargeError(f"exact expansion limited to {EXACT_EXPANSION_LIMIT} vertices")
    if n < 2:
        raise UndefinedMetricError("expansion needs at least two vertices")
    adjmask = np.zeros(n, dtype=np.uint32)
    for u in range(n):
        for v in g.adj[u]:
            adjmask[u] |= np.uint32(1 << v)
    deg = g.degrees

    nbr = np.zeros(1, dtype=np.uint32)
    vol = np.zeros(1, dtype=np.int64)
    inner = np.zeros(1, dtype=np.int64)  # edges inside the subset
    for i in range(n):
        masks = np.arange(len(nbr), dtype=np.uint32)
        nbr = np.concatenate([nbr, nbr | adjmask[i]])
        vol = np.concatenate([vol, vol + deg[i]])
        inner = np.concatenate([inner, inner + _popcount(masks & adjmask[i])])
    masks = np.arange(1 << n, dtype=np.uint32)
    size = _popcount(masks)
    boundary = _popcount(nbr & ~masks & np.uint32((1 << n) - 1))
    cut = vol - 2 * inner

    ok = (size > 0) & (2 * size <= n)
    ratio = np.where(ok, boundary / np.maximum(size, 1), np.inf)
    ia = int(np.argmin(ratio))
    total_vol = int(vol[-1])
    ok = (vol > 0) & (2 * vol <= total_vol)
    ratio = np.where(ok, cut / np.maximum(vol, 1), np.inf)
    ip = int(np.argmin(ratio))

    def members(mask: int) -> frozenset[int]:
        return frozenset(v for v in range(n) if mask >> v & 1)

    return ExpansionReport(
        Fraction(int(boundary[ia]), int(size[ia])),
        Fraction(int(cut[ip]), int(vol[ip])),
        members(ia),
        members(ip),
        True,
    )


def _bag_tree(g: EvolvingGraph) -> np.ndarray:
    """Parent of each non-seed vertex in the tree decomposition, -1 = seed bag.

    Vertex x's bag is x plus its birth clique; the parent bag belongs to the
    youngest member of the birth clique, whose own bag contains the whole
    birth clique of x.
    """
    k = g.k
    par = np.full(g.n, -1, dtype=np.int64)
    if g.steps:
        youngest = g.clique_members[g.birth_clique[k:]].max(axis=1)
        par[k:] = np.where(youngest >= k, youngest, -1)
    return par


def heuristic_expansion(g: EvolvingGraph) -> ExpansionReport:
    """Upper bounds on vertex expansion and conductance from a bag separator.

    Picks the bag whose removal leaves the most balanced components, packs
    components into a set of at most half the vertices and reports the exact
    ratios of that set (and of the opposite side for conductance).
    """
    g.require_registry()
    n, k = g.n, g.k
    par = _bag_tree(g)
    size = np.ones(n, dtype=np.int64)
    size[:k] = 0
    for x in range(n - 1, k - 1, -1):
        if par[x] >= 0:
            size[par[x]] += size[x]
    children: list[list[int]] = [[] for _ in range(n)]
    roots = []
    for x in range(k, n):
        (children[par[x]] if par[x] >= 0 else roots).append(x)

    best = None
    for c in range(k - 1, n):
        if c < k:
            kids, bag, up = roots, set(range(k)), 0
        else:
            kids, bag = children[c], set(g.birth_members(c)) | {c}
            up = n - size[c] - k
        biggest = max([up] + [int(size[y]) for y in kids])
        if best is None or biggest < best[0]:
            best = (biggest, c, kids, bag, up)
    _, c, kids, bag, up = best

    def subtree(y: int) -> set[int]:
        out, stack = set(), [y]
        while stack:
            z = stack.pop()
            out.add(z)
            stack.extend(children[z])
        return out

    parts = [subtree(y) for y in kids]
    if up > 0:
        inside = set().union(*parts) | bag
        parts.append(set(range(n)) - inside)
    parts.sort(key=len, reverse=True)
    side_a: set[int] = set()
    for p in parts:
        if 2 * (len(side_a) + len(p)) <= n:
            side_a |= p
    if not side_a:
        side_a = {int(np.argmin(g.degrees))}
    side_b = set(range(n)) - side_a - bag

    alpha = Fraction(len(vertex_boundary(g, side_a)), len(side_a))
    total_vol = volume(g, range(n))
    phi_best = None
    for s in [side_a, side_b] + parts:
        v = volume(g, s)
        if not s or 2 * v > total_vol:
            continue
        val = Fraction(cut_edges(g, s), v)
        if phi_best is None or val < phi_best[0]:
            phi_best = (val, s)
    if phi_best is None:
        s = {int(np.argmin(g.degrees))}
        phi_best = (Fraction(cut_edges(g, s), volume(g, s)), s)
    return ExpansionReport(alpha, phi_best[0], frozenset(side_a), frozenset(phi_best[1]), False)


def expansion(g: Graph) -> ExpansionReport:
    if g.n <= EXACT_EXPANSION_LIMIT:
        return exact_expansion(g)
    if isinstance(g, EvolvingGraph):
        return heuristic_expansion(g)
    raise GraphTooLargeError("heuristic expansion needs an EvolvingGraph")
