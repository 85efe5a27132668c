"""Graph containers and the random growth processes.

Vertex ids are birth indices: ``0..k-1`` form the seed clique and the vertex
born in round ``t`` has id ``k + t - 1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

MAX_VERTICES = 50_000_000


class Family(str, enum.Enum):
    KTREE = "ktree"
    APOLLONIAN = "apollonian"


class InvalidParameterError(ValueError):
    pass


class RegistryMissingError(RuntimeError):
    pass


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


class Graph:
    """Simple undirected graph on vertices ``0..n-1`` stored as adjacency lists."""

    def __init__(self, adj: list[list[int]]):
        self.adj = adj

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        adj: list[list[int]] = [[] for _ in range(n)]
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        return cls(adj)

    @property
    def n(self) -> int:
        return len(self.adj)

    def __len__(self) -> int:
        return len(self.adj)

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return len(self.adj[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adj), dtype=np.int64, count=self.n)

    @cached_property
    def neighbor_sets(self) -> list[frozenset[int]]:
        return [frozenset(a) for a in self.adj]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, nbrs in enumerate(self.adj):
            for v in nbrs:
                if u < v:
                    yield u, v

    @property
    def num_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) with each row sorted."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter(
            (v for nbrs in self.adj for v in sorted(nbrs)), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        indptr, indices = self.csr
        data = np.ones(len(indices), dtype=np.int64)
        return sp.csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        ncomp, _ = connected_components(self.adjacency_matrix, directed=False)
        return ncomp == 1

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise KeyError(f"unknown vertex {v}")


@dataclass(frozen=True)
class CliqueRecord:
    members: tuple[int, ...]
    active: bool
    created_round: int


class EvolvingGraph(Graph):
    """A random k-tree or k-Apollonian network together with its growth history.

    The clique registry is stored column-wise:

    * ``clique_members[i]`` -- sorted member ids of clique ``i``
    * ``clique_created[i]`` -- round in which it appeared (0 for the seed clique)
    * ``clique_deactivated[i]`` -- round in which it was chosen, or -1; only the
      Apollonian process deactivates cliques
    * ``clique_parent[i]`` -- the clique chosen in the round that created ``i``
    * ``birth_clique[v]`` -- clique that vertex ``v`` was joined to (-1 for seeds)
    """

    def __init__(
        self,
        family: Family,
        k: int,
        steps: int,
        adj: list[list[int]],
        clique_members: np.ndarray | None,
        clique_created: np.ndarray | None,
        clique_deactivated: np.ndarray | None,
        clique_parent: np.ndarray | None,
        birth_clique: np.ndarray | None,
        seed: int | None = None,
    ):
        super().__init__(adj)
        self.family = Family(family)
        self.k = k
        self.steps = steps
        self.seed = seed
        self.clique_members = clique_members
        self.clique_created = clique_created
        self.clique_deactivated = clique_deactivated
        self.clique_parent = clique_parent
        self.birth_clique = birth_clique

    def __repr__(self) -> str:
        return f"EvolvingGraph({self.family.value}, k={self.k}, steps={self.steps}, n={self.n})"

    @property
    def has_registry(self) -> bool:
        return self.clique_members is not None

    def require_registry(self) -> None:
        if not self.has_registry:
            raise RegistryMissingError("operation needs the clique registry")

    @property
    def num_cliques(self) -> int:
        self.require_registry()
        return len(self.clique_members)

    @property
    def active_mask(self) -> np.ndarray:
        self.require_registry()
        return self.clique_deactivated < 0

    @property
    def num_active_cliques(self) -> int:
        return int(self.active_mask.sum())

    def clique(self, i: int) -> CliqueRecord:
        self.require_registry()
        return CliqueRecord(
            tuple(int(x) for x in self.clique_members[i]),
            bool(self.clique_deactivated[i] < 0),
            int(self.clique_created[i]),
        )

    def cliques(self) -> list[CliqueRecord]:
        return [self.clique(i) for i in range(self.num_cliques)]

    def round_of_birth(self, v: int) -> int:
        self._check_vertex(v)
        return max(0, v - self.k + 1)

    def is_seed(self, v: int) -> bool:
        return v < self.k

    def birth_members(self, v: int) -> tuple[int, ...]:
        """Members of the clique ``v`` was joined to (empty for seeds)."""
        self.require_registry()
        if v < self.k:
            return ()
        return tuple(int(x) for x in self.clique_members[self.birth_clique[v]])

    def truncated(self, m: int) -> "EvolvingGraph":
        """The graph as it was at the end of round ``m`` (G(m) or A(m))."""
        if not 0 <= m <= self.steps:
            raise InvalidParameterError(f"round {m} outside 0..{self.steps}")
        nv = self.k + m
        adj = [[u for u in nbrs if u < nv] for nbrs in self.adj[:nv]]
        if not self.has_registry:
            return EvolvingGraph(self.family, self.k, m, adj, None, None, None, None, None, self.seed)
        keep = self.clique_created <= m
        deact = self.clique_deactivated[keep].copy()
        deact[deact > m] = -1
        return EvolvingGraph(
            self.family,
            self.k,
            m,
            adj,
            self.clique_members[keep],
            self.clique_created[keep],
            deact,
            self.clique_parent[keep],
            self.birth_clique[:nv],
            self.seed,
        )


def _grow(k: int, steps: int, family: Family, rng,
          forced: list[tuple[int, ...]] | None = None,
          spared: frozenset[tuple[int, ...]] = frozenset()) -> EvolvingGraph:
    """Shared growth loop.

    ``forced`` lists the member tuples chosen in rounds 1..len(forced). After
    a forced prefix, every clique that existed at its end is rejected and
    redrawn unless its members are in ``spared``.
    """
    if steps < 0:
        raise InvalidParameterError("steps must be non-negative")
    if k + steps > MAX_VERTICES:
        raise MemoryError(f"{k + steps} vertices exceeds the budget of {MAX_VERTICES}")
    rng = _rng(rng)
    apollonian = family is Family.APOLLONIAN
    n = k + steps
    adj: list[list[int]] = [[u for u in range(k) if u != v] for v in range(k)]
    adj.extend([] for _ in range(steps))
    members: list[tuple[int, ...]] = [tuple(range(k))]
    created = [0]
    parent = [-1]
    deact = [-1]
    birth = [-1] * n
    active = [0]  # Apollonian: ids of active cliques
    index_of: dict[tuple[int, ...], int] = {}
    forced = forced or []
    if forced:
        index_of[members[0]] = 0

    # Unconstrained rounds: the number of candidates is deterministic, so all
    # uniform choices can be drawn up front.
    if apollonian:
        highs = (k - 1) * np.arange(steps, dtype=np.int64) + 1
    else:
        highs = k * np.arange(steps, dtype=np.int64) + 1
    draws = rng.integers(0, highs).tolist() if steps else []
    forbidden_until = 0
    allowed: frozenset[int] = frozenset()

    for t in range(1, steps + 1):
        x = k + t - 1
        if t <= len(forced):
            c = index_of[forced[t - 1]]
            if apollonian:
                slot = active.index(c)
        elif forced:
            if t == len(forced) + 1:
                forbidden_until = len(members)
                allowed = frozenset(i for i in range(len(members)) if members[i] in spared)
            while True:
                j = int(rng.integers(0, len(active) if apollonian else len(members)))
                c = active[j] if apollonian else j
                if c >= forbidden_until or c in allowed:
                    break
            slot = j
        else:
            slot = draws[t - 1]
            c = active[slot] if apollonian else slot
        mem = members[c]
        for u in mem:
            adj[u].append(x)
        adj[x] = list(mem)
        birth[x] = c
        first_new = len(members)
        for i in range(k):
            new = mem[:i] + mem[i + 1:] + (x,)
            members.append(new)
            created.append(t)
            parent.append(c)
            deact.append(-1)
            if forced:
                index_of[new] = first_new + i
        if apollonian:
            deact[c] = t
            active[slot] = first_new
            active.extend(range(first_new + 1, first_new + k))

    return EvolvingGraph(
        family,
        k,
        steps,
        adj,
        np.asarray(members, dtype=np.int64).reshape(-1, k),
        np.asarray(created, dtype=np.int64),
        np.asarray(deact, dtype=np.int64),
        np.asarray(parent, dtype=np.int64),
        np.asarray(birth, dtype=np.int64),
    )



def generate_k_tree(k: int, steps: int, rng=None) -> EvolvingGraph:
    """Random k-tree: each round a uniformly random k-clique gets a new common neighbour."""
    if k < 2:
        raise InvalidParameterError("random k-trees need k >= 2")
    g = _grow(k, steps, Family.KTREE, rng)
    g.seed = rng if isinstance(rng, (int, np.integer)) else None
    return g


def generate_k_apollonian(k: int, steps: int, rng=None) -> EvolvingGraph:
    """Random k-Apollonian network: chosen cliques are deactivated for good.

    k = 2 is rejected: the active-clique counting used downstream needs k > 2.
    """
    if k < 3:
        raise InvalidParameterError("random k-Apollonian networks need k >= 3")
    g = _grow(k, steps, Family.APOLLONIAN, rng)
    g.seed = rng if isinstance(rng, (int, np.integer)) else None
    return g


def generate(family: Family | str, k: int, steps: int, rng=None) -> EvolvingGraph:
    family = Family(family)
    if family is Family.KTREE:
        return generate_k_tree(k, steps, rng)
    return generate_k_apollonian(k, steps, rng)


def barrier_pattern(k: int) -> list[tuple[int, ...]]:
    """Birth cliques of v_1..v_k under the forced seed pattern.

    With seeds u_i = i - 1 and v_i = k + i - 1, vertex v_i joins
    {v_1, ..., v_{i-1}, u_i, ..., u_k}.
    """
    out = []
    for i in range(1, k + 1):
        vs = tuple(k + j - 1 for j in range(1, i))
        us = tuple(j - 1 for j in range(i, k + 1))
        out.append(tuple(sorted(us + vs)))
    return out


def force_barrier(k: int, steps: int, rng=None) -> EvolvingGraph:
    """Random k-tree conditioned on the seed barrier event.

    The first k births follow :func:`barrier_pattern`; every later round
    redraws until it picks a clique other than the k^2 - 1 cliques that mix
    seed vertices with v_1..v_k, which samples the conditioned process exactly.
    """
    if k < 2:
        raise InvalidParameterError("k must be at least 2")
    if steps < k:
        raise InvalidParameterError("force_barrier needs steps >= k")
    pattern = barrier_pattern(k)
    spared = frozenset({tuple(range(k)), tuple(range(k, 2 * k))})
    g = _grow(k, steps, Family.KTREE, rng, forced=pattern, spared=spared)
    g.seed = rng if isinstance(rng, (int, np.integer)) else None
    return g


@dataclass
class RecursiveTree:
    d: int
    parent: list[int] = field(default_factory=lambda: [-1])
    depth: list[int] = field(default_factory=lambda: [0])

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def height(self) -> int:
        return max(self.depth)


def generate_recursive_tree(d: int, steps: int, rng=None) -> RecursiveTree:
    """Random d-ary recursive tree: a uniform leaf gets d children each step."""
    if d < 1:
        raise InvalidParameterError("d must be at least 1")
    rng = _rng(rng)
    tree = RecursiveTree(d)
    leaves = [0]
    highs = (d - 1) * np.arange(steps, dtype=np.int64) + 1
    for j in (rng.integers(0, highs).tolist() if steps else []):
        node = leaves[j]
        base = tree.size
        dep = tree.depth[node] + 1
        tree.parent.extend([node] * d)
        tree.depth.extend([dep] * d)
        leaves[j] = base
        leaves.extend(range(base + 1, base + d))
    return tree


def recursive_tree_height_constant(d: int) -> float:
    """Root in (d, inf) of a (d-1) log(d e / (a (d-1))) = 1.

    Heights of random d-ary recursive trees concentrate around this constant
    times log n.
    """
    from scipy.optimize import brentq

    if d < 2:
        raise InvalidParameterError("d must be at least 2")

    def h(a):
        return a * (d - 1) * np.log(d * np.e / (a * (d - 1))) - 1

    hi = 2.0 * d
    while h(hi) > 0:
        hi *= 2
    return float(brentq(h, float(d), hi))


def degree_of(g: Graph, v: int) -> int:
    return g.degree(v)


def degree_histogram(g: Graph) -> dict[int, int]:
    vals, counts = np.unique(g.degrees, return_counts=True)
    return {int(d): int(c) for d, c in zip(vals, counts)}


def cliques_containing(g: EvolvingGraph, v: int, active_only: bool = False) -> int:
    g.require_registry()
    g._check_vertex(v)
    mask = (g.clique_members == v).any(axis=1)
    if active_only:
        mask &= g.active_mask
    return int(mask.sum())


def cliques_containing_edge(g: EvolvingGraph, u: int, v: int, active_only: bool = False) -> int:
    """N(uv), or the active count N*(uv) when ``active_only``.

    For k = 2 every edge is itself a 2-clique and is counted.
    """
    g.require_registry()
    if not g.has_edge(u, v):
        raise ValueError(f"({u}, {v}) is not an edge")
    mem = g.clique_members
    mask = (mem == u).any(axis=1) & (mem == v).any(axis=1)
    if active_only:
        mask &= g.active_mask
    return int(mask.sum())


def edge_clique_counts(g: EvolvingGraph, active_only: bool = False) -> dict[tuple[int, int], int]:
    """N(e) (or N*(e)) for every edge at once, keyed by (min, max)."""
    g.require_registry()
    mem = g.clique_members
    if active_only:
        mem = mem[g.active_mask]
    k = g.k
    n = np.int64(g.n)
    keys = []
    for i in range(k):
        for j in range(i + 1, k):
            keys.append(mem[:, i] * n + mem[:, j])
    if not keys:
        return {}
    flat = np.concatenate(keys)
    vals, counts = np.unique(flat, return_counts=True)
    return {(int(x // n), int(x % n)): int(c) for x, c in zip(vals, counts)}


def is_perfect_elimination_order(g: Graph, order: list[int]) -> bool:
    """Each vertex's neighbours later in ``order`` must be pairwise adjacent."""
    pos = {v: i for i, v in enumerate(order)}
    nbr = g.neighbor_sets
    for v in order:
        later = [u for u in g.adj[v] if pos[u] > pos[v]]
        for i, a in enumerate(later):
            na = nbr[a]
            for b in later[i + 1:]:
                if b not in na:
                    return False
    return True


def _discrete_power_law_mle(tail: np.ndarray, d_min: int) -> float:
    from scipy.optimize import brentq
    from scipy.special import zeta

    mean_log = float(np.mean(np.log(tail)))

    def score(a):
        h = 1e-6
        dlogz = (np.log(zeta(a + h, d_min)) - np.log(zeta(a - h, d_min))) / (2 * h)
        return -dlogz - mean_log

    return float(brentq(score, 1.0001, 20.0))


def fit_power_law_exponent(degrees, d_min: int | None = None, min_tail: int = 100) -> tuple[float, int]:
    """Discrete maximum-likelihood exponent of the degree tail.

    Without ``d_min`` the cutoff minimising the Kolmogorov-Smirnov distance
    between the tail and the fitted law is used, considering only cutoffs that
    leave at least ``min_tail`` observations. Returns (exponent, d_min).
    """
    from scipy.special import zeta

    degrees = np.asarray(degrees)
    if d_min is not None:
        return _discrete_power_law_mle(degrees[degrees >= d_min].astype(float), d_min), d_min
    best = None
    for d in np.unique(degrees):
        tail = np.sort(degrees[degrees >= d])
        if len(tail) < min_tail:
            break
        d = int(d)
        a = _discrete_power_law_mle(tail.astype(float), d)
        vals, counts = np.unique(tail, return_counts=True)
        empirical = np.cumsum(counts) / len(tail)
        model = 1 - zeta(a, vals + 1) / zeta(a, d)
        dist = float(np.max(np.abs(empirical - model)))
        if best is None or dist < best[0]:
            best = (dist, a, d)
    if best is None:
        raise ValueError(f"fewer than {min_tail} observations")
    return best[1], best[2]
