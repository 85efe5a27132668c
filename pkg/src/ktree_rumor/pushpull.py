"""Synchronous Push-Pull rumour spreading."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .graphs import Graph

NEVER = np.iinfo(np.int64).max
NOT_REACHED = None

MODES = ("push-pull", "push", "pull")


class DisconnectedGraphError(ValueError):
    pass


@dataclass(frozen=True)
class SpreadTrace:
    start_vertex: int
    informed_at: np.ndarray  # round each vertex learned the rumour, NEVER if not
    counts: tuple[int, ...]  # counts[r] = informed vertices after round r
    rounds_executed: int
    completed: bool

    @property
    def n(self) -> int:
        return len(self.informed_at)

    def to_csv(self, counts_path: str | Path, vertices_path: str | Path | None = None) -> None:
        with open(counts_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["round", "informed_count"])
            w.writerows(enumerate(self.counts))
        if vertices_path is not None:
            with open(vertices_path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["vertex", "informed_at"])
                for v, r in enumerate(self.informed_at.tolist()):
                    w.writerow([v, "" if r == NEVER else r])


def default_max_rounds(n: int) -> int:
    return max(1, math.ceil(10 * n * math.log(max(n, 2))))


def run_push_pull(
    g: Graph,
    start: int,
    max_rounds: int | None = None,
    rng=None,
    mode: str = "push-pull",
    until: int | None = None,
    check_connected: bool = True,
) -> SpreadTrace:
    """Simulate the protocol from ``start`` until everyone knows or ``max_rounds``.

    Every vertex contacts one uniform neighbour per round and all contacts in
    round r are resolved against the informed set of round r-1. Contacts that
    cannot change anything (an informed vertex whose neighbours all know the
    rumour) are not drawn; this leaves the law of the process unchanged.
    ``until`` stops the run as soon as that vertex is informed.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    n = g.n
    if not 0 <= start < n:
        raise KeyError(f"unknown start vertex {start}")
    if check_connected and not g.is_connected():
        raise DisconnectedGraphError("Push-Pull cannot inform a disconnected graph")
    if max_rounds is None:
        max_rounds = default_max_rounds(n)
    if max_rounds < 0:
        raise ValueError("max_rounds must be non-negative")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    push = mode != "pull"
    pull = mode != "push"

    indptr, indices = g.csr
    deg = g.degrees
    informed = np.zeros(n, dtype=bool)
    informed[start] = True
    informed_at = np.full(n, NEVER, dtype=np.int64)
    informed_at[start] = 0
    counts = [1]
    total = 1
    r = 0
    sparse_threshold = n // 4
    adjm = None

    while total < n and r < max_rounds:
        if until is not None and informed[until]:
            break
        r += 1
        if n - total > sparse_threshold:
            # dense phase: every vertex draws its contact
            contact = indices[indptr[:-1] + rng.integers(0, deg)]
            new = np.zeros(n, dtype=bool)
            if push:
                new[contact[informed]] = True
            if pull:
                new |= informed[contact]
            new &= ~informed
        else:
            if adjm is None:
                adjm = g.adjacency_matrix
            uninformed = np.flatnonzero(~informed)
            around = adjm[uninformed].indices
            frontier = np.unique(around[informed[around]]) if push else np.empty(0, np.int64)
            actors = np.union1d(uninformed, frontier)
            contact = indices[indptr[actors] + rng.integers(0, deg[actors])]
            new = np.zeros(n, dtype=bool)
            knows = informed[actors]
            if push:
                new[contact[knows]] = True
            if pull:
                pulled = ~knows & informed[contact]
                new[actors[pulled]] = True
            new &= ~informed
        fresh = np.flatnonzero(new)
        informed[fresh] = True
        informed_at[fresh] = r
        total += len(fresh)
        counts.append(total)

    return SpreadTrace(start, informed_at, tuple(counts), r, total == n)


def rounds_to_fraction(trace: SpreadTrace, fraction: float) -> int | None:
    """First round by which at least ceil(fraction * n) vertices are informed."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    target = math.ceil(round(fraction * trace.n, 9))
    counts = np.asarray(trace.counts)
    hit = np.flatnonzero(counts >= target)
    return int(hit[0]) if len(hit) else NOT_REACHED


def path_relay_time(g: Graph, path: Sequence[int], rng=None, max_rounds: int | None = None) -> int | None:
    """Rounds until the last vertex of ``path`` hears a rumour started at its first.

    The full graph runs the protocol; only the path endpoints are observed.
    """
    path = list(path)
    if len(path) < 2:
        raise ValueError("path needs at least two vertices")
    for a, b in zip(path, path[1:]):
        if not g.has_edge(a, b):
            raise ValueError(f"{a}-{b} is not an edge")
    trace = run_push_pull(g, path[0], max_rounds, rng, until=path[-1])
    t = int(trace.informed_at[path[-1]])
    return None if t == NEVER else t
