"""Text serialisation of evolving graphs.

Layout::

    <family> <k> <steps> <seed|none>
    u v                      # one line per edge, u < v, sorted
    ...
    cliques                  # optional registry section
    <created> <deactivated> <parent> <member> ... <member>

Clique ids are line positions within the registry section.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import TextIO

import numpy as np

from .graphs import EvolvingGraph, Family

CLIQUE_MARKER = "cliques"


def dump_graph(g: EvolvingGraph, fh: TextIO, include_cliques: bool = True) -> None:
    seed = "none" if g.seed is None else str(int(g.seed))
    fh.write(f"{g.family.value} {g.k} {g.steps} {seed}\n")
    for u, v in sorted(g.edges()):
        fh.write(f"{u} {v}\n")
    if include_cliques and g.has_registry:
        fh.write(CLIQUE_MARKER + "\n")
        rows = zip(
            g.clique_created.tolist(),
            g.clique_deactivated.tolist(),
            g.clique_parent.tolist(),
            g.clique_members.tolist(),
        )
        for created, deact, parent, members in rows:
            fh.write(f"{created} {deact} {parent} " + " ".join(map(str, members)) + "\n")


def dumps_graph(g: EvolvingGraph, include_cliques: bool = True) -> str:
    buf = io.StringIO()
    dump_graph(g, buf, include_cliques)
    return buf.getvalue()


def write_graph(g: EvolvingGraph, path: str | Path, include_cliques: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        dump_graph(g, fh, include_cliques)


def load_graph(fh: TextIO) -> EvolvingGraph:
    header = fh.readline().split()
    if len(header) != 4:
        raise ValueError(f"bad header: {' '.join(header)!r}")
    family, k, steps = Family(header[0]), int(header[1]), int(header[2])
    seed = None if header[3] == "none" else int(header[3])
    n = k + steps
    adj: list[list[int]] = [[] for _ in range(n)]
    clique_rows: list[list[int]] | None = None
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line == CLIQUE_MARKER:
            clique_rows = []
            continue
        nums = [int(x) for x in line.split()]
        if clique_rows is not None:
            clique_rows.append(nums)
        else:
            u, v = nums
            adj[u].append(v)
            adj[v].append(u)
    if clique_rows is None:
        return EvolvingGraph(family, k, steps, adj, None, None, None, None, None, seed)
    arr = np.asarray(clique_rows, dtype=np.int64).reshape(-1, 3 + k)
    created, deact, parent, members = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3:]
    birth = np.full(n, -1, dtype=np.int64)
    # the k cliques created in round t all have the clique chosen in round t as parent
    firsts = np.arange(1, len(arr), k)
    birth[k:k + len(firsts)] = parent[firsts]
    return EvolvingGraph(family, k, steps, adj, members, created, deact, parent, birth, seed)


def loads_graph(text: str) -> EvolvingGraph:
    return load_graph(io.StringIO(text))


def read_graph(path: str | Path) -> EvolvingGraph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh)
