"""Rumour spreading on random k-trees and random k-Apollonian networks."""

from .graphs import (
    EvolvingGraph,
    Family,
    Graph,
    InvalidParameterError,
    force_barrier,
    generate,
    generate_k_apollonian,
    generate_k_tree,
    generate_recursive_tree,
)
from .pushpull import SpreadTrace, rounds_to_fraction, run_push_pull
from .urns import UrnSpec, urn_distribution, urn_sample

__version__ = "0.1.0"

__all__ = [
    "EvolvingGraph",
    "Family",
    "Graph",
    "InvalidParameterError",
    "SpreadTrace",
    "UrnSpec",
    "force_barrier",
    "generate",
    "generate_k_apollonian",
    "generate_k_tree",
    "generate_recursive_tree",
    "rounds_to_fraction",
    "run_push_pull",
    "urn_distribution",
    "urn_sample",
]
