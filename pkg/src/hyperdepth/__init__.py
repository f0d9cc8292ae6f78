"""Hypertree depth, homomorphism counts, labeled incidence-graph derivations and guarded counting logic."""

from .elimination import EliminationForest, hd_exact, shd_exact, validate_ef, validate_strict_ef
from .homcount import KERNEL, count_hg_homs, count_ig_homs
from .hypergraph import Hypergraph, IncidenceGraph, parse_hg, read_hg, to_incidence

__version__ = "0.1.0"

__all__ = [
    "EliminationForest", "Hypergraph", "IncidenceGraph", "KERNEL", "count_hg_homs",
    "count_ig_homs", "hd_exact", "parse_hg", "read_hg", "shd_exact", "to_incidence",
    "validate_ef", "validate_strict_ef",
]
