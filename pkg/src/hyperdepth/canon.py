"""Colour-preserving canonical forms for small incidence graphs.

Colour refinement splits the blues into invariant cells.  While some blue
cell has more than one member, each member in turn is individualised and
the colouring refined again; every leaf of this search fixes an ordering of
the blues.  For a fixed blue ordering the graph is described up to red
renaming by the sorted multiset of red columns, and the least description
over all leaves wins.
"""

from __future__ import annotations

from .errors import BudgetExceeded
from .hypergraph import Hypergraph, IncidenceGraph, as_incidence

DEFAULT_LEAF_BUDGET = 200_000


def _rank(sig):
    order = {s: i for i, s in enumerate(sorted(set(sig.values())))}
    return {x: order[s] for x, s in sig.items()}


def _refine(colour, contents, nbrs):
    while True:
        sig = {b: (colour[b], tuple(sorted(colour[r] for r in rs))) for b, rs in contents.items()}
        sig.update({r: (colour[r], tuple(sorted(colour[b] for b in bs))) for r, bs in nbrs.items()})
        new = _rank(sig)
        if len(set(new.values())) == len(set(colour.values())):
            return new
        colour = new


def canonical_labeling(x: Hypergraph | IncidenceGraph, budget: int = DEFAULT_LEAF_BUDGET):
    """Return (key, blue order, red order) realising the canonical form."""
    I = as_incidence(x)
    contents = I.contents()
    nbrs: dict[str, list[str]] = {r: [] for r in I.reds}
    for b in I.blues:
        for r in contents[b]:
            nbrs[r].append(b)
    start = {b: ("b", len(contents[b])) for b in I.blues}
    start.update({r: ("r", len(nbrs[r])) for r in I.reds})
    best = [None, [], {}]
    leaves = 0

    def search(colour):
        nonlocal leaves
        cells: dict[int, list[str]] = {}
        for b in I.blues:
            cells.setdefault(colour[b], []).append(b)
        open_cells = [c for c in sorted(cells) if len(cells[c]) > 1]
        if not open_cells:
            leaves += 1
            if leaves > budget:
                raise BudgetExceeded(f"canonical form search passed {budget} leaves")
            order = sorted(I.blues, key=colour.__getitem__)
            pos = {b: i for i, b in enumerate(order)}
            cols = {r: sorted(pos[b] for b in nbrs[r]) for r in I.reds}
            desc = tuple(sorted(tuple(c) for c in cols.values()))
            if best[0] is None or desc < best[0]:
                best[:] = [desc, order, cols]
            return
        for b in cells[open_cells[0]]:
            split = _rank({v: (c, v != b) for v, c in colour.items()})
            search(_refine(split, contents, nbrs))

    search(_refine(_rank(start), contents, nbrs))
    desc, order, cols = best
    if desc is None:
        desc = ()
    red_order = sorted(I.reds, key=lambda r: tuple(cols[r]))
    key = f"{len(I.blues)}|{len(I.reds)}|" + ";".join(",".join(map(str, c)) for c in desc)
    return key.encode("ascii"), order, red_order


def canonical_form(x: Hypergraph | IncidenceGraph, budget: int = DEFAULT_LEAF_BUDGET) -> bytes:
    return canonical_labeling(x, budget)[0]


def isomorphic(a: Hypergraph | IncidenceGraph, b: Hypergraph | IncidenceGraph,
               budget: int = DEFAULT_LEAF_BUDGET) -> bool:
    A, B = as_incidence(a), as_incidence(b)
    if (len(A.reds), len(A.blues), len(A.edges)) != (len(B.reds), len(B.blues), len(B.edges)):
        return False
    return canonical_form(A, budget) == canonical_form(B, budget)


def canonical_hypergraph(x: Hypergraph | IncidenceGraph,
                         budget: int = DEFAULT_LEAF_BUDGET) -> Hypergraph:
    """Isomorphic copy with vertices 1..n and hyperedges e1..em in canonical order."""
    I = as_incidence(x)
    _, blues, reds = canonical_labeling(I, budget)
    rname = {r: str(i + 1) for i, r in enumerate(reds)}
    contents = I.contents()
    beta = {f"e{i + 1}": sorted((rname[r] for r in contents[b]), key=int) for i, b in enumerate(blues)}
    return Hypergraph.from_edges(beta, vertices=[str(i + 1) for i in range(len(reds))])
