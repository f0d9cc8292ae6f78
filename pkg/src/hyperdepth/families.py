"""Concrete instances and exhaustive small-instance enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .canon import canonical_form, canonical_hypergraph
from .elimination import EliminationForest, RootedForest
from .errors import BudgetExceeded
from .hypergraph import Hypergraph, IncidenceGraph, is_connected, path, to_incidence


def example_G() -> Hypergraph:
    return Hypergraph.from_edges({"i": "ab", "j": "bc", "k": "ac", "l": "abc"}, vertices="abc")


def example_H() -> Hypergraph:
    return Hypergraph.from_edges({"e": "uvx", "f": "vwz", "g": "uwy", "h": "txyz"},
                                 vertices="tuvwxyz")


def _forest(spec: list[tuple[str, Optional[str], str]]) -> EliminationForest:
    nodes = tuple(n for n, _, _ in spec)
    return EliminationForest(RootedForest(nodes, {n: p for n, p, _ in spec}),
                             {n: e for n, _, e in spec})


def example_forests() -> dict[str, tuple[Hypergraph, EliminationForest]]:
    """Hand-written elimination forests for the worked instances, keyed by name.

    ``H-strict``: root h with children e, f, g (strict, height 2).
    ``G-single``: one node on l (valid, not strict, height 1).
    ``G-strict``: root l with children i, j, k (strict, height 2).
    ``P15-strict``: balanced strict tree of height 4 for the path with 15 edges.
    ``P7-strict``: balanced strict tree of height 3 for the path with 7 edges,
    on vertices s..z and hyperedges a..g.
    """
    out = {
        "H-strict": (example_H(), _forest([("t1", None, "h"), ("t2", "t1", "e"),
                                            ("t3", "t1", "f"), ("t4", "t1", "g")])),
        "G-single": (example_G(), _forest([("t1", None, "l")])),
        "G-strict": (example_G(), _forest([("t1", None, "l"), ("t2", "t1", "i"),
                                            ("t3", "t1", "j"), ("t4", "t1", "k")])),
    }
    # P_15: node named after its hyperedge e_i = {i, i+1}; root e8 = {8, 9}
    p15 = [("e8", None), ("e4", "e8"), ("e12", "e8"), ("e2", "e4"), ("e6", "e4"),
           ("e10", "e12"), ("e14", "e12"), ("e1", "e2"), ("e3", "e2"), ("e5", "e6"),
           ("e7", "e6"), ("e9", "e10"), ("e11", "e10"), ("e13", "e14"), ("e15", "e14")]
    out["P15-strict"] = (path(15), _forest([(e, p, e) for e, p in p15]))
    out["P7-strict"] = (p7_letters(), _forest([("t1", None, "d"), ("t2", "t1", "b"),
                                               ("t3", "t1", "f"), ("t4", "t2", "a"),
                                               ("t5", "t2", "c"), ("t6", "t3", "e"),
                                               ("t7", "t3", "g")]))
    return out


def p7_letters() -> Hypergraph:
    """The path with 7 hyperedges a..g over vertices s..z."""
    vs = "stuvwxyz"
    return Hypergraph.from_edges({e: (vs[i], vs[i + 1]) for i, e in enumerate("abcdefg")},
                                 vertices=vs)


def _cycle_beta(length: int) -> dict[str, list[str]]:
    beta = {f"p{i}": [f"u{i}", f"u{i + 1}"] for i in range(1, length)}
    beta["e"] = [f"u{length}", "u1"]
    return beta


def skew_pair(k: int) -> tuple[Hypergraph, Hypergraph]:
    """Cycles with two singleton hyperedges; the pair differs only in where the second sits."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        # 4-cycle a(0,0) - b(0,1) - d(1,1) - c(1,0) - a
        cyc = {"ab": "ab", "bd": "bd", "dc": "dc", "ca": "ca"}
        G = dict(cyc, f="d", g="c")
        H = dict(cyc, f="b", g="c")
        return (Hypergraph.from_edges(G, vertices="abcd"), Hypergraph.from_edges(H, vertices="abcd"))
    n = 2 ** (k + 1) + 2
    base = _cycle_beta(n)
    verts = [f"u{i}" for i in range(1, n + 1)]
    G = dict(base, f=["u1"], g=[f"u{2 ** k + 1}"])
    H = dict(base, f=["u1"], g=[f"u{2 ** k + 2}"])
    return Hypergraph.from_edges(G, vertices=verts), Hypergraph.from_edges(H, vertices=verts)


def skew_pair_prime(k: int) -> tuple[Hypergraph, Hypergraph]:
    """Cycles with two pendant 2-vertex handles at different distances."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        cyc = {"ab": "ab", "bd": "bd", "dc": "dc", "ca": "ca"}
        G = dict(cyc, f=["d", "v"], g=["c", "w"])
        H = dict(cyc, f=["b", "v"], g=["c", "w"])
        vs = ["a", "b", "c", "d", "v", "w"]
        return Hypergraph.from_edges(G, vertices=vs), Hypergraph.from_edges(H, vertices=vs)
    n = 2 ** (k + 2) + 2
    base = _cycle_beta(n)
    verts = [f"u{i}" for i in range(1, n + 1)] + ["v", "w"]
    G = dict(base, f=["u1", "v"], g=[f"u{2 ** (k + 1) - 2}", "w"])
    H = dict(base, f=["u1", "v"], g=[f"u{2 ** (k + 1) - 1}", "w"])
    return Hypergraph.from_edges(G, vertices=verts), Hypergraph.from_edges(H, vertices=verts)


def _handled_path(length: int, first: int, second: int) -> Hypergraph:
    beta = {f"p{i}": [f"v{i}", f"v{i + 1}"] for i in range(1, length + 1)}
    beta["f'"] = [f"v{first}"]
    beta["g'"] = [f"v{second}"]
    return Hypergraph.from_edges(beta, vertices=[f"v{i}" for i in range(1, length + 2)])


def skew_distinguisher(k: int) -> Hypergraph:
    """Path with 2^k edges and singleton hyperedges on both end vertices."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return Hypergraph.from_edges({"ab": "ab", "f'": "a", "g'": "b"}, vertices="ab")
    return _handled_path(2 ** k, 1, 2 ** k + 1)


def skew_prime_distinguisher(k: int, attach: Optional[int] = None) -> IncidenceGraph:
    """Path with 2^(k+1)-3 edges, singletons on v_1 and on v_attach.

    For k >= 2 the default attachment vertex is v_(2^k - 1).  For k = 1 the
    path is a single edge and the default puts the second singleton on its
    other end, which is what separates the two 4-cycle instances.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    length = 2 ** (k + 1) - 3
    if attach is None:
        attach = 2 if k == 1 else 2 ** k - 1
    if not 1 <= attach <= length + 1:
        raise ValueError(f"attachment index must lie in [1, {length + 1}]")
    return to_incidence(_handled_path(length, 1, attach))


FAMILIES = {
    "exampleG": lambda p: (example_G(),),
    "exampleH": lambda p: (example_H(),),
    "pathN": lambda p: (path(p),),
    "skew": lambda p: skew_pair(p),
    "skewPrime": lambda p: skew_pair_prime(p),
    "skewDistinguisher": lambda p: (skew_distinguisher(p),),
    "skewPrimeDistinguisher": lambda p: (skew_prime_distinguisher(p),),
}


@dataclass(frozen=True)
class EnumerationBounds:
    max_edges: int
    max_vertices: int
    connected_only: bool = False
    allow_empty_edges: bool = False

    def __post_init__(self):
        if self.max_edges < 0 or self.max_vertices < 0:
            raise ValueError("bounds must be non-negative")


DEFAULT_ENUMERATION_BUDGET = 3_000_000


def enumerate_hypergraphs(b: EnumerationBounds,
                          predicate: Optional[Callable[[Hypergraph], bool]] = None,
                          budget: int = DEFAULT_ENUMERATION_BUDGET) -> list[Hypergraph]:
    """Every hypergraph within the bounds, once per isomorphism class.

    Level m is obtained from level m-1 by adding one hyperedge whose content
    mixes existing vertices with fresh ones; candidates are deduplicated by
    canonical form.  For connected enumeration the new hyperedge must meet the
    existing vertices, since every connected hypergraph has an edge order in
    which each prefix is connected.  Output is sorted by edge count, vertex
    count, then canonical key.
    """
    level: dict[bytes, Hypergraph] = {b"": Hypergraph((), (), ())}
    out: list[tuple[int, int, bytes, Hypergraph]] = []
    work = 0
    for m in range(1, b.max_edges + 1):
        nxt: dict[bytes, Hypergraph] = {}
        for H in level.values():
            n = len(H.vertices)
            has_empty = any(not c for c in H.contents)
            for fresh in range(0, b.max_vertices - n + 1):
                for S in range(1 << n):
                    if fresh == 0 and S == 0 and not b.allow_empty_edges:
                        continue
                    if b.connected_only and m > 1 and (S == 0 or has_empty):
                        continue
                    work += 1
                    if work > budget:
                        raise BudgetExceeded(f"enumeration exceeded {budget} candidates")
                    content = [H.vertices[i] for i in range(n) if S >> i & 1]
                    content += [str(n + j + 1) for j in range(fresh)]
                    beta = {e: sorted(c) for e, c in zip(H.edges, H.contents)}
                    beta[f"e{m}"] = content
                    cand = Hypergraph.from_edges(beta, vertices=list(H.vertices) +
                                                 [str(n + j + 1) for j in range(fresh)])
                    key = canonical_form(cand)
                    if key not in nxt:
                        nxt[key] = canonical_hypergraph(cand)
        level = nxt
        for key, H in nxt.items():
            if b.connected_only and not is_connected(H):
                continue
            out.append((m, len(H.vertices), key, H))
    out.sort(key=lambda t: t[:3])
    hs = [t[3] for t in out]
    if predicate is not None:
        hs = [H for H in hs if predicate(H)]
    return hs


def iter_hypergraphs(b: EnumerationBounds) -> Iterator[Hypergraph]:
    yield from enumerate_hypergraphs(b)
