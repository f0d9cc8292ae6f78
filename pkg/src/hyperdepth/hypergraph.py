"""Hypergraphs, incidence graphs and the conversions between them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping


class InvalidInstance(ValueError):
    pass


@dataclass(frozen=True, eq=True)
class Hypergraph:
    """H = (V, E, beta) with beta stored as a tuple aligned with ``edges``."""

    vertices: tuple[str, ...]
    edges: tuple[str, ...]
    contents: tuple[frozenset[str], ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidInstance("duplicate vertex id")
        if len(set(self.edges)) != len(self.edges):
            raise InvalidInstance("duplicate hyperedge id")
        if len(self.contents) != len(self.edges):
            raise InvalidInstance("content map must be total on the hyperedges")
        clash = set(self.vertices) & set(self.edges)
        if clash:
            raise InvalidInstance(f"ids used both as vertex and hyperedge: {sorted(clash)}")
        covered = set().union(*self.contents) if self.contents else set()
        vs = set(self.vertices)
        if covered - vs:
            raise InvalidInstance(f"content mentions unknown vertices {sorted(covered - vs)}")
        if vs - covered:
            raise InvalidInstance(f"vertices outside every hyperedge: {sorted(vs - covered)}")

    @classmethod
    def from_edges(cls, beta: Mapping[str, Iterable[str]],
                   vertices: Iterable[str] | None = None) -> "Hypergraph":
        edges = tuple(beta)
        contents = tuple(frozenset(beta[e]) for e in edges)
        if vertices is None:
            seen: dict[str, None] = {}
            for e in edges:
                for v in beta[e]:
                    seen.setdefault(v)
            vertices = seen
        return cls(tuple(vertices), edges, contents)

    @property
    def beta(self) -> dict[str, frozenset[str]]:
        return dict(zip(self.edges, self.contents))

    def content(self, e: str) -> frozenset[str]:
        try:
            return self.contents[self.edges.index(e)]
        except ValueError:
            raise KeyError(f"unknown hyperedge {e!r}") from None

    def __repr__(self):
        body = ", ".join(f"{e}->{{{','.join(sorted(c))}}}" for e, c in zip(self.edges, self.contents))
        return f"Hypergraph({body})"


@dataclass(frozen=True, eq=True)
class IncidenceGraph:
    """Bipartite graph with red vertices (points) and blue vertices (hyperedges)."""

    reds: tuple[str, ...]
    blues: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        if len(set(self.reds)) != len(self.reds) or len(set(self.blues)) != len(self.blues):
            raise InvalidInstance("duplicate vertex id")
        if set(self.reds) & set(self.blues):
            raise InvalidInstance("red and blue ids must be disjoint")
        rs, bs = set(self.reds), set(self.blues)
        for b, r in self.edges:
            if b not in bs or r not in rs:
                raise InvalidInstance(f"edge ({b},{r}) is not blue x red")
        touched = {r for _, r in self.edges}
        lonely = [r for r in self.reds if r not in touched]
        if lonely:
            raise InvalidInstance(f"red vertices without blue neighbour: {lonely}")

    def content(self, b: str) -> frozenset[str]:
        return frozenset(r for bb, r in self.edges if bb == b)

    def contents(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {b: set() for b in self.blues}
        for b, r in self.edges:
            out[b].add(r)
        return {b: frozenset(s) for b, s in out.items()}

    def neighbours(self, r: str) -> frozenset[str]:
        return frozenset(b for b, rr in self.edges if rr == r)

    def indexed(self) -> tuple[list[int], int]:
        """Blue contents as bitmasks over red positions, plus the red count."""
        pos = {r: i for i, r in enumerate(self.reds)}
        masks = [0] * len(self.blues)
        bpos = {b: i for i, b in enumerate(self.blues)}
        for b, r in self.edges:
            masks[bpos[b]] |= 1 << pos[r]
        return masks, len(self.reds)

    def __repr__(self):
        c = self.contents()
        body = ", ".join(f"{b}:{{{','.join(r for r in self.reds if r in c[b])}}}" for b in self.blues)
        return f"IncidenceGraph({body})"


def to_incidence(H: Hypergraph) -> IncidenceGraph:
    edges = frozenset((e, v) for e, c in zip(H.edges, H.contents) for v in c)
    return IncidenceGraph(H.vertices, H.edges, edges)


def to_hypergraph(I: IncidenceGraph) -> Hypergraph:
    c = I.contents()
    return Hypergraph(I.reds, I.blues, tuple(c[b] for b in I.blues))


def as_incidence(x: Hypergraph | IncidenceGraph) -> IncidenceGraph:
    return to_incidence(x) if isinstance(x, Hypergraph) else x


def as_hypergraph(x: Hypergraph | IncidenceGraph) -> Hypergraph:
    return to_hypergraph(x) if isinstance(x, IncidenceGraph) else x


def induced_sub(H: Hypergraph, S: Iterable[str]) -> Hypergraph:
    S = set(S)
    unknown = S - set(H.edges)
    if unknown:
        raise KeyError(f"unknown hyperedges {sorted(unknown)}")
    keep = [i for i, e in enumerate(H.edges) if e in S]
    covered = set().union(*(H.contents[i] for i in keep)) if keep else set()
    return Hypergraph(tuple(v for v in H.vertices if v in covered),
                      tuple(H.edges[i] for i in keep),
                      tuple(H.contents[i] for i in keep))


def induced_incidence(I: IncidenceGraph, S: Iterable[str]) -> IncidenceGraph:
    return to_incidence(induced_sub(to_hypergraph(I), S))


def connected_components(I: IncidenceGraph) -> list[IncidenceGraph]:
    """Maximal connected pieces, ordered by their first blue in ``I.blues``."""
    c = I.contents()
    parent = {b: b for b in I.blues}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict[str, str] = {}
    for b in I.blues:
        for r in c[b]:
            if r in owner:
                ra, rb = find(owner[r]), find(b)
                if ra != rb:
                    parent[rb] = ra
            else:
                owner[r] = b
    groups: dict[str, list[str]] = {}
    for b in I.blues:
        groups.setdefault(find(b), []).append(b)
    out = []
    for members in sorted(groups.values(), key=lambda m: I.blues.index(m[0])):
        ms = set(members)
        rs = set().union(*(c[b] for b in members))
        out.append(IncidenceGraph(tuple(r for r in I.reds if r in rs),
                                  tuple(members),
                                  frozenset(e for e in I.edges if e[0] in ms)))
    return out


def is_connected(x: Hypergraph | IncidenceGraph) -> bool:
    return len(connected_components(as_incidence(x))) <= 1


def path(n: int) -> Hypergraph:
    """P_n: vertices 1..n+1, hyperedge e_i = {i, i+1}."""
    if n < 1:
        raise ValueError("path length must be at least 1")
    return Hypergraph.from_edges({f"e{i}": (str(i), str(i + 1)) for i in range(1, n + 1)},
                                 vertices=[str(i) for i in range(1, n + 2)])


def pump(H: Hypergraph, e: str, fresh_v: str) -> Hypergraph:
    if e not in H.edges:
        raise KeyError(f"unknown hyperedge {e!r}")
    if fresh_v in H.vertices or fresh_v in H.edges:
        raise ValueError(f"vertex id {fresh_v!r} is not fresh")
    i = H.edges.index(e)
    contents = list(H.contents)
    contents[i] = contents[i] | {fresh_v}
    return Hypergraph(H.vertices + (fresh_v,), H.edges, tuple(contents))


def local_merge(H: Hypergraph, e: str, u: str, v: str) -> Hypergraph:
    """Identify u with v, both of which must lie in beta(e)."""
    c = H.content(e)
    if u == v:
        raise ValueError("cannot merge a vertex with itself")
    if u not in c or v not in c:
        raise ValueError(f"{u!r} and {v!r} must both lie in the content of {e!r}")
    contents = tuple(frozenset(v if w == u else w for w in cc) for cc in H.contents)
    return Hypergraph(tuple(w for w in H.vertices if w != u), H.edges, contents)


def disjoint_union(A: Hypergraph, B: Hypergraph, tags=("1", "2")) -> Hypergraph:
    ta, tb = tags
    beta = {f"{e}.{ta}": [f"{v}.{ta}" for v in c] for e, c in zip(A.edges, A.contents)}
    beta.update({f"{e}.{tb}": [f"{v}.{tb}" for v in c] for e, c in zip(B.edges, B.contents)})
    verts = [f"{v}.{ta}" for v in A.vertices] + [f"{v}.{tb}" for v in B.vertices]
    return Hypergraph.from_edges(beta, vertices=verts)


def relabel(I: IncidenceGraph, red_map: Mapping[str, str], blue_map: Mapping[str, str]) -> IncidenceGraph:
    return IncidenceGraph(tuple(red_map[r] for r in I.reds),
                          tuple(blue_map[b] for b in I.blues),
                          frozenset((blue_map[b], red_map[r]) for b, r in I.edges))


# -- .hg text format ---------------------------------------------------------

def parse_hg(text: str) -> Hypergraph:
    vertices: list[str] | None = None
    beta: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "V":
            vertices = (vertices or []) + rest.split()
        elif head == "E":
            eid, colon, members = rest.partition(":")
            eid = eid.strip()
            if not colon or not eid or " " in eid:
                raise ValueError(f"line {lineno}: expected 'E <edge-id> : <vertex-id> ...'")
            if eid in beta:
                raise ValueError(f"line {lineno}: hyperedge {eid!r} declared twice")
            beta[eid] = members.split()
        else:
            raise ValueError(f"line {lineno}: unknown directive {head!r}")
    try:
        if vertices is not None:
            return Hypergraph.from_edges(beta, vertices=vertices)
        return Hypergraph.from_edges(beta)
    except InvalidInstance as exc:
        raise ValueError(str(exc)) from None


def format_hg(H: Hypergraph | IncidenceGraph) -> str:
    H = as_hypergraph(H)
    lines = []
    if H.vertices:
        lines.append("V " + " ".join(H.vertices))
    for e, c in zip(H.edges, H.contents):
        ordered = [v for v in H.vertices if v in c]
        lines.append(f"E {e} : " + " ".join(ordered) if ordered else f"E {e} :")
    return "\n".join(lines) + "\n"


def read_hg(path_: str) -> Hypergraph:
    with open(path_, encoding="utf-8") as fh:
        return parse_hg(fh.read())


def write_hg(path_: str, H: Hypergraph | IncidenceGraph) -> None:
    with open(path_, "w", encoding="utf-8") as fh:
        fh.write(format_hg(H))
