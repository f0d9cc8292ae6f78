"""Exact homomorphism counts under hypergraph and incidence-graph semantics."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence, Union

from . import _homkernel_py
from .canon import canonical_form
from .elimination import hd_exact, shd_exact
from .families import EnumerationBounds, enumerate_hypergraphs
from .hypergraph import (Hypergraph, IncidenceGraph, as_hypergraph, as_incidence,
                         induced_sub, is_connected, path, to_incidence)

try:
    if os.environ.get("HYPERDEPTH_PURE"):
        raise ImportError("pure-Python kernel requested")
    from . import _homkernel as _compiled
except ImportError:
    _compiled = None

KERNEL = "cython" if _compiled is not None else "python"

Instance = Union[Hypergraph, IncidenceGraph]


def _edge_order(masks: list[int]) -> list[int]:
    """Greedy order: next blue shares the most reds with those already placed."""
    left = list(range(len(masks)))
    order: list[int] = []
    seen = 0
    while left:
        best = max(left, key=lambda e: ((masks[e] & seen).bit_count(), masks[e].bit_count(), -e))
        order.append(best)
        left.remove(best)
        seen |= masks[best]
    return order


def _encode(src: IncidenceGraph, tgt: IncidenceGraph, equality: bool,
            red_pins: Optional[Mapping[str, str]] = None,
            blue_pins: Optional[Mapping[str, str]] = None):
    src_masks, n_red = src.indexed()
    order = _edge_order(src_masks)
    # renumber reds in order of first appearance so leaf backtracking meets them early
    ren: dict[int, int] = {}
    for e in order:
        m, v = src_masks[e], 0
        while m:
            if m & 1 and v not in ren:
                ren[v] = len(ren)
            m >>= 1
            v += 1
    for v in range(n_red):
        ren.setdefault(v, len(ren))
    masks = []
    for e in order:
        m, out, v = src_masks[e], 0, 0
        while m:
            if m & 1:
                out |= 1 << ren[v]
            m >>= 1
            v += 1
        masks.append(out)
    tgt_masks, n_tgt = tgt.indexed()
    full = (1 << n_tgt) - 1
    red_init = [full] * n_red
    tpos = {r: i for i, r in enumerate(tgt.reds)}
    bpos = {b: i for i, b in enumerate(tgt.blues)}
    for r, img in (red_pins or {}).items():
        red_init[ren[src.reds.index(r)]] &= 1 << tpos[img]
    allowed = []
    for idx, e in enumerate(order):
        cand = range(len(tgt.blues))
        pin = (blue_pins or {}).get(src.blues[e])
        if pin is not None:
            cand = [bpos[pin]]
        size = masks[idx].bit_count()
        if equality:
            cand = [f for f in cand if tgt_masks[f].bit_count() <= size
                    and (tgt_masks[f] == 0) == (size == 0)]
        allowed.append(list(cand))
    return masks, n_red, tgt_masks, allowed, red_init


def count_encoded(masks, n_red, tgt_masks, allowed, red_init, equality: bool,
                  kernel: Optional[str] = None) -> int:
    kernel = kernel or KERNEL
    if kernel == "cython" and _compiled is not None:
        try:
            return _compiled.count(masks, n_red, tgt_masks, allowed, red_init, equality)
        except OverflowError:
            pass
    return _homkernel_py.count(masks, n_red, tgt_masks, allowed, red_init, equality)


def count_hg_homs(F: Instance, G: Instance, kernel: Optional[str] = None) -> int:
    """Pairs (h_V, h_E) with h_V(beta(e)) = beta(h_E(e)) for every hyperedge e of F."""
    enc = _encode(as_incidence(F), as_incidence(G), True)
    return count_encoded(*enc, True, kernel=kernel)


def count_ig_homs(I: Instance, J: Instance, kernel: Optional[str] = None) -> int:
    """Pairs (h_V, h_E) with h_V(beta(e)) contained in beta(h_E(e)) for every blue e of I."""
    enc = _encode(as_incidence(I), as_incidence(J), False)
    return count_encoded(*enc, False, kernel=kernel)


def count_labeled_homs(L, Lp, kernel: Optional[str] = None) -> int:
    """Incidence homs of skeletons that send each labelled vertex of L to the equally labelled one of L'."""
    if not set(L.r) <= set(Lp.r) or not set(L.b) <= set(Lp.b):
        raise ValueError("labels of the source must be defined in the target")
    red_pins: dict[str, str] = {}
    blue_pins: dict[str, str] = {}
    for i, v in L.r.items():
        if red_pins.get(v, Lp.r[i]) != Lp.r[i]:
            return 0
        red_pins[v] = Lp.r[i]
    for j, e in L.b.items():
        if blue_pins.get(e, Lp.b[j]) != Lp.b[j]:
            return 0
        blue_pins[e] = Lp.b[j]
    enc = _encode(L.skeleton, Lp.skeleton, False, red_pins, blue_pins)
    return count_encoded(*enc, False, kernel=kernel)


def iter_homs(F: Instance, G: Instance, equality: bool = True) -> Iterator[tuple[dict, dict]]:
    """Every homomorphism as a pair of dicts (h_V, h_E)."""
    I, J = as_incidence(F), as_incidence(G)
    ci, cj = I.contents(), J.contents()
    blues = list(I.blues)
    reds = list(I.reds)
    h_e: dict[str, str] = {}

    def vertex_options():
        opts = {r: set(J.reds) for r in reds}
        for b in blues:
            for r in ci[b]:
                opts[r] &= cj[h_e[b]]
        return opts

    def assign(i, opts, h_v):
        if i == len(reds):
            if equality and any({h_v[r] for r in ci[b]} != cj[h_e[b]] for b in blues):
                return
            yield dict(h_v), dict(h_e)
            return
        r = reds[i]
        for x in sorted(opts[r], key=J.reds.index):
            h_v[r] = x
            yield from assign(i + 1, opts, h_v)
        del h_v[r]

    def rec(i):
        if i == len(blues):
            opts = vertex_options()
            if all(opts[r] for r in reds):
                yield from assign(0, opts, {})
            return
        b = blues[i]
        for f in J.blues:
            if equality and (len(cj[f]) > len(ci[b]) or (not cj[f]) != (not ci[b])):
                continue
            h_e[b] = f
            yield from rec(i + 1)
        h_e.pop(b, None)

    yield from rec(0)


def surjective_hom_exists(H: Instance, n: int) -> bool:
    """Is there a hypergraph homomorphism onto P_n, surjective on vertices and hyperedges?"""
    P = to_incidence(path(n))
    for h_v, h_e in iter_homs(H, P, equality=True):
        if len(set(h_v.values())) == len(P.reds) and len(set(h_e.values())) == len(P.blues):
            return True
    return False


# -- classes, vectors, verdicts -------------------------------------------------

KINDS = ("SHD", "HD", "ISHD", "IHD", "explicit")


@dataclass(frozen=True)
class ClassTruncation:
    kind: str
    k: int = 1
    max_edges: int = 3
    max_vertices: int = 6
    connected_only: bool = False
    sources: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"class kind must be one of {KINDS}")
        if self.kind != "explicit" and (self.max_edges < 1 or self.max_vertices < 1 or self.k < 0):
            raise ValueError("bounds must be positive")

    @property
    def incidence(self) -> bool:
        return self.kind in ("ISHD", "IHD")

    def describe(self) -> str:
        if self.kind == "explicit":
            return f"explicit list of {len(self.sources)} sources"
        conn = ", connected only" if self.connected_only else ""
        return f"{self.kind}_{self.k} up to (maxE={self.max_edges}, maxV={self.max_vertices}{conn})"

    def members(self) -> list[Instance]:
        if self.kind == "explicit":
            return list(self.sources)
        depth = shd_exact if self.kind in ("SHD", "ISHD") else hd_exact
        hs = enumerate_hypergraphs(EnumerationBounds(self.max_edges, self.max_vertices,
                                                     self.connected_only))
        keep = [H for H in hs if depth(H).depth <= self.k]
        return [to_incidence(H) for H in keep] if self.incidence else keep


@dataclass
class HomVector:
    entries: dict[str, int] = field(default_factory=dict)
    bounds: str = ""

    def __eq__(self, other):
        return isinstance(other, HomVector) and self.entries == other.entries


def _count_for(ct: ClassTruncation, src: Instance, target: Instance) -> int:
    if ct.incidence:
        return count_ig_homs(src, target)
    return count_hg_homs(src, target)


def _check_target(ct: ClassTruncation, target: Instance):
    if ct.kind == "explicit":
        return
    if ct.incidence and not isinstance(target, IncidenceGraph):
        raise TypeError(f"{ct.kind} compares incidence graphs")
    if not ct.incidence and not isinstance(target, Hypergraph):
        raise TypeError(f"{ct.kind} compares hypergraphs")


def _explicit_mode(src: Instance) -> bool:
    return isinstance(src, IncidenceGraph)


def hom_vector(ct: ClassTruncation, target: Instance, members: Optional[Sequence[Instance]] = None) -> HomVector:
    _check_target(ct, target)
    srcs = ct.members() if members is None else members
    out = HomVector(bounds=ct.describe())
    for s in srcs:
        key = canonical_form(s).decode("ascii")
        if key in out.entries:
            continue
        if ct.kind == "explicit":
            c = count_ig_homs(s, target) if _explicit_mode(s) else count_hg_homs(s, as_hypergraph(target))
        else:
            c = _count_for(ct, s, target)
        out.entries[key] = c
    return out


@dataclass
class IndistVerdict:
    equal: bool
    bounds: str
    witness: Optional[Instance] = None
    counts: Optional[tuple[int, int]] = None
    compared: int = 0


def indistinguishable(ct: ClassTruncation, A: Instance, B: Instance,
                      members: Optional[Sequence[Instance]] = None) -> IndistVerdict:
    _check_target(ct, A)
    _check_target(ct, B)
    srcs = ct.members() if members is None else members
    n = 0
    for s in srcs:
        n += 1
        if ct.kind == "explicit":
            f = count_ig_homs if _explicit_mode(s) else count_hg_homs
        else:
            f = count_ig_homs if ct.incidence else count_hg_homs
        a, b = f(s, A), f(s, B)
        if a != b:
            return IndistVerdict(False, ct.describe(), s, (a, b), n)
    return IndistVerdict(True, ct.describe(), compared=n)


def image_is_connected(h_e: Mapping[str, str], target: Instance) -> bool:
    J = as_hypergraph(target)
    return is_connected(induced_sub(J, set(h_e.values())))
