"""k-labeled incidence graphs, their operation algebra and GLI derivations.

A k-labeled incidence graph is a skeleton together with three partial maps:
``r`` from positive integers to reds, ``b`` from [k] to blues, and the guard
map ``g`` from red labels to blue labels.  Derivations are immutable trees of
operations whose cost index counts how many blue labels were removed in
series.  ``build_from_strict_ef`` turns a strict elimination forest into a
label-free derivation and ``extract_forest`` goes back.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .elimination import EliminationForest, RootedForest, lcv, validate_strict_ef
from .hypergraph import (Hypergraph, IncidenceGraph, InvalidInstance, as_incidence,
                         induced_incidence, read_hg)


class DerivationError(ValueError):
    """A side condition of a derivation rule does not hold."""


@dataclass(frozen=True, eq=True)
class KLabeledIncidenceGraph:
    skeleton: IncidenceGraph
    r: Mapping[int, str]
    b: Mapping[int, str]
    g: Mapping[int, int]
    k: int

    __hash__ = None  # label maps are plain dicts

    def __post_init__(self):
        for name in ("r", "b", "g"):
            object.__setattr__(self, name, dict(sorted(getattr(self, name).items())))
        if self.k < 1:
            raise ValueError("k must be positive")
        if set(self.g) != set(self.r):
            raise ValueError("guard map must be defined exactly on the red labels")
        reds, blues = set(self.skeleton.reds), set(self.skeleton.blues)
        for i, v in self.r.items():
            if not isinstance(i, int) or i < 1:
                raise ValueError(f"red label {i!r} is not a positive integer")
            if v not in reds:
                raise ValueError(f"red label {i} points to unknown red {v!r}")
        for j, e in self.b.items():
            if not isinstance(j, int) or not 1 <= j <= self.k:
                raise ValueError(f"blue label {j!r} outside [1, {self.k}]")
            if e not in blues:
                raise ValueError(f"blue label {j} points to unknown blue {e!r}")
        for i, j in self.g.items():
            if not isinstance(j, int) or not 1 <= j <= self.k:
                raise ValueError(f"guard g({i}) = {j!r} outside [1, {self.k}]")

    @property
    def label_free(self) -> bool:
        return not self.r and not self.b and not self.g

    def __repr__(self):
        return (f"KLI(k={self.k}, {self.skeleton!r}, r={self.r}, b={self.b}, g={self.g})")


KLI = KLabeledIncidenceGraph


def real_guards(L: KLI) -> bool:
    """Every labeled red is adjacent to the blue carrying its guard label."""
    for i, v in L.r.items():
        j = L.g[i]
        if j not in L.b or (L.b[j], v) not in L.skeleton.edges:
            return False
    return True


def compatible(f: Mapping, g: Mapping) -> bool:
    return all(f[x] == g[x] for x in f.keys() & g.keys())


# -- label operations ------------------------------------------------------------

def remove_red(L: KLI, X_r: Iterable[int]) -> KLI:
    X = set(X_r)
    if X - set(L.r):
        raise ValueError(f"red labels {sorted(X - set(L.r))} are not defined")
    return KLI(L.skeleton, {i: v for i, v in L.r.items() if i not in X},
               L.b, {i: j for i, j in L.g.items() if i not in X}, L.k)


def remove_blue(L: KLI, X_b: Iterable[int]) -> KLI:
    X = set(X_b)
    if X - set(L.b):
        raise ValueError(f"blue labels {sorted(X - set(L.b))} are not defined")
    return KLI(L.skeleton, L.r, {j: e for j, e in L.b.items() if j not in X}, L.g, L.k)


def set_red_labels(L: KLI, X_r: Iterable[int], reds: Sequence[str], guards: Mapping[int, int]) -> KLI:
    """Point the labels of X_r (in increasing order) at ``reds`` and set their guards.

    The guard assignment travels with the relabeling so the guard map stays
    defined exactly on the red labels.
    """
    X = sorted(set(X_r))
    if len(X) != len(reds):
        raise ValueError("need one red per label")
    if set(guards) != set(X):
        raise ValueError("need one guard per new red label")
    r = dict(L.r)
    g = dict(L.g)
    for i, v in zip(X, reds):
        r[i] = v
        g[i] = guards[i]
    return KLI(L.skeleton, r, L.b, g, L.k)


def set_blue_labels(L: KLI, X_b: Iterable[int], blues: Sequence[str]) -> KLI:
    X = sorted(set(X_b))
    if len(X) != len(blues):
        raise ValueError("need one blue per label")
    b = dict(L.b)
    b.update(zip(X, blues))
    return KLI(L.skeleton, L.r, b, L.g, L.k)


# -- glueing -----------------------------------------------------------------

@dataclass(frozen=True)
class MergeMaps:
    """Where each operand's reds and blues ended up in the product."""
    red: tuple[dict[str, str], dict[str, str]]
    blue: tuple[dict[str, str], dict[str, str]]


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the earlier member as representative
            lo, hi = min(ra, rb), max(ra, rb)
            self.parent[hi] = lo


def _quotient(tagged: list[tuple[int, int, str]], pairs, used: set[str]):
    """Classes of ``tagged`` under ``pairs``; each named after its first member."""
    uf = _UnionFind([t[:2] for t in tagged])
    for a, b in pairs:
        uf.union(a, b)
    name_of: dict[tuple[int, int], str] = {}
    names: list[str] = []
    for op, pos, vid in tagged:
        rep = uf.find((op, pos))
        if rep not in name_of:
            cand = vid
            while cand in used:
                cand += "'"
            used.add(cand)
            name_of[rep] = cand
            names.append(cand)
    return {(op, pos): name_of[uf.find((op, pos))] for op, pos, _ in tagged}, names


def glue(L1: KLI, L2: KLI) -> tuple[KLI, MergeMaps]:
    """Disjoint union with equally labeled reds and equally labeled blues identified."""
    if L1.k != L2.k:
        raise ValueError("glued graphs must share k")
    ops = (L1, L2)
    red_tagged = [(o, p, v) for o, L in enumerate(ops) for p, v in enumerate(L.skeleton.reds)]
    blue_tagged = [(o, p, e) for o, L in enumerate(ops) for p, e in enumerate(L.skeleton.blues)]
    rpos = [{v: p for p, v in enumerate(L.skeleton.reds)} for L in ops]
    bpos = [{e: p for p, e in enumerate(L.skeleton.blues)} for L in ops]
    red_pairs = [((0, rpos[0][L1.r[i]]), (1, rpos[1][L2.r[i]])) for i in L1.r.keys() & L2.r.keys()]
    blue_pairs = [((0, bpos[0][L1.b[j]]), (1, bpos[1][L2.b[j]])) for j in L1.b.keys() & L2.b.keys()]
    used: set[str] = set()
    rname, reds = _quotient(red_tagged, red_pairs, used)
    bname, blues = _quotient(blue_tagged, blue_pairs, used)
    red_maps = tuple({v: rname[(o, rpos[o][v])] for v in L.skeleton.reds} for o, L in enumerate(ops))
    blue_maps = tuple({e: bname[(o, bpos[o][e])] for e in L.skeleton.blues} for o, L in enumerate(ops))
    edges = frozenset((blue_maps[o][e], red_maps[o][v])
                      for o, L in enumerate(ops) for e, v in L.skeleton.edges)
    skel = IncidenceGraph(tuple(reds), tuple(blues), edges)
    r = {i: red_maps[1][v] for i, v in L2.r.items()}
    r.update({i: red_maps[0][v] for i, v in L1.r.items()})
    b = {j: blue_maps[1][e] for j, e in L2.b.items()}
    b.update({j: blue_maps[0][e] for j, e in L1.b.items()})
    g = dict(L2.g)
    g.update(L1.g)
    return KLI(skel, r, b, g, L1.k), MergeMaps(red_maps, blue_maps)


# -- transitions -----------------------------------------------------------------

def _check_partial(f: Mapping[int, int], k: int):
    if not f:
        raise ValueError("a transition needs a non-empty domain")
    for i, j in f.items():
        if not isinstance(i, int) or i < 1:
            raise ValueError(f"{i!r} is not a positive integer")
        if not isinstance(j, int) or not 1 <= j <= k:
            raise ValueError(f"f({i}) = {j!r} outside [1, {k}]")


def m_f(f: Mapping[int, int], k: int) -> KLI:
    """Gadget with a red v_i per i in dom(f), a blue e_j per j in img(f), edges (e_f(i), v_i)."""
    _check_partial(f, k)
    dom = sorted(f)
    img = sorted(set(f.values()))
    skel = IncidenceGraph(tuple(f"v{i}" for i in dom), tuple(f"e{j}" for j in img),
                          frozenset((f"e{f[i]}", f"v{i}") for i in dom))
    return KLI(skel, {i: f"v{i}" for i in dom}, {j: f"e{j}" for j in img}, dict(f), k)


def is_transition(f: Mapping[int, int], g: Mapping[int, int]) -> bool:
    if not f or not set(f) <= set(g):
        return False
    img = set(f.values())
    return all(i in f for i, j in g.items() if j in img)


def transition_removed(L: KLI, f: Mapping[int, int]) -> set[int]:
    """X_b: blue labels that are guards, targets of f and currently defined."""
    return set(L.g.values()) & set(f.values()) & set(L.b)


def apply_transition_with_maps(L: KLI, f: Mapping[int, int]) -> tuple[KLI, MergeMaps]:
    _check_partial(f, L.k)
    if not is_transition(f, L.g):
        raise ValueError(f"{dict(f)} is not a transition for guard map {dict(L.g)}")
    return glue(m_f(f, L.k), remove_blue(L, transition_removed(L, f)))


def apply_transition(L: KLI, f: Mapping[int, int]) -> KLI:
    return apply_transition_with_maps(L, f)[0]


# -- derivations -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Derivation:
    """One step of a GLI derivation with its result and cost index cached."""
    op: str
    children: tuple["Derivation", ...]
    arg: object
    result: KLI
    cost: int
    maps: Optional[MergeMaps] = None
    name: str = ""

    def steps(self) -> list["Derivation"]:
        """Post-order list of all steps (children before parents)."""
        out: list[Derivation] = []
        seen: set[int] = set()

        def walk(d):
            if id(d) in seen:
                return
            seen.add(id(d))
            for c in d.children:
                walk(c)
            out.append(d)

        walk(self)
        return out

    def in_gli(self, i: int) -> bool:
        return self.cost <= i


def derive_base(L: KLI, name: str = "") -> Derivation:
    if set(L.r.values()) != set(L.skeleton.reds):
        raise DerivationError("base graphs must label every red")
    if set(L.b.values()) != set(L.skeleton.blues):
        raise DerivationError("base graphs must label every blue")
    if not real_guards(L):
        raise DerivationError("base graphs need real guards")
    return Derivation("base", (), None, L, 0, name=name)


def derive_glue(d1: Derivation, d2: Derivation, name: str = "") -> Derivation:
    if not compatible(d1.result.g, d2.result.g):
        raise DerivationError("glued guard maps are not compatible")
    L, maps = glue(d1.result, d2.result)
    return Derivation("glue", (d1, d2), None, L, max(d1.cost, d2.cost), maps, name)


def derive_transition(d: Derivation, f: Mapping[int, int], name: str = "") -> Derivation:
    L = d.result
    f = dict(f)
    if not is_transition(f, L.g):
        raise DerivationError(f"{f} is not a transition for guard map {dict(L.g)}")
    removed = transition_removed(L, f)
    L2, maps = apply_transition_with_maps(L, f)
    return Derivation("transition", (d,), f, L2, d.cost + len(removed), maps, name)


def derive_remove_red(d: Derivation, X_r: Iterable[int], name: str = "") -> Derivation:
    X = frozenset(X_r)
    try:
        L = remove_red(d.result, X)
    except ValueError as exc:
        raise DerivationError(str(exc)) from None
    return Derivation("remove_red", (d,), X, L, d.cost, name=name)


def derive_remove_blue(d: Derivation, X_b: Iterable[int], name: str = "") -> Derivation:
    X = frozenset(X_b)
    L = d.result
    if X - set(L.b):
        raise DerivationError(f"blue labels {sorted(X - set(L.b))} are not defined")
    if X & set(L.g.values()):
        raise DerivationError(f"blue labels {sorted(X & set(L.g.values()))} still guard a red")
    return Derivation("remove_blue", (d,), X, remove_blue(L, X), d.cost + len(X), name=name)


# -- from strict elimination forests ----------------------------------------------------

def _base_for_stem(I: IncidenceGraph, ef: EliminationForest, stem: list[str],
                   index: Mapping[str, int], k: int) -> KLI:
    """The base graph on the hyperedges of a root-to-leaf path, fully labeled."""
    blues = [ef.gamma[t] for t in stem]
    sub = induced_incidence(I, blues)
    c = I.contents()
    r = {index[v]: v for v in sub.reds}
    g = {}
    for v in sub.reds:
        g[index[v]] = min(j for j, e in enumerate(blues, 1) if v in c[e])
    return KLI(sub, r, {j: e for j, e in enumerate(blues, 1)}, g, k)


def build_node_derivations(x: Hypergraph | IncidenceGraph, ef: EliminationForest,
                           k: Optional[int] = None) -> dict[str, Derivation]:
    """Derivation of L_n for every forest node n, built bottom-up along the forest.

    Leaves start from the fully labeled stem graph.  At an inner node of level
    d each child drops the red labels first seen at that child, then blue
    label d+1, and the children are glued left to right.
    """
    I = as_incidence(x)
    verdict = validate_strict_ef(I, ef)
    if not verdict.ok:
        raise ValueError(f"not a strict elimination forest: {verdict.violations[0]}")
    F = ef.forest
    k = F.height if k is None else k
    if k < F.height:
        raise ValueError(f"k = {k} is below the forest height {F.height}")
    index = {v: i for i, v in enumerate(I.reds, 1)}
    c = I.contents()

    def labels(nodes) -> set[int]:
        out = set()
        for n in nodes:
            out |= {index[v] for v in c[ef.gamma[n]]}
        return out

    out: dict[str, Derivation] = {}

    def build(n: str) -> Derivation:
        kids = F.children(n)
        stem = list(reversed(F.root_path(n)))
        if not kids:
            d = derive_base(_base_for_stem(I, ef, stem, index, k), name=f"L_{n}")
        else:
            above = labels(stem)
            level = len(stem)
            parts = []
            for child in kids:
                dc = build(child)
                xr = labels([child]) - above
                dc = derive_remove_red(dc, xr, name=f"L_{child}-R")
                dc = derive_remove_blue(dc, {level + 1}, name=f"L'_{child}")
                parts.append(dc)
            d = parts[0]
            for p in parts[1:]:
                d = derive_glue(d, p, name=f"L_{n}")
            if len(parts) == 1:
                d = Derivation(d.op, d.children, d.arg, d.result, d.cost, d.maps, f"L_{n}")
        out[n] = d
        return d

    for root in F.roots:
        build(root)
    return out


def build_from_strict_ef(x: Hypergraph | IncidenceGraph, ef: EliminationForest,
                         k: Optional[int] = None) -> Derivation:
    """Label-free derivation whose skeleton is isomorphic to x, of cost at most k."""
    I = as_incidence(x)
    per_node = build_node_derivations(I, ef, k)
    F = ef.forest
    k = F.height if k is None else k
    if not F.nodes:
        return derive_base(KLI(I, {}, {}, {}, max(k, 1)), name="L")
    index = {v: i for i, v in enumerate(I.reds, 1)}
    c = I.contents()
    trees = []
    for root in F.roots:
        d = per_node[root]
        d = derive_remove_red(d, {index[v] for v in c[ef.gamma[root]]}, name=f"L_{root}-R")
        trees.append(derive_remove_blue(d, {1}, name=f"L'_{root}"))
    d = trees[0]
    for t in trees[1:]:
        d = derive_glue(d, t, name="L")
    return d


# -- back to elimination forests -----------------------------------------------------------

def _newly_unlabeled(L: KLI, X_b: Iterable[int]) -> list[str]:
    """Blues whose every label lies in X_b, in order of their smallest such label."""
    X = set(X_b)
    keep = {e for j, e in L.b.items() if j not in X}
    out: list[str] = []
    for j in sorted(X):
        e = L.b[j]
        if e not in keep and e not in out:
            out.append(e)
    return out


def _chain(nodes: list[str], parent: dict, chain: list[str]) -> tuple[list[str], dict]:
    roots = [n for n in nodes if parent[n] is None]
    new_parent = dict(parent)
    prev = None
    for t in chain:
        new_parent[t] = prev
        prev = t
    for rt in roots:
        new_parent[rt] = prev
    return chain + nodes, new_parent


def extract_forest(d: Derivation) -> EliminationForest:
    """Forest over the unlabeled blues of d's result, of height at most d's cost.

    Node ids are the blue ids of the result skeleton and gamma is the identity.
    A label-free result yields a strict elimination forest of its skeleton.
    """
    memo: dict[int, tuple[list[str], dict]] = {}

    def rec(d: Derivation) -> tuple[list[str], dict]:
        if id(d) in memo:
            return memo[id(d)]
        if d.op == "base":
            res = ([], {})
        elif d.op == "remove_red":
            res = rec(d.children[0])
        elif d.op == "remove_blue":
            nodes, parent = rec(d.children[0])
            res = _chain(nodes, parent, _newly_unlabeled(d.children[0].result, d.arg))
        elif d.op == "glue":
            res = ([], {})
            for o, child in enumerate(d.children):
                pi = d.maps.blue[o]
                nodes, parent = rec(child)
                res[0].extend(pi[n] for n in nodes)
                res[1].update({pi[n]: (pi[p] if p is not None else None) for n, p in parent.items()})
        elif d.op == "transition":
            child = d.children[0]
            nodes, parent = rec(child)
            pi = d.maps.blue[1]
            nodes = [pi[n] for n in nodes]
            parent = {pi[n]: (pi[p] if p is not None else None) for n, p in parent.items()}
            removed = transition_removed(child.result, d.arg)
            chain = [pi[e] for e in _newly_unlabeled(child.result, removed)]
            res = _chain(nodes, parent, chain)
        else:
            raise ValueError(f"unknown derivation step {d.op!r}")
        memo[id(d)] = res
        return res

    nodes, parent = rec(d)
    forest = RootedForest(tuple(nodes), parent)
    return EliminationForest(forest, {n: n for n in nodes}, strict=d.result.label_free)


def labeled_heritage_violations(L: KLI, ef: EliminationForest) -> list[tuple[str, str, str]]:
    """Pairs of nodes sharing an unlabeled red that neither a labeled blue nor their common root path covers."""
    F = ef.forest
    c = L.skeleton.contents()
    labeled_reds = set(L.r.values())
    covered_by_labels = set()
    for e in L.b.values():
        covered_by_labels |= c[e]

    def tilde(n):
        return c[ef.gamma[n]] - labeled_reds

    out = []
    for i, s in enumerate(F.nodes):
        for t in F.nodes[i:]:
            for v in sorted(tilde(s) & tilde(t)):
                if v in covered_by_labels:
                    continue
                w = lcv(F, s, t)
                if w is None or not any(v in tilde(m) for m in F.root_path(w)):
                    out.append((s, t, v))
    return out


# -- .gli scripts -----------------------------------------------------------------

_MAP_RE = re.compile(r"^([rbgf])=\{(.*)\}$")


def _parse_map(text: str, lineno: int, value_int: bool) -> dict:
    m = _MAP_RE.match(text)
    if not m:
        raise ValueError(f"line {lineno}: expected <key>={{i:x,...}}, got {text!r}")
    out = {}
    body = m.group(2).strip()
    if not body:
        return out
    for item in body.split(","):
        key, colon, val = item.partition(":")
        if not colon:
            raise ValueError(f"line {lineno}: bad map entry {item!r}")
        try:
            ki = int(key.strip())
            vv = int(val.strip()) if value_int else val.strip()
        except ValueError:
            raise ValueError(f"line {lineno}: bad map entry {item!r}") from None
        if ki in out:
            raise ValueError(f"line {lineno}: key {ki} given twice")
        out[ki] = vv
    return out


def _parse_set(text: str, lineno: int) -> set[int]:
    t = text.strip()
    if t.startswith("{") and t.endswith("}"):
        t = t[1:-1]
    try:
        return {int(s) for s in t.split(",") if s.strip()}
    except ValueError:
        raise ValueError(f"line {lineno}: expected a set of integers, got {text!r}") from None


@dataclass
class Replay:
    steps: dict[str, Derivation] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)
    k: int = 1

    @property
    def final(self) -> Derivation:
        if not self.order:
            raise ValueError("empty derivation script")
        return self.steps[self.order[-1]]


def replay_gli(text: str, base_dir: str = ".") -> Replay:
    """Run a derivation script; hypergraph files resolve against ``base_dir``.

    An optional ``K <k>`` line fixes k; otherwise k is the largest blue label
    or guard value that appears in any base line.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line.split()))
    k = None
    for lineno, parts in lines:
        if parts[0] == "K":
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) < 1:
                raise ValueError(f"line {lineno}: expected 'K <positive integer>'")
            k = int(parts[1])
    if k is None:
        k = 1
        for lineno, parts in lines:
            if parts[0] == "BASE":
                for p in parts[3:]:
                    if p.startswith(("b=", "g=")):
                        vals = _parse_map(p, lineno, p.startswith("g="))
                        k = max([k] + (list(vals) if p.startswith("b=") else list(vals.values())))
    rep = Replay(k=k)

    def child(name, lineno):
        if name not in rep.steps:
            raise ValueError(f"line {lineno}: unknown step {name!r}")
        return rep.steps[name]

    for lineno, parts in lines:
        op = parts[0]
        if op == "K":
            continue
        if len(parts) < 2:
            raise ValueError(f"line {lineno}: missing step name")
        name = parts[1]
        if name in rep.steps:
            raise ValueError(f"line {lineno}: step {name!r} defined twice")
        try:
            if op == "BASE":
                if len(parts) < 3:
                    raise ValueError(f"line {lineno}: BASE needs a hypergraph file")
                H = read_hg(os.path.join(base_dir, parts[2]))
                maps = {"r": {}, "b": {}, "g": {}}
                for p in parts[3:]:
                    key = p.split("=", 1)[0]
                    if key not in maps:
                        raise ValueError(f"line {lineno}: unknown field {p!r}")
                    maps[key] = _parse_map(p, lineno, key == "g")
                L = KLI(as_incidence(H), maps["r"], maps["b"], maps["g"], k)
                d = derive_base(L, name)
            elif op == "GLUE":
                if len(parts) != 4:
                    raise ValueError(f"line {lineno}: expected 'GLUE <name> <left> <right>'")
                d = derive_glue(child(parts[2], lineno), child(parts[3], lineno), name)
            elif op == "TRANS":
                if len(parts) != 4:
                    raise ValueError(f"line {lineno}: expected 'TRANS <name> <child> f={{i:j,...}}'")
                d = derive_transition(child(parts[2], lineno), _parse_map(parts[3], lineno, True), name)
            elif op in ("RMR", "RMB"):
                if len(parts) != 4:
                    raise ValueError(f"line {lineno}: expected '{op} <name> <child> {{i,...}}'")
                X = _parse_set(parts[3], lineno)
                fn = derive_remove_red if op == "RMR" else derive_remove_blue
                d = fn(child(parts[2], lineno), X, name)
            else:
                raise ValueError(f"line {lineno}: unknown step kind {op!r}")
        except (DerivationError, InvalidInstance) as exc:
            raise DerivationError(f"line {lineno}: {exc}") from None
        rep.steps[name] = d
        rep.order.append(name)
    return rep


def read_gli(path_: str) -> Replay:
    with open(path_, encoding="utf-8") as fh:
        return replay_gli(fh.read(), os.path.dirname(os.path.abspath(path_)))
