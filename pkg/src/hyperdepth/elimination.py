"""Rooted forests, elimination forests, exact (strict) hypertree depth."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

from .errors import BudgetExceeded
from .hypergraph import Hypergraph, IncidenceGraph, as_incidence

DEFAULT_STATE_BUDGET = 500_000


@dataclass(frozen=True)
class RootedForest:
    nodes: tuple[str, ...]
    parent: Mapping[str, Optional[str]]

    def __post_init__(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("duplicate node id")
        ns = set(self.nodes)
        if set(self.parent) != ns:
            raise ValueError("parent map must be given for every node (None for roots)")
        for n, p in self.parent.items():
            if p is not None and p not in ns:
                raise ValueError(f"parent {p!r} of {n!r} is not a node")
        for n in self.nodes:
            seen = set()
            while n is not None:
                if n in seen:
                    raise ValueError("parent map contains a cycle")
                seen.add(n)
                n = self.parent[n]

    @classmethod
    def empty(cls) -> "RootedForest":
        return cls((), {})

    @property
    def roots(self) -> tuple[str, ...]:
        return tuple(n for n in self.nodes if self.parent[n] is None)

    def children(self, n: str) -> tuple[str, ...]:
        self._check(n)
        return tuple(c for c in self.nodes if self.parent[c] == n)

    def root_path(self, n: str) -> list[str]:
        """P(n) listed from n up to its root."""
        self._check(n)
        out = []
        while n is not None:
            out.append(n)
            n = self.parent[n]
        return out

    def level(self, n: str) -> int:
        return len(self.root_path(n))

    @property
    def height(self) -> int:
        return max((self.level(n) for n in self.nodes), default=0)

    def leq(self, s: str, t: str) -> bool:
        """s lies on the root path of t."""
        return s in self.root_path(t)

    def segment(self, s: str, t: str) -> list[str]:
        """P(s, t) for s <= t, listed from t upwards."""
        out = []
        for n in self.root_path(t):
            out.append(n)
            if n == s:
                return out
        raise ValueError(f"{s!r} is not an ancestor of {t!r}")

    def descendants(self, n: str) -> list[str]:
        return [t for t in self.nodes if n in self.root_path(t)]

    def _check(self, n):
        if n not in self.parent:
            raise KeyError(f"unknown node {n!r}")


def lcv(F: RootedForest, s: str, t: str) -> Optional[str]:
    """Deepest common node of P(s) and P(t), or None when s and t lie in different trees."""
    ps = F.root_path(s)
    pt = set(F.root_path(t))
    for n in ps:
        if n in pt:
            return n
    return None


def subtree_with_stem(F: RootedForest, n: str) -> set[str]:
    return set(F.root_path(n)) | set(F.descendants(n))


@dataclass(frozen=True)
class EliminationForest:
    forest: RootedForest
    gamma: Mapping[str, str]
    strict: bool = False

    @property
    def height(self) -> int:
        return self.forest.height

    def content(self, I: IncidenceGraph, n: str) -> frozenset[str]:
        return I.content(self.gamma[n])


@dataclass(frozen=True)
class Violation:
    condition: str
    ids: tuple[str, ...]
    detail: str = ""


@dataclass
class Verdict:
    ok: bool
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class DepthWitness:
    depth: int
    forest: EliminationForest


def _check_ids(I: IncidenceGraph, ef: EliminationForest):
    if set(ef.gamma) != set(ef.forest.nodes):
        raise ValueError("gamma must be defined exactly on the forest nodes")
    blues = set(I.blues)
    bad = sorted(b for b in ef.gamma.values() if b not in blues)
    if bad:
        raise ValueError(f"gamma maps to unknown hyperedges {bad}")


def _path_cover(I, ef, contents, n):
    out = set()
    for m in ef.forest.root_path(n):
        out |= contents[ef.gamma[m]]
    return out


def _shared_heritage(I, ef, contents) -> list[Violation]:
    F = ef.forest
    out = []
    for s, t in itertools.combinations(F.nodes, 2):
        common = contents[ef.gamma[s]] & contents[ef.gamma[t]]
        if not common:
            continue
        w = lcv(F, s, t)
        if w is None:
            out.append(Violation("shared-heritage", (s, t), "no common ancestor"))
        elif not common <= _path_cover(I, ef, contents, w):
            missing = ",".join(sorted(common - _path_cover(I, ef, contents, w)))
            out.append(Violation("shared-heritage", (s, t), f"{{{missing}}} not covered above {w}"))
    return out


def validate_ef(x: Hypergraph | IncidenceGraph, ef: EliminationForest) -> Verdict:
    """Check completeness for vertices, hyperedge containment and shared heritage."""
    I = as_incidence(x)
    _check_ids(I, ef)
    contents = I.contents()
    out: list[Violation] = []
    covered = set()
    for n in ef.forest.nodes:
        covered |= contents[ef.gamma[n]]
    for r in I.reds:
        if r not in covered:
            out.append(Violation("completeness", (r,)))
    covers = [_path_cover(I, ef, contents, n) for n in ef.forest.nodes]
    for b in I.blues:
        if not any(contents[b] <= c for c in covers):
            out.append(Violation("containment", (b,)))
    out.extend(_shared_heritage(I, ef, contents))
    return Verdict(not out, out)


def validate_strict_ef(x: Hypergraph | IncidenceGraph, ef: EliminationForest) -> Verdict:
    """Bijectivity of gamma plus shared heritage."""
    I = as_incidence(x)
    _check_ids(I, ef)
    out: list[Violation] = []
    images = list(ef.gamma.values())
    for b in sorted(set(images)):
        holders = tuple(n for n in ef.forest.nodes if ef.gamma[n] == b)
        if len(holders) > 1:
            out.append(Violation("bijectivity", holders, f"{b} is hit {len(holders)} times"))
    for b in I.blues:
        if b not in set(images):
            out.append(Violation("bijectivity", (b,), "hyperedge not in the image"))
    out.extend(_shared_heritage(I, ef, I.contents()))
    return Verdict(not out, out)


def is_strict_for(x: Hypergraph | IncidenceGraph, ef: EliminationForest) -> bool:
    I = as_incidence(x)
    imgs = list(ef.gamma.values())
    return len(imgs) == len(set(imgs)) and set(imgs) == set(I.blues)


# -- exact search --------------------------------------------------------------

class _Search:
    """Recursion shared by the strict and non-strict depth searches.

    A state is a set of hyperedges that must end up in one subtree together
    with the union A of the contents on the stem above it.  Hyperedges that
    share a vertex outside A are forced into the same child subtree.
    """

    def __init__(self, I: IncidenceGraph, strict: bool, budget: int):
        self.I = I
        self.strict = strict
        self.budget = budget
        masks, _ = I.indexed()
        self.masks = masks
        self.memo: dict[tuple[int, int], tuple[int, int]] = {}

    def classes(self, S: int, A: int) -> list[int]:
        groups: list[tuple[int, int]] = []  # (edge set, outside-vertex mask)
        i = 0
        rest = S
        while rest:
            if rest & 1:
                out = self.masks[i] & ~A
                eset = 1 << i
                keep = []
                for es, vm in groups:
                    if vm & out:
                        eset |= es
                        out |= vm
                    else:
                        keep.append((es, vm))
                keep.append((eset, out))
                groups = keep
            rest >>= 1
            i += 1
        groups.sort(key=lambda g: (g[0] & -g[0]))
        return [g[0] for g in groups]

    def verts(self, S: int) -> int:
        m = 0
        i = 0
        while S:
            if S & 1:
                m |= self.masks[i]
            S >>= 1
            i += 1
        return m

    def solve(self, C: int, A: int) -> int:
        A &= self.verts(C)
        key = (C, A)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[0]
        if len(self.memo) >= self.budget:
            raise BudgetExceeded(f"depth search exceeded {self.budget} states")
        best = None
        best_root = -1
        i = 0
        rest = C
        while rest:
            if rest & 1:
                A2 = A | self.masks[i]
                R = C & ~(1 << i)
                if not self.strict:
                    R = self._uncovered(R, A2)
                h = 1 + max((self.solve(K, A2) for K in self.classes(R, A2)), default=0)
                if best is None or h < best:
                    best, best_root = h, i
            rest >>= 1
            i += 1
        self.memo[key] = (best, best_root)
        return best

    def _uncovered(self, S: int, A: int) -> int:
        out = 0
        i = 0
        while S:
            if S & 1 and self.masks[i] & ~A:
                out |= 1 << i
            S >>= 1
            i += 1
        return out

    def build(self, C: int, A: int, parent: Optional[str], nodes: list, parents: dict):
        A &= self.verts(C)
        _, root = self.memo[(C, A)]
        name = self.I.blues[root]
        nodes.append(name)
        parents[name] = parent
        A2 = A | self.masks[root]
        R = C & ~(1 << root)
        if not self.strict:
            R = self._uncovered(R, A2)
        for K in self.classes(R, A2):
            self.build(K, A2, name, nodes, parents)


def _run(I: IncidenceGraph, strict: bool, budget: int) -> DepthWitness:
    s = _Search(I, strict, budget)
    n = len(I.blues)
    allm = (1 << n) - 1
    top = allm if strict else s._uncovered(allm, 0)
    if n == 0:
        return DepthWitness(0, EliminationForest(RootedForest.empty(), {}, strict=True))
    if top == 0:
        # only empty hyperedges remain; one node is needed for containment
        b = I.blues[0]
        ef = EliminationForest(RootedForest((b,), {b: None}), {b: b}, strict=len(I.blues) == 1)
        return DepthWitness(1, ef)
    depth = 0
    nodes: list[str] = []
    parents: dict[str, Optional[str]] = {}
    for K in s.classes(top, 0):
        depth = max(depth, s.solve(K, 0))
        s.build(K, 0, None, nodes, parents)
    ef = EliminationForest(RootedForest(tuple(nodes), parents), {v: v for v in nodes},
                           strict=strict or len(nodes) == n)
    return DepthWitness(depth, ef)


def shd_exact(x: Hypergraph | IncidenceGraph, budget: int = DEFAULT_STATE_BUDGET) -> DepthWitness:
    return _run(as_incidence(x), True, budget)


def hd_exact(x: Hypergraph | IncidenceGraph, budget: int = DEFAULT_STATE_BUDGET) -> DepthWitness:
    return _run(as_incidence(x), False, budget)


def iter_parent_maps(nodes: tuple[str, ...]):
    """Every rooted forest whose node set is exactly ``nodes``."""
    n = len(nodes)
    for choice in itertools.product(range(-1, n), repeat=n):
        ok = True
        for start in range(n):
            seen = 0
            cur = start
            while cur != -1:
                if seen >> cur & 1:
                    ok = False
                    break
                seen |= 1 << cur
                cur = choice[cur]
            if not ok:
                break
        if ok:
            yield {nodes[i]: (None if p == -1 else nodes[p]) for i, p in enumerate(choice)}


def shd_bruteforce(x: Hypergraph | IncidenceGraph, cap: int = 5) -> int:
    """Minimum height over every forest on the blues with gamma the identity.

    Enumerating forests on anonymous nodes together with every bijection onto
    the blues produces exactly the same set of labelled structures.
    """
    I = as_incidence(x)
    if len(I.blues) > cap:
        raise BudgetExceeded(f"brute force is capped at {cap} hyperedges")
    if not I.blues:
        return 0
    gamma = {b: b for b in I.blues}
    best = None
    for parent in iter_parent_maps(I.blues):
        F = RootedForest(I.blues, parent)
        h = F.height
        if best is not None and h >= best:
            continue
        if validate_strict_ef(I, EliminationForest(F, gamma, True)).ok:
            best = h
    return best


def hd_bruteforce(x: Hypergraph | IncidenceGraph, cap: int = 5) -> int:
    """Minimum height over forests on every non-empty subset of blues, gamma injective."""
    I = as_incidence(x)
    if len(I.blues) > cap:
        raise BudgetExceeded(f"brute force is capped at {cap} hyperedges")
    if not I.blues:
        return 0
    best = None
    for size in range(1, len(I.blues) + 1):
        for subset in itertools.combinations(I.blues, size):
            for parent in iter_parent_maps(subset):
                F = RootedForest(subset, parent)
                h = F.height
                if best is not None and h >= best:
                    continue
                if validate_ef(I, EliminationForest(F, {b: b for b in subset})).ok:
                    best = h
    return best


# -- strictification -----------------------------------------------------------

def strictify(x: Hypergraph | IncidenceGraph, ef: EliminationForest) -> EliminationForest:
    """Turn a valid elimination forest into a strict one of height at most one more.

    Nodes with a repeated hyperedge are contracted into their parent first.
    Each hyperedge left without a node then gets a fresh leaf below the
    lower end t of a shortest segment P(s, t) whose contents cover it.
    """
    I = as_incidence(x)
    verdict = validate_ef(I, ef)
    if not verdict.ok:
        raise ValueError(f"input forest is invalid: {verdict.violations[:3]}")
    contents = I.contents()
    nodes = list(ef.forest.nodes)
    parent = dict(ef.forest.parent)
    gamma = dict(ef.gamma)

    def level(n):
        d = 0
        while n is not None:
            d += 1
            n = parent[n]
        return d

    while True:
        seen: dict[str, str] = {}
        dup = None
        for n in nodes:
            b = gamma[n]
            if b in seen:
                dup = (seen[b], n)
                break
            seen[b] = n
        if dup is None:
            break
        t, s = dup
        if level(t) > level(s):
            s, t = t, s
        p = parent[s]
        for c in nodes:
            if parent[c] == s:
                parent[c] = p
        nodes.remove(s)
        del parent[s], gamma[s]

    F1 = RootedForest(tuple(nodes), dict(parent))
    mapped = set(gamma.values())
    taken = set(nodes)
    for b in I.blues:
        if b in mapped:
            continue
        name = b
        while name in taken:
            name += "'"
        taken.add(name)
        need = contents[b]
        anchor = None
        if need:
            best_len = None
            for t in F1.nodes:
                acc = set()
                for length, m in enumerate(F1.root_path(t), 1):
                    acc |= contents[gamma[m]]
                    if need <= acc:
                        if best_len is None or length < best_len:
                            best_len, anchor = length, t
                        break
        nodes.append(name)
        parent[name] = anchor
        gamma[name] = b
    return EliminationForest(RootedForest(tuple(nodes), parent), gamma, strict=True)


# -- .ef text format -------------------------------------------------------------

def parse_ef(text: str) -> EliminationForest:
    nodes: list[str] = []
    parent: dict[str, Optional[str]] = {}
    gamma: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "N" or len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 'N <node> parent=<node|-> edge=<edge>'")
        node = parts[1]
        kv = dict(p.split("=", 1) for p in parts[2:] if "=" in p)
        if set(kv) != {"parent", "edge"}:
            raise ValueError(f"line {lineno}: expected parent= and edge= fields")
        if node in parent:
            raise ValueError(f"line {lineno}: node {node!r} declared twice")
        nodes.append(node)
        parent[node] = None if kv["parent"] == "-" else kv["parent"]
        gamma[node] = kv["edge"]
    return EliminationForest(RootedForest(tuple(nodes), parent), gamma)


def format_ef(ef: EliminationForest) -> str:
    lines = []
    for n in ef.forest.nodes:
        p = ef.forest.parent[n]
        lines.append(f"N {n} parent={p if p is not None else '-'} edge={ef.gamma[n]}")
    return "\n".join(lines) + ("\n" if lines else "")


def with_strict_flag(x: Hypergraph | IncidenceGraph, ef: EliminationForest) -> EliminationForest:
    return replace(ef, strict=is_strict_for(x, ef))
