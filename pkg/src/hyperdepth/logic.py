"""Guarded counting logic over incidence graphs.

Vertex variables are ``v1, v2, ...`` and hyperedge variables ``e1 .. ek``;
both are represented by their integer index.  A quantifier stores its guard
function as sorted ``(i, j)`` pairs meaning ``g(i) = j`` together with the
body psi, and its full matrix is ``chi = Guard_g & psi``.

Counting semantics: ``existsge n (x1..xl) . chi`` holds iff at least n
distinct value tuples (components may coincide) make chi true.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from .elimination import Verdict, Violation
from .hypergraph import Hypergraph, IncidenceGraph, as_incidence


# -- syntax --------------------------------------------------------------------

@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class VEq:
    i: int
    i2: int


@dataclass(frozen=True)
class EEq:
    j: int
    j2: int


@dataclass(frozen=True)
class Edge:
    j: int
    i: int


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    kind: str  # "v" or "e"
    n: int
    vars: tuple[int, ...]
    guard: tuple[tuple[int, int], ...]
    body: "Formula"
    exact: bool = False

    def __post_init__(self):
        if self.kind not in ("v", "e"):
            raise ValueError("quantifier kind must be 'v' or 'e'")
        object.__setattr__(self, "guard", tuple(sorted(self.guard)))

    @property
    def g(self) -> dict[int, int]:
        return dict(self.guard)

    @property
    def matrix(self) -> "Formula":
        return And(guard_formula(self.g), self.body)


Formula = Union[Top, VEq, EEq, Edge, Not, And, Exists]
ATOMS = (Top, VEq, EEq, Edge)


def guard_formula(g: Mapping[int, int]) -> Formula:
    """Conjunction of E(e_g(i), v_i) over dom(g) in increasing i, or T when g is empty."""
    out: Optional[Formula] = None
    for i in sorted(g):
        atom = Edge(g[i], i)
        out = atom if out is None else And(out, atom)
    return Top() if out is None else out


def as_guard(phi: Formula) -> Optional[dict[int, int]]:
    """Inverse of ``guard_formula``; None if phi is not a logical guard."""
    if isinstance(phi, Top):
        return {}
    atoms = []
    while isinstance(phi, And):
        if not isinstance(phi.right, Edge):
            return None
        atoms.append(phi.right)
        phi = phi.left
    if not isinstance(phi, Edge):
        return None
    atoms.append(phi)
    atoms.reverse()
    idx = [a.i for a in atoms]
    if idx != sorted(set(idx)):
        return None
    return {a.i: a.j for a in atoms}


def free_vars(phi: Formula) -> tuple[frozenset[int], frozenset[int]]:
    """(free vertex indices, free edge indices)."""
    if isinstance(phi, Top):
        return frozenset(), frozenset()
    if isinstance(phi, VEq):
        return frozenset((phi.i, phi.i2)), frozenset()
    if isinstance(phi, EEq):
        return frozenset(), frozenset((phi.j, phi.j2))
    if isinstance(phi, Edge):
        return frozenset((phi.i,)), frozenset((phi.j,))
    if isinstance(phi, Not):
        return free_vars(phi.sub)
    if isinstance(phi, And):
        a, b = free_vars(phi.left), free_vars(phi.right)
        return a[0] | b[0], a[1] | b[1]
    if isinstance(phi, Exists):
        fv, fe = free_vars(phi.matrix)
        if phi.kind == "v":
            return fv - set(phi.vars), fe
        return fv, fe - set(phi.vars)
    raise TypeError(f"not a formula: {phi!r}")


def free_v(phi: Formula) -> frozenset[int]:
    return free_vars(phi)[0]


def free_e(phi: Formula) -> frozenset[int]:
    return free_vars(phi)[1]


def is_sentence(phi: Formula) -> bool:
    fv, fe = free_vars(phi)
    return not fv and not fe


def guard_depth(phi: Formula) -> int:
    if isinstance(phi, ATOMS):
        return 0
    if isinstance(phi, Not):
        return guard_depth(phi.sub)
    if isinstance(phi, And):
        return max(guard_depth(phi.left), guard_depth(phi.right))
    if isinstance(phi, Exists):
        d = guard_depth(phi.body)
        return d + len(phi.vars) if phi.kind == "e" else d
    raise TypeError(f"not a formula: {phi!r}")


def size(phi: Formula) -> int:
    """Number of AST nodes; a quantifier counts its guard atoms."""
    if isinstance(phi, ATOMS):
        return 1
    if isinstance(phi, Not):
        return 1 + size(phi.sub)
    if isinstance(phi, And):
        return 1 + size(phi.left) + size(phi.right)
    return 1 + len(phi.guard) + size(phi.body)


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, Not):
        yield from subformulas(phi.sub)
    elif isinstance(phi, And):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif isinstance(phi, Exists):
        yield from subformulas(phi.body)


def desugar_eq(phi: Formula) -> Formula:
    """Replace every exact quantifier by 'at least n and not at least n+1'."""
    if isinstance(phi, ATOMS):
        return phi
    if isinstance(phi, Not):
        return Not(desugar_eq(phi.sub))
    if isinstance(phi, And):
        return And(desugar_eq(phi.left), desugar_eq(phi.right))
    body = desugar_eq(phi.body)
    ge = Exists(phi.kind, phi.n, phi.vars, phi.guard, body)
    if not phi.exact:
        return ge
    return And(ge, Not(Exists(phi.kind, phi.n + 1, phi.vars, phi.guard, body)))


# -- concrete syntax -------------------------------------------------------------

class FormulaSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"at offset {pos}: {msg}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(existsge|existseq|[ve]\d+|\d+|E|T|[~&().,\[\]@=])")


def _tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    out.append(("", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.toks[self.i][0]

    def pos(self) -> int:
        return self.toks[self.i][1]

    def take(self, expect: Optional[str] = None) -> str:
        tok = self.peek()
        if expect is not None and tok != expect:
            raise FormulaSyntaxError(f"expected {expect!r}, found {tok or 'end of input'!r}", self.pos())
        self.i += 1
        return tok

    def var(self, kind: str) -> int:
        tok = self.peek()
        if not re.fullmatch(kind + r"\d+", tok):
            raise FormulaSyntaxError(f"expected a {kind}-variable, found {tok or 'end of input'!r}",
                                     self.pos())
        idx = int(tok[1:])
        if idx < 1:
            raise FormulaSyntaxError("variable indices start at 1", self.pos())
        self.take()
        return idx

    def nat(self) -> int:
        tok = self.peek()
        if not tok.isdigit() or int(tok) < 1:
            raise FormulaSyntaxError(f"expected a positive count, found {tok or 'end of input'!r}",
                                     self.pos())
        self.take()
        return int(tok)

    def formula(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.formula())
        if tok == "(":
            self.take()
            left = self.formula()
            if self.peek() == ")":
                self.take()
                return left
            self.take("&")
            right = self.formula()
            self.take(")")
            return And(left, right)
        if tok == "T":
            self.take()
            return Top()
        if tok == "E":
            self.take()
            self.take("(")
            j = self.var("e")
            self.take(",")
            i = self.var("v")
            self.take(")")
            return Edge(j, i)
        if tok in ("existsge", "existseq"):
            return self.quant()
        if tok.startswith("v"):
            i = self.var("v")
            self.take("=")
            return VEq(i, self.var("v"))
        if tok.startswith("e"):
            j = self.var("e")
            self.take("=")
            return EEq(j, self.var("e"))
        raise FormulaSyntaxError(f"unexpected {tok or 'end of input'!r}", self.pos())

    def quant(self) -> Formula:
        start = self.pos()
        exact = self.take() == "existseq"
        n = self.nat()
        self.take("(")
        kind = self.peek()[:1]
        if kind not in ("v", "e"):
            raise FormulaSyntaxError("expected a variable list", self.pos())
        vs = [self.var(kind)]
        while self.peek() == ",":
            self.take()
            vs.append(self.var(kind))
        self.take(")")
        guard = None
        if self.peek() == "[":
            self.take()
            guard = []
            if self.peek() != "]":
                while True:
                    i = self.var("v")
                    self.take("@")
                    guard.append((i, self.var("e")))
                    if self.peek() != ",":
                        break
                    self.take()
            self.take("]")
            if len({i for i, _ in guard}) != len(guard):
                raise FormulaSyntaxError("a vertex variable is guarded twice", start)
        self.take(".")
        body = self.formula()
        if guard is None:
            if free_v(body):
                raise FormulaSyntaxError("guard omitted but the body has free vertex variables", start)
            guard = []
        return Exists(kind, n, tuple(vs), tuple(guard), body, exact)


def parse(text: str) -> Formula:
    p = _Parser(text)
    phi = p.formula()
    if p.peek() != "":
        raise FormulaSyntaxError(f"trailing input {p.peek()!r}", p.pos())
    return phi


def render(phi: Formula) -> str:
    if isinstance(phi, Top):
        return "T"
    if isinstance(phi, VEq):
        return f"v{phi.i}=v{phi.i2}"
    if isinstance(phi, EEq):
        return f"e{phi.j}=e{phi.j2}"
    if isinstance(phi, Edge):
        return f"E(e{phi.j},v{phi.i})"
    if isinstance(phi, Not):
        return "~" + render(phi.sub)
    if isinstance(phi, And):
        return f"({render(phi.left)} & {render(phi.right)})"
    word = "existseq" if phi.exact else "existsge"
    vs = ",".join(f"{phi.kind}{x}" for x in phi.vars)
    guard = ",".join(f"v{i}@e{j}" for i, j in phi.guard)
    return f"{word} {phi.n} ({vs}) [{guard}] . {render(phi.body)}"


def read_gcl(path_: str) -> Formula:
    with open(path_, encoding="utf-8") as fh:
        return parse(fh.read())


# -- well-formedness -------------------------------------------------------------

def wellformed_gck(phi: Formula, k: int) -> Verdict:
    """Check every side condition of the inductive definition of GC^k."""
    out: list[Violation] = []

    def edge_index(j, where):
        if not 1 <= j <= k:
            out.append(Violation("edge-index", (f"e{j}",), f"{where}: outside [1, {k}]"))

    for sub in subformulas(phi):
        if isinstance(sub, EEq):
            edge_index(sub.j, render(sub))
            edge_index(sub.j2, render(sub))
        elif isinstance(sub, Edge):
            edge_index(sub.j, render(sub))
        if not isinstance(sub, Exists):
            continue
        head = render(sub).split(" . ", 1)[0]
        if sub.n < 1:
            out.append(Violation("count", (head,), "counts start at 1"))
        if not sub.vars or list(sub.vars) != sorted(set(sub.vars)):
            out.append(Violation("tuple-order", (head,), "variable tuple must be strictly increasing"))
        for _, j in sub.guard:
            edge_index(j, head)
        if sub.kind == "e":
            for j in sub.vars:
                edge_index(j, head)
        wanted = set(free_v(sub.body))
        if {i for i, _ in sub.guard} != wanted:
            out.append(Violation("guard-domain", (head,),
                                 f"guard must cover exactly {sorted(wanted)}"))
        fv, fe = free_vars(sub.matrix)
        pool = fv if sub.kind == "v" else fe
        if not set(sub.vars) <= pool:
            extra = sorted(set(sub.vars) - pool)
            out.append(Violation("tuple-free", (head,),
                                 f"quantified {[f'{sub.kind}{x}' for x in extra]} not free in the body"))
    return Verdict(not out, out)


# -- restricted fragment ---------------------------------------------------------

def _rgc_with(g: dict[int, int], psi: Formula) -> Optional[str]:
    """Why (Guard_g & psi) is not in the restricted fragment, or None if it is."""
    dom = set(free_v(psi))
    if set(g) != dom:
        return f"guard domain {sorted(g)} differs from free vertex variables {sorted(dom)} of {render(psi)}"
    if isinstance(psi, ATOMS):
        return None
    if isinstance(psi, Not):
        return _rgc_with(g, psi.sub)
    if isinstance(psi, And):
        for part in (psi.left, psi.right):
            sub = {i: g[i] for i in free_v(part)}
            why = _rgc_with(sub, part)
            if why:
                return why
        return None
    if psi.exact:
        return _rgc_with(g, desugar_eq(psi))
    inner = psi.g
    why = _rgc_with(inner, psi.body)
    if why:
        return why
    S = set(psi.vars)
    if psi.kind == "v":
        if not S <= set(free_v(psi.body)):
            return f"{render(psi)}: quantified vertices not free in the body"
        want = {i: j for i, j in inner.items() if i not in S}
        if g != want:
            return f"{render(psi)}: outer guard must be the inner guard without the bound vertices"
        return None
    if not S <= set(free_e(psi.matrix)):
        return f"{render(psi)}: quantified hyperedges not free in the body"
    img = set(inner.values())
    for i in inner:
        if not (g[i] == inner[i] or g[i] in S or g[i] not in img):
            return f"{render(psi)}: guard of v{i} changes inconsistently"
    return None


def is_rgc(phi: Formula, k: int) -> Verdict:
    """Recognise the restricted fragment: phi must literally be (Guard_g & psi)."""
    wf = wellformed_gck(phi, k)
    if not wf.ok:
        return wf
    if not isinstance(phi, And):
        return Verdict(False, [Violation("rgc-shape", (render(phi),), "not of the form (Guard_g & psi)")])
    g = as_guard(phi.left)
    if g is None:
        return Verdict(False, [Violation("rgc-shape", (render(phi.left),), "left conjunct is not a logical guard")])
    if any(not 1 <= j <= k for j in g.values()):
        return Verdict(False, [Violation("edge-index", (render(phi.left),), f"guard outside [1, {k}]")])
    why = _rgc_with(g, phi.right)
    if why:
        return Verdict(False, [Violation("rgc-rule", (), why)])
    return Verdict(True)


# -- semantics -----------------------------------------------------------------

class UnassignedVariable(KeyError):
    pass


@dataclass
class Interpretation:
    structure: IncidenceGraph
    nu_v: dict[int, str] = field(default_factory=dict)
    nu_e: dict[int, str] = field(default_factory=dict)


class _Evaluator:
    def __init__(self, I: IncidenceGraph):
        self.I = I
        self.contents = I.contents()
        self.incident = {r: frozenset(b for b in I.blues if r in self.contents[b]) for r in I.reds}
        self.memo: dict = {}
        self.free: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {}
        self.matrices: dict[int, Formula] = {}

    def fv(self, phi):
        key = id(phi)
        if key not in self.free:
            a, b = free_vars(phi)
            self.free[key] = (tuple(sorted(a)), tuple(sorted(b)))
        return self.free[key]

    def ev(self, phi: Formula, nv: dict[int, str], ne: dict[int, str]) -> bool:
        if isinstance(phi, Top):
            return True
        fv, fe = self.fv(phi)
        missing = [f"v{i}" for i in fv if i not in nv] + [f"e{j}" for j in fe if j not in ne]
        if missing:
            raise UnassignedVariable(f"no value for free variable {missing[0]}")
        key = (id(phi), tuple(nv[i] for i in fv), tuple(ne[j] for j in fe))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        res = self._ev(phi, nv, ne)
        self.memo[key] = res
        return res

    def _ev(self, phi, nv, ne) -> bool:
        if isinstance(phi, VEq):
            return nv[phi.i] == nv[phi.i2]
        if isinstance(phi, EEq):
            return ne[phi.j] == ne[phi.j2]
        if isinstance(phi, Edge):
            return nv[phi.i] in self.contents[ne[phi.j]]
        if isinstance(phi, Not):
            return not self.ev(phi.sub, nv, ne)
        if isinstance(phi, And):
            return self.ev(phi.left, nv, ne) and self.ev(phi.right, nv, ne)
        return self._quant(phi, nv, ne)

    def _quant(self, q: Exists, nv, ne) -> bool:
        chi = self.matrices.get(id(q))
        if chi is None:
            chi = self.matrices[id(q)] = q.matrix
        g = q.g
        domains = []
        for x in q.vars:
            if q.kind == "v":
                if x in g and g[x] in ne:
                    dom = [r for r in self.I.reds if r in self.contents[ne[g[x]]]]
                else:
                    dom = list(self.I.reds)
            else:
                allowed = set(self.I.blues)
                for i, j in q.guard:
                    if j == x and i in nv:
                        allowed &= self.incident[nv[i]]
                dom = [b for b in self.I.blues if b in allowed]
            domains.append(dom)
        target = q.n + 1 if q.exact else q.n
        nv2, ne2 = dict(nv), dict(ne)
        slot = nv2 if q.kind == "v" else ne2
        hits = 0
        for values in itertools.product(*domains):
            slot.update(zip(q.vars, values))
            if self.ev(chi, nv2, ne2):
                hits += 1
                if hits >= target:
                    break
        return hits == q.n if q.exact else hits >= q.n


def evaluate(phi: Formula, interp: Union[Interpretation, Hypergraph, IncidenceGraph]) -> bool:
    """Truth value of phi; a bare structure stands for the empty assignment."""
    if not isinstance(interp, Interpretation):
        interp = Interpretation(as_incidence(interp))
    I = as_incidence(interp.structure)
    for i, r in interp.nu_v.items():
        if r not in I.reds:
            raise ValueError(f"v{i} is assigned {r!r}, which is not a vertex")
    for j, b in interp.nu_e.items():
        if b not in I.blues:
            raise ValueError(f"e{j} is assigned {b!r}, which is not a hyperedge")
    return _Evaluator(I).ev(phi, dict(interp.nu_v), dict(interp.nu_e))


# -- sentence generation ------------------------------------------------------------

def _random_atom(rng: random.Random, k: int, nv: int) -> Formula:
    r = rng.random()
    if r < 0.4:
        return Edge(rng.randint(1, k), rng.randint(1, nv))
    if r < 0.7:
        return VEq(rng.randint(1, nv), rng.randint(1, nv))
    if r < 0.95:
        return EEq(rng.randint(1, k), rng.randint(1, k))
    return Top()


def _random_guard(rng: random.Random, k: int, vs) -> tuple[tuple[int, int], ...]:
    return tuple((i, rng.randint(1, k)) for i in sorted(vs))


def _bind(rng: random.Random, k: int, phi: Formula, kind: str, everything: bool) -> Formula:
    guard = _random_guard(rng, k, free_v(phi))
    chi = And(guard_formula(dict(guard)), phi)
    pool = sorted(free_v(chi) if kind == "v" else free_e(chi))
    if not pool:
        return phi
    chosen = pool if everything else sorted(rng.sample(pool, rng.randint(1, len(pool))))
    return Exists(kind, rng.randint(1, 3), tuple(chosen), guard, phi, rng.random() < 0.3)


def _random_formula(rng: random.Random, k: int, depth: int, nv: int = 3) -> Formula:
    r = rng.random()
    if depth == 0 or r < 0.3:
        return _random_atom(rng, k, nv)
    if r < 0.45:
        return Not(_random_formula(rng, k, depth - 1, nv))
    if r < 0.75:
        return And(_random_formula(rng, k, depth - 1, nv), _random_formula(rng, k, depth - 1, nv))
    sub = _random_formula(rng, k, depth - 1, nv)
    return _bind(rng, k, sub, "v" if free_v(sub) and rng.random() < 0.6 else "e", False)


def close_formula(rng: random.Random, k: int, phi: Formula) -> Formula:
    """Quantify away all free variables: vertices first, then hyperedges."""
    while free_v(phi):
        phi = _bind(rng, k, phi, "v", True)
    while free_e(phi):
        phi = _bind(rng, k, phi, "e", True)
    return phi


def counting_floor(n_max: int = 5) -> list[Formula]:
    """existsge n (e1) . e1=e1 for n = 1..n_max: 'at least n hyperedges'."""
    return [Exists("e", n, (1,), (), EEq(1, 1)) for n in range(1, n_max + 1)]


def sentence_pool(k: int, d: int, size_bound: int, seed: int, count: int = 200) -> list[Formula]:
    """Deterministic list of distinct well-formed sentences of GC^k with guard depth <= d."""
    if k < 1 or d < 1:
        raise ValueError("k and d must be at least 1")
    rng = random.Random(seed)
    out: list[Formula] = []
    seen: set[str] = set()

    def offer(phi):
        text = render(phi)
        if text in seen or size(phi) > size_bound or guard_depth(phi) > d:
            return
        if not is_sentence(phi) or not wellformed_gck(phi, k).ok:
            return
        seen.add(text)
        out.append(phi)

    for phi in counting_floor():
        offer(phi)
    attempts = 0
    while len(out) < count and attempts < 200 * count:
        attempts += 1
        phi = close_formula(rng, k, _random_formula(rng, k, rng.randint(1, 3)))
        offer(phi)
    return out
