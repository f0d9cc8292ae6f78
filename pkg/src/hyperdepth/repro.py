"""One-shot reproduction checks, each a list of claim/expected/computed rows."""

from __future__ import annotations

import contextlib
import math
import os
import random
import signal
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Optional

from .canon import canonical_form, isomorphic
from .elimination import (hd_exact, shd_bruteforce, shd_exact, strictify,
                          validate_strict_ef)
from .errors import BudgetExceeded
from .families import (EnumerationBounds, enumerate_hypergraphs, example_forests, example_G,
                       example_H, p7_letters, skew_pair, skew_pair_prime)
from .homcount import (ClassTruncation, count_hg_homs, count_ig_homs, indistinguishable,
                       iter_homs, surjective_hom_exists)
from .hypergraph import Hypergraph, local_merge, path, pump, relabel, to_incidence
from .kli import build_from_strict_ef, extract_forest, read_gli
from .logic import Interpretation, evaluate, guard_depth, read_gcl, render, sentence_pool, wellformed_gck


@dataclass
class Row:
    check: str
    claim: str
    expected: str
    computed: str
    ok: bool
    seconds: float = 0.0


def data_path(name: str) -> str:
    return str(resources.files("hyperdepth") / "data" / name)


@contextlib.contextmanager
def time_budget(ms: Optional[int]):
    """Raise BudgetExceeded once ``ms`` milliseconds of wall time have passed."""
    if not ms or not hasattr(signal, "setitimer"):
        yield
        return

    def fire(signum, frame):
        raise BudgetExceeded(f"wall-time budget of {ms} ms exceeded")

    old = signal.signal(signal.SIGALRM, fire)
    signal.setitimer(signal.ITIMER_REAL, ms / 1000)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def budget_from_env() -> Optional[int]:
    raw = os.environ.get("GH_BUDGET_MS")
    if not raw:
        return None
    try:
        ms = int(raw)
    except ValueError:
        raise ValueError(f"GH_BUDGET_MS must be an integer, got {raw!r}") from None
    return ms if ms > 0 else None


def _row(check, claim, expected, computed, ok=None) -> Row:
    if ok is None:
        ok = str(expected) == str(computed)
    return Row(check, claim, str(expected), str(computed), bool(ok))


def check_hd_paths() -> list[Row]:
    return [_row("hd-paths", f"hd(P_{n}) = floor(log2(n+2))", int(math.log2(n + 2)),
                 hd_exact(path(n)).depth) for n in range(1, 16)]


def check_worked_examples() -> list[Row]:
    forests = example_forests()
    G, H = example_G(), example_H()
    P15, ef15 = forests["P15-strict"]
    Hh, efH = forests["H-strict"]
    okH = validate_strict_ef(Hh, efH)
    ok15 = validate_strict_ef(P15, ef15)
    return [
        _row("worked-examples", "hd(G) = 1", 1, hd_exact(G).depth),
        _row("worked-examples", "shd(G) = 2", 2, shd_exact(G).depth),
        _row("worked-examples", "shd(H) = 2", 2, shd_exact(H).depth),
        _row("worked-examples", "tree h -> e,f,g is strict for H", "valid",
             "valid" if okH.ok else f"invalid ({len(okH.violations)} violations)"),
        _row("worked-examples", "shd(P_15) = 4", 4, shd_exact(P15).depth),
        _row("worked-examples", "balanced tree is strict for P_15 with height 4", "valid, height 4",
             f"{'valid' if ok15.ok else 'invalid'}, height {ef15.height}"),
    ]


def check_shd_vs_hd(max_edges: int = 4, max_vertices: int = 6) -> list[Row]:
    hs = enumerate_hypergraphs(EnumerationBounds(max_edges, max_vertices, connected_only=True))
    sandwich = strict_bad = 0
    for H in hs:
        w = hd_exact(H)
        s = shd_exact(H).depth
        if not w.depth <= s <= w.depth + 1:
            sandwich += 1
        st = strictify(H, w.forest)
        if not validate_strict_ef(H, st).ok or st.height - w.depth not in (0, 1):
            strict_bad += 1
    n = len(hs)
    return [
        _row("shd-vs-hd", f"hd <= shd <= hd+1 on {n} connected instances", 0, sandwich),
        _row("shd-vs-hd", f"strictify output is strict, height +0/+1, on {n} instances", 0, strict_bad),
    ]


def _count_via_enumeration(src, tgt, equality) -> int:
    return sum(1 for _ in iter_homs(src, tgt, equality=equality))


def random_hypergraph(rng: random.Random, max_edges: int, max_vertices: int) -> Hypergraph:
    m = rng.randint(1, max_edges)
    nv = rng.randint(1, max_vertices)
    beta = {}
    for j in range(1, m + 1):
        size = rng.randint(1, min(3, nv))
        beta[f"e{j}"] = rng.sample([str(i) for i in range(1, nv + 1)], size)
    return Hypergraph.from_edges(beta)


def check_oracles(pairs: int = 200, seed: int = 11) -> list[Row]:
    hs = enumerate_hypergraphs(EnumerationBounds(4, 6))
    mism = sum(1 for H in hs if shd_exact(H).depth != shd_bruteforce(H))
    rng = random.Random(seed)
    bad_hg = bad_ig = 0
    for _ in range(pairs):
        F = random_hypergraph(rng, 3, 4)
        G = random_hypergraph(rng, 4, 5)
        bad_hg += count_hg_homs(F, G) != _count_via_enumeration(F, G, True)
        bad_ig += count_ig_homs(F, G) != _count_via_enumeration(F, G, False)
    return [
        _row("oracles", f"shd_exact = brute force on {len(hs)} instances", 0, mism),
        _row("oracles", f"hypergraph hom counts = enumeration on {pairs} pairs", 0, bad_hg),
        _row("oracles", f"incidence hom counts = enumeration on {pairs} pairs", 0, bad_ig),
    ]


def check_gli_roundtrip(k: int = 3) -> list[Row]:
    hs = enumerate_hypergraphs(EnumerationBounds(4, 6, connected_only=True))
    n = fails = 0
    for H in hs:
        w = shd_exact(H)
        if w.depth > k:
            continue
        n += 1
        d = build_from_strict_ef(H, w.forest, k)
        ok = (d.result.label_free and d.cost <= k
              and canonical_form(d.result.skeleton) == canonical_form(H))
        ef = extract_forest(d)
        ok = ok and ef.height <= k and validate_strict_ef(d.result.skeleton, ef).ok
        fails += not ok
    return [_row("gli-roundtrip", f"strict forest -> derivation -> strict forest on {n} instances",
                 0, fails)]


def check_path_p7_derivation() -> list[Row]:
    rep = read_gli(data_path("p7_derivation.gli"))
    d = rep.final
    ef = extract_forest(d)
    return [
        _row("path-p7-derivation", "final cost index", 3, d.cost),
        _row("path-p7-derivation", "result is label-free", True, d.result.label_free),
        _row("path-p7-derivation", "skeleton is isomorphic to the path with 7 edges", True,
             isomorphic(d.result.skeleton, p7_letters())),
        _row("path-p7-derivation", "extracted forest is strict with height <= 3", True,
             validate_strict_ef(d.result.skeleton, ef).ok and ef.height <= 3),
    ]


def _verdict_text(v) -> str:
    if v.equal:
        return f"equal over {v.compared}"
    return f"distinguished by {canonical_form(v.witness).decode()} {v.counts}"


def check_skew_k1() -> list[Row]:
    G, H = skew_pair(1)
    shd = indistinguishable(ClassTruncation("SHD", 1, 3, 6), G, H)
    hd = indistinguishable(ClassTruncation("HD", 1, 3, 6), G, H)
    ishd = indistinguishable(ClassTruncation("ISHD", 1, 3, 6), to_incidence(G), to_incidence(H))
    return [
        _row("skew-k1", "G_1, H_1 agree over SHD_1 (3 edges, 6 vertices)", "equal",
             _verdict_text(shd), shd.equal),
        _row("skew-k1", "G_1, H_1 agree over ISHD_1 (3 edges, 6 vertices)", "equal",
             _verdict_text(ishd), ishd.equal),
        _row("skew-k1", "some member of HD_1 separates G_1, H_1", "distinguished",
             _verdict_text(hd), not hd.equal),
    ]


def check_skew_prime_k1() -> list[Row]:
    G, H = skew_pair_prime(1)
    hd = indistinguishable(ClassTruncation("HD", 1, 3, 6), G, H)
    ihd = indistinguishable(ClassTruncation("IHD", 1, 3, 6), to_incidence(G), to_incidence(H))
    return [
        _row("skew-prime-k1", "G'_1, H'_1 agree over HD_1 (3 edges, 6 vertices)", "equal",
             _verdict_text(hd), hd.equal),
        _row("skew-prime-k1", "some member of IHD_1 separates I(G'_1), I(H'_1)", "distinguished",
             _verdict_text(ihd), not ihd.equal),
    ]


def sample_merges(rng: random.Random, pool: list[Hypergraph], n: int):
    """n random (instance, local merge) pairs drawn from instances with an edge of size >= 2."""
    cands = [H for H in pool if any(len(c) >= 2 for c in H.contents)]
    out = []
    for _ in range(n):
        H = rng.choice(cands)
        e = rng.choice([e for e, c in zip(H.edges, H.contents) if len(c) >= 2])
        u, v = rng.sample(sorted(H.content(e)), 2)
        out.append((H, local_merge(H, e, u, v)))
    return out


def check_closures(samples: int = 100, seed: int = 5) -> list[Row]:
    rng = random.Random(seed)
    pool = enumerate_hypergraphs(EnumerationBounds(4, 6))
    bad_s = bad_h = 0
    for H, M in sample_merges(rng, pool, samples):
        bad_s += shd_exact(M).depth > shd_exact(H).depth
        bad_h += hd_exact(M).depth > hd_exact(H).depth
    G1 = skew_pair(1)[0]
    before = hd_exact(G1).depth
    after = hd_exact(pump(G1, "f", "x")).depth
    small = Hypergraph.from_edges({"ab": "ab", "sa": "a", "sb": "b"})
    s_before, s_after = hd_exact(small).depth, hd_exact(pump(small, "sa", "x")).depth
    return [
        _row("closures", f"local merging keeps shd <= k ({samples} samples)", 0, bad_s),
        _row("closures", f"local merging keeps hd <= k ({samples} samples)", 0, bad_h),
        _row("closures", "pumping a singleton of G_1 raises hd from 1 to 2", "1 -> 2",
             f"{before} -> {after}"),
        _row("closures", "pumping a singleton of {ab, a, b} raises hd from 1 to 2", "1 -> 2",
             f"{s_before} -> {s_after}"),
    ]


def random_relabelling(rng: random.Random, H: Hypergraph):
    I = to_incidence(H)
    reds = list(I.reds)
    blues = list(I.blues)
    rng.shuffle(reds)
    rng.shuffle(blues)
    rmap = {r: f"r{i}" for i, r in enumerate(reds)}
    bmap = {b: f"b{i}" for i, b in enumerate(blues)}
    return I, relabel(I, rmap, bmap), rmap, bmap


def iso_invariance_failures(triples: int, seed: int) -> int:
    rng = random.Random(seed)
    pool = sentence_pool(2, 2, 25, seed, count=triples)
    bad = 0
    for t in range(triples):
        phi = pool[t % len(pool)]
        H = random_hypergraph(rng, 4, 5)
        I, J, _, _ = random_relabelling(rng, H)
        bad += evaluate(phi, I) != evaluate(phi, J)
    return bad


def check_logic_phi_g() -> list[Row]:
    phi = read_gcl(data_path("phi_G.gcl"))
    return [
        _row("logic-phi-g", "guard depth of the description of G", 2, guard_depth(phi)),
        _row("logic-phi-g", "description of G is well formed with one edge variable", True,
             wellformed_gck(phi, 1).ok),
        _row("logic-phi-g", "G satisfies its description", True, evaluate(phi, example_G())),
        _row("logic-phi-g", "H does not satisfy the description of G", False, evaluate(phi, example_H())),
        _row("logic-phi-g", "evaluation is invariant under relabelling (100 triples)", 0,
             iso_invariance_failures(100, 3)),
    ]


def check_logic_probe(seed: int = 2024) -> list[Row]:
    G, H = skew_pair(1)
    pool = sentence_pool(1, 1, 25, seed)
    hits = [render(s) for s in pool if evaluate(s, G) != evaluate(s, H)]
    return [_row("logic-probe", f"no sentence of guard depth 1 separates G_1, H_1 ({len(pool)} sentences)",
                 "none found", hits[0] if hits else "none found")]


def check_surjective_paths(max_edges: int = 4, max_vertices: int = 6) -> list[Row]:
    hs = enumerate_hypergraphs(EnumerationBounds(max_edges, max_vertices, connected_only=True))
    rows = []
    for k in (1, 2):
        shd_k = [H for H in hs if shd_exact(H).depth <= k]
        hd_k = [H for H in hs if hd_exact(H).depth <= k]
        bad1 = sum(surjective_hom_exists(H, 2 ** k) for H in shd_k)
        bad2 = sum(surjective_hom_exists(H, 2 ** (k + 1) - 2) for H in hd_k)
        rows.append(_row("surjective-paths", f"no SHD_{k} member maps onto P_{2 ** k} ({len(shd_k)} members)",
                         0, bad1))
        rows.append(_row("surjective-paths",
                         f"no HD_{k} member maps onto P_{2 ** (k + 1) - 2} ({len(hd_k)} members)", 0, bad2))
    return rows


CHECKS: dict[str, Callable[[], list[Row]]] = {
    "hd-paths": check_hd_paths,
    "worked-examples": check_worked_examples,
    "shd-vs-hd": check_shd_vs_hd,
    "oracles": check_oracles,
    "gli-roundtrip": check_gli_roundtrip,
    "path-p7-derivation": check_path_p7_derivation,
    "skew-k1": check_skew_k1,
    "skew-prime-k1": check_skew_prime_k1,
    "closures": check_closures,
    "logic-phi-g": check_logic_phi_g,
    "logic-probe": check_logic_probe,
    "surjective-paths": check_surjective_paths,
}


def run_check(check_id: str, budget_ms: Optional[int] = None) -> list[Row]:
    if check_id not in CHECKS:
        raise KeyError(f"unknown check {check_id!r}; known: {', '.join(CHECKS)}")
    t0 = time.perf_counter()
    with time_budget(budget_ms):
        rows = CHECKS[check_id]()
    dt = time.perf_counter() - t0
    for r in rows:
        r.seconds = dt
    return rows
