"""The twelve acceptance criteria, each at its stated tolerance and wall-time limit.

Every test prints one PASS/FAIL line; the lines are gathered again at the end of
the session by the terminal-summary hook in conftest.
"""

import math
import random
import time

import pytest

from hyperdepth.canon import canonical_form
from hyperdepth.elimination import (hd_exact, shd_bruteforce, shd_exact, strictify,
                                    validate_ef, validate_strict_ef)
from hyperdepth.families import (EnumerationBounds, enumerate_hypergraphs, example_forests,
                                 example_G, example_H, skew_pair, skew_pair_prime)
from hyperdepth.homcount import (ClassTruncation, count_hg_homs, count_ig_homs, indistinguishable,
                                 surjective_hom_exists)
from hyperdepth.hypergraph import Hypergraph, local_merge, path, pump, relabel, to_incidence
from hyperdepth.kli import build_from_strict_ef, extract_forest, read_gli
from hyperdepth.logic import evaluate, guard_depth, read_gcl, render, sentence_pool, wellformed_gck
from hyperdepth.repro import data_path

import oracles

RESULTS: list[str] = []


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def report(n: int, title: str, failures: list[str], clock: Clock, limit: float):
    over = clock.seconds >= limit
    ok = not failures and not over
    detail = "; ".join(failures[:4]) if failures else "all clauses hold"
    if len(failures) > 4:
        detail += f"; ... {len(failures) - 4} more"
    if over:
        detail += f"; took {clock.seconds:.1f}s, limit {limit:.0f}s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {title} [{clock.seconds:.1f}s] {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def connected_upto4():
    return enumerate_hypergraphs(EnumerationBounds(4, 6, connected_only=True))


def random_hypergraph(rng, max_edges, max_vertices):
    m = rng.randint(1, max_edges)
    nv = rng.randint(1, max_vertices)
    beta = {f"e{j}": rng.sample([str(i) for i in range(nv)], rng.randint(1, min(3, nv)))
            for j in range(m)}
    return Hypergraph.from_edges(beta)


def test_criterion_01_path_depths():
    fails = []
    with Clock() as c:
        for n in range(1, 16):
            got = hd_exact(path(n)).depth
            want = int(math.floor(math.log2(n + 2)))
            if got != want:
                fails.append(f"hd(P_{n})={got}, expected {want}")
    report(1, "hd of paths P_1..P_15 is floor(log2(n+2))", fails, c, 30)


def test_criterion_02_worked_examples():
    fails = []
    with Clock() as c:
        G, H = example_G(), example_H()
        forests = example_forests()
        if (v := hd_exact(G).depth) != 1:
            fails.append(f"hd(G)={v}, expected 1")
        if (v := shd_exact(G).depth) != 2:
            fails.append(f"shd(G)={v}, expected 2")
        if (v := shd_exact(H).depth) != 2:
            fails.append(f"shd(H)={v}, expected 2")
        Hh, efH = forests["H-strict"]
        verdict = validate_strict_ef(Hh, efH)
        if not verdict.ok or efH.height != 2:
            names = sorted({x.condition for x in verdict.violations})
            fails.append(f"three-leaf tree for H is not strict ({', '.join(names)})")
        P15, ef15 = forests["P15-strict"]
        if (v := shd_exact(P15).depth) != 4:
            fails.append(f"shd(P_15)={v}, expected 4")
        if not validate_strict_ef(P15, ef15).ok or ef15.height != 4:
            fails.append("balanced tree for P_15 does not validate at height 4")
    report(2, "hd(G)=1, shd(G)=2, shd(H)=2 with its tree, shd(P_15)=4 with its tree", fails, c, 5)


def test_criterion_03_sandwich_sweep():
    fails = []
    with Clock() as c:
        hs = connected_upto4()
        for H in hs:
            w = hd_exact(H)
            s = shd_exact(H).depth
            if not w.depth <= s <= w.depth + 1:
                fails.append(f"{canonical_form(H).decode()}: hd {w.depth}, shd {s}")
            st = strictify(H, w.forest)
            if not validate_strict_ef(H, st).ok:
                fails.append(f"{canonical_form(H).decode()}: strictified forest invalid")
            elif st.height - w.depth not in (0, 1):
                fails.append(f"{canonical_form(H).decode()}: height {w.depth} -> {st.height}")
    report(3, f"hd <= shd <= hd+1 and strictify on {len(hs)} connected instances", fails, c, 600)


def test_criterion_04_oracles():
    fails = []
    with Clock() as c:
        hs = enumerate_hypergraphs(EnumerationBounds(4, 6))
        for H in hs:
            a, b = shd_exact(H).depth, shd_bruteforce(H)
            if a != b:
                fails.append(f"{canonical_form(H).decode()}: shd_exact {a}, brute force {b}")
        rng = random.Random(4)
        for _ in range(200):
            F = random_hypergraph(rng, 3, 4)
            T = random_hypergraph(rng, 4, 5)
            if count_hg_homs(F, T) != oracles.naive_hom_count(F, T, equality=True):
                fails.append(f"hypergraph homs {F.contents} -> {T.contents}")
            if count_ig_homs(F, T) != oracles.naive_hom_count(F, T, equality=False):
                fails.append(f"incidence homs {F.contents} -> {T.contents}")
    report(4, f"shd vs brute force on {len(hs)} instances, hom counts vs naive on 200 pairs",
           fails, c, 600)


def test_criterion_05_gli_roundtrip():
    fails = []
    n = 0
    with Clock() as c:
        for H in connected_upto4():
            w = shd_exact(H)
            if w.depth > 3:
                continue
            n += 1
            key = canonical_form(H).decode()
            d = build_from_strict_ef(H, w.forest, 3)
            if not d.result.label_free or d.cost > 3:
                fails.append(f"{key}: label-free {d.result.label_free}, cost {d.cost}")
            if canonical_form(d.result.skeleton) != canonical_form(H):
                fails.append(f"{key}: skeleton not isomorphic")
            ef = extract_forest(d)
            if ef.height > 3 or not validate_strict_ef(d.result.skeleton, ef).ok:
                fails.append(f"{key}: extracted forest invalid or height {ef.height}")
    report(5, f"forest -> derivation -> forest on {n} instances with shd <= 3", fails, c, 600)


def test_criterion_06_p7_replay():
    fails = []
    with Clock() as c:
        d = read_gli(data_path("p7_derivation.gli")).final
        if d.cost != 3:
            fails.append(f"cost index {d.cost}, expected 3")
        if canonical_form(d.result.skeleton) != canonical_form(to_incidence(path(7))):
            fails.append("skeleton is not the incidence graph of P_7")
    report(6, "scripted derivation of P_7 has cost 3 and the right skeleton", fails, c, 5)


def test_criterion_07_skew_k1():
    fails = []
    with Clock() as c:
        G, H = skew_pair(1)
        shd = indistinguishable(ClassTruncation("SHD", 1, 3, 6), G, H)
        if not shd.equal:
            fails.append(f"SHD_1 vectors differ at {canonical_form(shd.witness).decode()}")
        hd = indistinguishable(ClassTruncation("HD", 1, 3, 6), G, H)
        if hd.equal:
            fails.append(f"no HD_1 member separates G_1, H_1 ({hd.compared} compared)")
    report(7, "G_1, H_1 equal over SHD_1 (3 edges, 6 vertices), separated within HD_1",
           fails, c, 600)


def test_criterion_08_skew_prime_k1():
    fails = []
    with Clock() as c:
        G, H = skew_pair_prime(1)
        hd = indistinguishable(ClassTruncation("HD", 1, 3, 6), G, H)
        if not hd.equal:
            fails.append(f"HD_1 vectors differ at {canonical_form(hd.witness).decode()}")
        ihd = indistinguishable(ClassTruncation("IHD", 1, 3, 6), to_incidence(G), to_incidence(H))
        if ihd.equal:
            fails.append(f"no IHD_1 member separates I(G'_1), I(H'_1) ({ihd.compared} compared)")
    report(8, "G'_1, H'_1 equal over HD_1, separated within IHD_1", fails, c, 600)


def test_criterion_09_closures():
    fails = []
    with Clock() as c:
        rng = random.Random(9)
        pool = [H for H in enumerate_hypergraphs(EnumerationBounds(4, 6))
                if any(len(x) >= 2 for x in H.contents)]
        for _ in range(100):
            H = rng.choice(pool)
            e = rng.choice([e for e, x in zip(H.edges, H.contents) if len(x) >= 2])
            u, v = rng.sample(sorted(H.content(e)), 2)
            M = local_merge(H, e, u, v)
            if shd_exact(M).depth > shd_exact(H).depth:
                fails.append(f"merge raised shd on {canonical_form(H).decode()}")
            if hd_exact(M).depth > hd_exact(H).depth:
                fails.append(f"merge raised hd on {canonical_form(H).decode()}")
        G1 = skew_pair(1)[0]
        singles = [e for e, x in zip(G1.edges, G1.contents) if len(x) == 1]
        before = hd_exact(G1).depth
        for e in singles:
            after = hd_exact(pump(G1, e, "pumped")).depth
            if (before, after) != (1, 2):
                fails.append(f"pumping singleton {e} of G_1: hd {before} -> {after}, expected 1 -> 2")
    report(9, "local merging keeps shd/hd <= k on 100 samples; pumping G_1 raises hd 1 -> 2",
           fails, c, 300)


def test_criterion_10_logic():
    fails = []
    with Clock() as c:
        phi = read_gcl(data_path("phi_G.gcl"))
        if guard_depth(phi) != 2:
            fails.append(f"guard depth {guard_depth(phi)}, expected 2")
        if not wellformed_gck(phi, 1).ok:
            fails.append("description of G rejected with one edge variable")
        if evaluate(phi, example_G()) is not True:
            fails.append("G does not satisfy its description")
        if evaluate(phi, example_H()) is not False:
            fails.append("H satisfies the description of G")
        rng = random.Random(10)
        pool = sentence_pool(2, 2, 25, 10, count=100)
        for t in range(100):
            f = pool[t]
            I = to_incidence(random_hypergraph(rng, 4, 5))
            reds, blues = list(I.reds), list(I.blues)
            rng.shuffle(reds)
            rng.shuffle(blues)
            J = relabel(I, {r: f"r{i}" for i, r in enumerate(reds)},
                        {b: f"b{i}" for i, b in enumerate(blues)})
            if evaluate(f, I) != evaluate(f, J):
                fails.append(f"relabelling changes the value of {render(f)}")
    report(10, "description of G: depth 2, well formed, true on G, false on H; iso-invariance",
           fails, c, 300)


def test_criterion_11_logic_probe():
    fails = []
    with Clock() as c:
        G, H = skew_pair(1)
        shd = indistinguishable(ClassTruncation("SHD", 1, 3, 6), G, H)
        ishd = indistinguishable(ClassTruncation("ISHD", 1, 3, 6), to_incidence(G), to_incidence(H))
        if not (shd.equal and ishd.equal):
            fails.append("G_1, H_1 are not equal over the SHD_1/ISHD_1 truncations")
        pool = sentence_pool(1, 1, 25, 2024)
        for s in pool:
            if evaluate(s, G) != evaluate(s, H):
                fails.append(f"separated by {render(s)}")
    report(11, f"no sentence of GC^1 with guard depth 1 separates G_1, H_1 ({len(pool)} sentences)",
           fails, c, 600)


def test_criterion_12_surjective_paths():
    fails = []
    with Clock() as c:
        hs = connected_upto4()
        shd = {id(H): shd_exact(H).depth for H in hs}
        hd = {id(H): hd_exact(H).depth for H in hs}
        for k in (1, 2):
            for H in hs:
                if shd[id(H)] <= k and surjective_hom_exists(H, 2 ** k):
                    fails.append(f"shd {shd[id(H)]} member {canonical_form(H).decode()} onto P_{2 ** k}")
                if hd[id(H)] <= k and surjective_hom_exists(H, 2 ** (k + 1) - 2):
                    fails.append(f"hd {hd[id(H)]} member {canonical_form(H).decode()} "
                                 f"onto P_{2 ** (k + 1) - 2}")
    report(12, "no SHD_k member maps onto P_{2^k}, no HD_k member onto P_{2^(k+1)-2}, k in {1,2}",
           fails, c, 600)
