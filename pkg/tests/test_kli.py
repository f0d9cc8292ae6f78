import pytest
from hypothesis import assume, given, strategies as st

from conftest import hypergraphs
from hyperdepth.canon import isomorphic
from hyperdepth.elimination import (EliminationForest, RootedForest, shd_exact, subtree_with_stem,
                                    validate_strict_ef)
from hyperdepth.families import example_forests, p7_letters
from hyperdepth.hypergraph import Hypergraph, IncidenceGraph, induced_incidence, path, to_incidence
from hyperdepth.kli import (KLI, DerivationError, apply_transition, apply_transition_with_maps,
                            build_from_strict_ef, build_node_derivations, compatible, derive_base,
                            derive_glue, derive_remove_blue, derive_remove_red, derive_transition,
                            extract_forest, glue, is_transition, labeled_heritage_violations, m_f,
                            real_guards, remove_blue, remove_red, replay_gli, set_blue_labels,
                            set_red_labels, transition_removed)
from hyperdepth.repro import data_path
from oracles import brute_labeled_isomorphic, forest_is_valid


@st.composite
def klis(draw, k=2, max_edges=3, max_vertices=4):
    """Labeled graphs with real guards: labeled reds sit in the blue of their guard label."""
    H = draw(hypergraphs(max_edges=max_edges, max_vertices=max_vertices))
    I = to_incidence(H)
    c = I.contents()
    labels = draw(st.permutations(range(1, k + 1)))
    chosen = draw(st.lists(st.sampled_from(I.blues), unique=True, max_size=k))
    b = {labels[i]: e for i, e in enumerate(chosen)}
    r, g = {}, {}
    for j, e in sorted(b.items()):
        for v in sorted(c[e]):
            if v in r.values() or not draw(st.booleans()):
                continue
            i = draw(st.integers(1, 4).filter(lambda x: x not in r))
            r[i], g[i] = v, j
    return KLI(I, r, b, g, k)


def small_kli():
    I = to_incidence(Hypergraph.from_edges({"e": "xy", "f": "yz"}))
    return KLI(I, {1: "x", 2: "y", 3: "z"}, {1: "e", 2: "f"}, {1: 1, 2: 1, 3: 2}, 2)


def test_invariants_enforced():
    I = to_incidence(path(1))
    with pytest.raises(ValueError):
        KLI(I, {1: "1"}, {}, {}, 1)
    with pytest.raises(ValueError):
        KLI(I, {}, {2: "e1"}, {}, 1)
    with pytest.raises(ValueError):
        KLI(I, {1: "nope"}, {}, {1: 1}, 1)
    with pytest.raises(ValueError):
        KLI(I, {}, {}, {}, 0)
    assert KLI(I, {}, {}, {}, 1).label_free


def test_label_operations():
    L = small_kli()
    assert real_guards(L)
    R = remove_red(L, {1})
    assert R.r == {2: "y", 3: "z"} and R.g == {2: 1, 3: 2} and R.skeleton == L.skeleton
    assert remove_red(L, set()) == L
    B = remove_blue(L, {2})
    assert B.b == {1: "e"} and B.skeleton == L.skeleton
    with pytest.raises(ValueError):
        remove_blue(L, {3})
    S = set_blue_labels(L, {1}, ["f"])
    assert S.b[1] == "f"
    S = set_red_labels(L, {4}, ["y"], {4: 2})
    assert S.r[4] == "y" and S.g[4] == 2 and real_guards(S)
    with pytest.raises(ValueError):
        set_red_labels(L, {4}, ["y"], {})
    bare = remove_blue(remove_red(L, {1, 2, 3}), {1, 2})
    assert bare.label_free and bare.skeleton == L.skeleton


def test_glue_disjoint_and_shared():
    L = small_kli()
    free = KLI(L.skeleton, {}, {}, {}, 2)
    U, _ = glue(free, free)
    assert len(U.skeleton.reds) == 6 and len(U.skeleton.blues) == 4
    partial = remove_red(L, {3})
    same, _ = glue(partial, partial)
    assert len(same.skeleton.reds) == 4  # z is unlabeled, so it doubles
    twice, _ = glue(L, L)
    assert brute_labeled_isomorphic(twice, L)


def test_glue_merges_by_equivalence_closure():
    # label 1 and 2 sit on one red in the left operand but on two in the right
    A = KLI(to_incidence(Hypergraph.from_edges({"e": "x"})), {1: "x", 2: "x"}, {1: "e"}, {1: 1, 2: 1}, 1)
    B = KLI(to_incidence(Hypergraph.from_edges({"f": "pq"})), {1: "p", 2: "q"}, {1: "f"}, {1: 1, 2: 1}, 1)
    P, maps = glue(A, B)
    assert len(P.skeleton.reds) == 1 and len(P.skeleton.blues) == 1
    assert maps.red[1]["p"] == maps.red[1]["q"] == maps.red[0]["x"]


@given(klis(), klis())
def test_glue_commutative_up_to_isomorphism(L1, L2):
    assume(compatible(L1.g, L2.g))
    a, _ = glue(L1, L2)
    b, _ = glue(L2, L1)
    assert brute_labeled_isomorphic(a, b)


@given(klis(max_edges=2, max_vertices=3), klis(max_edges=2, max_vertices=3), klis(max_edges=2, max_vertices=3))
def test_glue_associative_up_to_isomorphism(L1, L2, L3):
    assume(compatible(L1.g, L2.g) and compatible(L2.g, L3.g) and compatible(L1.g, L3.g))
    left = glue(glue(L1, L2)[0], L3)[0]
    right = glue(L1, glue(L2, L3)[0])[0]
    assert brute_labeled_isomorphic(left, right)


@given(klis(), klis())
def test_merge_maps_are_homomorphisms(L1, L2):
    P, maps = glue(L1, L2)
    for o, L in enumerate((L1, L2)):
        for e, v in L.skeleton.edges:
            assert (maps.blue[o][e], maps.red[o][v]) in P.skeleton.edges
        for i, v in L.r.items():
            assert P.r[i] == maps.red[o][v]
        for j, e in L.b.items():
            assert P.b[j] == maps.blue[o][e]


@given(klis(), klis())
def test_glue_keeps_real_guards(L1, L2):
    assume(compatible(L1.g, L2.g))
    assert real_guards(glue(L1, L2)[0])


def test_m_f_gadget():
    M = m_f({1: 2, 3: 2}, 2)
    assert len(M.skeleton.reds) == 2 and len(M.skeleton.blues) == 1 and len(M.skeleton.edges) == 2
    assert real_guards(M) and M.g == {1: 2, 3: 2}
    one = m_f({1: 1}, 1)
    assert len(one.skeleton.edges) == 1
    with pytest.raises(ValueError):
        m_f({}, 1)
    with pytest.raises(ValueError):
        m_f({1: 3}, 2)


def test_transition_example():
    L = remove_red(small_kli(), {3})  # guards {1: 1, 2: 1}, blue label 2 unused as a guard
    f = {1: 2, 2: 2}
    assert is_transition(f, L.g)
    assert is_transition({1: 2}, L.g)
    assert not is_transition({1: 1}, L.g)  # red 2 is also guarded by 1 but not moved
    assert not is_transition({}, L.g) and not is_transition({5: 1}, L.g)
    assert transition_removed(L, f) == set()
    T = apply_transition(L, f)
    assert T.g == {1: 2, 2: 2}
    fresh = T.b[2]
    assert {(fresh, T.r[1]), (fresh, T.r[2])} <= T.skeleton.edges
    # the old blue f lost nothing: label 2 was not a guard, so it is glued with the gadget blue
    assert len(T.skeleton.blues) == 2
    # moving the guard off label 1 removes it
    L2 = KLI(L.skeleton, L.r, {1: "e"}, L.g, 2)
    assert transition_removed(L2, f) == set()
    assert transition_removed(L2, {1: 1, 2: 1}) == {1}
    T2, maps = apply_transition_with_maps(L2, {1: 1, 2: 1})
    old_e = maps.blue[1]["e"]
    assert T2.b[1] != old_e and old_e not in T2.b.values()
    with pytest.raises(ValueError):
        apply_transition(L, {1: 3})


@given(klis(k=3), st.data())
def test_transition_is_glue_with_gadget_and_keeps_real_guards(L, data):
    assume(L.g)
    dom = data.draw(st.sets(st.sampled_from(sorted(L.g)), min_size=1))
    f = {i: data.draw(st.integers(1, L.k)) for i in sorted(dom)}
    # every red guarded by a target of f must itself be moved
    while missing := [i for i, j in L.g.items() if j in f.values() and i not in f]:
        f[missing[0]] = data.draw(st.integers(1, L.k))
    assert is_transition(f, L.g)
    T, maps = apply_transition_with_maps(L, f)
    ref, _ = glue(m_f(f, L.k), remove_blue(L, transition_removed(L, f)))
    assert T == ref
    assert real_guards(T)
    assert T.g == {**L.g, **f}


def test_derivation_costs():
    L = small_kli()
    d0 = derive_base(L)
    assert d0.cost == 0 and d0.in_gli(0)
    with pytest.raises(DerivationError):
        derive_base(remove_blue(L, {2}))
    with pytest.raises(DerivationError):
        derive_remove_blue(d0, {1})  # label 1 still guards
    d1 = derive_remove_blue(derive_remove_red(d0, {3}), {2})
    assert d1.cost == 1
    d2 = derive_transition(d0, {1: 2, 2: 2, 3: 2})
    assert d2.cost == 1  # label 2 was a defined guard label
    d3 = derive_remove_blue(derive_remove_red(d2, {1, 2, 3}), {1, 2})
    assert d3.cost == 3 and d3.result.label_free
    g = derive_glue(d1, d3)
    assert g.cost == 3
    assert [s.op for s in d3.steps()][0] == "base"


def test_transition_cost_counts_only_defined_blue_labels():
    d = derive_remove_blue(derive_remove_red(derive_base(small_kli()), {3}), {2})
    t = derive_transition(d, {1: 2, 2: 2})
    assert t.cost == d.cost == 1


def test_glue_rejects_incompatible_guards():
    A = derive_base(small_kli())
    I = to_incidence(Hypergraph.from_edges({"e": "xy", "f": "yz"}))
    B = derive_base(KLI(I, {1: "x", 2: "y", 3: "z"}, {1: "e", 2: "f"}, {1: 1, 2: 2, 3: 2}, 2))
    with pytest.raises(DerivationError):
        derive_glue(A, B)


def expected_node_graph(I: IncidenceGraph, ef: EliminationForest, n: str) -> KLI:
    """Labeled graph the construction must produce at node n, straight from its description."""
    F = ef.forest
    stem = list(reversed(F.root_path(n)))
    index = {v: i for i, v in enumerate(I.reds, 1)}
    c = I.contents()
    sub = induced_incidence(I, [ef.gamma[t] for t in subtree_with_stem(F, n)])
    stem_blues = [ef.gamma[t] for t in stem]
    reds = sorted(set().union(*(c[e] for e in stem_blues)), key=index.get)
    r = {index[v]: v for v in reds}
    g = {index[v]: min(j for j, e in enumerate(stem_blues, 1) if v in c[e]) for v in reds}
    return KLI(sub, r, dict(enumerate(stem_blues, 1)), g, F.height)


@pytest.mark.parametrize("name", ["P7-strict", "G-strict"])
def test_node_graphs_match_description(name):
    H, ef = example_forests()[name]
    I = to_incidence(H)
    per = build_node_derivations(I, ef)
    for n in ef.forest.nodes:
        got = per[n].result
        want = expected_node_graph(I, ef, n)
        assert set(got.b) == set(range(1, ef.forest.level(n) + 1))
        assert got.g == want.g
        assert brute_labeled_isomorphic(got, want), n


@given(hypergraphs(max_edges=4, max_vertices=5, connected=True))
def test_node_graphs_match_description_on_random_instances(H):
    I = to_incidence(H)
    ef = shd_exact(I).forest
    per = build_node_derivations(I, ef)
    for n in ef.forest.nodes:
        assert brute_labeled_isomorphic(per[n].result, expected_node_graph(I, ef, n))


@given(hypergraphs(max_edges=5, max_vertices=6))
def test_round_trip_through_derivations(H):
    w = shd_exact(H)
    d = build_from_strict_ef(H, w.forest)
    assert d.result.label_free and d.cost <= max(w.depth, 1)
    assert isomorphic(d.result.skeleton, H)
    ef = extract_forest(d)
    assert ef.height <= d.cost
    assert validate_strict_ef(d.result.skeleton, ef).ok
    assert forest_is_valid(d.result.skeleton, dict(ef.forest.parent), dict(ef.gamma), strict=True)


def test_build_rejects_bad_forests():
    H, bad = example_forests()["H-strict"]
    with pytest.raises(ValueError):
        build_from_strict_ef(H, bad)
    P, ef = example_forests()["P7-strict"]
    with pytest.raises(ValueError):
        build_from_strict_ef(P, ef, k=2)


def test_single_edge_smallest_case():
    H = Hypergraph.from_edges({"e": "ab"})
    ef = EliminationForest(RootedForest(("t",), {"t": None}), {"t": "e"})
    d = build_from_strict_ef(H, ef)
    assert d.cost == 1 and [s.op for s in d.steps()] == ["base", "remove_red", "remove_blue"]


@given(hypergraphs(max_edges=3, max_vertices=5), st.data())
def test_extraction_of_partial_derivations(H, data):
    # fully labeled base, an optional transition, then every droppable blue label removed
    I = to_incidence(H)
    c = I.contents()
    b = dict(enumerate(I.blues, 1))
    r = dict(enumerate(I.reds, 1))
    g = {i: min(j for j, e in b.items() if v in c[e]) for i, v in r.items()}
    d = derive_base(KLI(I, r, b, g, 3))
    if data.draw(st.booleans()):
        f = {i: 1 for i in r}
        d = derive_transition(d, f)
    drop = sorted(set(d.result.b) - set(d.result.g.values()))
    if drop:
        d = derive_remove_blue(d, drop)
    ef = extract_forest(d)
    unlabeled = set(d.result.skeleton.blues) - set(d.result.b.values())
    assert sorted(ef.gamma.values()) == sorted(unlabeled)
    assert ef.height <= d.cost
    assert not labeled_heritage_violations(d.result, ef)


def test_chain_for_two_removed_labels():
    I = to_incidence(Hypergraph.from_edges({"e": "a", "f": "b"}))
    d = derive_base(KLI(I, {1: "a", 2: "b"}, {1: "e", 2: "f"}, {1: 1, 2: 2}, 2))
    d = derive_remove_blue(derive_remove_red(d, {1, 2}), {1, 2})
    ef = extract_forest(d)
    assert ef.height == 2 == d.cost
    assert ef.forest.parent == {"e": None, "f": "e"}


def test_p7_script_replay():
    with open(data_path("p7_derivation.gli")) as fh:
        rep = replay_gli(fh.read(), data_path(""))
    fin = rep.final
    assert rep.k == 3 and fin.cost == 3 and fin.result.label_free
    assert isomorphic(fin.result.skeleton, p7_letters())
    ef = extract_forest(fin)
    assert validate_strict_ef(fin.result.skeleton, ef).ok and ef.height == 3


@pytest.mark.parametrize("script,msg", [
    ("GLUE a b c", "unknown step"),
    ("K x", "K <positive"),
    ("FOO a", "unknown step kind"),
    ("RMR a", "missing|expected"),
])
def test_script_errors(script, msg):
    with pytest.raises(ValueError, match=msg):
        replay_gli(script, ".")


def test_script_inline(tmp_path):
    (tmp_path / "e.hg").write_text("E e : x y\n")
    text = """K 1
BASE a e.hg r={1:x,2:y} b={1:e} g={1:1,2:1}
RMR b a {1,2}
RMB c b {1}
"""
    rep = replay_gli(text, str(tmp_path))
    assert rep.final.cost == 1 and rep.final.result.label_free
    with pytest.raises(ValueError, match="defined twice"):
        replay_gli(text + "RMB c b {1}\n", str(tmp_path))
    with pytest.raises(DerivationError, match="line 3"):
        replay_gli(text.replace("RMR b a {1,2}", "RMB b a {1}"), str(tmp_path))
