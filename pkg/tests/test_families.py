import pytest

from hyperdepth.canon import canonical_form, isomorphic
from hyperdepth.elimination import hd_exact, shd_exact
from hyperdepth.errors import BudgetExceeded
from hyperdepth.families import (FAMILIES, EnumerationBounds, enumerate_hypergraphs, example_G,
                                 example_H, iter_hypergraphs, p7_letters, skew_distinguisher,
                                 skew_pair, skew_pair_prime, skew_prime_distinguisher)
from hyperdepth.homcount import count_hg_homs, count_ig_homs
from hyperdepth.hypergraph import is_connected, path, to_incidence
from oracles import brute_class_count


@pytest.mark.parametrize("bounds", [(1, 3), (2, 3), (2, 4), (3, 4), (3, 5)])
@pytest.mark.parametrize("connected", [False, True])
def test_enumeration_matches_labelled_generation(bounds, connected):
    hs = enumerate_hypergraphs(EnumerationBounds(*bounds, connected_only=connected))
    assert len(hs) == brute_class_count(*bounds, connected)
    keys = [canonical_form(H) for H in hs]
    assert len(set(keys)) == len(keys)
    if connected:
        assert all(is_connected(H) for H in hs)


def test_enumeration_order_and_budget():
    hs = enumerate_hypergraphs(EnumerationBounds(3, 4))
    sizes = [(len(H.edges), len(H.vertices)) for H in hs]
    assert sizes == sorted(sizes)
    assert [canonical_form(H) for H in iter_hypergraphs(EnumerationBounds(3, 4))] == \
        [canonical_form(H) for H in hs]
    with pytest.raises(BudgetExceeded):
        enumerate_hypergraphs(EnumerationBounds(4, 6), budget=100)


def test_empty_edges_are_opt_in():
    plain = enumerate_hypergraphs(EnumerationBounds(2, 2))
    with_empty = enumerate_hypergraphs(EnumerationBounds(2, 2, allow_empty_edges=True))
    assert all(all(c for c in H.contents) for H in plain)
    assert len(with_empty) > len(plain)


def test_worked_instances():
    G, H = example_G(), example_H()
    assert sorted(map(len, G.contents)) == [2, 2, 2, 3]
    assert len(H.vertices) == 7 and len(H.edges) == 4
    assert isomorphic(p7_letters(), path(7))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_skew_pairs_shape(k):
    G, H = skew_pair(k)
    assert len(G.edges) == len(H.edges) and len(G.vertices) == len(H.vertices)
    assert not isomorphic(G, H)
    Gp, Hp = skew_pair_prime(k)
    assert not isomorphic(Gp, Hp)
    assert sorted(map(len, Gp.contents)) == sorted(map(len, Hp.contents))


@pytest.mark.parametrize("k", [1, 2])
def test_skew_distinguisher_depth_and_counts(k):
    G, H = skew_pair(k)
    d = skew_distinguisher(k)
    assert hd_exact(d).depth <= k
    assert count_hg_homs(d, G) != count_hg_homs(d, H)


def test_skew_prime_distinguisher_k1():
    G, H = skew_pair_prime(1)
    d = skew_prime_distinguisher(1)
    assert hd_exact(d).depth <= 1
    assert count_ig_homs(d, to_incidence(G)) != count_ig_homs(d, to_incidence(H))
    with pytest.raises(ValueError):
        skew_prime_distinguisher(2, attach=99)


def test_family_registry():
    assert FAMILIES["pathN"](5)[0] == path(5)
    assert len(FAMILIES["skew"](2)) == 2
    for bad in (lambda: skew_pair(0), lambda: skew_pair_prime(0), lambda: skew_distinguisher(0)):
        with pytest.raises(ValueError):
            bad()


def test_g_and_h_depths_are_those_found_by_search():
    assert (hd_exact(example_G()).depth, shd_exact(example_G()).depth) == (1, 2)
