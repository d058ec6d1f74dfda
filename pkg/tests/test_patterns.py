import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brute import all_dags, relation
from causaleq.exceptions import CycleError, GraphError, InconsistentPatternError, NodeSetMismatchError, SizeBoundError
from causaleq.graph import Dag, HybridGraph, Mark
from causaleq.patterns import (
    COMPLETED,
    Pattern,
    Vee,
    complete_pattern,
    enumerate_class,
    equivalent,
    orient_fixpoint,
    rudimentary_pattern,
    uncoupled_colliders,
)
from strategies import dags

CHAIN = Dag(edges=[("a", "b"), ("b", "c")])


def pattern(nodes, undirected=(), directed=()):
    return Pattern.from_hybrid(HybridGraph.from_links(nodes, undirected=undirected, directed=directed))


class TestColliders:
    def test_single_collider(self):
        assert uncoupled_colliders(Dag(edges=[("a", "c"), ("b", "c")])) == {Vee("a", "c", "b")}

    def test_chain_has_none(self):
        assert uncoupled_colliders(CHAIN) == frozenset()

    def test_coupled_collider_excluded(self):
        assert uncoupled_colliders(Dag(edges=[("a", "c"), ("b", "c"), ("a", "b")])) == frozenset()


class TestEquivalence:
    def test_three_chain_variants_agree(self):
        fork = Dag(edges=[("b", "a"), ("b", "c")])
        assert equivalent(CHAIN, fork)
        assert equivalent(CHAIN, Dag(edges=[("c", "b"), ("b", "a")]))

    def test_collider_differs(self):
        assert not equivalent(CHAIN, Dag(edges=[("a", "b"), ("c", "b")]))

    def test_reflexive(self):
        assert equivalent(CHAIN, CHAIN)

    def test_node_sets_must_match(self):
        with pytest.raises(NodeSetMismatchError):
            equivalent(CHAIN, Dag(edges=[("a", "b")]))

    def test_latents_rejected(self):
        with pytest.raises(GraphError):
            rudimentary_pattern(CHAIN.with_latent(["b"]))


class TestPatterns:
    def test_chain_pattern_is_undirected(self):
        assert rudimentary_pattern(CHAIN) == pattern("abc", undirected=[("a", "b"), ("b", "c")])

    def test_collider_pattern(self):
        g = Dag(edges=[("a", "c"), ("b", "c")])
        assert rudimentary_pattern(g) == pattern("abc", directed=[("a", "c"), ("b", "c")])

    def test_tail_after_collider(self):
        g = Dag(edges=[("a", "c"), ("b", "c"), ("c", "d")])
        p = rudimentary_pattern(g)
        assert p == pattern("abcd", undirected=[("c", "d")], directed=[("a", "c"), ("b", "c")])
        done = complete_pattern(p)
        assert done.is_directed("c", "d") and done.stage == COMPLETED

    def test_chain_completion_changes_nothing(self):
        p = rudimentary_pattern(CHAIN)
        assert complete_pattern(p) == p

    def test_bidirected_links_rejected(self):
        with pytest.raises(GraphError):
            Pattern.from_hybrid(HybridGraph.from_links("ab", bidirected=[("a", "b")]))

    def test_conflicting_orientation_detected(self):
        h = HybridGraph.from_links("abcd", undirected=[("b", "c")], directed=[("a", "b"), ("d", "c")])
        with pytest.raises(InconsistentPatternError):
            orient_fixpoint(h)

    def test_directed_cycle_detected(self):
        h = HybridGraph.from_links("abc", directed=[("a", "b"), ("b", "c"), ("c", "a")])
        with pytest.raises(InconsistentPatternError):
            orient_fixpoint(h)


class TestClass:
    def test_chain_class_has_three_members(self):
        members = enumerate_class(rudimentary_pattern(CHAIN))
        assert set(members) == {CHAIN, Dag(edges=[("b", "a"), ("b", "c")]), Dag(edges=[("c", "b"), ("b", "a")])}

    def test_collider_class_is_singleton(self):
        assert len(enumerate_class(pattern("abc", directed=[("a", "c"), ("b", "c")]))) == 1

    def test_single_link(self):
        assert len(enumerate_class(pattern("ab", undirected=[("a", "b")]))) == 2

    def test_size_bound(self):
        with pytest.raises(SizeBoundError):
            enumerate_class(pattern([f"v{i}" for i in range(11)]))


def _by_pattern(n):
    groups = {}
    for g in all_dags(n):
        groups.setdefault(rudimentary_pattern(g), []).append(g)
    return groups


def test_exhaustive_four_nodes_pattern_classes():
    """Pattern groups coincide with relation groups, and the class enumerator lists each group."""
    dags4 = list(all_dags(4))
    by_relation = {}
    for g in dags4:
        by_relation.setdefault(relation(g), set()).add(g)
    groups = _by_pattern(4)
    assert sorted(map(len, groups.values())) == sorted(map(len, by_relation.values()))
    for p, members in groups.items():
        assert set(enumerate_class(p)) == set(members)
        assert len({relation(g) for g in members}) == 1


def test_completion_matches_shared_orientations_exhaustively():
    """Completion adds exactly the arrowheads common to every class member (n <= 5)."""
    for n in range(1, 6):
        for p, members in _by_pattern(n).items():
            done = complete_pattern(p)
            shared = set.intersection(*(set(m.edges) for m in members))
            directed = {(u, v) for u, v, mu, mv in done.edges() if mv is Mark.ARROW and mu is Mark.TAIL}
            directed |= {(v, u) for u, v, mu, mv in done.edges() if mu is Mark.ARROW and mv is Mark.TAIL}
            assert directed == shared, p


@given(dags(max_nodes=6))
@settings(max_examples=60)
def test_pattern_equality_tracks_equivalence(g):
    members = enumerate_class(rudimentary_pattern(g))
    assert g in members
    for m in members:
        assert equivalent(g, m)
        assert rudimentary_pattern(m) == rudimentary_pattern(g)


@given(dags(max_nodes=6), st.data())
def test_equivalence_matches_relations(g1, data):
    if data.draw(st.booleans()):
        g2 = data.draw(dags(min_nodes=len(g1), max_nodes=len(g1)))
    else:
        # same skeleton, some links reversed
        flips = data.draw(st.lists(st.booleans(), min_size=len(g1.edges), max_size=len(g1.edges)))
        edges = [(c, p) if f else (p, c) for (p, c), f in zip(g1.edges, flips)]
        try:
            g2 = Dag(g1.nodes, edges)
        except CycleError:
            return
    assert equivalent(g1, g2) == (relation(g1) == relation(g2))


@given(dags(max_nodes=6))
def test_completion_is_idempotent_and_sound(g):
    p = complete_pattern(rudimentary_pattern(g))
    assert complete_pattern(p) == p
    for m in enumerate_class(p):
        assert equivalent(m, g)
        for u, v, mu, mv in p.edges():
            if mv is Mark.ARROW:
                assert m.has_edge(u, v)
            if mu is Mark.ARROW:
                assert m.has_edge(v, u)


@given(dags(max_nodes=6))
def test_pattern_has_skeleton_of_dag(g):
    p = rudimentary_pattern(g)
    assert p.skeleton() == g.skeleton()
    for u, v in p.arrowheads():
        assert any(c == v and u in (a, b) for a, c, b in uncoupled_colliders(g))


def test_node_order_does_not_matter():
    for a, b in itertools.permutations(["x", "y", "z"], 2):
        g = Dag(["x", "y", "z"], [(a, b)])
        h = Dag(["z", "y", "x"], [(a, b)])
        assert rudimentary_pattern(g) == rudimentary_pattern(h)
