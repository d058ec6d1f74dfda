import itertools

import pytest
from hypothesis import given, settings

from brute import (
    TYPED,
    definition_pattern,
    explicit_latent_dag,
    random_embedded,
    relation,
    seeded,
    shared_arrowheads,
)
from causaleq.embedded import (
    EmbeddedPattern,
    ancestral_graph,
    canonical_dag,
    canonicalize,
    complete_embedded_pattern,
    discriminating_paths,
    embedded_equivalent,
    embedded_pattern,
    embedded_rudimentary_pattern,
    embedded_skeleton,
    model_count_bound,
    same_embedded_pattern,
)
from causaleq.exceptions import GraphError, InconsistentPatternError, ObservableSetMismatchError
from causaleq.graph import Dag, HybridGraph, Mark
from causaleq.patterns import rudimentary_pattern
from strategies import dags


def links(nodes, undirected=(), directed=(), bidirected=()):
    return HybridGraph.from_links(nodes, undirected=undirected, directed=directed, bidirected=bidirected)


MEDIATED = Dag(edges=[("a", "m"), ("m", "b")], latent=["m"])
CONFOUNDED = Dag(edges=[("h", "a"), ("h", "b")], latent=["h"])


class TestSkeleton:
    def test_latent_mediator_links_ends(self):
        assert embedded_skeleton(MEDIATED) == {frozenset("ab")}

    def test_observed_mediator(self):
        assert embedded_skeleton(MEDIATED.with_latent([])) == {frozenset("am"), frozenset("mb")}

    def test_hidden_common_cause(self):
        assert embedded_skeleton(CONFOUNDED) == {frozenset("ab")}


class TestRudimentary:
    def test_latent_free_collider(self):
        g = Dag(edges=[("a", "c"), ("b", "c")])
        assert embedded_rudimentary_pattern(g) == links("abc", directed=[("a", "c"), ("b", "c")])

    def test_two_nodes_never_get_arrowheads(self):
        assert embedded_rudimentary_pattern(Dag(edges=[("a", "b")])) == links("ab", undirected=[("a", "b")])
        assert embedded_rudimentary_pattern(CONFOUNDED) == links("ab", undirected=[("a", "b")])

    def test_hidden_cause_next_to_collider(self):
        g = Dag(edges=[("a", "c"), ("b", "c"), ("h", "c"), ("h", "d")], latent=["h"])
        p = embedded_rudimentary_pattern(g)
        assert p == definition_pattern(g)
        assert p == links("abcd", directed=[("a", "c"), ("b", "c"), ("d", "c")])

    def test_bidirected_link_between_two_colliders(self):
        g = Dag(edges=[("a", "c"), ("h", "c"), ("h", "d"), ("b", "d")], latent=["h"])
        p = embedded_rudimentary_pattern(g)
        assert p == definition_pattern(g)
        assert p.is_bidirected("c", "d")

    @given(dags(min_nodes=2, max_nodes=6, latent=True))
    @settings(max_examples=150)
    def test_matches_definition_by_separation(self, g):
        assert embedded_rudimentary_pattern(g) == definition_pattern(g)

    @given(dags(max_nodes=6))
    def test_latent_free_case_matches_simple_pattern(self, g):
        assert embedded_rudimentary_pattern(g) == rudimentary_pattern(g)


class TestCompletion:
    def test_fully_directed_unchanged(self):
        p = links("abc", directed=[("a", "c"), ("b", "c")])
        assert complete_embedded_pattern(p) == p

    def test_tail_after_collider_gets_arrowhead(self):
        p = links("abcd", undirected=[("c", "d")], directed=[("a", "c"), ("b", "c")])
        done = complete_embedded_pattern(p)
        heads, n = shared_arrowheads(p)
        assert n > 0 and done.arrowheads() == heads
        assert done.is_directed("c", "d")

    def test_lone_bidirected_unchanged(self):
        p = links("ab", bidirected=[("a", "b")])
        assert complete_embedded_pattern(p) == p

    @given(dags(min_nodes=2, max_nodes=6, latent=True))
    @settings(max_examples=60)
    def test_adds_exactly_the_shared_arrowheads(self, g):
        p = embedded_rudimentary_pattern(g)
        if p.num_edges > 6:
            return
        heads, n = shared_arrowheads(p)
        assert n > 0
        assert embedded_pattern(g).arrowheads() == heads


class TestEquivalence:
    def test_mediator_versus_direct_link(self):
        assert embedded_equivalent(MEDIATED, Dag(edges=[("a", "b")]))

    def test_two_nodes_confounded_versus_direct(self):
        assert embedded_equivalent(CONFOUNDED, Dag(edges=[("a", "b")]))

    def test_confounded_collider(self):
        g1 = Dag(edges=[("a", "c"), ("b", "c")])
        g2 = Dag(edges=[("l1", "a"), ("l1", "c"), ("l2", "c"), ("l2", "b")], latent=["l1", "l2"])
        assert embedded_equivalent(g1, g2)
        assert relation(g1) == relation(g2)

    def test_observable_sets_must_match(self):
        with pytest.raises(ObservableSetMismatchError):
            embedded_equivalent(MEDIATED, Dag(edges=[("a", "m"), ("m", "b")]))

    def test_equal_patterns_can_hide_different_independencies(self):
        # Both models share one pattern, yet only g1 has y independent of x given {q, b}.
        g1 = Dag(edges=[("x", "q"), ("l1", "q"), ("l1", "b"), ("q", "y"), ("b", "y")], latent=["l1"])
        g2 = Dag(edges=[("x", "q"), ("l1", "q"), ("l1", "b"), ("q", "y"), ("l2", "b"), ("l2", "y")],
                 latent=["l1", "l2"])
        assert same_embedded_pattern(g1, g2)
        assert relation(g1) != relation(g2)
        assert not embedded_equivalent(g1, g2)

    def test_discriminating_path_found(self):
        g1 = Dag(edges=[("x", "q"), ("l1", "q"), ("l1", "b"), ("q", "y"), ("b", "y")], latent=["l1"])
        m = ancestral_graph(g1)
        assert (("x", "q", "b", "y"), "b") in list(discriminating_paths(m))

    @given(dags(min_nodes=3, max_nodes=6, latent=True), dags(min_nodes=3, max_nodes=6, latent=True))
    @settings(max_examples=150)
    def test_matches_relations(self, g1, g2):
        obs = sorted(set(g1.observables) & set(g2.observables))
        if len(obs) < 2:
            return
        g1 = g1.with_latent([v for v in g1.nodes if v not in obs])
        g2 = g2.with_latent([v for v in g2.nodes if v not in obs])
        assert embedded_equivalent(g1, g2) == (relation(g1) == relation(g2))


def test_random_pairs_with_shared_observables():
    rng = seeded(11)
    obs = ["a", "b", "c", "d"]
    pool = [random_embedded(rng, n_max=6, observables=obs[:rng.randint(3, 4)]) for _ in range(600)]
    by_obs = {}
    for g in pool:
        by_obs.setdefault(g.observables, []).append(g)
    checked = agreeing = 0
    for group in by_obs.values():
        rels = [relation(g) for g in group]
        for i, j in itertools.combinations(range(min(len(group), 80)), 2):
            same = rels[i] == rels[j]
            assert embedded_equivalent(group[i], group[j]) == same
            checked += 1
            agreeing += same
    assert checked > 1000 and agreeing > 20


class TestCanonicalize:
    def test_bidirected_becomes_hidden_cause(self):
        dag, witness = canonicalize(links("ab", bidirected=[("a", "b")]))
        assert len(dag) == 3
        lam = witness[("a", "b")]
        assert dag.is_latent(lam) and dag.children(lam) == {"a", "b"} and not dag.parents(lam)

    def test_directed_pattern_is_its_own_dag(self):
        p = links("abc", directed=[("a", "c"), ("b", "c")])
        dag, witness = canonicalize(p)
        assert dag == Dag(edges=[("a", "c"), ("b", "c")]) and len(witness) == 0

    def test_collider_next_to_bidirected(self):
        p = links("abcd", directed=[("a", "c"), ("b", "c")], bidirected=[("c", "d")])
        dag, witness = canonicalize(p)
        lam = witness[("c", "d")]
        assert set(dag.edges) == {("a", "c"), ("b", "c"), (lam, "c"), (lam, "d")}
        # no observable witnesses a head at d, so the projection reads d -> c
        assert embedded_pattern(dag) == links("abcd", directed=[("a", "c"), ("b", "c"), ("d", "c")])

    def test_unrealizable_pattern_in_strict_mode(self):
        with pytest.raises(InconsistentPatternError):
            canonicalize(links("ab", bidirected=[("a", "b")]), strict=True)

    def test_realizable_pattern_unaffected_by_strict(self):
        p = embedded_pattern(Dag(edges=[("a", "c"), ("h", "c"), ("h", "d"), ("b", "d")], latent=["h"]))
        assert canonicalize(p, strict=True) == canonicalize(p)

    def test_canonical_dag_rejects_undirected(self):
        with pytest.raises(GraphError):
            canonical_dag(links("ab", undirected=[("a", "b")]))

    @given(dags(min_nodes=2, max_nodes=6, latent=True))
    @settings(max_examples=150)
    def test_round_trip(self, g):
        p = embedded_pattern(g)
        dag, witness = canonicalize(p)
        assert embedded_pattern(dag) == p
        assert len(dag) < max(2, len(p)) ** 2
        for lam in witness.values():
            assert dag.is_latent(lam) and len(dag.children(lam)) == 2 and not dag.parents(lam)


class TestModelCount:
    def test_formula(self):
        assert model_count_bound(1) == 5
        assert model_count_bound(2) == 625

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            model_count_bound(0)

    def test_three_observables_below_bound(self):
        nodes = ("a", "b", "c")
        pairs = list(itertools.combinations(nodes, 2))
        options = [None] + TYPED
        seen = set()
        for choice in itertools.product(options, repeat=len(pairs)):
            h = HybridGraph(nodes, [(u, v, *m) for (u, v), m in zip(pairs, choice) if m is not None])
            dag = explicit_latent_dag(h)
            if dag is not None:
                seen.add(embedded_pattern(dag))
        assert 0 < len(seen) < model_count_bound(3)


def test_pattern_stage_recorded():
    g = Dag(edges=[("a", "c"), ("b", "c")])
    assert embedded_rudimentary_pattern(g).stage == "rudimentary"
    assert isinstance(embedded_pattern(g), EmbeddedPattern) and embedded_pattern(g).stage == "completed"
    assert embedded_pattern(g).is_directed("a", "c")
    assert embedded_pattern(g).endpoint("c", "a") is Mark.TAIL
