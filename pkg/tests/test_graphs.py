import itertools

import numpy as np
import pytest

from causal_lrps import rng as rngmod
from causal_lrps.errors import InconsistentPdag, TooLarge
from causal_lrps.graphs import (
    Dag,
    Pdag,
    d_separated,
    d_separated_moral,
    dag_to_cpdag,
    enumerate_class,
    from_edge_list_text,
    graph_degree,
    is_acyclic,
    meek_closure,
    pdag_to_dag,
    skeleton,
    to_edge_list_text,
    v_structures,
)
from conftest import dsep_signature


def random_dag(g, p, edge_prob=0.4):
    amat = np.zeros((p, p), dtype=np.int8)
    perm = g.permutation(p)
    for a in range(p):
        for b in range(a + 1, p):
            if g.random() < edge_prob:
                amat[perm[a], perm[b]] = 1
    return Dag.from_amat(amat)


# the running example: five observed nodes 0..4 with edges 0->1<-2, 3->4,
# plus two hidden sources 5, 6 fanning out over the observed ones
FIG_OBSERVED = [(0, 1), (2, 1), (3, 4)]
FIG_HIDDEN = [(5, 0), (5, 1), (5, 3), (6, 1), (6, 3), (6, 4)]


class TestBasics:
    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            Pdag(3, directed_edges=[(0, 0)])
        with pytest.raises(ValueError):
            Pdag(3, directed_edges=[(0, 1)], undirected_edges=[(0, 1)])
        with pytest.raises(ValueError):
            Pdag(2, directed_edges=[(0, 3)])
        with pytest.raises(ValueError):
            Dag(3, [(0, 1), (1, 2), (2, 0)])

    def test_skeleton(self):
        g = Pdag(2, directed_edges=[(0, 1)])
        assert skeleton(g).undirected_edges == {(0, 1)}
        empty = Pdag(4)
        assert skeleton(empty).num_edges() == 0
        fig = Dag(5, FIG_OBSERVED)
        assert skeleton(fig).undirected_edges == {(0, 1), (1, 2), (3, 4)}

    def test_is_acyclic(self):
        assert is_acyclic(Pdag(3, directed_edges=[(0, 1), (1, 2)]))
        assert not is_acyclic(Pdag(3, directed_edges=[(0, 1), (1, 2), (2, 0)]))

    def test_random_dags_are_acyclic(self):
        g = rngmod.stream(11, rngmod.STREAM_TEST)
        for _ in range(50):
            assert is_acyclic(random_dag(g, int(g.integers(2, 8))))

    def test_graph_degree(self):
        assert graph_degree(Dag(5, FIG_OBSERVED)) == 2
        assert graph_degree(Pdag(3)) == 0


class TestDSeparation:
    def test_chain(self):
        g = Dag(3, [(0, 1), (1, 2)])
        assert d_separated(g, 0, 2, (1,))
        assert not d_separated(g, 0, 2)

    def test_collider(self):
        g = Dag(3, [(0, 2), (1, 2)])
        assert d_separated(g, 0, 1)
        assert not d_separated(g, 0, 1, (2,))

    def test_hidden_fanout_blocks_nothing(self):
        # with the hidden sources in the graph, 0 and 3 (resp. 0 and 4)
        # stay d-connected given every subset of observed nodes
        full = Dag(7, FIG_OBSERVED + FIG_HIDDEN)
        observed = [0, 1, 2, 3, 4]
        for tgt in (3, 4):
            rest = [v for v in observed if v not in (0, tgt)]
            for r in range(len(rest) + 1):
                for s in itertools.combinations(rest, r):
                    assert not d_separated(full, 0, tgt, s)
        # 0 and 2 are separable marginally (collider at 1) but not given 1
        assert d_separated(full, 0, 2)
        assert not d_separated(full, 0, 2, (1,))

    def test_agreement_with_moralization(self):
        g = rngmod.stream(12, rngmod.STREAM_TEST)
        for _ in range(150):
            p = int(g.integers(3, 7))
            dag = random_dag(g, p)
            for i, j in itertools.combinations(range(p), 2):
                rest = [v for v in range(p) if v not in (i, j)]
                for r in range(len(rest) + 1):
                    for s in itertools.combinations(rest, r):
                        assert d_separated(dag, i, j, s) == d_separated_moral(dag, i, j, s)

    def test_argument_validation(self):
        g = Dag(3, [(0, 1)])
        with pytest.raises(ValueError):
            d_separated(g, 1, 1)
        with pytest.raises(ValueError):
            d_separated(g, 0, 1, (1,))


class TestDagToCpdag:
    def test_chain_fully_undirected(self):
        c = dag_to_cpdag(Dag(3, [(0, 1), (1, 2)]))
        assert not c.directed_edges and c.undirected_edges == {(0, 1), (1, 2)}

    def test_collider_unchanged(self):
        c = dag_to_cpdag(Dag(3, [(0, 2), (1, 2)]))
        assert c.directed_edges == {(0, 2), (1, 2)} and not c.undirected_edges

    def test_fig_observed_cpdag(self):
        c = dag_to_cpdag(Dag(5, FIG_OBSERVED))
        assert c.directed_edges == {(0, 1), (2, 1)}
        assert c.undirected_edges == {(3, 4)}

    def test_constant_on_class_and_skeleton_preserved(self, dags3):
        groups = {}
        for dag in dags3:
            groups.setdefault(dsep_signature(dag), []).append(dag)
        assert sum(len(v) for v in groups.values()) == 25
        assert len(groups) == 11
        for dags in groups.values():
            cpdags = {dag_to_cpdag(d) for d in dags}
            assert len(cpdags) == 1
            c = cpdags.pop()
            for d in dags:
                assert skeleton(d) == skeleton(c)


class TestMeekClosure:
    def test_rule1(self):
        g = Pdag(3, directed_edges=[(0, 1)], undirected_edges=[(1, 2)])
        assert meek_closure(g).directed_edges == {(0, 1), (1, 2)}

    def test_rule2(self):
        g = Pdag(3, directed_edges=[(0, 1), (1, 2)], undirected_edges=[(0, 2)])
        assert (0, 2) in meek_closure(g).directed_edges

    def test_rule3(self):
        g = Pdag(4, directed_edges=[(1, 3), (2, 3)],
                 undirected_edges=[(0, 1), (0, 2), (0, 3)])
        assert (0, 3) in meek_closure(g).directed_edges

    def test_rule4(self):
        g = Pdag(4, directed_edges=[(2, 3), (3, 1)],
                 undirected_edges=[(0, 1), (0, 2), (0, 3)])
        closed = meek_closure(g)
        assert (0, 1) in closed.directed_edges

    def test_idempotent_on_cpdags(self):
        g = rngmod.stream(13, rngmod.STREAM_TEST)
        for _ in range(200):
            c = dag_to_cpdag(random_dag(g, int(g.integers(3, 7))))
            assert meek_closure(c) == c

    def test_inconsistent_cycle(self):
        g = Pdag(3, directed_edges=[(0, 1), (1, 2), (2, 0)])
        with pytest.raises(InconsistentPdag):
            meek_closure(g)


class TestEnumerateClass:
    def test_single_undirected_edge(self):
        members = enumerate_class(Pdag(2, undirected_edges=[(0, 1)]))
        assert {frozenset(m.directed_edges) for m in members} == {
            frozenset({(0, 1)}), frozenset({(1, 0)})}

    def test_collider_is_singleton(self):
        c = Pdag(3, directed_edges=[(0, 2), (1, 2)])
        assert len(enumerate_class(c)) == 1

    def test_chain_class_has_three(self):
        c = Pdag(3, undirected_edges=[(0, 1), (1, 2)])
        members = enumerate_class(c)
        assert len(members) == 3
        for m in members:
            assert not v_structures(m)

    def test_guard(self):
        c = Pdag(14, undirected_edges=[(i, 13) for i in range(13)])
        with pytest.raises(TooLarge):
            enumerate_class(c)

    def test_class_shares_dsep_relations(self, dags4):
        g = rngmod.stream(14, rngmod.STREAM_TEST)
        for _ in range(60):
            dag = random_dag(g, int(g.integers(3, 7)))
            sig = dsep_signature(dag)
            members = enumerate_class(dag_to_cpdag(dag))
            assert members
            for m in members:
                assert dsep_signature(m) == sig
                assert skeleton(m) == skeleton(dag)
                assert dag_to_cpdag(m) == dag_to_cpdag(dag)


class TestPdagToDag:
    def test_extension_is_class_member(self):
        g = rngmod.stream(15, rngmod.STREAM_TEST)
        for _ in range(100):
            dag = random_dag(g, int(g.integers(3, 7)))
            c = dag_to_cpdag(dag)
            ext = pdag_to_dag(c)
            assert dag_to_cpdag(ext) == c

    def test_chordless_square_has_no_extension(self):
        # any acyclic orientation of an undirected 4-cycle creates a new
        # collider between two non-adjacent corners
        c4 = Pdag(4, undirected_edges=[(0, 1), (1, 2), (2, 3), (0, 3)])
        with pytest.raises(InconsistentPdag):
            pdag_to_dag(c4)


class TestEdgeListFormat:
    def test_round_trip(self):
        g = Pdag(5, directed_edges=[(0, 1), (2, 1)], undirected_edges=[(3, 4)])
        text = to_edge_list_text(g)
        assert text.splitlines()[0] == "pdag 5"
        assert from_edge_list_text(text) == g

    def test_malformed(self):
        with pytest.raises(ValueError):
            from_edge_list_text("nope 3\n")
        with pytest.raises(ValueError):
            from_edge_list_text("pdag 3\n0 -> 1\n")
