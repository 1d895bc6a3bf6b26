import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from app.core.errors import DuplicateEdgeError, SelfLoopError, VertexOutOfRangeError
from app.models.graph import Graph, VertexSet, build_graph
from tests.strategies import simple_graphs


class TestBuildGraph:
    def test_triangle(self):
        g = build_graph(3, [(0, 1), (1, 2), (0, 2)])
        assert (g.n, g.m) == (3, 3)
        assert g.degrees.tolist() == [2, 2, 2]
        assert g.neighbors(1).tolist() == [0, 2]
        assert g.regular_degree() == 2

    def test_edges_normalised_and_sorted(self):
        g = build_graph(4, [(3, 1), (2, 0), (1, 0)])
        assert g.edge_list() == [(0, 1), (0, 2), (1, 3)]

    def test_self_loop(self):
        with pytest.raises(SelfLoopError) as exc:
            build_graph(3, [(0, 1), (2, 2)])
        assert exc.value.vertex == 2

    def test_duplicate_edge(self):
        with pytest.raises(DuplicateEdgeError):
            build_graph(4, [(0, 1), (1, 0)])

    def test_out_of_range(self):
        with pytest.raises(VertexOutOfRangeError) as exc:
            build_graph(3, [(0, 3)])
        assert exc.value.vertex == 3

    def test_edgeless(self):
        g = build_graph(5, [])
        assert g.m == 0
        assert g.regular_degree() == 0
        assert len(g.connected_components()) == 5

    def test_non_regular(self, path4):
        assert path4.regular_degree() is None

    def test_equality(self):
        assert build_graph(3, [(0, 1)]) == build_graph(3, [(1, 0)])
        assert build_graph(3, [(0, 1)]) != build_graph(3, [(0, 2)])


class TestVertexSet:
    def test_members_sorted_and_unique(self):
        s = VertexSet(6, [4, 1, 4, 0])
        assert s.members.tolist() == [0, 1, 4]
        assert len(s) == 3
        assert 4 in s and 2 not in s
        assert s.min() == 0

    def test_out_of_range(self):
        with pytest.raises(VertexOutOfRangeError):
            VertexSet(3, [3])

    def test_set_algebra(self):
        a = VertexSet(5, [0, 1, 2])
        b = VertexSet(5, [2, 3])
        assert a.union(b) == VertexSet(5, [0, 1, 2, 3])
        assert a.intersection(b) == VertexSet(5, [2])
        assert a.difference(b) == VertexSet(5, [0, 1])
        assert a.complement() == VertexSet(5, [3, 4])
        assert VertexSet(5, [1]).issubset(a)

    def test_mask_round_trip(self):
        mask = np.array([True, False, True])
        assert VertexSet.from_mask(mask) == VertexSet(3, [0, 2])


class TestCounts:
    def test_induced_subgraph_relabels(self, k4):
        sub, relabel = k4.induced_subgraph(VertexSet(4, [0, 1, 2]))
        assert (sub.n, sub.m) == (3, 3)
        assert relabel == {0: 0, 1: 1, 2: 2}

    def test_induced_subgraph_of_cycle(self, generator):
        c5 = generator.cycle_graph(5)
        sub, relabel = c5.induced_subgraph(VertexSet(5, [0, 1, 3]))
        assert sub.edge_list() == [(0, 1)]
        assert relabel == {0: 0, 1: 1, 3: 2}

    def test_directed_pair_count(self, k5):
        s = VertexSet(5, [0, 1])
        t = VertexSet(5, [1, 2])
        assert k5.directed_pair_count(s, t) == 3
        assert k5.directed_pair_count(k5.all_vertices(), k5.all_vertices()) == 2 * k5.m

    def test_boundary(self, k4):
        assert k4.boundary_edge_count(VertexSet(4, [0])) == 3
        assert k4.boundary_edge_count(VertexSet(4, [0, 1])) == 4

    def test_components_ranked(self):
        g = build_graph(7, [(5, 6), (0, 1), (1, 2)])
        components = [c.members.tolist() for c in g.connected_components()]
        assert components == [[0, 1, 2], [5, 6], [3], [4]]
        assert g.component_labels().tolist() == [0, 0, 0, 2, 3, 1, 1]

    def test_two_triangles(self, two_triangles):
        components = two_triangles.connected_components()
        assert [c.members.tolist() for c in components] == [[0, 1, 2], [3, 4, 5]]


class TestGraphProperties:
    @given(simple_graphs(), st.data())
    @hypothesis_settings(max_examples=100, deadline=None)
    def test_counting_identities(self, graph_data, data):
        n, edges = graph_data
        g = build_graph(n, edges)
        members = data.draw(st.sets(st.integers(0, n - 1), max_size=n))
        s = VertexSet(n, members)
        assert int(g.degrees.sum()) == 2 * g.m
        assert g.directed_pair_count(s, s) == 2 * g.internal_edge_count(s)
        assert g.boundary_edge_count(s) == g.boundary_edge_count(s.complement())
        assert g.directed_pair_count(s, s.complement()) == g.boundary_edge_count(s)

    @given(simple_graphs())
    @hypothesis_settings(max_examples=100, deadline=None)
    def test_components_match_networkx(self, graph_data):
        n, edges = graph_data
        g = build_graph(n, edges)
        reference = nx.Graph()
        reference.add_nodes_from(range(n))
        reference.add_edges_from(edges)
        ours = sorted(sorted(c.members.tolist()) for c in g.connected_components())
        theirs = sorted(sorted(c) for c in nx.connected_components(reference))
        assert ours == theirs
        sizes = [len(c) for c in g.connected_components()]
        assert sizes == sorted(sizes, reverse=True)

    @given(simple_graphs())
    @hypothesis_settings(max_examples=50, deadline=None)
    def test_csr_rows_ascending(self, graph_data):
        n, edges = graph_data
        g = build_graph(n, edges)
        for v in range(n):
            row = g.neighbors(v)
            assert np.all(np.diff(row) > 0)

    def test_edgeless_classmethod(self):
        assert Graph.edgeless(3) == build_graph(3, [])
