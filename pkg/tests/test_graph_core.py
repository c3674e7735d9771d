import math
import unittest

import networkx as nx
from hypothesis import given, settings as hsettings, strategies as st

from errors import ConnectivityError, ContractError, InfeasibleError, InputError
from graph_core import (NodeWeightedGraph, RootedTree, build_arborescence, induced_subgraph, lift_tree,
                        node_weighted_shortest_paths, prune_to_b_proper, reaching_to, single_node_tree,
                        to_networkx, validate_tree)


def path_graph():
    return NodeWeightedGraph.from_arcs([1, 2, 3], [0, 5, 7], [(0, 1), (1, 2)])


def diamond():
    return NodeWeightedGraph.from_arcs([0, 1, 1, 1], [0, 1, 2, 3], [(0, 1), (0, 2), (1, 3), (2, 3)])


@st.composite
def digraphs(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    costs = draw(st.lists(st.integers(min_value=0, max_value=9), min_size=n, max_size=n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    arcs = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return NodeWeightedGraph.from_arcs(costs, [0] * n, arcs)


class ShortestPathTests(unittest.TestCase):
    def test_distances_count_both_endpoints(self):
        dm = node_weighted_shortest_paths(path_graph(), 0)
        self.assertEqual(dm.dist, (1.0, 3.0, 6.0))
        self.assertEqual(dm.path_to(2), [0, 1, 2])

    def test_ties_prefer_smaller_predecessor(self):
        dm = node_weighted_shortest_paths(diamond(), 0)
        self.assertEqual(dm.dist[3], 2.0)
        self.assertEqual(dm.pred[3], 1)

    def test_unreachable_node_raises_on_path(self):
        g = NodeWeightedGraph.from_arcs([1, 1], [0, 0], [])
        dm = node_weighted_shortest_paths(g, 0)
        self.assertFalse(dm.reachable(1))
        self.assertEqual(dm.dist[1], math.inf)
        with self.assertRaises(ConnectivityError):
            dm.path_to(1)

    def test_allowed_set_blocks_detours(self):
        dm = node_weighted_shortest_paths(diamond(), 0, allowed={0, 2, 3})
        self.assertEqual(dm.path_to(3), [0, 2, 3])
        with self.assertRaises(InputError):
            node_weighted_shortest_paths(diamond(), 0, allowed={1, 2})

    def test_cost_override(self):
        dm = node_weighted_shortest_paths(path_graph(), 0, cost=[0, 0, 3])
        self.assertEqual(dm.dist, (0.0, 0.0, 3.0))

    def test_reaching_to_walks_arcs_backwards(self):
        self.assertEqual(reaching_to(diamond(), 3), {0, 1, 2, 3})
        self.assertEqual(reaching_to(diamond(), 3, allowed={2, 3}), {2, 3})

    @hsettings(max_examples=60, deadline=None)
    @given(digraphs())
    def test_matches_networkx_on_node_costs(self, g):
        dm = node_weighted_shortest_paths(g, 0)
        reference = nx.single_source_dijkstra_path_length(
            to_networkx(g), 0, weight=lambda u, v, d: g.cost[v]
        )
        for v in g.nodes():
            if v in reference:
                self.assertAlmostEqual(dm.dist[v], g.cost[0] + reference[v])
            else:
                self.assertFalse(dm.reachable(v))


class GraphValidationTests(unittest.TestCase):
    def test_duplicate_arc_rejected(self):
        with self.assertRaises(InputError):
            NodeWeightedGraph.from_arcs([0, 1], [0, 0], [(0, 1), (0, 1)])

    def test_duplicate_undirected_edge_rejected(self):
        with self.assertRaises(InputError):
            NodeWeightedGraph.from_arcs([0, 1], [0, 0], [(0, 1), (1, 0)], directed=False)

    def test_negative_cost_rejected(self):
        with self.assertRaises(InputError):
            NodeWeightedGraph.from_arcs([0, -1], [0, 0], [(0, 1)])

    def test_one_sided_undirected_storage_rejected(self):
        with self.assertRaises(InputError):
            NodeWeightedGraph(cost=(0.0, 1.0), prize=(0.0, 0.0), adjacency=((1,), ()), root=0, directed=False)

    def test_check_node_accepts_numpy_ints(self):
        import numpy as np
        path_graph().check_node(np.int64(2))
        with self.assertRaises(InputError):
            path_graph().check_node(3)


class PruneAndInduceTests(unittest.TestCase):
    def test_prune_keeps_nodes_within_bound(self):
        pruned = prune_to_b_proper(path_graph(), 3)
        self.assertEqual(pruned.node_count, 2)
        self.assertEqual(pruned.origin, (0, 1))
        self.assertEqual(pruned.adjacency, ((1,), ()))

    def test_prune_below_root_cost_is_infeasible(self):
        with self.assertRaises(InfeasibleError):
            prune_to_b_proper(path_graph(), 0.5)

    def test_induced_subgraph_needs_root(self):
        with self.assertRaises(InputError):
            induced_subgraph(path_graph(), [1, 2])

    def test_induced_ids_are_dense_and_ascending(self):
        sub = induced_subgraph(diamond(), [3, 0, 2])
        self.assertEqual(sub.origin, (0, 2, 3))
        self.assertEqual(sub.cost, (0.0, 1.0, 1.0))
        self.assertEqual(sub.adjacency, ((1,), (2,), ()))


class TreeTests(unittest.TestCase):
    def test_build_arborescence_and_caches(self):
        g = diamond()
        tree = build_arborescence(g, {0, 1, 2, 3})
        self.assertEqual(tree.parent, {1: 0, 2: 0, 3: 1})
        self.assertEqual(tree.cost, 3.0)
        self.assertEqual(tree.prize_additive, 6.0)
        self.assertEqual(tree.children[0], (1, 2))
        self.assertEqual(tree.depth[3], 2)
        self.assertEqual(tree.arcs(), [(0, 1), (0, 2), (1, 3)])
        self.assertEqual(tree.path_from_root(3), [0, 1, 3])
        self.assertEqual(sorted(tree.subtree(1)), [1, 3])
        order = tree.postorder()
        self.assertLess(order.index(3), order.index(1))
        self.assertEqual(order[-1], 0)

    def test_disconnected_node_set(self):
        with self.assertRaises(ConnectivityError):
            build_arborescence(diamond(), {0, 3})

    def test_validate_catches_stale_cost(self):
        g = path_graph()
        tree = RootedTree(root=0, parent={1: 0}, members=frozenset({0, 1}), cost=99.0, prize_additive=5.0)
        with self.assertRaises(ContractError):
            validate_tree(tree, g)

    def test_validate_catches_missing_arc(self):
        g = path_graph()
        tree = RootedTree(root=0, parent={2: 0}, members=frozenset({0, 2}), cost=4.0, prize_additive=7.0)
        with self.assertRaises(ContractError):
            validate_tree(tree, g)

    def test_lift_maps_back_to_original_ids(self):
        g = diamond()
        sub = induced_subgraph(g, [0, 2, 3])
        tree = build_arborescence(sub, {0, 1, 2})
        lifted = lift_tree(tree, sub, g)
        self.assertEqual(lifted.members, frozenset({0, 2, 3}))
        self.assertEqual(lifted.parent, {2: 0, 3: 2})

    def test_single_node_tree(self):
        tree = single_node_tree(path_graph())
        self.assertEqual(tree.members, frozenset({0}))
        self.assertEqual(tree.cost, 1.0)

    def test_to_networkx_carries_attributes(self):
        g = to_networkx(path_graph())
        self.assertIsInstance(g, nx.DiGraph)
        self.assertEqual(g.nodes[2]['cost'], 3.0)
        self.assertEqual(g.graph['root'], 0)
        undirected = NodeWeightedGraph.from_arcs([0, 1], [0, 1], [(0, 1)], directed=False)
        self.assertNotIsInstance(to_networkx(undirected), nx.DiGraph)


if __name__ == '__main__':
    unittest.main()
