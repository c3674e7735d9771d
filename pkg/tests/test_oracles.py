import unittest
from unittest.mock import patch

import numpy as np

from errors import InfeasibleError, InputError, QuotaUnreachableError, SizeError
from graph_core import NodeWeightedGraph, RootedTree, build_arborescence
from oracles import (enumerate_connected_subtrees, exact_budget_solver, exact_optimum, exact_quota_solver,
                     tree_is_arborescence)
from submodular import CoverageOracle


def chain():
    return NodeWeightedGraph.from_arcs([0, 1, 1], [0, 2, 3], [(0, 1), (1, 2)])


def diamond():
    return NodeWeightedGraph.from_arcs([0, 1, 1, 1], [0, 1, 2, 3], [(0, 1), (0, 2), (1, 3), (2, 3)])


def random_digraph(rng, n):
    arcs = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < 0.35]
    costs = [0] + [int(c) for c in rng.integers(1, 6, size=n - 1)]
    prizes = [0] + [int(p) for p in rng.integers(0, 6, size=n - 1)]
    return NodeWeightedGraph.from_arcs(costs, prizes, arcs)


class SubtreeEnumerationTests(unittest.TestCase):
    def test_path_of_three(self):
        tree = build_arborescence(chain(), {0, 1, 2})
        pieces = enumerate_connected_subtrees(tree)
        self.assertEqual(len(pieces), 6)
        self.assertEqual(len(set(pieces)), 6)
        self.assertNotIn(frozenset({0, 2}), pieces)

    def test_star_with_three_leaves(self):
        g = NodeWeightedGraph.from_arcs([0, 1, 1, 1], [0] * 4, [(0, 1), (0, 2), (0, 3)])
        pieces = enumerate_connected_subtrees(build_arborescence(g, {0, 1, 2, 3}))
        self.assertEqual(len(pieces), 11)


class ExactOptimumTests(unittest.TestCase):
    def test_dst_prefers_smaller_ids_on_ties(self):
        result = exact_optimum(diamond(), 'dst', {'terminals': [3]})
        self.assertEqual(result.best_set, frozenset({0, 1, 3}))
        self.assertEqual(result.best_value, 2.0)

    def test_budget_and_quota(self):
        g = chain()
        self.assertEqual(exact_optimum(g, 'bdrat', {'budget': 1}).best_set, frozenset({0, 1}))
        self.assertEqual(exact_optimum(g, 'bdrat', {'budget': 2}).best_value, 5.0)
        self.assertEqual(exact_optimum(g, 'bdrat', {'budget': 0}).best_set, frozenset({0}))
        self.assertEqual(exact_optimum(g, 'qdrat', {'quota': 3}).best_value, 2.0)
        self.assertIsNone(exact_optimum(g, 'qdrat', {'quota': 6}).best_set)

    def test_submodular_budget(self):
        g = NodeWeightedGraph.from_arcs([0, 1, 1, 1], [0] * 4, [(0, 1), (0, 2), (0, 3)], directed=False)
        oracle = CoverageOracle([(), ('a', 'b'), ('a',), ('c',)], {'a': 1, 'b': 1, 'c': 1})
        result = exact_optimum(g, 'burst', {'budget': 2}, oracle)
        self.assertEqual(result.best_set, frozenset({0, 1, 3}))
        self.assertEqual(result.best_value, 3.0)

    def test_best_prize_grows_with_budget(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            g = random_digraph(rng, int(rng.integers(2, 8)))
            values = [exact_optimum(g, 'bdrat', {'budget': b}).best_value for b in range(0, 12, 2)]
            self.assertEqual(values, sorted(values))

    def test_limits(self):
        with self.assertRaises(InputError):
            exact_optimum(chain(), 'steiner', {})
        with patch('settings.ORACLE_MAX_NODES', 2):
            with self.assertRaises(SizeError):
                exact_optimum(chain(), 'bdrat', {'budget': 1})


class SolverCallableTests(unittest.TestCase):
    def test_budget_solver_raises_when_root_does_not_fit(self):
        g = NodeWeightedGraph.from_arcs([2, 1], [0, 1], [(0, 1)])
        with self.assertRaises(InfeasibleError):
            exact_budget_solver()(g, 1.0)
        self.assertEqual(exact_budget_solver()(g, 3.0).members, frozenset({0, 1}))

    def test_quota_solver_raises_when_unreachable(self):
        with self.assertRaises(QuotaUnreachableError):
            exact_quota_solver()(chain(), 10.0)
        self.assertEqual(exact_quota_solver()(chain(), 2.0).members, frozenset({0, 1}))


class ArborescenceCheckTests(unittest.TestCase):
    def test_accepts_built_tree(self):
        g = diamond()
        self.assertTrue(tree_is_arborescence(g, build_arborescence(g, {0, 2, 3})))

    def test_rejects_arc_missing_from_host(self):
        tree = RootedTree(root=0, parent={2: 0}, members=frozenset({0, 2}), cost=1.0, prize_additive=3.0)
        self.assertFalse(tree_is_arborescence(chain(), tree))


if __name__ == '__main__':
    unittest.main()
