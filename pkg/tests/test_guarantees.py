"""Seeded sweeps over random instances checking the approximation guarantees end to end."""

import math
import unittest

import numpy as np

from flow_lp import Objective, solve_with_row_generation
from graph_core import NodeWeightedGraph, build_arborescence, node_weighted_shortest_paths, prune_to_b_proper
from hitting_set import SetFamily, greedy_hitting_set, hits_all
from instance_io import gen_random
from lp_engine import solve_lp
from oracles import enumerate_connected_subtrees, exact_budget_solver, exact_optimum
from steiner import relaxation_for
from steiner_directed import quota_via_budget, solve_bdrat, solve_dst, solve_qdrat, trim_additive
from steiner_submodular import decompose_tree, trim_submodular
from submodular import CoverageOracle, construct_tight_capacities, restrict_oracle, tight_sets, audit_tight_closure

TOL = 1e-6
EPS = 0.5


def random_tree_graph(rng, n, directed, max_cost=3):
    """Random tree (node v hangs below a smaller id) with a zero-cost root."""
    edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
    costs = [0] + [int(c) for c in rng.integers(1, max_cost + 1, size=n - 1)]
    prizes = [0] + [int(p) for p in rng.integers(0, 10, size=n - 1)]
    return NodeWeightedGraph.from_arcs(costs, prizes, edges, directed=directed)


def random_coverage(rng, n, universe=6):
    covers = [()] + [tuple(f"e{e}" for e in rng.choice(universe, size=int(rng.integers(1, 4)), replace=False))
                     for _ in range(n - 1)]
    weights = {f"e{e}": float(w) for e, w in enumerate(rng.integers(1, 6, size=universe))}
    return CoverageOracle(covers, weights)


class LpBracketingTests(unittest.TestCase):
    def test_relaxations_bracket_exact_optima(self):
        kinds = ('bdrat', 'qdrat', 'burst', 'qurst')
        for seed in range(200):
            kind = kinds[seed % 4]
            n = 4 + seed % 9
            submodular = kind in ('burst', 'qurst')
            inst = gen_random(kind, n, 0.5 if submodular else 0.35,
                              prize_kind='coverage' if submodular else 'additive', seed=seed)
            exact = exact_optimum(inst.graph, kind, inst.params, inst.oracle if submodular else None)
            if kind == 'burst':
                pruned = prune_to_b_proper(inst.graph, inst.budget)
                solution, _, _ = solve_with_row_generation(pruned, restrict_oracle(inst.oracle, pruned.origin),
                                                           B=inst.budget)
            elif kind == 'qurst':
                solution, _, _ = solve_with_row_generation(inst.graph, inst.oracle, Q=inst.quota,
                                                           objective=Objective.MIN_COST)
            else:
                solution = solve_lp(relaxation_for(inst))
            if kind in ('bdrat', 'burst'):
                self.assertGreaterEqual(solution.objective_value, exact.best_value - TOL, f"{kind} seed {seed}")
            elif exact.best_set is not None:
                self.assertTrue(solution.is_optimal, f"{kind} seed {seed}")
                self.assertLessEqual(solution.objective_value, exact.best_value + TOL, f"{kind} seed {seed}")


class HittingSetBoundTests(unittest.TestCase):
    def test_five_hundred_families(self):
        rng = np.random.default_rng(2024)
        for _ in range(500):
            m = int(rng.integers(2, 15))
            r = int(rng.integers(1, m + 1))
            n_sets = int(rng.integers(3, 30))
            sets = [rng.choice(m, size=int(rng.integers(r, m + 1)), replace=False) for _ in range(n_sets)]
            family = SetFamily.of(sets, universe=range(m))
            picks = greedy_hitting_set(family)
            self.assertTrue(hits_all(family, picks))
            self.assertLessEqual(len(picks), math.ceil(m / family.min_size * math.log(n_sets)))


class DirectedPipelineGuaranteeTests(unittest.TestCase):
    def test_dst_cost_within_rounding_bound(self):
        for seed in range(100):
            n = 4 + seed % 9
            inst = gen_random('dst', n, 0.35, seed=seed)
            report = solve_dst(inst.graph, inst.terminals, EPS)
            self.assertTrue(set(inst.terminals) <= report.tree.members)
            opt = exact_optimum(inst.graph, 'dst', inst.params).best_value
            factor = math.sqrt(n) + 2 * (1 + EPS) * math.sqrt(n) * math.log(n)
            self.assertLessEqual(report.cost, factor * opt + TOL, f"seed {seed}")

    def test_bdrat_budget_and_trimming_ratio(self):
        for seed in range(100):
            inst = gen_random('bdrat', 4 + seed % 9, 0.35, seed=seed)
            B = inst.budget
            report = solve_bdrat(inst.graph, B, EPS)
            self.assertLessEqual(report.cost, (1 + EPS) * B * (1 + TOL), f"seed {seed}")
            light = max(inst.graph.cost) <= EPS * B / 2
            if report.diagnostics.get('trimmed') and light:
                self.assertGreaterEqual(report.diagnostics['ratio_out'],
                                        EPS * report.diagnostics['gamma_in'] / 4 * (1 - TOL))

    def test_qdrat_half_quota_and_guess_count(self):
        for seed in range(100):
            inst = gen_random('qdrat', 4 + seed % 9, 0.35, seed=seed)
            if exact_optimum(inst.graph, 'qdrat', inst.params).best_set is None:
                continue
            report = solve_qdrat(inst.graph, inst.quota, EPS)
            self.assertGreaterEqual(report.prize, inst.quota / 2 - 1e-9)
            reach = node_weighted_shortest_paths(inst.graph, 0)
            costs = [inst.graph.cost[v] for v in inst.graph.nodes() if reach.reachable(v)]
            positive = [c for c in costs if c > 0]
            if positive and report.guesses_tried:
                bound = math.log(sum(costs) / min(positive), 1 + EPS) + 2
                self.assertLessEqual(report.guesses_tried, bound + TOL)

    def test_quota_via_exact_budget_solver(self):
        for seed in range(50):
            inst = gen_random('qdrat', 4 + seed % 9, 0.35, seed=seed)
            exact = exact_optimum(inst.graph, 'qdrat', inst.params)
            if exact.best_set is None or inst.quota < 1:
                continue
            report = quota_via_budget(inst.graph, inst.quota, exact_budget_solver(), EPS)
            self.assertGreaterEqual(report.prize, inst.quota)
            self.assertLessEqual(report.cost, (1 + EPS) * exact.best_value + TOL)
            positive = [c for c in inst.graph.cost if c > 0]
            steps = math.ceil(math.log(inst.graph.total_cost() / min(positive), 1 + EPS)) + 1
            self.assertLessEqual(report.guesses_tried, steps)


class TrimmingGuaranteeTests(unittest.TestCase):
    def test_additive_trim_matches_window_and_ratio(self):
        rng = np.random.default_rng(31)
        checked = 0
        while checked < 50:
            n = int(rng.integers(8, 13))
            g = random_tree_graph(rng, n, directed=True, max_cost=2)
            reach = node_weighted_shortest_paths(g, 0)
            B = float(max(max(reach.dist), 4 * max(g.cost)))
            tree = build_arborescence(g, set(g.nodes()))
            if tree.cost <= (1 + EPS) * B:
                continue
            checked += 1
            low, high = EPS * B / 2, (1 + EPS) * B
            floor = EPS * (tree.prize_additive / tree.cost) / 4 * (1 - TOL)
            conformant = [s for s in enumerate_connected_subtrees(tree)
                          if 0 in s and low * (1 - TOL) <= g.total_cost(s) <= high * (1 + TOL)
                          and g.total_prize(s) / g.total_cost(s) >= floor]
            self.assertTrue(conformant, f"no rooted bundle in [{low}, {high}] reaches the ratio")
            trimmed = trim_additive(tree, g, B, EPS)
            self.assertGreaterEqual(trimmed.cost, low * (1 - TOL))
            self.assertLessEqual(trimmed.cost, high * (1 + TOL))
            self.assertGreaterEqual(trimmed.prize_additive / trimmed.cost, floor)
            self.assertIn(trimmed.members, conformant)

    def test_decomposition_counts(self):
        rng = np.random.default_rng(37)
        for _ in range(100):
            n = int(rng.integers(2, 15))
            g = random_tree_graph(rng, n, directed=False, max_cost=5)
            tree = build_arborescence(g, set(g.nodes()))
            m = float(rng.integers(1, 10))
            result = decompose_tree(tree, g, m)
            whole = math.floor(tree.cost / m)
            if whole >= 1:
                self.assertLessEqual(len(result.subtrees), 5 * whole)
            self.assertEqual(set().union(*(t.members for t in result.subtrees)), set(g.nodes()))
            for t in result.subtrees:
                self.assertLessEqual(t.cost, m + g.cost[t.root] + TOL)

    def test_submodular_trim_conditions(self):
        rng = np.random.default_rng(41)
        checked = 0
        while checked < 50:
            n = int(rng.integers(3, 11))
            g = random_tree_graph(rng, n, directed=False)
            oracle = random_coverage(rng, n)
            reach = node_weighted_shortest_paths(g, 0)
            B = float(max(max(reach.dist), 4 * max(g.cost)))
            tree = build_arborescence(g, set(g.nodes()))
            if tree.cost < EPS * B / 2:
                continue
            checked += 1
            p_tree = oracle.evaluate(tree.members)
            result = trim_submodular(tree, g, oracle, B, EPS)
            prize = oracle.evaluate(result.tree.members)
            if result.condition == 2:
                h = max(tree.cost / B, 1.0)
                self.assertLessEqual(result.tree.cost, B * (1 + TOL))
                self.assertGreaterEqual(prize, p_tree / (5 * h) * (1 - TOL))
            else:
                self.assertEqual(result.condition, 1)
                self.assertGreaterEqual(result.tree.cost, EPS * B / 2 * (1 - TOL))
                self.assertLessEqual(result.tree.cost, (1 + EPS) * B * (1 + TOL))
                gamma = p_tree / tree.cost
                self.assertGreaterEqual(prize / result.tree.cost, EPS ** 2 * gamma / 640 * (1 - TOL))


class TightCapacitySweepTests(unittest.TestCase):
    def test_random_trees_with_coverage(self):
        rng = np.random.default_rng(43)
        for _ in range(100):
            n = int(rng.integers(1, 11))
            g = random_tree_graph(rng, n, directed=False) if n > 1 else \
                NodeWeightedGraph.from_arcs([0], [0], [], directed=False)
            oracle = random_coverage(rng, n) if n > 1 else CoverageOracle([()], {})
            tree = build_arborescence(g, set(g.nodes()))
            x = construct_tight_capacities(tree, oracle)
            total = math.fsum(x[v] * oracle.singleton(v) for v in tree.members)
            self.assertAlmostEqual(total, oracle.evaluate(tree.members), delta=1e-9 * max(1.0, total))
            tight = tight_sets(tree.members, oracle, x)
            self.assertEqual(audit_tight_closure(tight), [])


if __name__ == '__main__':
    unittest.main()
