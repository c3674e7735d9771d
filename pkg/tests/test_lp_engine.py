import unittest
from unittest.mock import patch

import numpy as np

from errors import InputError, NumericalError
from lp_engine import (LpModel, LpStatus, Relation, Sense, add_cut, make_row, row_violations, solve_lp)
from oracles import lp_vertex_optimum


def random_model(rng, max_vars, max_rows):
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    rows = []
    for i in range(m):
        coeffs = rng.integers(-3, 4, size=n).astype(float)
        relation = [Relation.LE, Relation.EQ, Relation.GE][int(rng.integers(0, 3))]
        rows.append(make_row(coeffs, relation, float(rng.integers(-2, 5)), n, f"r{i}"))
    upper = rng.integers(1, 3, size=n).astype(float)
    sense = Sense.MAXIMIZE if rng.random() < 0.5 else Sense.MINIMIZE
    return LpModel(num_vars=n, objective=rng.integers(-3, 4, size=n).astype(float), sense=sense,
                   rows=tuple(rows), upper=upper)


class SimplexBasicsTests(unittest.TestCase):
    def test_small_maximization(self):
        model = LpModel(num_vars=2, objective=np.array([1.0, 1.0]), sense=Sense.MAXIMIZE,
                        rows=(make_row([1, 2], Relation.LE, 2, 2),))
        solution = solve_lp(model)
        self.assertTrue(solution.is_optimal)
        self.assertAlmostEqual(solution.objective_value, 1.5)
        np.testing.assert_allclose(solution.values, [1.0, 0.5], atol=1e-9)

    def test_equality_and_lower_bounds(self):
        model = LpModel(num_vars=3, objective=np.array([1.0, 2.0, 3.0]), sense=Sense.MINIMIZE,
                        rows=(make_row({0: 1, 1: 1, 2: 1}, Relation.EQ, 2, 3),),
                        lower=np.array([0.0, 0.0, 0.5]))
        solution = solve_lp(model)
        self.assertTrue(solution.is_optimal)
        self.assertAlmostEqual(solution.objective_value, 1 * 1 + 2 * 0.5 + 3 * 0.5)

    def test_infeasible_status(self):
        model = LpModel(num_vars=1, objective=np.array([1.0]), sense=Sense.MINIMIZE,
                        rows=(make_row([1], Relation.GE, 2, 1),))
        self.assertIs(solve_lp(model).status, LpStatus.INFEASIBLE)

    def test_no_rows(self):
        model = LpModel(num_vars=2, objective=np.array([-1.0, 2.0]), sense=Sense.MAXIMIZE)
        solution = solve_lp(model)
        self.assertAlmostEqual(solution.objective_value, 2.0)

    def test_iteration_cap_raises(self):
        model = LpModel(num_vars=2, objective=np.array([1.0, 1.0]), sense=Sense.MAXIMIZE,
                        rows=(make_row([1, 1], Relation.GE, 1, 2),))
        with patch('settings.LP_ITERATION_FACTOR', 0):
            with self.assertRaises(NumericalError):
                solve_lp(model)


class RowToolsTests(unittest.TestCase):
    def test_dense_row_length_checked(self):
        with self.assertRaises(InputError):
            make_row([1, 2, 3], Relation.LE, 1, 2)

    def test_add_cut_keeps_existing_rows(self):
        model = LpModel(num_vars=2, objective=np.zeros(2), sense=Sense.MINIMIZE,
                        rows=(make_row([1, 0], Relation.LE, 1, 2, 'a'),))
        cut = add_cut(model, {1: 1.0}, Relation.LE, 0.25, 'b')
        self.assertEqual(model.num_rows, 1)
        self.assertEqual([r.name for r in cut.rows], ['a', 'b'])
        self.assertAlmostEqual(solve_lp(replace_objective(cut, [0, 1])).objective_value, 0.25)

    def test_row_violations_lists_rows_and_bounds(self):
        model = LpModel(num_vars=2, objective=np.zeros(2), sense=Sense.MINIMIZE,
                        rows=(make_row([1, 1], Relation.LE, 1, 2, 'sum'),
                              make_row([1, -1], Relation.EQ, 0, 2, 'same')))
        self.assertEqual(row_violations(model, [0.5, 0.5]), [])
        names = [name for _, name, _ in row_violations(model, [1.0, 0.5])]
        self.assertEqual(names, ['sum', 'same'])
        bounds = row_violations(model, [-0.5, -0.5])
        self.assertEqual([i for i, _, _ in bounds], [-1, -1])

    def test_bad_bounds_rejected(self):
        with self.assertRaises(InputError):
            LpModel(num_vars=1, objective=np.zeros(1), sense=Sense.MINIMIZE,
                    lower=np.array([2.0]), upper=np.array([1.0]))


def replace_objective(model, objective):
    from dataclasses import replace
    return replace(model, objective=np.asarray(objective, dtype=float), sense=Sense.MAXIMIZE)


class SimplexAgainstVertexEnumerationTests(unittest.TestCase):
    def check(self, model):
        solution = solve_lp(model)
        status, _, value = lp_vertex_optimum(model)
        self.assertIs(solution.status, status)
        if status is LpStatus.OPTIMAL:
            self.assertLessEqual(abs(solution.objective_value - value), 1e-6)
            self.assertEqual(row_violations(model, solution.values), [])

    def test_thousand_small_lps(self):
        rng = np.random.default_rng(20240607)
        for _ in range(1000):
            self.check(random_model(rng, max_vars=4, max_rows=3))

    def test_wider_lps(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            self.check(random_model(rng, max_vars=6, max_rows=4))


if __name__ == '__main__':
    unittest.main()
