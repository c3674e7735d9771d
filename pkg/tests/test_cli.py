import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

from instance_io import read_bench_csv
from steiner import build_parser, run_command

SCRIPT = Path(__file__).resolve().parents[1] / 'steiner.py'

OVER_BUDGET_ROOT = """\
steiner-instance v1
problem bdrat
directed true
nodes 2
v r 5 0
v a 1 3
a r a
root r
budget 1
"""


class CommandTests(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.addCleanup(self.temp_dir.cleanup)
        self.dir = Path(self.temp_dir.name)

    def path(self, name):
        return str(self.dir / name)

    def test_gen_solve_verify(self):
        self.assertEqual(run_command(['gen', 'bdrat', '--n', '5', '--seed', '1', '--out', self.path('a.inst')]), 0)
        self.assertEqual(run_command(['solve', self.path('a.inst'), '--out', self.path('a.sol')]), 0)
        self.assertTrue(Path(self.path('a.sol')).read_text(encoding='utf-8').startswith('solution v1\nstatus ok'))
        self.assertEqual(run_command(['verify', self.path('a.inst'), self.path('a.sol')]), 0)

    def test_tampered_solution_fails_verification(self):
        run_command(['gen', 'dst', '--n', '5', '--seed', '3', '--out', self.path('d.inst')])
        run_command(['solve', self.path('d.inst'), '--out', self.path('d.sol')])
        text = Path(self.path('d.sol')).read_text(encoding='utf-8')
        lines = [line for line in text.splitlines() if not line.startswith('cost')] + ['cost 12345']
        Path(self.path('d.sol')).write_text('\n'.join(lines) + '\n', encoding='utf-8')
        self.assertEqual(run_command(['verify', self.path('d.inst'), self.path('d.sol')]), 4)

    def test_solution_with_node_removed_fails_verification(self):
        run_command(['gen', 'dst', '--n', '6', '--seed', '1', '--out', self.path('d.inst')])
        self.assertEqual(run_command(['solve', self.path('d.inst'), '--out', self.path('d.sol')]), 0)
        lines = Path(self.path('d.sol')).read_text(encoding='utf-8').splitlines()
        dropped = next(i for i, line in enumerate(lines) if line.startswith('node ') and line != 'node 0')
        del lines[dropped]
        Path(self.path('d.sol')).write_text('\n'.join(lines) + '\n', encoding='utf-8')
        self.assertEqual(run_command(['verify', self.path('d.inst'), self.path('d.sol')]), 4)

    def test_false_infeasible_claim_fails_verification(self):
        for kind in ('dst', 'bdrat', 'qdrat', 'qurst'):
            run_command(['gen', kind, '--n', '6', '--seed', '1', '--out', self.path(f"{kind}.inst")])
            Path(self.path(f"{kind}.sol")).write_text('solution v1\nstatus infeasible\n', encoding='utf-8')
            self.assertEqual(run_command(['verify', self.path(f"{kind}.inst"), self.path(f"{kind}.sol")]), 4, kind)

    def test_infeasible_instance_exits_2(self):
        Path(self.path('bad.inst')).write_text(OVER_BUDGET_ROOT, encoding='utf-8')
        self.assertEqual(run_command(['solve', self.path('bad.inst'), '--out', self.path('bad.sol')]), 2)
        self.assertIn('status infeasible', Path(self.path('bad.sol')).read_text(encoding='utf-8'))
        self.assertEqual(run_command(['verify', self.path('bad.inst'), self.path('bad.sol')]), 0)
        self.assertEqual(run_command(['oracle', self.path('bad.inst')]), 2)

    def test_usage_and_input_errors_exit_1(self):
        self.assertEqual(run_command([]), 1)
        self.assertEqual(run_command(['gen', 'bdrat']), 1)
        self.assertEqual(run_command(['gen', 'bdrat', '--n', '0']), 1)
        self.assertEqual(run_command(['solve', self.path('missing.inst')]), 1)
        Path(self.path('broken.inst')).write_text('steiner-instance v1\nproblem nope\n', encoding='utf-8')
        self.assertEqual(run_command(['solve', self.path('broken.inst')]), 1)

    def test_oracle_solution_verifies(self):
        run_command(['gen', 'qdrat', '--n', '6', '--seed', '2', '--out', self.path('q.inst')])
        self.assertEqual(run_command(['oracle', self.path('q.inst'), '--out', self.path('q.sol')]), 0)
        self.assertEqual(run_command(['verify', self.path('q.inst'), self.path('q.sol')]), 0)

    def test_lp_dump(self):
        run_command(['gen', 'burst', '--n', '4', '--prize-kind', 'coverage', '--out', self.path('b.inst')])
        self.assertEqual(run_command(['lp-dump', self.path('b.inst'), '--out', self.path('b.lp')]), 0)
        text = Path(self.path('b.lp')).read_text(encoding='utf-8')
        self.assertIn('Maximize', text)
        self.assertIn('budget:', text)

    def test_bench_with_oracle(self):
        bench = self.dir / 'bench'
        bench.mkdir()
        kinds = ('dst', 'bdrat', 'qdrat', 'burst', 'qurst')
        for seed in range(20):
            kind = kinds[seed % 5]
            extra = ['--prize-kind', 'coverage'] if kind in ('burst', 'qurst') and seed % 2 else []
            self.assertEqual(run_command(['gen', kind, '--n', str(4 + seed % 5), '--seed', str(seed), *extra,
                                          '--out', str(bench / f"i{seed:02d}.inst")]), 0)
        code = run_command(['bench', str(bench), '--csv', self.path('bench.csv'), '--with-oracle'])
        self.assertEqual(code, 0)
        rows = read_bench_csv(Path(self.path('bench.csv')))
        self.assertEqual([r['instance'] for r in rows], [f"i{seed:02d}" for seed in range(20)])
        for row in rows:
            if row['algorithm'] in ('solve_bdrat', 'solve_burst'):
                self.assertGreaterEqual(float(row['lp_bound']), float(row['opt_prize']) - 1e-6, row['instance'])
            elif row['opt_cost']:
                self.assertLessEqual(float(row['lp_bound']), float(row['opt_cost']) + 1e-6, row['instance'])

    def test_bench_needs_instances(self):
        self.assertEqual(run_command(['bench', self.path('nowhere'), '--csv', self.path('x.csv')]), 1)
        Path(self.path('empty')).mkdir()
        self.assertEqual(run_command(['bench', self.path('empty'), '--csv', self.path('x.csv')]), 1)

    def test_parser_lists_every_subcommand(self):
        help_text = build_parser().format_help()
        for name in ('solve', 'oracle', 'verify', 'gen', 'bench', 'lp-dump'):
            self.assertIn(name, help_text)


class ScriptTests(unittest.TestCase):
    def run_script(self, *args, cwd):
        return subprocess.run([sys.executable, str(SCRIPT), *args], cwd=cwd, capture_output=True, text=True,
                              timeout=300)

    def test_gen_to_stdout(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            result = self.run_script('gen', 'dst', '--n', '4', '--seed', '9', cwd=temp_dir)
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertTrue(result.stdout.startswith('steiner-instance v1\n# seed 9\n'))

    def test_usage_error_exit_code(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            result = self.run_script('frobnicate', cwd=temp_dir)
        self.assertEqual(result.returncode, 1)
        self.assertIn('usage', result.stderr)


if __name__ == '__main__':
    unittest.main()
