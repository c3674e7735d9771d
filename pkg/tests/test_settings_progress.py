import importlib
import os
import threading
import unittest
from unittest.mock import patch

import progress
import settings


class SettingsTests(unittest.TestCase):
    def setUp(self):
        self.addCleanup(importlib.reload, settings)

    def test_invalid_values_fall_back_to_defaults(self):
        env = {
            'STEINER_SUPPORT_CAP': 'many',
            'STEINER_GUESS_WORKERS': '0',
            'STEINER_DEFAULT_EPSILON': '-1',
            'STEINER_LOG_LEVEL': '  ',
        }
        with patch.dict(os.environ, env):
            with self.assertLogs('settings', level='WARNING') as logs:
                importlib.reload(settings)
        self.assertEqual(settings.SUPPORT_CAP, 20)
        self.assertEqual(settings.GUESS_WORKERS, 1)
        self.assertEqual(settings.DEFAULT_EPSILON, 0.5)
        self.assertEqual(settings.LOG_LEVEL, 'INFO')
        self.assertEqual(len(logs.records), 3)

    def test_valid_values_are_read(self):
        with patch.dict(os.environ, {'STEINER_ORACLE_MAX_NODES': '12', 'STEINER_DEFAULT_EPSILON': '0.25',
                                     'STEINER_LOG_LEVEL': 'debug'}):
            importlib.reload(settings)
        self.assertEqual(settings.ORACLE_MAX_NODES, 12)
        self.assertEqual(settings.DEFAULT_EPSILON, 0.25)
        self.assertEqual(settings.LOG_LEVEL, 'DEBUG')

    def test_float_rejects_infinity(self):
        with patch.dict(os.environ, {'X_EPS': 'inf'}):
            self.assertEqual(settings._safe_float_env('X_EPS', 0.5), 0.5)


class ProgressTests(unittest.TestCase):
    def setUp(self):
        progress.begin_bench(0)
        self.addCleanup(progress.begin_bench, 0)

    def test_lanes_track_guesses_and_separation(self):
        progress.note_guesses(3, 9)
        progress.note_separation(2, 5, [4, 1])
        self.assertEqual(progress.lanes(), {'guesses': '3/9', 'separation': 'round 2, 5 cuts, last [1, 4]'})
        progress.clear_lane('guesses')
        progress.clear_lane('nothing')
        self.assertEqual(list(progress.lanes()), ['separation'])

    def test_bench_summary_reports_infeasible_and_slowest(self):
        progress.begin_bench(3)
        progress.record_outcome(progress.SolveOutcome('b', 'bdrat', True, 'large-ratio', 4.0, 5.0, 30))
        progress.record_outcome(progress.SolveOutcome('a', 'dst', False, runtime_ms=2))
        self.assertEqual(progress.lanes()['bench'], '2/3')
        summary = progress.bench_summary()
        self.assertEqual(summary['queued'], 3)
        self.assertEqual(summary['finished'], 2)
        self.assertEqual(summary['infeasible'], ['a'])
        self.assertEqual(summary['branches'], ['large-ratio'])
        self.assertEqual((summary['slowest'], summary['slowest_ms']), ('b', 30))

    def test_begin_bench_forgets_earlier_outcomes(self):
        progress.record_outcome(progress.SolveOutcome('a', 'dst', True))
        progress.begin_bench(-1)
        summary = progress.bench_summary()
        self.assertEqual((summary['queued'], summary['finished'], summary['slowest']), (0, 0, None))

    def test_outcomes_from_many_threads(self):
        progress.begin_bench(16)
        threads = [threading.Thread(target=progress.record_outcome,
                                    args=(progress.SolveOutcome(f"i{k:02d}", 'qdrat', k % 4 != 0, runtime_ms=k),))
                   for k in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        summary = progress.bench_summary()
        self.assertEqual(summary['finished'], 16)
        self.assertEqual(summary['infeasible'], ['i00', 'i04', 'i08', 'i12'])
        self.assertEqual(summary['slowest'], 'i15')


if __name__ == '__main__':
    unittest.main()
