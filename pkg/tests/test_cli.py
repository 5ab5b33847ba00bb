"""Unit tests for the command-line entry point."""

from contextlib import redirect_stderr, redirect_stdout
import io
import json
from pathlib import Path
import sys
import tempfile
import unittest

from cli import build_parser, ExitStatus, main
from tests.builders import instance_document


SMALL_PROFILE = {
    'name': 'small',
    'n_orders': 6,
    'n_origins': 1,
    'n_destinations': 3,
    'weight_min': 100,
    'weight_avg': 500,
    'weight_max': 900,
    'capacities': [1000],
    'max_drops': 2,
    'avg_window_span_days': 2,
    'box': 300,
    'seed': 5,
}


class TestCli(unittest.TestCase):
    """Test case for the solve, validate and gen commands."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.dir = Path(self.temp_dir.name)
        self.instance_path = self.write('instance.json', instance_document())

    def tearDown(self):
        self.temp_dir.cleanup()

    def write(self, name, data) -> str:
        path = self.dir / name
        text = data if isinstance(data, str) else json.dumps(data)
        path.write_text(text, encoding='utf-8')
        return str(path)

    def read(self, path: Path) -> str:
        return path.read_text(encoding='utf-8')

    def call(self, *argv: str) -> tuple[int, str, str]:
        stdout, stderr = io.StringIO(), io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(stderr):
            status = main([*argv, '--jobs', '1'])
        return status, stdout.getvalue(), stderr.getvalue()

    def test_solve(self):
        """Solving writes the solution, table, report and manifest files."""
        out_dir = self.dir / 'out'
        status, stdout, _ = self.call(
            'solve', self.instance_path, '--preset', 'exact',
            '--out-dir', str(out_dir),
        )
        self.assertEqual(status, ExitStatus.SUCCESS)
        self.assertIn('Total cost: 300.000 (optimal)', stdout)
        solution = json.loads(self.read(out_dir / 'solution.json'))
        self.assertEqual(solution['total_cost'], 300.0)
        self.assertEqual(solution['routes'][0]['stops'], ['O', 'A', 'B'])
        self.assertEqual(self.read(out_dir / 'routes.txt'), stdout)
        report = json.loads(self.read(out_dir / 'report.json'))
        self.assertEqual(report['config'], 'exact')
        manifest = self.read(out_dir / 'manifest.jsonl').splitlines()
        self.assertEqual(len(manifest), 1)
        record = json.loads(manifest[0])
        self.assertEqual(record['command'], 'solve')
        self.assertEqual(len(record['config_hash']), 16)

    def test_solve_structured(self):
        """Structured output is one JSON document with solution and report."""
        status, stdout, _ = self.call(
            'solve', self.instance_path, '--preset', 'bfd',
            '--out-dir', str(self.dir), '--output-format', 'structured',
        )
        self.assertEqual(status, ExitStatus.SUCCESS)
        document = json.loads(stdout)
        self.assertEqual(document['solution']['status'], 'optimal')
        self.assertEqual(document['report']['config'], 'bfd')

    def test_solve_infeasible(self):
        """An order no truck can carry makes the solve infeasible."""
        document = instance_document()
        document['modes'][0]['capacity'] = 15
        path = self.write('heavy.json', document)
        status, stdout, _ = self.call(
            'solve', path, '--out-dir', str(self.dir),
        )
        self.assertEqual(status, ExitStatus.INFEASIBLE)
        self.assertIn('Orders no route can carry: o2', stdout)

    def test_solve_time_limited(self):
        """A time-limited selection exits with the timeout code."""
        script = (
            'import json, sys\n'
            'problem = json.load(open(sys.argv[1]))\n'
            'route = next(\n'
            '    r for r in problem["routes"] if len(r["orders"]) == 2\n'
            ')\n'
            'with open(sys.argv[2], "w") as out:\n'
            '    out.write("status: time_limited\\nbound: 250\\n")\n'
            '    out.write(route["id"] + "\\n")\n'
        )
        config = self.write('bridge.json', {
            'preset': 'exact',
            'sp': {'solver': {'command': [sys.executable, '-c', script]}},
        })
        status, stdout, _ = self.call(
            'solve', self.instance_path, '--config', config,
            '--out-dir', str(self.dir),
        )
        self.assertEqual(status, ExitStatus.TIMEOUT)
        self.assertIn('Total cost: 300.000 (feasible_with_bound)', stdout)
        self.assertIn('Lower bound: 250.000', stdout)

    def test_invalid_inputs(self):
        """Broken instance, config and missing files are input errors."""
        broken = self.write('broken.json', '{\n')
        status, _, stderr = self.call(
            'solve', broken, '--out-dir', str(self.dir),
        )
        self.assertEqual(status, ExitStatus.INVALID_INPUT)
        self.assertIn('line', stderr)

        config = self.write('config.json', {'preset': 'fast'})
        status, _, stderr = self.call(
            'solve', self.instance_path, '--config', config,
            '--out-dir', str(self.dir),
        )
        self.assertEqual(status, ExitStatus.INVALID_INPUT)
        self.assertIn('unknown preset', stderr)

        status, _, _ = self.call('validate', str(self.dir / 'missing.json'))
        self.assertEqual(status, ExitStatus.INVALID_INPUT)

    def test_validate(self):
        """Routes are checked against the instance."""
        status, stdout, _ = self.call('validate', self.instance_path)
        self.assertEqual(status, ExitStatus.SUCCESS)
        self.assertIn(': ok (', stdout)

        route = self.write('route.json', {
            'mode': 'M', 'stops': ['O', 'A', 'B'], 'orders': ['o1', 'o2'],
        })
        status, stdout, _ = self.call(
            'validate', self.instance_path, '--route', route,
        )
        self.assertEqual(status, ExitStatus.SUCCESS)
        self.assertEqual(stdout, 'feasible\n')

        document = instance_document()
        document['modes'][0]['capacity'] = 25
        tight = self.write('tight.json', document)
        status, stdout, _ = self.call(
            'validate', tight, '--route', route,
            '--output-format', 'structured',
        )
        self.assertEqual(status, ExitStatus.INFEASIBLE)
        self.assertDictEqual(
            json.loads(stdout), {'feasible': False, 'violation': 'capacity'},
        )

        unknown = self.write('unknown.json', {
            'mode': 'X', 'stops': ['O', 'A'], 'orders': ['o1'],
        })
        status, _, stderr = self.call(
            'validate', self.instance_path, '--route', unknown,
        )
        self.assertEqual(status, ExitStatus.INVALID_INPUT)
        self.assertIn('route', stderr)

    def test_gen_then_solve(self):
        """Generated instances can be solved straight away."""
        profile = self.write('profile.json', SMALL_PROFILE)
        out = self.dir / 'generated' / 'instance.json'
        status, stdout, _ = self.call('gen', profile, str(out), '--seed', '9')
        self.assertEqual(status, ExitStatus.SUCCESS)
        self.assertTrue(stdout.startswith('wrote '))
        record = json.loads(
            self.read(out.parent / 'manifest.jsonl').splitlines()[0]
        )
        self.assertEqual(record['seed'], 9)
        self.assertIn('approximation', record['notes'][0])
        again = self.dir / 'again.json'
        self.call('gen', profile, str(again), '--seed', '9')
        self.assertEqual(again.read_bytes(), out.read_bytes())

        status, stdout, _ = self.call(
            'solve', str(out), '--preset', 'bkk10',
            '--out-dir', str(out.parent),
        )
        self.assertEqual(status, ExitStatus.SUCCESS)
        self.assertIn('(optimal)', stdout)

    def test_parser(self):
        """Flags are shared by every command and bad values stop parsing."""
        args = build_parser().parse_args(
            [
                'solve', 'x.json', '--time-limit', '5', '--direction', 'MP1D',
                '-vv',
            ],
        )
        self.assertEqual(args.time_limit, 5.0)
        self.assertEqual(args.direction, 'MP1D')
        self.assertEqual(args.verbose, 2)
        with redirect_stderr(io.StringIO()), self.assertRaises(SystemExit):
            build_parser().parse_args(['solve', 'x.json', '--preset', 'fast'])
        with redirect_stderr(io.StringIO()), self.assertRaises(SystemExit):
            main(['solve', 'x.json', '--jobs', '0'])


if __name__ == '__main__':
    unittest.main()
