"""Unit tests for output files, run manifests and the worker pool."""

import json
import math
from pathlib import Path
import tempfile
import unittest

from fileio import (
    append_manifest,
    atomic_write_json,
    atomic_write_text,
    config_hash,
    package_versions,
)
from parallel import parallel_map, worker_context


def scaled(item: int) -> int:
    """Multiply an item by the factor installed as the worker context."""
    return item * worker_context()


class TestFiles(unittest.TestCase):
    """Test case for writing outputs."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.dir = Path(self.temp_dir.name)

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_atomic_write(self):
        """Files are replaced whole and no temporary files remain."""
        path = self.dir / 'out' / 'routes.txt'
        atomic_write_text(path, 'first\n')
        atomic_write_text(path, 'second\n')
        self.assertEqual(path.read_text(encoding='utf-8'), 'second\n')
        self.assertListEqual(
            [p.name for p in path.parent.iterdir()], ['routes.txt'],
        )
        atomic_write_json(self.dir / 'report.json', {'status': 'optimal'})
        self.assertEqual(
            json.loads((self.dir / 'report.json').read_text(encoding='utf-8')),
            {'status': 'optimal'},
        )

    def test_manifest_lines(self):
        """Each run appends one JSON line."""
        path = self.dir / 'manifest.jsonl'
        append_manifest(path, {'run': 1})
        append_manifest(path, {'run': 2})
        lines = path.read_text(encoding='utf-8').splitlines()
        runs = [json.loads(line)['run'] for line in lines]
        self.assertListEqual(runs, [1, 2])

    def test_config_hash(self):
        """The hash ignores key order and changes with any value."""
        first = config_hash({'preset': 'bkk', 'seed': 0})
        self.assertEqual(first, config_hash({'seed': 0, 'preset': 'bkk'}))
        self.assertNotEqual(first, config_hash({'preset': 'bkk', 'seed': 1}))
        self.assertEqual(len(first), 16)

    def test_package_versions(self):
        """Missing packages are recorded as None."""
        versions = package_versions(['numpy', 'no-such-package-here'])
        self.assertIsInstance(versions['numpy'], str)
        self.assertIsNone(versions['no-such-package-here'])


class TestParallelMap(unittest.TestCase):
    """Test case for spreading work over processes."""

    def test_results_keep_item_order(self):
        """Results come back in item order for any number of workers."""
        items = [5, 1, 4, 2, 3]
        expected = [120, 1, 24, 2, 6]
        self.assertListEqual(parallel_map(math.factorial, items), expected)
        self.assertListEqual(
            parallel_map(math.factorial, items, jobs=3), expected,
        )
        self.assertListEqual(parallel_map(math.factorial, [], jobs=3), [])

    def test_jobs_must_be_positive(self):
        """A worker count below one is refused."""
        with self.assertRaisesRegex(ValueError, 'positive integer'):
            parallel_map(math.factorial, [1], jobs=0)

    def test_context_reaches_every_item(self):
        """The shared context is visible to items in and out of process."""
        items = [1, 2, 3, 4]
        expected = [10, 20, 30, 40]
        self.assertListEqual(parallel_map(scaled, items, 1, 10), expected)
        self.assertListEqual(parallel_map(scaled, items, 2, 10), expected)
        with self.assertRaisesRegex(RuntimeError, 'no worker context'):
            worker_context()


if __name__ == '__main__':
    unittest.main()
