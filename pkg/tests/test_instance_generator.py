"""Unit tests for the seeded instance generator and instance summaries."""

import json
import unittest

import numpy as np

from configs import ConfigError, PRESETS
from instance import validate_instance
from instance_generator import (
    fit_weights,
    generate,
    parse_profile,
    ProfileSpec,
    summarize,
)
from pipeline import run
from solutions import SolutionStatus


# The features of the first real dataset: two plants shipping to 21 stores.
DATASET_ONE = {
    'name': 'dataset-1',
    'n_orders': 73,
    'n_origins': 2,
    'n_destinations': 21,
    'weight_min': 157,
    'weight_avg': 9150,
    'weight_max': 19788,
    'capacities': [20000, 20000],
    'max_drops': [4, 2],
    'max_oor': 400,
    'avg_window_span_days': 4.67,
    'seed': 11,
}


class TestProfiles(unittest.TestCase):
    """Test case for reading and checking profiles."""

    def test_parse_profile(self):
        """Profiles parse with defaults for everything optional."""
        profile = parse_profile(json.dumps(DATASET_ONE))
        self.assertEqual(profile.capacities, (20000.0, 20000.0))
        self.assertEqual(profile.max_drops, (4, 2))
        self.assertEqual(profile.speed, 50.0)
        self.assertEqual(profile.weight_unit, 'pound')
        self.assertEqual(ProfileSpec.from_dict(profile.to_dict()), profile)

    def test_single_drop_limit_is_shared(self):
        """One max_drops number applies to every truck size."""
        profile = ProfileSpec.from_dict({**DATASET_ONE, 'max_drops': 3})
        self.assertEqual(profile.max_drops, (3, 3))

    def test_profile_errors(self):
        """Profiles that cannot be generated are refused."""
        cases = [
            ({'n_orders': 10}, 'every location is used'),
            ({'box': 1000}, 'the box is too large'),
            ({'weight_unit': 'lb'}, 'weight unit must be one of'),
            ({'weight_max': 25000}, 'would not fit any truck'),
            ({'weight_avg': 100}, 'within'),
            ({'max_drops': [4]}, 'one max_drops value per truck'),
            ({'colour': 'red'}, 'unknown key'),
        ]
        for change, message in cases:
            with self.assertRaisesRegex(ConfigError, message):
                ProfileSpec.from_dict({**DATASET_ONE, **change})
        incomplete = dict(DATASET_ONE)
        del incomplete['n_orders']
        with self.assertRaisesRegex(ConfigError, "missing 'n_orders'"):
            ProfileSpec.from_dict(incomplete)
        with self.assertRaisesRegex(ConfigError, 'line 1'):
            parse_profile('{"n_orders": }')


class TestFitWeights(unittest.TestCase):
    """Test case for drawing weights with a given range and mean."""

    def test_range_and_mean(self):
        """The extremes are pinned and the mean is matched."""
        weights = fit_weights(np.random.default_rng(1), 50, 1.0, 10.0, 100.0)
        self.assertEqual(len(weights), 50)
        self.assertEqual(weights.min(), 1.0)
        self.assertEqual(weights.max(), 100.0)
        self.assertAlmostEqual(float(weights.mean()), 10.0, places=5)

    def test_degenerate_cases(self):
        """A single order gets the average; equal bounds give equal weights."""
        rng = np.random.default_rng(1)
        single = fit_weights(rng, 1, 1.0, 5.0, 9.0)
        self.assertListEqual(single.tolist(), [5.0])
        flat = fit_weights(rng, 3, 4.0, 4.0, 4.0)
        self.assertListEqual(flat.tolist(), [4.0] * 3)


class TestGenerate(unittest.TestCase):
    """Test case for generated instances."""

    @classmethod
    def setUpClass(cls):
        cls.profile = ProfileSpec.from_dict(DATASET_ONE)
        cls.instance = generate(cls.profile)

    def test_features_match_profile(self):
        """Counts are exact and weights and spans follow the profile."""
        summary = summarize(self.instance)
        self.assertEqual(summary.n_orders, 73)
        self.assertEqual(summary.n_origins, 2)
        self.assertEqual(summary.n_destinations, 21)
        self.assertEqual(summary.n_modes, 2)
        self.assertEqual(summary.min_weight, 157000)
        self.assertEqual(summary.max_weight, 19788000)
        self.assertAlmostEqual(
            summary.avg_weight / 1000, 9150, delta=9150 * 0.15,
        )
        self.assertEqual(summary.max_drops, 4)
        self.assertEqual(summary.max_oor, 400000)
        self.assertEqual(round(summary.avg_window_span_days, 2), 4.67)
        rows = dict(summary.rows())
        self.assertEqual(rows['No. of Orders'], 73)
        self.assertEqual(rows['Largest Truck Capacity'], 20000.0)

    def test_generated_instance_is_valid(self):
        """Generated instances pass the same checks as instance files."""
        self.assertListEqual(validate_instance(self.instance), [])

    def test_same_seed_same_instance(self):
        """Generation depends only on the profile and its seed."""
        self.assertEqual(generate(self.profile).dumps(), self.instance.dumps())
        other = ProfileSpec.from_dict({**DATASET_ONE, 'seed': 12})
        self.assertNotEqual(generate(other).dumps(), self.instance.dumps())

    def test_generated_instance_solves(self):
        """A BFD solve of a generated instance covers every order."""
        solution, _ = run(self.instance, PRESETS['bfd'])
        self.assertIs(solution.status, SolutionStatus.OPTIMAL)
        self.assertEqual(len(solution.covered_orders), 73)


if __name__ == '__main__':
    unittest.main()
