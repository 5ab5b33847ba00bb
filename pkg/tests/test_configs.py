"""Unit tests for solver configurations and presets."""

import json
import unittest

from configs import (
    ConfigError,
    ConsolidationConfig,
    ConsolidationMethod,
    DEFAULT_PRESET,
    DirectionChoice,
    ExtensionConfig,
    ExtensionStrategy,
    GeneratorConfig,
    load_config,
    parse_config,
    PRESETS,
    SPConfig,
    with_overrides,
)


class TestPresets(unittest.TestCase):
    """Test case for the named configurations."""

    def test_presets(self):
        """Presets pair a consolidation method with extension strategies."""
        self.assertEqual(DEFAULT_PRESET, 'bkk')
        exact = PRESETS['exact'].generator
        self.assertEqual(
            exact.consolidation.methods, (ConsolidationMethod.EXACT,),
        )
        self.assertTrue(exact.extension.is_exact)
        self.assertEqual(PRESETS['bfd'].generator.extension.strategies, ())
        bkk10 = PRESETS['bkk10'].generator.extension
        self.assertEqual(
            bkk10.strategies, (ExtensionStrategy.KNN, ExtensionStrategy.KCORN),
        )
        self.assertEqual((bkk10.knn_k, bkk10.kcorn_k), (10, 10))
        self.assertEqual(PRESETS['bkk'].generator.extension.knn_k, 15)

    def test_neighbor_presets_nest(self):
        """bkk and bkk10 consolidate alike and cover what bfd packs."""
        bfd = PRESETS['bfd'].generator.consolidation
        bkk10 = PRESETS['bkk10'].generator.consolidation
        self.assertEqual(PRESETS['bkk'].generator.consolidation, bkk10)
        self.assertEqual(bfd.methods, (ConsolidationMethod.BFD,))
        self.assertIsNone(bfd.threshold)
        self.assertLessEqual(set(bfd.methods), set(bkk10.methods))
        self.assertIn(ConsolidationMethod.SINGLETONS, bkk10.methods)
        self.assertIn(1.0, bkk10.partial_container)
        self.assertEqual(bkk10.threshold, 8)


class TestLoadConfig(unittest.TestCase):
    """Test case for resolving configuration files."""

    def test_blocks_override_the_preset(self):
        """Explicit fields replace the preset's, the rest are inherited."""
        config = load_config({
            'preset': 'bkk10',
            'extension': {'knn_k': 4},
            'sp': {'time_limit': 30, 'per_mode_caps': {'M2': 1, 'M1': 3}},
            'seed': 7,
            'direction': 'both',
        })
        extension = config.generator.extension
        self.assertEqual(extension.knn_k, 4)
        self.assertEqual(extension.kcorn_k, 10)
        self.assertEqual(config.generator.seed, 7)
        self.assertIs(config.generator.direction, DirectionChoice.BOTH)
        self.assertEqual(config.sp.time_limit, 30.0)
        self.assertEqual(config.sp.per_mode_caps, (('M1', 3), ('M2', 1)))
        self.assertEqual(config.preset, 'bkk10')

    def test_empty_config_is_the_default_preset(self):
        """An empty object resolves to the default preset."""
        config = load_config({})
        self.assertEqual(config.preset, DEFAULT_PRESET)
        self.assertEqual(config.generator, PRESETS[DEFAULT_PRESET].generator)

    def test_round_trip(self):
        """A configuration's own object resolves back to it."""
        config = load_config({'preset': 'exact', 'sp': {'solver': 'pulp'}})
        self.assertEqual(load_config(config.to_dict()), config)

    def test_errors(self):
        """Unknown names and values are reported."""
        cases = [
            ({'preset': 'fast'}, 'unknown preset'),
            ({'colour': 'red'}, 'unknown key.*colour'),
            ({'extension': {'k': 3}}, 'unknown key.*in extension'),
            ({'consolidation': {'methods': ['bestfit']}},
             'methods must be chosen from'),
            ({'consolidation': {'methods': ['singletons']}},
             'never used by itself'),
            ({'consolidation': {'partial_container': [1.5]}}, r'in \(0, 1\]'),
            ({'direction': 'sideways'}, 'unknown direction'),
            ({'sp': {'solver': 'gurobi'}}, 'sp solver must be'),
            ({'sp': {'time_limit': -1}}, 'cannot be negative'),
        ]
        for data, message in cases:
            with self.assertRaisesRegex(ConfigError, message):
                load_config(data)
        with self.assertRaisesRegex(ConfigError, 'line 2'):
            parse_config('{\n  "preset": ,\n}')

    def test_parse_config(self):
        """Configuration files are JSON objects."""
        config = parse_config(json.dumps({'preset': 'bfd'}))
        self.assertEqual(config.generator, PRESETS['bfd'].generator)
        with self.assertRaisesRegex(ConfigError, 'must be an object'):
            parse_config('[]')


class TestOverrides(unittest.TestCase):
    """Test case for command-line overrides."""

    def test_with_overrides(self):
        """Only the given flags change the configuration."""
        base = PRESETS['bkk']
        config = with_overrides(base, time_limit=5.0, seed=3, direction='MP1D')
        self.assertEqual(config.sp.time_limit, 5.0)
        self.assertEqual(config.generator.seed, 3)
        self.assertIs(
            config.generator.direction,
            DirectionChoice.MULTI_PICKUP_ONE_DROP,
        )
        self.assertEqual(config.generator.extension, base.generator.extension)
        self.assertEqual(with_overrides(base), base)


class TestBlocks(unittest.TestCase):
    """Test case for the individual configuration blocks."""

    def test_sp_solver_forms(self):
        """The SP solver is builtin, pulp or an external command."""
        command = SPConfig.from_dict(
            {'solver': {'command': ['solve-sp', '--fast']}},
        )
        self.assertEqual(command.solver, ('solve-sp', '--fast'))
        self.assertEqual(
            command.to_dict()['solver'], {'command': ['solve-sp', '--fast']},
        )
        with self.assertRaisesRegex(ConfigError, 'sp solver must be'):
            SPConfig(solver=())

    def test_consolidation_accepts_a_single_method(self):
        """A method name alone is read as a one-element list."""
        config = ConsolidationConfig.from_dict({'methods': 'ffd'})
        self.assertEqual(config.methods, (ConsolidationMethod.FFD,))
        self.assertEqual(
            ConsolidationConfig.from_dict(config.to_dict()), config,
        )

    def test_generator_checks(self):
        """Neighbor counts and time budgets must be positive."""
        with self.assertRaisesRegex(ConfigError, 'must be positive'):
            ExtensionConfig(knn_k=0)
        with self.assertRaisesRegex(ConfigError, 'must be positive'):
            GeneratorConfig(generation_time_budget=0)


if __name__ == '__main__':
    unittest.main()
