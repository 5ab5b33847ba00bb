"""Unit tests for instances and the objects they are made of."""

import json
import unittest
import warnings

import numpy as np

from geometry import (
    coordinate_distances,
    CoordinateSystem,
    DistanceMatrix,
    nearest_first,
    NonMetricDistanceWarning,
    pairwise_oor,
    route_distances,
    UnknownLocationError,
)
from instance import (
    Instance,
    InvalidInstanceError,
    load_instance,
    validate_instance,
)
from modes import RateTable, TransportMode
from orders import Window
from overlay import ConstraintOverlay, HoursOfService
from tests.builders import (
    instance_document, location, make_instance, mode, order,
)


class TestWindowsAndModes(unittest.TestCase):
    """Test case for time windows, rate tables and transport modes."""

    def test_window(self):
        """Windows intersect, reflect through the epoch and report spans."""
        window = Window(10, 50)
        self.assertEqual(window.span, 40)
        self.assertEqual(window.intersect(Window(30, 90)), Window(30, 50))
        self.assertFalse(window.intersect(Window(60, 90)).is_ordered())
        self.assertEqual(window.reflected(), Window(-50, -10))
        self.assertEqual(window.reflected().reflected(), window)

    def test_rate_table(self):
        """Lane rates win over the default and can be transposed."""
        table = RateTable.from_value({
            'default': 2,
            'lanes': [{'from': 'east', 'to': 'west', 'rate': 3.5}],
        })
        self.assertEqual(table.rate({'east'}, {'west'}), 3500)
        self.assertEqual(table.rate({'west'}, {'east'}), 2000)
        self.assertEqual(table.transposed().rate({'west'}, {'east'}), 3500)
        self.assertEqual(RateTable.from_value(1.25), RateTable(1250))

    def test_mirrored_mode(self):
        """Mirroring a mode swaps its pickup-side and drop-side limits."""
        original = mode(
            'M', max_drops=4, max_pickups=2,
            max_first_last_drop_distance=100,
            max_first_last_pickup_distance=50,
        )
        mirrored = original.mirrored()
        self.assertEqual(mirrored.max_drops, 2)
        self.assertEqual(mirrored.max_pickups, 4)
        self.assertEqual(mirrored.max_first_last_drop_distance, 50000)
        self.assertEqual(mirrored.max_first_last_pickup_distance, 100000)
        self.assertEqual(mirrored.mirrored(), original)

    def test_mode_from_dict(self):
        """Modes parse decimal quantities into milli-units with defaults."""
        parsed = TransportMode.from_dict({
            'id': 'T', 'capacity': 20000, 'average_speed': 50, 'cost_rate': 2,
            'max_oor_distance': 400, 'fleet_cap': 3,
        })
        self.assertEqual(parsed.capacity, 20_000_000)
        self.assertEqual(parsed.max_drops, 1)
        self.assertEqual(parsed.max_oor_distance, 400_000)
        self.assertIsNone(parsed.max_total_distance)
        self.assertEqual(parsed.fleet_cap, 3)
        self.assertIsNone(parsed.serviceable_regions)

    def test_hours_of_service_defaults(self):
        """Missing HOS fields fall back on the 11/14/10 hour rules."""
        hos = HoursOfService.from_dict({'max_drive_hours': 10})
        self.assertEqual(hos.max_drive_minutes, 600)
        self.assertEqual(hos.max_duty_minutes, 840)
        self.assertEqual(hos.min_rest_minutes, 600)

    def test_incompatible_tags(self):
        """Incompatibility is checked across every pair of tags."""
        overlay = ConstraintOverlay.from_dict({
            'order_incompatibilities': [['food', 'chem']],
        })
        self.assertTrue(overlay.are_incompatible({'chem'}, {'dry', 'food'}))
        self.assertFalse(overlay.are_incompatible({'food'}, {'food'}))


class TestGeometry(unittest.TestCase):
    """Test case for distance tables and out-of-route distances."""

    def test_distance_matrix_checks(self):
        """Malformed distance tables are rejected."""
        with self.assertRaisesRegex(ValueError, 'must be 2x2'):
            DistanceMatrix(('a', 'b'), np.zeros((2, 3), dtype=np.int64))
        with self.assertRaisesRegex(ValueError, 'negative'):
            DistanceMatrix.from_rows(['a', 'b'], [[0, -1], [1, 0]])
        with self.assertRaisesRegex(ValueError, 'itself'):
            DistanceMatrix.from_rows(['a', 'b'], [[1, 1], [1, 0]])
        with self.assertRaisesRegex(ValueError, 'unique'):
            DistanceMatrix.from_rows(['a', 'a'], [[0, 1], [1, 0]])

    def test_asymmetric_matrix(self):
        """Distances may differ by direction and transpose cleanly."""
        matrix = DistanceMatrix.from_rows(['a', 'b'], [[0, 3], [5, 0]])
        self.assertEqual(matrix.d('a', 'b'), 3000)
        self.assertEqual(matrix.d('b', 'a'), 5000)
        self.assertFalse(matrix.is_symmetric())
        self.assertEqual(matrix.transposed().d('a', 'b'), 5000)
        self.assertEqual(matrix.transposed().transposed(), matrix)
        with self.assertRaises(UnknownLocationError):
            matrix.d('a', 'z')

    def test_coordinate_distances(self):
        """Planar coordinates give Euclidean distances in milli-units."""
        matrix = coordinate_distances(
            [location('a', 0, 0), location('b', 3, 4)],
        )
        self.assertEqual(matrix.d('a', 'b'), 5000)
        self.assertTrue(matrix.is_symmetric())
        with self.assertRaisesRegex(ValueError, 'geodetic'):
            coordinate_distances(
                [location('a', 0, 0)], CoordinateSystem.GEODETIC, 'furlong',
            )

    def test_geodetic_distances(self):
        """One degree of latitude is about 69 miles."""
        matrix = coordinate_distances(
            [location('a', 0, 0), location('b', 1, 0)],
            CoordinateSystem.GEODETIC,
        )
        self.assertAlmostEqual(matrix.d('a', 'b') / 1000, 69.09, delta=0.05)

    def test_route_distances(self):
        """Out-of-route distance is total minus first-to-last distance."""
        matrix = coordinate_distances([
            location('O', 0, 0), location('A', 100, 0),
            location('C', 100, 100),
        ])
        straight = route_distances(('O', 'A'), matrix)
        self.assertEqual(straight.oor_distance, 0)
        detour = route_distances(('O', 'C', 'A'), matrix)
        self.assertEqual(detour.total_distance, 241421)
        self.assertEqual(detour.direct_distance, 100000)
        self.assertEqual(detour.oor_distance, 141421)
        self.assertTrue(detour.oor_percent_exceeds(141_000))
        self.assertFalse(detour.oor_percent_exceeds(142_000))
        with self.assertRaisesRegex(ValueError, 'two stops'):
            route_distances(('O',), matrix)

    def test_pairwise_oor_clamps(self):
        """A table breaking the triangle inequality warns and clamps to 0."""
        matrix = DistanceMatrix.from_rows(
            ['o', 'a', 'b'], [[0, 1, 10], [1, 0, 1], [10, 1, 0]],
        )
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            self.assertEqual(pairwise_oor('o', 'a', 'b', matrix), 0)
        self.assertTrue(
            any(
                issubclass(w.category, NonMetricDistanceWarning)
                for w in caught
            )
        )
        self.assertEqual(pairwise_oor('a', 'o', 'b', matrix), 10000)

    def test_nearest_first(self):
        """Candidates sort by key with ties broken by ascending id."""
        keys = {'d': 5, 'b': 1, 'c': 1, 'a': 9}
        self.assertListEqual(nearest_first(keys, 'dcba'), ['b', 'c', 'd', 'a'])


class TestInstance(unittest.TestCase):
    """Test case for parsing and validating whole instances."""

    def test_load_instance(self):
        """A valid instance file parses into milli-units and minutes."""
        instance = load_instance(json.dumps(instance_document()))
        self.assertEqual(
            repr(instance),
            '<Instance with 3 locations, 2 orders, and 1 modes>',
        )
        o2 = instance.order('o2')
        self.assertEqual(o2.weight, 20000)
        self.assertEqual(o2.pickup_window, Window(0, 1440))
        self.assertEqual(o2.delivery_window.latest, 4 * 1440)
        self.assertEqual(instance.matrix.d('O', 'B'), 200000)
        self.assertEqual(instance.mode('M').cost_rate.default, 1500)
        self.assertListEqual(
            [o.id for o in instance.iter_sorted_orders()], ['o1', 'o2'],
        )

    def test_dumps_then_parse(self):
        """Dumping an instance and parsing the text gives it back."""
        instance = load_instance(json.dumps(instance_document()))
        self.assertEqual(Instance.parse(instance.dumps()), instance)

    def test_epoch_defaults_to_earliest_timestamp(self):
        """Without an epoch, time counts from the earliest window bound."""
        document = instance_document()
        del document['epoch']
        document['orders'][0]['pickup_window'][0] = '2023-12-31T12:00'
        instance = Instance.parse(json.dumps(document))
        self.assertEqual(instance.order('o1').pickup_window.earliest, 0)
        self.assertEqual(instance.order('o2').pickup_window.earliest, 720)

    def test_explicit_matrix_wins(self):
        """An explicit distance matrix is used instead of coordinates."""
        document = instance_document(distance_matrix={
            'location_ids': ['O', 'A', 'B'],
            'rows': [[0, 7, 9], [7, 0, 2], [9, 2, 0]],
        })
        instance = load_instance(json.dumps(document))
        self.assertEqual(instance.matrix.d('O', 'B'), 9000)

    def test_syntax_errors(self):
        """Broken JSON and missing keys are reported with their location."""
        with self.assertRaisesRegex(InvalidInstanceError, 'line 2'):
            Instance.parse('{\n  "locations": [,\n}')
        with self.assertRaisesRegex(
            InvalidInstanceError, "missing top-level key 'modes'",
        ):
            document = instance_document()
            del document['modes']
            Instance.parse(json.dumps(document))
        document = instance_document()
        del document['orders'][1]['weight']
        with self.assertRaisesRegex(
            InvalidInstanceError, "order 'o2': missing key 'weight'",
        ):
            Instance.parse(json.dumps(document, indent=2))

    def test_invariant_violations(self):
        """Every broken invariant produces a diagnostic naming its subject."""
        document = instance_document(weight_unit='lb')
        document['orders'].append({
            'id': 'o1', 'origin': 'O', 'destination': 'Z', 'weight': -1,
            'pickup_window': ['2024-01-02T00:00', '2024-01-01T00:00'],
            'delivery_window': ['2024-01-01T00:00', '2024-01-05T00:00'],
        })
        document['modes'][0]['capacity'] = 0
        with self.assertRaises(InvalidInstanceError) as context:
            load_instance(json.dumps(document, indent=2))
        messages = [str(d) for d in context.exception.diagnostics]
        expected = [
            'weight unit must be one of',
            "order 'o1': duplicate order id",
            "references missing location 'Z'",
            'weight cannot be negative',
            'pickup window closes before it opens',
            "mode 'M': capacity must be positive",
        ]
        for fragment in expected:
            self.assertTrue(
                any(fragment in message for message in messages),
                f'{fragment!r} not in {messages}',
            )

    def test_validate_built_instance(self):
        """Instances built in code are validated the same way."""
        instance = make_instance(
            [location('O', 0, 0), location('A', 1, 0)],
            [order('x', 'O', 'O')],
            [mode('M', max_drops=0)],
        )
        messages = [d.message for d in validate_instance(instance)]
        self.assertIn('origin and destination are the same', messages)
        self.assertIn('stop limits must be positive integers', messages)


if __name__ == '__main__':
    unittest.main()
