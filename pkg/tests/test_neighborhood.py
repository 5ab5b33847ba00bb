"""Unit tests for neighbor lists and multi-drop route extension."""

from dataclasses import replace
import unittest

from consolidation import od_groups, one_drop_route, singletons
from feasibility import validate
from neighborhood import (
    build_neighbor_index,
    exact_extend,
    ExtensionStats,
    NeighborStrategy,
    PartialRoute,
    prune_check,
    PruneDecision,
    restricted_extend,
)
from routes import Direction
from tests.builders import (
    line_instance, location, make_instance, mode as build_mode, order,
)
from violations import Violation


def one_drop_start(instance):
    """Singleton combos of every OD group and their one-drop routes."""
    combos = [
        combo for group in od_groups(instance) for combo in singletons(group)
    ]
    mode = instance.mode('M')
    routes = [one_drop_route(combo, mode, instance) for combo in combos]
    return combos, [route for route in routes if route is not None]


def stop_sequences(routes):
    return sorted('-'.join(route.stops) for route in routes)


class TestNeighborIndex(unittest.TestCase):
    """Test case for KNN and K-CORN candidate lists."""

    def test_distance_index(self):
        """KNN ranks destinations by distance from the last stop."""
        instance = line_instance()
        index = build_neighbor_index(instance, NeighborStrategy.DISTANCE, 3)
        self.assertEqual(index.candidates('O', 'O'), ('A', 'C', 'B'))
        self.assertEqual(index.candidates('O', 'A'), ('B', 'C'))
        self.assertEqual(index.candidates('O', 'B'), ('A', 'C'))
        self.assertEqual(index.candidates('elsewhere', 'B'), ('A', 'C'))
        short = build_neighbor_index(instance, NeighborStrategy.DISTANCE, 1)
        self.assertEqual(short.candidates('O', 'A'), ('B',))

    def test_oor_index(self):
        """K-CORN ranks destinations by the detour they add from the origin."""
        instance = line_instance()
        index = build_neighbor_index(instance, NeighborStrategy.OOR, 3)
        self.assertEqual(index.candidates('O', 'A'), ('B', 'C'))
        self.assertEqual(index.candidates('O', 'C'), ('B', 'A'))
        self.assertEqual(index.candidates('O', 'B'), ('A', 'C'))
        self.assertEqual(index.candidates('A', 'C'), ())

    def test_k_must_be_positive(self):
        """A neighbor list needs at least one entry."""
        with self.assertRaisesRegex(ValueError, 'positive integer'):
            build_neighbor_index(line_instance(), NeighborStrategy.DISTANCE, 0)


class TestPartialRoute(unittest.TestCase):
    """Test case for running totals and prune decisions."""

    def test_from_route(self):
        """A finished route rebuilds into the partial route that reached it."""
        instance = line_instance()
        combos, routes = one_drop_start(instance)
        (route,) = [r for r in exact_extend(routes, combos, 2, instance)
                    if r.stops == ('O', 'A', 'B')]
        partial = PartialRoute.from_route(route, instance)
        self.assertEqual(partial.stops, ('O', 'A', 'B'))
        self.assertEqual(partial.loads, (('o1',), ('o2',)))
        self.assertEqual(partial.orders, ('o1', 'o2'))
        self.assertEqual(partial.weight, 30000)
        self.assertEqual(partial.distance, 200000)
        self.assertEqual(partial.drive_minutes, 200)
        self.assertEqual(partial.prune_state, frozenset())
        self.assertEqual(
            partial.recomputed(instance, instance.mode('M')), partial,
        )

    def test_prune_on_monotone_violation(self):
        """A partial route already over capacity can never recover."""
        instance = line_instance()
        small = build_mode('M', 25.0, max_drops=3)
        partial = (
            PartialRoute.start('O')
            .extended('A', ['o1'], instance, small)
            .extended('B', ['o2'], instance, small)
        )
        self.assertIn(Violation.CAPACITY, partial.prune_state)
        self.assertIs(
            prune_check(partial, instance, small), PruneDecision.STOP,
        )

    def test_prune_on_drop_limit_and_lookahead(self):
        """Routes at the drop limit, or with no light enough combo, stop."""
        instance = line_instance()
        mode = instance.mode('M')
        combos, _ = one_drop_start(instance)
        one = PartialRoute.start('O').extended('A', ['o1'], instance, mode)
        two = one.extended('B', ['o2'], instance, mode)
        self.assertIs(prune_check(one, instance, mode), PruneDecision.CONTINUE)
        self.assertIs(
            prune_check(two, instance, mode, combos), PruneDecision.CONTINUE,
        )
        three = two.extended('C', ['o3'], instance, mode)
        self.assertIs(prune_check(three, instance, mode), PruneDecision.STOP)

        tight = build_mode('M', 35.0, max_drops=3)
        self.assertIs(
            prune_check(one, instance, tight, combos), PruneDecision.CONTINUE,
        )
        self.assertIs(
            prune_check(two, instance, tight, combos), PruneDecision.STOP,
        )

    def test_detour_share_is_not_a_reason_to_stop(self):
        """A route over the out-of-route share can recover by going further."""
        base = line_instance()
        capped = build_mode('M', 100.0, max_drops=3, max_oor_percent=40)
        instance = make_instance(
            [*base.locations, location('F', 400, 0, 'east')],
            [
                base.order('o1'), base.order('o3'),
                order('of', 'O', 'F', 10.0),
            ],
            [capped],
        )
        # 58.6 out of route over a direct 141.4 is 41.4%.
        verdict = validate(('O', 'A', 'C'), ['o1', 'o3'], capped, instance)
        self.assertIs(verdict.violation, Violation.OOR_PERCENT)
        partial = (
            PartialRoute.start('O')
            .extended('A', ['o1'], instance, capped)
            .extended('C', ['o3'], instance, capped)
        )
        self.assertEqual(partial.prune_state, frozenset())
        self.assertIs(
            prune_check(partial, instance, capped), PruneDecision.CONTINUE,
        )
        # 116.2 out of route over a direct 400 is 29.1%.
        longer = validate(
            ('O', 'A', 'C', 'F'), ['o1', 'o3', 'of'], capped, instance,
        )
        self.assertTrue(longer.feasible)


class TestExtension(unittest.TestCase):
    """Test case for exact and neighbor-restricted extension."""

    def test_exact_extension_layers(self):
        """Every unvisited destination is tried at every depth."""
        instance = line_instance()
        combos, routes = one_drop_start(instance)
        two = exact_extend(routes, combos, 2, instance)
        self.assertListEqual(stop_sequences(two), [
            'O-A-B', 'O-A-C', 'O-B-A', 'O-B-C', 'O-C-A', 'O-C-B',
        ])
        three = exact_extend(two, combos, 3, instance)
        self.assertEqual(len(three), 6)
        self.assertTrue(
            all(route.orders == ('o1', 'o2', 'o3') for route in three)
        )
        stats = ExtensionStats()
        self.assertListEqual(
            exact_extend(three, combos, 4, instance, stats=stats), [],
        )
        self.assertEqual(stats.pruned_routes, 6)

    def test_pruning_changes_nothing(self):
        """Pruning skips only work that would have failed anyway."""
        instance = line_instance(max_total_distance=300)
        combos, routes = one_drop_start(instance)
        pruned_stats, plain_stats = ExtensionStats(), ExtensionStats()
        pruned = exact_extend(routes, combos, 2, instance, stats=pruned_stats)
        plain = exact_extend(
            routes, combos, 2, instance, prune=False, stats=plain_stats,
        )
        self.assertListEqual(
            sorted(route.key for route in pruned),
            sorted(route.key for route in plain),
        )
        self.assertNotIn('O-B-C', stop_sequences(pruned))
        self.assertEqual(len(pruned), 5)
        self.assertEqual(pruned_stats.skipped_candidates, 1)
        self.assertEqual(plain_stats.violations[Violation.TOTAL_DISTANCE], 1)

    def test_restricted_is_subset_of_exact(self):
        """Neighbor lists only ever remove candidate routes."""
        instance = line_instance()
        combos, routes = one_drop_start(instance)
        exact = {
            route.key for route in exact_extend(routes, combos, 2, instance)
        }
        knn = build_neighbor_index(instance, NeighborStrategy.DISTANCE, 1)
        kcorn = build_neighbor_index(instance, NeighborStrategy.OOR, 1)
        restricted = restricted_extend(routes, combos, 2, knn, instance)
        self.assertListEqual(
            stop_sequences(restricted), ['O-A-B', 'O-B-A', 'O-C-A'],
        )
        both = restricted_extend(routes, combos, 2, [knn, kcorn], instance)
        self.assertListEqual(
            stop_sequences(both), ['O-A-B', 'O-B-A', 'O-C-A', 'O-C-B'],
        )
        self.assertLessEqual({route.key for route in both}, exact)

    def test_neighbor_list_length_decides_reach(self):
        """The cheapest extension is found once the list is long enough.

        From X the destinations rank N1, N2, N3, N4 by distance. N1 and N2
        are too heavy to share a truck with X, so the cheapest extension
        goes to the third nearest.
        """
        instance = make_instance(
            [
                location('O', 0, 0), location('X', 100, 0),
                location('N1', 110, 0), location('N2', 100, -15),
                location('N3', 100, 20), location('N4', 130, 0),
            ],
            [
                order('x', 'O', 'X', 50.0), order('n1', 'O', 'N1', 60.0),
                order('n2', 'O', 'N2', 60.0), order('n3', 'O', 'N3', 40.0),
                order('n4', 'O', 'N4', 40.0),
            ],
            [build_mode('M', 100.0, max_drops=2)],
        )
        combos, routes = one_drop_start(instance)
        start = [route for route in routes if route.stops == ('O', 'X')]
        exact = exact_extend(start, combos, 2, instance)
        self.assertListEqual(stop_sequences(exact), ['O-X-N3', 'O-X-N4'])
        cheapest = min(exact, key=lambda route: route.cost)
        self.assertEqual(cheapest.stops, ('O', 'X', 'N3'))

        two = build_neighbor_index(instance, NeighborStrategy.DISTANCE, 2)
        self.assertEqual(two.candidates('O', 'X'), ('N1', 'N2'))
        self.assertListEqual(
            restricted_extend(start, combos, 2, two, instance), [],
        )
        three = build_neighbor_index(instance, NeighborStrategy.DISTANCE, 3)
        found = restricted_extend(start, combos, 2, three, instance)
        self.assertListEqual(
            [route.stops for route in found], [cheapest.stops],
        )
        self.assertEqual(found[0].cost, cheapest.cost)

    def test_depth_is_checked(self):
        """Extension refuses bad depths and MP1D routes."""
        instance = line_instance()
        combos, routes = one_drop_start(instance)
        with self.assertRaisesRegex(ValueError, 'at least two drops'):
            exact_extend(routes, combos, 1, instance)
        with self.assertRaisesRegex(ValueError, 'does not have 2 drops'):
            exact_extend(routes, combos, 3, instance)
        mp1d = replace(routes[0], direction=Direction.MULTI_PICKUP_ONE_DROP)
        with self.assertRaisesRegex(ValueError, 'mirror MP1D first'):
            exact_extend([mp1d], combos, 2, instance)


if __name__ == '__main__':
    unittest.main()
