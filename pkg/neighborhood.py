"""Growing one-drop routes into multi-drop routes, one appended stop at a time.

Exact extension tries every combo leaving the route's origin for a
destination not yet visited. KNN and K-CORN restrict the new last stop to a
precomputed neighbor list of the current last stop. Pruning only ever skips
work whose outcome is already known to be infeasible, so it never changes
which routes are produced.
"""

from collections import Counter, defaultdict
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
import itertools
import logging
from typing import Self

from consolidation import Combo
from feasibility import monotone_violations, route_from_verdict, validate
from geometry import nearest_first, pairwise_oor
from instance import Instance
from modes import TransportMode
from routes import Direction, Route
from schedules import drive_minutes
from violations import is_monotone, Violation


logger = logging.getLogger(__name__)


class NeighborStrategy(StrEnum):
    """How candidate next stops are ranked."""
    DISTANCE = 'distance'  # KNN: nearest to the current last stop
    OOR = 'oor'  # K-CORN: smallest detour relative to the route origin


class PruneDecision(StrEnum):
    CONTINUE = 'continue'
    STOP = 'stop'


@dataclass(frozen=True, match_args=False, slots=True)
class PartialRoute:
    """A 1PMD route under construction with its running totals."""
    origin: str
    drops: tuple[str, ...]
    loads: tuple[tuple[str, ...], ...]  # order ids delivered at each drop
    weight: int
    distance: int
    drive_minutes: int
    prune_state: frozenset[Violation] = frozenset()

    def __repr__(self) -> str:
        return f'{self.__class__.__name__}({"-".join(self.stops)})'

    @property
    def stops(self) -> tuple[str, ...]:
        return (self.origin, *self.drops)

    @property
    def orders(self) -> tuple[str, ...]:
        return tuple(sorted(itertools.chain.from_iterable(self.loads)))

    @property
    def last_stop(self) -> str:
        return self.drops[-1] if self.drops else self.origin

    @classmethod
    def start(cls, origin: str) -> Self:
        return cls(origin, (), (), 0, 0, 0)

    def extended(
        self,
        destination: str,
        orders: Sequence[str],
        instance: Instance,
        mode: TransportMode,
    ) -> Self:
        """Append one drop and the orders delivered there."""
        leg = instance.matrix.d(self.last_stop, destination)
        drops = (*self.drops, destination)
        loads = (*self.loads, tuple(sorted(orders)))
        all_orders = sorted(itertools.chain.from_iterable(loads))
        return self.__class__(
            self.origin,
            drops,
            loads,
            self.weight + sum(
                instance.order(order_id).weight for order_id in orders
            ),
            self.distance + leg,
            self.drive_minutes + drive_minutes(leg, mode),
            frozenset(monotone_violations(
                (self.origin, *drops), all_orders, mode, instance,
            )),
        )

    @classmethod
    def from_route(cls, route: Route, instance: Instance) -> Self:
        """Rebuild the partial route reached by a finished 1PMD route."""
        mode = instance.mode(route.mode)
        drops = route.stops[1:]
        destination = {
            order_id: instance.order(order_id).destination
            for order_id in route.orders
        }
        legs = [
            instance.matrix.d(here, there)
            for here, there in itertools.pairwise(route.stops)
        ]
        return cls(
            route.stops[0],
            drops,
            tuple(
                tuple(sorted(
                    o for o in route.orders if destination[o] == drop
                ))
                for drop in drops
            ),
            sum(instance.order(order_id).weight for order_id in route.orders),
            sum(legs),
            sum(drive_minutes(leg, mode) for leg in legs),
            frozenset(monotone_violations(
                route.stops, route.orders, mode, instance,
            )),
        )

    def recomputed(self, instance: Instance, mode: TransportMode) -> Self:
        """Recompute every running total from scratch."""
        partial = self.__class__.start(self.origin)
        for drop, load in zip(self.drops, self.loads, strict=True):
            partial = partial.extended(drop, load, instance, mode)
        return partial


@dataclass(frozen=True, match_args=False, slots=True)
class NeighborIndex:
    """Sorted candidate next stops, keyed by last stop (and origin for OOR)."""
    strategy: NeighborStrategy
    k: int
    lists: Mapping[tuple[str | None, str], tuple[str, ...]] = field(repr=False)

    def candidates(self, origin: str, location: str) -> tuple[str, ...]:
        """Return the candidate next stops after a route reaches a location."""
        key_origin = origin if self.strategy is NeighborStrategy.OOR else None
        return self.lists.get((key_origin, location), ())


def build_neighbor_index(
    instance: Instance, strategy: NeighborStrategy, k: int,
) -> NeighborIndex:
    """Rank the possible next stops for every key and keep the first k.

    Only order destinations can be appended to a 1PMD route, so they are the
    only candidates. Ties in the ranking are broken by ascending location id.
    """
    if k < 1:
        raise ValueError('k must be a positive integer')
    matrix = instance.matrix
    lists: dict[tuple[str | None, str], tuple[str, ...]] = {}

    match strategy:
        case NeighborStrategy.DISTANCE:
            destinations = sorted(
                {order.destination for order in instance.orders}
            )
            for location in sorted(loc.id for loc in instance.locations):
                row = matrix.row(location)
                keys = {
                    dest: int(row[matrix.index_of(dest)])
                    for dest in destinations
                }
                candidates = [
                    dest for dest in destinations if dest != location
                ]
                lists[None, location] = tuple(
                    nearest_first(keys, candidates)[:k]
                )
        case NeighborStrategy.OOR:
            served: defaultdict[str, set[str]] = defaultdict(set)
            for order in instance.orders:
                served[order.origin].add(order.destination)
            for origin, destinations in sorted(served.items()):
                for location in sorted(destinations):
                    candidates = [
                        dest for dest in destinations if dest != location
                    ]
                    keys = {
                        dest: pairwise_oor(origin, location, dest, matrix)
                        for dest in candidates
                    }
                    lists[origin, location] = tuple(
                        nearest_first(keys, candidates)[:k]
                    )
        case _:
            raise ValueError(f'unknown neighbor strategy: {strategy!r}')

    logger.debug(
        'built %s neighbor index with %d keys, k=%d', strategy, len(lists), k,
    )
    return NeighborIndex(strategy, k, lists)


def prune_check(
    partial: PartialRoute,
    instance: Instance,
    mode: TransportMode,
    candidates: Iterable[Combo] | None = None,
) -> PruneDecision:
    """Decide whether any extension of a partial route could be feasible.

    Only constraints that stay violated as stops are appended are used. When
    the candidate combos are known, capacity and total distance are also
    checked against the lightest combo and the shortest next leg.
    """
    if partial.prune_state:
        return PruneDecision.STOP
    if len(partial.drops) >= mode.max_drops:
        return PruneDecision.STOP
    if candidates is None:
        return PruneDecision.CONTINUE

    remaining = [
        combo for combo in candidates
        if combo.origin == partial.origin
        and combo.destination not in partial.stops
    ]
    if not remaining:
        return PruneDecision.STOP
    lightest = min(combo.total_weight for combo in remaining)
    if partial.weight + lightest > mode.capacity:
        return PruneDecision.STOP
    cap = mode.max_total_distance
    if cap is not None:
        matrix = instance.matrix
        shortest_leg = min(
            matrix.d(partial.last_stop, combo.destination)
            for combo in remaining
        )
        if partial.distance + shortest_leg > cap:
            return PruneDecision.STOP
    return PruneDecision.CONTINUE


@dataclass(eq=False, match_args=False, slots=True)
class ExtensionStats:
    """Counts of what happened while extending routes by one stop."""
    attempted: int = 0
    feasible: int = 0
    pruned_routes: int = 0
    skipped_candidates: int = 0
    violations: Counter[Violation] = field(default_factory=Counter)

    def merge(self, other: Self) -> None:
        self.attempted += other.attempted
        self.feasible += other.feasible
        self.pruned_routes += other.pruned_routes
        self.skipped_candidates += other.skipped_candidates
        self.violations.update(other.violations)


def _combos_by_origin(combos: Iterable[Combo]) -> dict[str, list[Combo]]:
    by_origin: defaultdict[str, list[Combo]] = defaultdict(list)
    for combo in combos:
        by_origin[combo.origin].append(combo)
    for options in by_origin.values():
        options.sort(key=lambda combo: (combo.destination, combo.orders))
    return dict(by_origin)


def _extend(
    routes: Iterable[Route],
    combos: Iterable[Combo],
    depth: int,
    instance: Instance,
    allowed: Callable[[Route], frozenset[str]] | None,
    prune: bool,
    stats: ExtensionStats | None,
) -> list[Route]:
    if depth < 2:
        raise ValueError('extension produces routes with at least two drops')
    stats = ExtensionStats() if stats is None else stats
    by_origin = _combos_by_origin(combos)
    extended: list[Route] = []
    for route in routes:
        if route.direction is not Direction.ONE_PICKUP_MULTI_DROP:
            raise ValueError(
                'only 1PMD routes are extended; mirror MP1D first'
            )
        if len(route.stops) != depth:
            raise ValueError(
                f'route {route!r} does not have {depth - 1} drops to extend'
            )
        mode = instance.mode(route.mode)
        options = [
            combo for combo in by_origin.get(route.origin, ())
            if combo.destination not in route.stops
        ]
        if allowed is not None:
            permitted = allowed(route)
            options = [
                combo for combo in options if combo.destination in permitted
            ]
        if prune:
            partial = PartialRoute.from_route(route, instance)
            decision = prune_check(partial, instance, mode, options)
            if decision is PruneDecision.STOP:
                stats.pruned_routes += 1
                continue

        for combo in options:
            stops = (*route.stops, combo.destination)
            orders = (*route.orders, *combo.orders)
            verdict = validate(stops, orders, mode, instance)
            violation = verdict.violation
            if violation is None:
                stats.attempted += 1
                stats.feasible += 1
                extended.append(route_from_verdict(
                    stops, orders, mode, instance,
                    Direction.ONE_PICKUP_MULTI_DROP, verdict,
                ))
            elif prune and is_monotone(violation):
                # Rejected by a structural check before any scheduling.
                stats.skipped_candidates += 1
            else:
                stats.attempted += 1
                stats.violations[violation] += 1
    return extended


def exact_extend(
    routes: Iterable[Route],
    combos: Iterable[Combo],
    depth: int,
    instance: Instance,
    *,
    prune: bool = True,
    stats: ExtensionStats | None = None,
) -> list[Route]:
    """Append every compatible combo to every route with depth - 1 drops."""
    return _extend(routes, combos, depth, instance, None, prune, stats)


def restricted_extend(
    routes: Iterable[Route],
    combos: Iterable[Combo],
    depth: int,
    index: NeighborIndex | Sequence[NeighborIndex],
    instance: Instance,
    *,
    prune: bool = True,
    stats: ExtensionStats | None = None,
) -> list[Route]:
    """Append combos whose destination is a neighbor of the route's last stop.

    With several indexes, a destination is allowed if any of them lists it.
    """
    indexes = (index,) if isinstance(index, NeighborIndex) else tuple(index)

    def allowed(route: Route) -> frozenset[str]:
        return frozenset(itertools.chain.from_iterable(
            neighbor_index.candidates(route.origin, route.last_stop)
            for neighbor_index in indexes
        ))

    return _extend(routes, combos, depth, instance, allowed, prune, stats)
