"""A route is one vehicle's validated plan: mode, stops, orders, schedule."""

from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Self

from instance import Instance
from modes import TransportMode
from schedules import Schedule
from units import from_milli, MILLI, to_milli


class Direction(StrEnum):
    """Route shape: one pickup and many drops, or many pickups and one drop."""
    ONE_PICKUP_MULTI_DROP = '1PMD'
    MULTI_PICKUP_ONE_DROP = 'MP1D'


RouteKey = tuple[str, tuple[str, ...], tuple[str, ...]]


@dataclass(frozen=True, match_args=False, slots=True)
class Route:
    """One vehicle's plan with its measured distances, schedule and cost."""
    mode: str
    direction: Direction
    stops: tuple[str, ...]
    orders: tuple[str, ...]  # sorted order ids
    total_distance: int
    direct_distance: int
    oor_distance: int
    schedule: Schedule
    cost: int

    def __repr__(self) -> str:
        return (
            f'{self.__class__.__name__}({self.mode!r}, '
            + f'{"-".join(self.stops)}, orders={list(self.orders)!r})'
        )

    @property
    def key(self) -> RouteKey:
        """Identity used for deduplication: mode, stop sequence, order set."""
        return self.mode, self.stops, self.orders

    @property
    def oor_percent(self) -> float:
        if self.direct_distance == 0:
            return 0.0
        return 100.0 * self.oor_distance / self.direct_distance

    @property
    def origin(self) -> str:
        return self.stops[0]

    @property
    def last_stop(self) -> str:
        return self.stops[-1]

    @property
    def num_drops(self) -> int:
        if self.direction is Direction.ONE_PICKUP_MULTI_DROP:
            return len(self.stops) - 1
        return 1

    def to_dict(self, instance: Instance) -> dict[str, Any]:
        """Return the solution-file object for this route."""
        return {
            'mode': self.mode,
            'direction': str(self.direction),
            'stops': list(self.stops),
            'orders': list(self.orders),
            'total_distance': from_milli(self.total_distance),
            'direct_distance': from_milli(self.direct_distance),
            'oor_distance': from_milli(self.oor_distance),
            'oor_percent': round(self.oor_percent, 3),
            'schedule': self.schedule.to_dict(instance.epoch),
            'cost': from_milli(self.cost),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], instance: Instance) -> Self:
        """Rebuild a route from its solution-file object."""
        return cls(
            mode=str(data['mode']),
            direction=Direction(data['direction']),
            stops=tuple(data['stops']),
            orders=tuple(sorted(data['orders'])),
            total_distance=to_milli(data['total_distance']),
            direct_distance=to_milli(data['direct_distance']),
            oor_distance=to_milli(data['oor_distance']),
            schedule=Schedule.from_dict(data['schedule'], instance.epoch),
            cost=to_milli(data['cost']),
        )


def lane_rate(
    stops: Sequence[str], mode: TransportMode, instance: Instance,
) -> int:
    """Return the rate for a route's (origin region, final region) lane."""
    return mode.cost_rate.rate(
        instance.location(stops[0]).region_tags,
        instance.location(stops[-1]).region_tags,
    )


def cost_of(
    stops: Sequence[str], total_distance: int, mode: TransportMode,
    instance: Instance,
) -> int:
    """Cost of a stop sequence: distance times lane rate plus fixed cost."""
    rate = lane_rate(stops, mode, instance)
    # Both factors are milli-units, so the product carries an extra factor of
    # 1000 that is removed with half-up rounding.
    return (total_distance * rate + MILLI // 2) // MILLI + mode.fixed_cost


def route_cost(route: Route, mode: TransportMode, instance: Instance) -> int:
    """Return the milli-unit cost of a route under a transport mode."""
    return cost_of(route.stops, route.total_distance, mode, instance)


def check_route_invariants(route: Route, instance: Instance) -> list[str]:
    """Check the structural route invariants without re-running feasibility."""
    problems: list[str] = []
    mode = instance.mode(route.mode)
    orders = [instance.order(order_id) for order_id in route.orders]

    if sum(order.weight for order in orders) > mode.capacity:
        problems.append('orders exceed the mode capacity')
    if len(set(route.stops)) != len(route.stops):
        problems.append('route visits a stop twice')

    if route.direction is Direction.ONE_PICKUP_MULTI_DROP:
        if any(order.origin != route.stops[0] for order in orders):
            problems.append('an order does not start at the single pickup')
        if len(route.stops) - 1 > mode.max_drops:
            problems.append('too many drops for the mode')
    else:
        if any(order.destination != route.stops[-1] for order in orders):
            problems.append('an order does not end at the single drop')
        if len(route.stops) - 1 > mode.max_pickups:
            problems.append('too many pickups for the mode')

    expected_oor = max(0, route.total_distance - route.direct_distance)
    if route.oor_distance != expected_oor:
        problems.append('oor distance is not total minus direct distance')
    if route.oor_distance < 0:
        problems.append('oor distance is negative')
    if route.cost != route_cost(route, mode, instance):
        problems.append('cost does not match the mode rate')
    if list(route.schedule.stops) != list(route.stops):
        problems.append('schedule stops differ from route stops')
    return problems
