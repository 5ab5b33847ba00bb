"""The single route validator used by every route generator.

Checks run in a fixed order so that the reported violation is deterministic:
structure, capacity, stop counts, the distance family, the compatibility
family, and finally scheduling, which is by far the most expensive.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
import itertools
from typing import Final

from geometry import route_distances, RouteDistances
from instance import Instance
from modes import TransportMode
from orders import Order, Position
from overlay import RuleKind
from routes import cost_of, Direction, Route
from schedules import Schedule, schedule_route
from violations import is_monotone, Violation


class RouteInputError(ValueError):
    """Raised for route descriptions that are malformed, not infeasible."""


@dataclass(frozen=True, match_args=False, slots=True)
class Verdict:
    """Outcome of validating one proposed route."""
    violation: Violation | None
    schedule: Schedule | None = None
    distances: RouteDistances | None = None

    def __post_init__(self) -> None:
        if (self.violation is None) != (self.schedule is not None):
            raise ValueError(
                'a verdict has a schedule exactly when it is feasible'
            )

    @property
    def feasible(self) -> bool:
        return self.violation is None

    def __repr__(self) -> str:
        if self.feasible:
            return f'{self.__class__.__name__}(feasible)'
        return f'{self.__class__.__name__}(violation={self.violation!s})'


@dataclass(frozen=True, slots=True)
class _RouteContext:
    stops: tuple[str, ...]
    orders: tuple[Order, ...]
    mode: TransportMode
    instance: Instance
    direction: Direction
    distances: RouteDistances


def _resolve(
    stops: Sequence[str],
    order_ids: Sequence[str],
    mode: TransportMode,
    instance: Instance,
    direction: Direction,
) -> _RouteContext:
    """Check that the input describes a route at all and resolve its ids."""
    stops = tuple(stops)
    if len(stops) < 2:
        raise RouteInputError('a route needs at least two stops')
    if len(set(stops)) != len(stops):
        raise RouteInputError('a route cannot visit the same location twice')
    for stop in stops:
        if not instance.has_location(stop):
            raise RouteInputError(f'unknown stop location {stop!r}')
    if not order_ids:
        raise RouteInputError('a route must carry at least one order')
    if len(set(order_ids)) != len(order_ids):
        raise RouteInputError('an order is listed twice on the route')
    try:
        orders = tuple(instance.order(order_id) for order_id in order_ids)
    except KeyError as exc:
        raise RouteInputError(f'unknown order {exc.args[0]!r}') from None

    if direction is Direction.ONE_PICKUP_MULTI_DROP:
        hub, served = stops[0], stops[1:]
        hub_end, far_end = 'origin', 'destination'
    else:
        hub, served = stops[-1], stops[:-1]
        hub_end, far_end = 'destination', 'origin'
    for order in orders:
        if getattr(order, hub_end) != hub:
            raise RouteInputError(
                f'order {order.id!r} does not touch the {direction} hub '
                f'{hub!r}'
            )
        if getattr(order, far_end) not in served:
            raise RouteInputError(
                f'order {order.id!r} does not touch any stop'
            )
    touched = {getattr(order, far_end) for order in orders}
    for stop in served:
        if stop not in touched:
            raise RouteInputError(f'no order is served at stop {stop!r}')

    return _RouteContext(
        stops, orders, mode, instance, direction,
        route_distances(stops, instance.matrix),
    )


def _capacity(ctx: _RouteContext) -> bool:
    return sum(order.weight for order in ctx.orders) > ctx.mode.capacity


def _max_stops(ctx: _RouteContext) -> bool:
    if ctx.direction is Direction.ONE_PICKUP_MULTI_DROP:
        return len(ctx.stops) - 1 > ctx.mode.max_drops
    return len(ctx.stops) - 1 > ctx.mode.max_pickups


def _total_distance(ctx: _RouteContext) -> bool:
    cap = ctx.mode.max_total_distance
    return cap is not None and ctx.distances.total_distance > cap


def _oor_distance(ctx: _RouteContext) -> bool:
    cap = ctx.mode.max_oor_distance
    return cap is not None and ctx.distances.oor_distance > cap


def _oor_percent(ctx: _RouteContext) -> bool:
    cap = ctx.mode.max_oor_percent
    return cap is not None and ctx.distances.oor_percent_exceeds(cap)


def _first_last_distance(ctx: _RouteContext) -> bool:
    if len(ctx.stops) < 3:
        return False
    if ctx.direction is Direction.ONE_PICKUP_MULTI_DROP:
        cap = ctx.mode.max_first_last_drop_distance
        first, last = ctx.stops[1], ctx.stops[-1]
    else:
        cap = ctx.mode.max_first_last_pickup_distance
        first, last = ctx.stops[0], ctx.stops[-2]
    return cap is not None and ctx.instance.matrix.d(first, last) > cap


def _incompatibility(ctx: _RouteContext) -> bool:
    forbidden = ctx.mode.forbidden_product_tags
    if any(order.product_tags & forbidden for order in ctx.orders):
        return True
    overlay = ctx.instance.overlay
    return any(
        overlay.are_incompatible(order_1.product_tags, order_2.product_tags)
        for order_1, order_2 in itertools.combinations(ctx.orders, 2)
    )


def _route_regions(ctx: _RouteContext) -> frozenset[str]:
    regions: set[str] = set()
    for order in ctx.orders:
        regions |= ctx.instance.location(order.origin).region_tags
        regions |= ctx.instance.location(order.destination).region_tags
    return frozenset(regions)


def _regional(ctx: _RouteContext) -> bool:
    # Rules see the union of region tags over every order end on the route.
    rules = ctx.instance.overlay.regional_pair_rules
    if not rules:
        return False
    regions = _route_regions(ctx)
    allowed: set[frozenset[str]] = set()
    governed: set[str] = set()
    for rule in rules:
        pair = frozenset((rule.region_tag_a, rule.region_tag_b))
        if rule.kind is RuleKind.FORBID:
            if pair <= regions:
                return True
        else:
            allowed.add(pair)
            governed |= pair
    present = sorted(regions & governed)
    return any(
        frozenset((tag_1, tag_2)) not in allowed
        for tag_1, tag_2 in itertools.combinations(present, 2)
    )


def _position(ctx: _RouteContext) -> bool:
    for order in ctx.orders:
        requirement = order.position_requirement
        if requirement is None:
            continue
        if ctx.direction is Direction.ONE_PICKUP_MULTI_DROP:
            stop, first, last = order.destination, ctx.stops[1], ctx.stops[-1]
        else:
            stop, first, last = order.origin, ctx.stops[0], ctx.stops[-2]
        if requirement is Position.FIRST and stop != first:
            return True
        if requirement is Position.LAST and stop != last:
            return True
    return False


def _region_service(ctx: _RouteContext) -> bool:
    allowed = ctx.mode.serviceable_regions
    if allowed is None:
        return False
    return any(
        not ctx.instance.location(stop).region_tags & allowed
        for stop in ctx.stops
    )


Check = Callable[[_RouteContext], bool]

# Every check before scheduling, in the order the validator runs them.
STRUCTURAL_CHECKS: Final[tuple[tuple[Violation, Check], ...]] = (
    (Violation.CAPACITY, _capacity),
    (Violation.MAX_STOPS, _max_stops),
    (Violation.TOTAL_DISTANCE, _total_distance),
    (Violation.OOR_DISTANCE, _oor_distance),
    (Violation.OOR_PERCENT, _oor_percent),
    (Violation.FIRST_LAST_DISTANCE, _first_last_distance),
    (Violation.INCOMPATIBILITY, _incompatibility),
    (Violation.REGIONAL, _regional),
    (Violation.POSITION, _position),
    (Violation.REGION_SERVICE, _region_service),
)


def validate(
    stops: Sequence[str],
    orders: Sequence[str],
    mode: TransportMode,
    instance: Instance,
    direction: Direction = Direction.ONE_PICKUP_MULTI_DROP,
) -> Verdict:
    """Decide whether a stop sequence carrying some orders is feasible."""
    ctx = _resolve(stops, orders, mode, instance, direction)
    for violation, check in STRUCTURAL_CHECKS:
        if check(ctx):
            return Verdict(violation, distances=ctx.distances)
    outcome = schedule_route(
        ctx.stops, ctx.orders, mode, instance.overlay, instance.matrix,
    )
    if isinstance(outcome, Violation):
        return Verdict(outcome, distances=ctx.distances)
    return Verdict(None, outcome, ctx.distances)


def all_violations(
    stops: Sequence[str],
    orders: Sequence[str],
    mode: TransportMode,
    instance: Instance,
    direction: Direction = Direction.ONE_PICKUP_MULTI_DROP,
) -> set[Violation]:
    """Return every violated class instead of stopping at the first one."""
    ctx = _resolve(stops, orders, mode, instance, direction)
    found = {violation for violation, check in STRUCTURAL_CHECKS if check(ctx)}
    outcome = schedule_route(
        ctx.stops, ctx.orders, mode, instance.overlay, instance.matrix,
    )
    if isinstance(outcome, Violation):
        found.add(outcome)
    return found


def monotone_violations(
    stops: Sequence[str],
    orders: Sequence[str],
    mode: TransportMode,
    instance: Instance,
    direction: Direction = Direction.ONE_PICKUP_MULTI_DROP,
) -> set[Violation]:
    """Run only the checks whose violations survive appending more stops."""
    ctx = _resolve(stops, orders, mode, instance, direction)
    return {
        violation for violation, check in STRUCTURAL_CHECKS
        if is_monotone(violation) and check(ctx)
    }


def route_from_verdict(
    stops: Sequence[str],
    orders: Sequence[str],
    mode: TransportMode,
    instance: Instance,
    direction: Direction,
    verdict: Verdict,
) -> Route:
    """Attach distances, schedule and cost to a feasible stop sequence."""
    if verdict.schedule is None or verdict.distances is None:
        raise ValueError('only feasible verdicts describe a route')
    distances = verdict.distances
    return Route(
        mode=mode.id,
        direction=direction,
        stops=tuple(stops),
        orders=tuple(sorted(orders)),
        total_distance=distances.total_distance,
        direct_distance=distances.direct_distance,
        oor_distance=distances.oor_distance,
        schedule=verdict.schedule,
        cost=cost_of(stops, distances.total_distance, mode, instance),
    )


def build_route(
    stops: Sequence[str],
    orders: Sequence[str],
    mode: TransportMode,
    instance: Instance,
    direction: Direction = Direction.ONE_PICKUP_MULTI_DROP,
) -> Route | None:
    """Validate a route and, if it is feasible, return it with its cost."""
    verdict = validate(stops, orders, mode, instance, direction)
    if not verdict.feasible:
        return None
    return route_from_verdict(
        stops, orders, mode, instance, direction, verdict,
    )
