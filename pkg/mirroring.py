"""MP1D routes are generated as 1PMD routes on a mirrored instance.

Mirroring swaps every order's origin and destination, reverses time so that
delivery windows become pickup windows, transposes the distances and swaps
the pickup-side and drop-side limits of every mode. A 1PMD route found on the
mirror, read backwards, is an MP1D route on the original instance.
"""

from dataclasses import replace
import logging

from feasibility import build_route
from instance import Instance
from orders import Order, Position
from routes import Direction, Route


logger = logging.getLogger(__name__)


def _mirror_order(order: Order) -> Order:
    match order.position_requirement:
        case Position.FIRST:
            position = Position.LAST
        case Position.LAST:
            position = Position.FIRST
        case _:
            position = None
    return replace(
        order,
        origin=order.destination,
        destination=order.origin,
        pickup_window=order.delivery_window.reflected(),
        delivery_window=order.pickup_window.reflected(),
        position_requirement=position,
    )


def mirror_mp1d(instance: Instance) -> Instance:
    """Return the mirrored instance; mirroring twice restores the original."""
    # Coordinate-derived distances are symmetric and need no transposition.
    matrix = (
        None if instance.distance_matrix is None
        else instance.distance_matrix.transposed()
    )
    return Instance(
        locations=instance.locations,
        orders=tuple(map(_mirror_order, instance.orders)),
        modes=tuple(mode.mirrored() for mode in instance.modes),
        overlay=instance.overlay,
        weight_unit=instance.weight_unit,
        epoch=instance.epoch,
        distance_matrix=matrix,
        coordinate_system=instance.coordinate_system,
        distance_unit=instance.distance_unit,
    )


def unmirror_route(route: Route, original: Instance) -> Route | None:
    """Turn a 1PMD route of the mirrored instance into an MP1D route.

    The reversed stop sequence is validated again on the original instance,
    which also produces its forward-time schedule. Returns None (and logs) if
    the original instance rejects it.
    """
    stops = tuple(reversed(route.stops))
    mode = original.mode(route.mode)
    unmirrored = build_route(
        stops, route.orders, mode, original, Direction.MULTI_PICKUP_ONE_DROP,
    )
    if unmirrored is None:
        logger.info(
            'mirrored route %s is infeasible in forward time; dropping it',
            '-'.join(stops),
        )
    return unmirrored
