"""Orders are shipments picked up at one place and dropped at another."""

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from datetime import datetime
from enum import StrEnum
from typing import Any, Self

from units import (
    from_milli, minutes_since, parse_timestamp, timestamp_at, to_milli,
)


class Position(StrEnum):
    """Where on a route an order's stop is required to be visited."""
    FIRST = 'first'
    LAST = 'last'


@dataclass(order=True, frozen=True, slots=True)
class Window:
    """A closed time interval in minutes since the instance epoch."""
    earliest: int
    latest: int

    def is_ordered(self) -> bool:
        """Return True if the window opens no later than it closes."""
        return self.earliest <= self.latest

    @property
    def span(self) -> int:
        """Length of the window in minutes."""
        return self.latest - self.earliest

    def intersect(self, other: Self) -> Self:
        """Return the overlap of two windows; it is unordered when empty."""
        return self.__class__(
            max(self.earliest, other.earliest), min(self.latest, other.latest),
        )

    def reflected(self) -> Self:
        """Return the window mirrored through the epoch."""
        return self.__class__(-self.latest, -self.earliest)

    @classmethod
    def from_pair(cls, pair: Iterable[str], epoch: datetime) -> Self:
        """Parse a two-element list of ISO-8601 timestamps."""
        earliest, latest = (parse_timestamp(text) for text in pair)
        return cls(
            minutes_since(epoch, earliest), minutes_since(epoch, latest),
        )

    def to_pair(self, epoch: datetime) -> list[str]:
        """Format the window as a two-element list of ISO-8601 timestamps."""
        return [
            timestamp_at(epoch, self.earliest),
            timestamp_at(epoch, self.latest),
        ]


@dataclass(frozen=True, match_args=False, slots=True)
class Order:
    """A pickup-and-delivery request with its weight, windows and labels."""
    id: str
    origin: str
    destination: str
    weight: int  # milli-units of the instance weight unit
    pickup_window: Window
    delivery_window: Window
    product_tags: frozenset[str] = frozenset()
    position_requirement: Position | None = None

    def __repr__(self) -> str:
        return (
            f'{self.__class__.__name__}({self.id!r}, '
            + f'{self.origin!r} -> {self.destination!r})'
        )

    @property
    def od_pair(self) -> tuple[str, str]:
        """The (origin, destination) location ids of this order."""
        return self.origin, self.destination

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], epoch: datetime) -> Self:
        """Build an order from its instance-file object."""
        position = data.get('position_requirement')
        return cls(
            id=str(data['id']),
            origin=str(data['origin']),
            destination=str(data['destination']),
            weight=to_milli(data['weight']),
            pickup_window=Window.from_pair(data['pickup_window'], epoch),
            delivery_window=Window.from_pair(data['delivery_window'], epoch),
            product_tags=frozenset(data.get('product_tags', ())),
            position_requirement=(
                None if position is None else Position(position)
            ),
        )

    def to_dict(self, epoch: datetime) -> dict[str, Any]:
        """Return the instance-file object for this order."""
        data: dict[str, Any] = {
            'id': self.id,
            'origin': self.origin,
            'destination': self.destination,
            'weight': from_milli(self.weight),
            'pickup_window': self.pickup_window.to_pair(epoch),
            'delivery_window': self.delivery_window.to_pair(epoch),
            'product_tags': sorted(self.product_tags),
        }
        if self.position_requirement is not None:
            data['position_requirement'] = str(self.position_requirement)
        return data


def total_weight(orders: Iterable[Order]) -> int:
    """Sum the milli-unit weights of several orders."""
    return sum(order.weight for order in orders)
