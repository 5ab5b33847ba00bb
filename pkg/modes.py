"""Transport modes describe one kind of vehicle in a heterogeneous fleet."""

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from typing import Any, Self

from units import from_milli, to_milli


@dataclass(frozen=True, match_args=False, slots=True)
class RateTable:
    """Per-unit-distance cost keyed by (origin region, destination region)."""
    default: int  # milli-currency per unit distance
    lanes: tuple[tuple[str, str, int], ...] = ()

    _lookup: dict[tuple[str, str], int] = field(
        init=False, repr=False, compare=False,
    )

    def __post_init__(self) -> None:
        lookup = {(origin, end): rate for origin, end, rate in self.lanes}
        object.__setattr__(self, '_lookup', lookup)

    def rate(
        self, origin_tags: Iterable[str], destination_tags: Iterable[str],
    ) -> int:
        """Return the rate of the first matching lane, or the default.

        Lanes are matched by trying every (origin tag, destination tag) pair
        in sorted order, so the result is deterministic when a location
        carries several region tags.
        """
        sorted_destination_tags = sorted(destination_tags)
        for origin_tag in sorted(origin_tags):
            for destination_tag in sorted_destination_tags:
                rate = self._lookup.get((origin_tag, destination_tag))
                if rate is not None:
                    return rate
        return self.default

    def transposed(self) -> Self:
        """Return the table with every lane direction reversed."""
        return self.__class__(
            self.default,
            tuple(sorted(
                (end, origin, rate) for origin, end, rate in self.lanes
            )),
        )

    @classmethod
    def from_value(cls, value: float | Mapping[str, Any]) -> Self:
        """Parse either a bare default rate or a {default, lanes} object."""
        if isinstance(value, Mapping):
            lanes = tuple(sorted(
                (str(lane['from']), str(lane['to']), to_milli(lane['rate']))
                for lane in value.get('lanes', ())
            ))
            return cls(to_milli(value['default']), lanes)
        return cls(to_milli(value))

    def to_value(self) -> dict[str, Any]:
        """Return the configuration-file object for this table."""
        return {
            'default': from_milli(self.default),
            'lanes': [
                {'from': origin, 'to': end, 'rate': from_milli(rate)}
                for origin, end, rate in self.lanes
            ],
        }


def _optional_milli(value: Any) -> int | None:
    return None if value is None else to_milli(value)


def _optional_float(milli: int | None) -> float | None:
    return None if milli is None else from_milli(milli)


@dataclass(frozen=True, match_args=False, slots=True)
class TransportMode:
    """A vehicle type with its capacity, stop limits, distance caps and costs.

    All distances, the capacity, the average speed and the costs are stored in
    milli-units. ``max_oor_percent`` is stored in milli-percent.
    """
    id: str
    capacity: int
    cost_rate: RateTable
    average_speed: int  # milli distance units per hour
    max_drops: int = 1
    max_pickups: int = 1
    max_total_distance: int | None = None
    max_oor_distance: int | None = None
    max_oor_percent: int | None = None
    max_first_last_drop_distance: int | None = None
    max_first_last_pickup_distance: int | None = None
    fixed_cost: int = 0
    fleet_cap: int | None = None
    serviceable_regions: frozenset[str] | None = None
    forbidden_product_tags: frozenset[str] = frozenset()

    def __repr__(self) -> str:
        return f'{self.__class__.__name__}({self.id!r})'

    def optional_caps(self) -> dict[str, int | None]:
        """Return every optional numeric cap keyed by its field name."""
        return {
            'max_total_distance': self.max_total_distance,
            'max_oor_distance': self.max_oor_distance,
            'max_oor_percent': self.max_oor_percent,
            'max_first_last_drop_distance': self.max_first_last_drop_distance,
            'max_first_last_pickup_distance': (
                self.max_first_last_pickup_distance
            ),
            'fleet_cap': self.fleet_cap,
        }

    def mirrored(self) -> Self:
        """Return the mode with pickup-side and drop-side limits swapped."""
        return replace(
            self,
            max_drops=self.max_pickups,
            max_pickups=self.max_drops,
            max_first_last_drop_distance=self.max_first_last_pickup_distance,
            max_first_last_pickup_distance=self.max_first_last_drop_distance,
            cost_rate=self.cost_rate.transposed(),
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Build a transport mode from its instance-file object."""
        regions = data.get('serviceable_regions')
        return cls(
            id=str(data['id']),
            capacity=to_milli(data['capacity']),
            cost_rate=RateTable.from_value(data.get('cost_rate', 1.0)),
            average_speed=to_milli(data['average_speed']),
            max_drops=int(data.get('max_drops', 1)),
            max_pickups=int(data.get('max_pickups', 1)),
            max_total_distance=_optional_milli(data.get('max_total_distance')),
            max_oor_distance=_optional_milli(data.get('max_oor_distance')),
            max_oor_percent=_optional_milli(data.get('max_oor_percent')),
            max_first_last_drop_distance=_optional_milli(
                data.get('max_first_last_drop_distance')
            ),
            max_first_last_pickup_distance=_optional_milli(
                data.get('max_first_last_pickup_distance')
            ),
            fixed_cost=to_milli(data.get('fixed_cost', 0)),
            fleet_cap=(
                None if data.get('fleet_cap') is None
                else int(data['fleet_cap'])
            ),
            serviceable_regions=(
                None if regions is None else frozenset(regions)
            ),
            forbidden_product_tags=frozenset(
                data.get('forbidden_product_tags', ())
            ),
        )

    def to_dict(self) -> dict[str, Any]:
        """Return the instance-file object for this mode."""
        return {
            'id': self.id,
            'capacity': from_milli(self.capacity),
            'cost_rate': self.cost_rate.to_value(),
            'average_speed': from_milli(self.average_speed),
            'max_drops': self.max_drops,
            'max_pickups': self.max_pickups,
            'max_total_distance': _optional_float(self.max_total_distance),
            'max_oor_distance': _optional_float(self.max_oor_distance),
            'max_oor_percent': _optional_float(self.max_oor_percent),
            'max_first_last_drop_distance': _optional_float(
                self.max_first_last_drop_distance
            ),
            'max_first_last_pickup_distance': _optional_float(
                self.max_first_last_pickup_distance
            ),
            'fixed_cost': from_milli(self.fixed_cost),
            'fleet_cap': self.fleet_cap,
            'serviceable_regions': (
                None if self.serviceable_regions is None
                else sorted(self.serviceable_regions)
            ),
            'forbidden_product_tags': sorted(self.forbidden_product_tags),
        }
