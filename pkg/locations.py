"""Locations are the pickup and delivery points that orders move between."""

from collections.abc import Iterable, Mapping
import math
from typing import Any, Self
from dataclasses import dataclass


@dataclass(order=True, frozen=True, match_args=False, slots=True)
class Location:
    """A named point with coordinates and the region labels it belongs to."""
    id: str
    coordinates: tuple[float, float]
    region_tags: frozenset[str]

    def __init__(
        self,
        id: str,
        coordinates: Iterable[float],
        region_tags: Iterable[str] = (),
    ) -> None:
        x, y = (float(value) for value in coordinates)
        object.__setattr__(self, 'id', str(id))
        object.__setattr__(self, 'coordinates', (x, y))
        object.__setattr__(self, 'region_tags', frozenset(region_tags))

    def __repr__(self) -> str:
        return f'{self.__class__.__name__}({self.id!r})'

    def has_finite_coordinates(self) -> bool:
        """Return True if both coordinates are finite numbers."""
        return all(math.isfinite(value) for value in self.coordinates)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Build a location from its instance-file object."""
        return cls(
            data['id'],
            data['coordinates'],
            data.get('region_tags', ()),
        )

    def to_dict(self) -> dict[str, Any]:
        """Return the instance-file object for this location."""
        return {
            'id': self.id,
            'coordinates': list(self.coordinates),
            'region_tags': sorted(self.region_tags),
        }
