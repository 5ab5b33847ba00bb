"""Distance tables between locations and the out-of-route (OOR) metrics."""

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
import itertools
from typing import Any, Final, Self
import warnings

import numpy as np
import numpy.typing as npt

from locations import Location
from units import from_milli, to_milli, MILLI


class CoordinateSystem(StrEnum):
    """How location coordinates are interpreted when deriving distances."""
    PLANAR = 'planar'
    GEODETIC = 'geodetic'  # (latitude, longitude) in degrees


# Mean Earth radius in the distance units accepted for geodetic coordinates.
EARTH_RADIUS: Final[dict[str, float]] = {
    'mile': 3958.8,
    'kilometer': 6371.0,
}


class UnknownLocationError(KeyError):
    """Raised when a distance lookup names a location the table lacks."""


class NonMetricDistanceWarning(UserWarning):
    """Issued when a distance table violates the triangle inequality."""


@dataclass(frozen=True, match_args=False, slots=True)
class DistanceMatrix:
    """A square table of nonnegative milli-unit distances keyed by location id.

    Symmetry is not assumed: ``d(a, b)`` and ``d(b, a)`` may differ.
    """
    location_ids: tuple[str, ...]
    table: npt.NDArray[np.int64] = field(repr=False)

    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = len(self.location_ids)
        if len(set(self.location_ids)) != n:
            raise ValueError('distance matrix location ids must be unique')
        table = np.asarray(self.table, dtype=np.int64)
        if table.shape != (n, n):
            raise ValueError(
                f'distance matrix must be {n}x{n}, not {table.shape}'
            )
        if (table < 0).any():
            raise ValueError('distances cannot be negative')
        if n > 0 and (np.diag(table) != 0).any():
            raise ValueError('distance from a location to itself must be 0')
        table.setflags(write=False)
        object.__setattr__(self, 'table', table)
        object.__setattr__(
            self, '_index',
            {loc: i for i, loc in enumerate(self.location_ids)},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return (
            self.location_ids == other.location_ids
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self) -> int:
        return hash((self.location_ids, self.table.tobytes()))

    def __contains__(self, location_id: object) -> bool:
        return location_id in self._index

    def index_of(self, location_id: str) -> int:
        """Return the row/column index of a location id."""
        try:
            return self._index[location_id]
        except KeyError:
            raise UnknownLocationError(location_id) from None

    def d(self, origin: str, end: str) -> int:
        """Return the milli-unit distance from one location to another."""
        return int(self.table[self.index_of(origin), self.index_of(end)])

    def row(self, origin: str) -> npt.NDArray[np.int64]:
        """Return all distances leaving one location, in location_ids order."""
        return self.table[self.index_of(origin)]

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def transposed(self) -> Self:
        """Return the matrix with every direction reversed."""
        return self.__class__(self.location_ids, self.table.T.copy())

    @classmethod
    def from_rows(
        cls, location_ids: Sequence[str], rows: Sequence[Sequence[float]],
    ) -> Self:
        """Build a matrix from row-major decimal distances."""
        table = np.array(
            [[to_milli(value) for value in row] for row in rows],
            dtype=np.int64,
        )
        if table.size == 0:
            table = np.zeros((len(location_ids), len(location_ids)), np.int64)
        return cls(tuple(location_ids), table)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Parse the ``distance_matrix`` block of an instance file."""
        return cls.from_rows(
            [str(loc) for loc in data['location_ids']], data['rows'],
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            'location_ids': list(self.location_ids),
            'rows': [
                [from_milli(int(value)) for value in row] for row in self.table
            ],
        }


def coordinate_distances(
    locations: Sequence[Location],
    coordinate_system: CoordinateSystem = CoordinateSystem.PLANAR,
    distance_unit: str = 'mile',
) -> DistanceMatrix:
    """Derive a symmetric distance matrix from location coordinates."""
    ids = tuple(location.id for location in locations)
    if not locations:
        return DistanceMatrix(ids, np.zeros((0, 0), dtype=np.int64))
    points = np.array([location.coordinates for location in locations])

    match coordinate_system:
        case CoordinateSystem.PLANAR:
            deltas = points[:, np.newaxis, :] - points[np.newaxis, :, :]
            distances = np.hypot(deltas[..., 0], deltas[..., 1])
        case CoordinateSystem.GEODETIC:
            if distance_unit not in EARTH_RADIUS:
                raise ValueError(
                    f'geodetic distances need a unit in {sorted(EARTH_RADIUS)}'
                )
            lat, lon = np.radians(points[:, 0]), np.radians(points[:, 1])
            dlat = lat[:, np.newaxis] - lat[np.newaxis, :]
            dlon = lon[:, np.newaxis] - lon[np.newaxis, :]
            haversine = (
                np.sin(dlat / 2.0) ** 2
                + np.cos(lat)[:, np.newaxis] * np.cos(lat)[np.newaxis, :]
                * np.sin(dlon / 2.0) ** 2
            )
            distances = (
                2.0 * EARTH_RADIUS[distance_unit]
                * np.arcsin(np.sqrt(np.clip(haversine, 0.0, 1.0)))
            )
        case _:
            raise ValueError(
                f'unknown coordinate system: {coordinate_system!r}'
            )

    table = np.rint(distances * MILLI).astype(np.int64)
    np.fill_diagonal(table, 0)
    return DistanceMatrix(ids, table)


@dataclass(frozen=True, slots=True)
class RouteDistances:
    """Total, direct and out-of-route distances of a stop sequence."""
    total_distance: int
    direct_distance: int
    oor_distance: int

    @property
    def oor_percent(self) -> float:
        """OOR distance as a percentage of the direct distance."""
        if self.direct_distance == 0:
            return 0.0
        return 100.0 * self.oor_distance / self.direct_distance

    def oor_percent_exceeds(self, cap_milli_percent: int) -> bool:
        """Compare the OOR percentage to a milli-percent cap exactly."""
        return (
            100 * MILLI * self.oor_distance
            > cap_milli_percent * self.direct_distance
        )


def route_distances(
    stops: Sequence[str], matrix: DistanceMatrix,
) -> RouteDistances:
    """Measure a stop sequence: leg total, first-to-last direct, and OOR."""
    if len(stops) < 2:
        raise ValueError('a route needs at least two stops')
    total = sum(matrix.d(a, b) for a, b in itertools.pairwise(stops))
    direct = matrix.d(stops[0], stops[-1])
    # Rounding each leg to milli-units may leave a collinear route a few
    # milli-units short of its direct distance.
    if total - direct < -(len(stops) - 1):
        warnings.warn(
            f'route {"-".join(stops)} is shorter than its direct distance;'
            + ' clamping the out-of-route distance to 0',
            NonMetricDistanceWarning,
        )
    return RouteDistances(total, direct, max(0, total - direct))


def pairwise_oor(
    origin: str, via: str, end: str, matrix: DistanceMatrix,
) -> int:
    """Return the detour of origin -> via -> end over origin -> end.

    The result is clamped at 0 for tables that break the triangle inequality.
    """
    detour = matrix.d(origin, via) + matrix.d(via, end) - matrix.d(origin, end)
    if detour < 0:
        warnings.warn(
            f'triangle inequality fails for {origin} -> {via} -> {end};'
            + ' clamping the out-of-route distance to 0',
            NonMetricDistanceWarning,
        )
        return 0
    return detour


def nearest_first(
    keys: Mapping[str, int], candidates: Iterable[str],
) -> list[str]:
    """Sort candidate ids by a precomputed key, breaking ties by id."""
    ordered = sorted(candidates)
    values = np.array([keys[loc] for loc in ordered], dtype=np.int64)
    # A stable sort on id-sorted input breaks key ties by ascending id.
    permutation = np.argsort(values, kind='stable')
    return [ordered[i] for i in permutation]
