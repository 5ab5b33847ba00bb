"""An instance bundles locations, orders, transport modes and rule overlays."""

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from datetime import datetime
import json
import math
import re
from typing import Any, Final, Self

from geometry import coordinate_distances, CoordinateSystem, DistanceMatrix
from locations import Location
from modes import TransportMode
from orders import Order
from overlay import ConstraintOverlay
from units import parse_timestamp


WEIGHT_UNITS: Final[frozenset[str]] = frozenset({'pound', 'kilogram'})
REQUIRED_KEYS: Final[tuple[str, ...]] = (
    'locations', 'orders', 'modes', 'overlay', 'weight_unit',
)


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """One violated instance invariant, naming the offending object."""
    kind: str  # 'location', 'order', 'mode', 'overlay' or 'instance'
    subject: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = '' if self.line is None else f'line {self.line}: '
        return f'{where}{self.kind} {self.subject!r}: {self.message}'


class InvalidInstanceError(ValueError):
    """Raised when an instance file cannot be parsed or breaks an invariant."""

    def __init__(self, diagnostics: Iterable[Diagnostic]) -> None:
        self.diagnostics = tuple(diagnostics)
        super().__init__(
            'invalid instance:\n' + '\n'.join(map(str, self.diagnostics))
        )


def _derived() -> Any:
    return field(init=False, repr=False, compare=False)


@dataclass(frozen=True, match_args=False, slots=True)
class Instance:
    """The complete definition of one routing problem."""
    locations: tuple[Location, ...]
    orders: tuple[Order, ...]
    modes: tuple[TransportMode, ...]
    overlay: ConstraintOverlay
    weight_unit: str
    epoch: datetime
    distance_matrix: DistanceMatrix | None = None
    coordinate_system: CoordinateSystem = CoordinateSystem.PLANAR
    distance_unit: str = 'mile'

    _locations: dict[str, Location] = _derived()
    _orders: dict[str, Order] = _derived()
    _modes: dict[str, TransportMode] = _derived()
    _matrix: DistanceMatrix | None = _derived()
    _matrix_error: str | None = _derived()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, '_locations', {loc.id: loc for loc in self.locations},
        )
        object.__setattr__(self, '_orders', {o.id: o for o in self.orders})
        object.__setattr__(self, '_modes', {m.id: m for m in self.modes})

        # An explicit matrix always wins; it is never patched with distances
        # derived from coordinates.
        matrix: DistanceMatrix | None = self.distance_matrix
        error: str | None = None
        if matrix is None:
            try:
                matrix = coordinate_distances(
                    self.locations, self.coordinate_system, self.distance_unit,
                )
            except ValueError as exc:
                matrix, error = None, str(exc)
        object.__setattr__(self, '_matrix', matrix)
        object.__setattr__(self, '_matrix_error', error)

    def __repr__(self) -> str:
        return ''.join([
            '<',
            self.__class__.__name__,
            ' with ',
            f'{len(self.locations)} locations',
            ', ',
            f'{len(self.orders)} orders',
            ', and ',
            f'{len(self.modes)} modes',
            '>',
        ])

    @property
    def matrix(self) -> DistanceMatrix:
        """The distance matrix used for every route measurement."""
        if self._matrix is None:
            raise ValueError(
                f'instance has no usable distances: {self._matrix_error}'
            )
        return self._matrix

    def location(self, location_id: str) -> Location:
        return self._locations[location_id]

    def order(self, order_id: str) -> Order:
        return self._orders[order_id]

    def mode(self, mode_id: str) -> TransportMode:
        return self._modes[mode_id]

    def has_location(self, location_id: str) -> bool:
        return location_id in self._locations

    def iter_sorted_orders(self) -> Iterator[Order]:
        """Return an iterator over the orders sorted by id."""
        return iter(sorted(self.orders, key=lambda order: order.id))

    def iter_sorted_modes(self) -> Iterator[TransportMode]:
        """Return an iterator over the transport modes sorted by id."""
        return iter(sorted(self.modes, key=lambda mode: mode.id))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Build an instance from a decoded instance-file document."""
        epoch = (
            parse_timestamp(data['epoch']) if 'epoch' in data
            else _earliest_timestamp(data.get('orders', ()))
        )
        matrix_data = data.get('distance_matrix')
        return cls(
            locations=tuple(map(Location.from_dict, data['locations'])),
            orders=tuple(Order.from_dict(o, epoch) for o in data['orders']),
            modes=tuple(map(TransportMode.from_dict, data['modes'])),
            overlay=ConstraintOverlay.from_dict(data['overlay']),
            weight_unit=str(data['weight_unit']),
            epoch=epoch,
            distance_matrix=(
                None if matrix_data is None
                else DistanceMatrix.from_dict(matrix_data)
            ),
            coordinate_system=CoordinateSystem(
                data.get('coordinate_system', CoordinateSystem.PLANAR)
            ),
            distance_unit=str(data.get('distance_unit', 'mile')),
        )

    def to_dict(self) -> dict[str, Any]:
        """Return the instance-file document for this instance."""
        data: dict[str, Any] = {
            'epoch': self.epoch.isoformat(),
            'weight_unit': self.weight_unit,
            'distance_unit': self.distance_unit,
            'coordinate_system': str(self.coordinate_system),
            'locations': [loc.to_dict() for loc in self.locations],
            'orders': [order.to_dict(self.epoch) for order in self.orders],
            'modes': [mode.to_dict() for mode in self.modes],
            'overlay': self.overlay.to_dict(),
        }
        if self.distance_matrix is not None:
            data['distance_matrix'] = self.distance_matrix.to_dict()
        return data

    @classmethod
    def parse(cls, instance_string: str) -> Self:
        """Parse the contents of an instance file.

        Syntax and schema errors raise InvalidInstanceError with the line
        number of the offending text when it can be located.
        """
        try:
            data = json.loads(instance_string)
        except json.JSONDecodeError as exc:
            raise InvalidInstanceError([Diagnostic(
                'instance', '<file>', exc.msg, exc.lineno,
            )]) from exc
        if not isinstance(data, dict):
            raise InvalidInstanceError([Diagnostic(
                'instance', '<file>', 'top level must be an object', 1,
            )])
        missing = [key for key in REQUIRED_KEYS if key not in data]
        if missing:
            raise InvalidInstanceError([
                Diagnostic(
                    'instance', '<file>', f'missing top-level key {key!r}',
                )
                for key in missing
            ])
        try:
            return cls.from_dict(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInstanceError(
                [_locate_schema_error(instance_string, data, exc)]
            ) from exc

    def dumps(self) -> str:
        """Serialize the instance as deterministic, indented JSON text."""
        return json.dumps(self.to_dict(), indent=2) + '\n'


def _earliest_timestamp(orders: Iterable[Mapping[str, Any]]) -> datetime:
    stamps = [
        parse_timestamp(text)
        for order in orders
        for key in ('pickup_window', 'delivery_window')
        for text in order.get(key, ())
    ]
    if not stamps:
        return datetime(1970, 1, 1)
    return min(stamps)


def _locate_schema_error(
    text: str, data: Mapping[str, Any], exc: Exception,
) -> Diagnostic:
    """Find which listed object failed to parse and the line it starts on."""
    for section, parser in (
        ('locations', Location.from_dict),
        ('modes', TransportMode.from_dict),
    ):
        for item in data.get(section, ()):
            try:
                parser(item)
            except (KeyError, TypeError, ValueError) as item_exc:
                return _item_diagnostic(text, section[:-1], item, item_exc)
    for item in data.get('orders', ()):
        try:
            Order.from_dict(item, datetime(1970, 1, 1))
        except (KeyError, TypeError, ValueError) as item_exc:
            return _item_diagnostic(text, 'order', item, item_exc)
    return Diagnostic(
        'instance', '<file>', _describe(exc), _line_of(text, None),
    )


def _item_diagnostic(
    text: str, kind: str, item: Any, exc: Exception,
) -> Diagnostic:
    item_id = str(item.get('id', '?')) if isinstance(item, Mapping) else '?'
    return Diagnostic(kind, item_id, _describe(exc), _line_of(text, item_id))


def _describe(exc: Exception) -> str:
    if isinstance(exc, KeyError):
        return f'missing key {exc.args[0]!r}'
    return str(exc)


def _line_of(text: str, item_id: str | None) -> int | None:
    if item_id is None:
        return None
    pattern = re.compile(r'"id"\s*:\s*"' + re.escape(item_id) + '"')
    match = pattern.search(text)
    if match is None:
        return None
    return text.count('\n', 0, match.start()) + 1


def anchor_diagnostics(
    text: str, diagnostics: Iterable[Diagnostic],
) -> list[Diagnostic]:
    """Attach the source line of each diagnostic's subject when it is found."""
    return [
        diagnostic if diagnostic.line is not None
        else Diagnostic(
            diagnostic.kind, diagnostic.subject, diagnostic.message,
            _line_of(text, diagnostic.subject),
        )
        for diagnostic in diagnostics
    ]


def _duplicates(ids: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    repeated: list[str] = []
    for item_id in ids:
        if item_id in seen and item_id not in repeated:
            repeated.append(item_id)
        seen.add(item_id)
    return repeated


def validate_instance(instance: Instance) -> list[Diagnostic]:
    """Check every instance invariant; return one diagnostic per violation."""
    diagnostics: list[Diagnostic] = []

    def report(kind: str, subject: str, message: str) -> None:
        diagnostics.append(Diagnostic(kind, subject, message))

    for loc_id in _duplicates(loc.id for loc in instance.locations):
        report('location', loc_id, 'duplicate location id')
    for loc in instance.locations:
        if not loc.has_finite_coordinates():
            report('location', loc.id, 'coordinates must be finite')

    if instance.weight_unit not in WEIGHT_UNITS:
        report(
            'instance', 'weight_unit',
            f'weight unit must be one of {sorted(WEIGHT_UNITS)}',
        )

    for order_id in _duplicates(order.id for order in instance.orders):
        report('order', order_id, 'duplicate order id')
    for order in instance.orders:
        for end in (order.origin, order.destination):
            if not instance.has_location(end):
                report(
                    'order', order.id, f'references missing location {end!r}',
                )
        if order.origin == order.destination:
            report('order', order.id, 'origin and destination are the same')
        if order.weight < 0:
            report('order', order.id, 'weight cannot be negative')
        if not order.pickup_window.is_ordered():
            report('order', order.id, 'pickup window closes before it opens')
        if not order.delivery_window.is_ordered():
            report('order', order.id, 'delivery window closes before it opens')

    if not instance.modes:
        report('instance', 'modes', 'instance has no transport modes')
    for mode_id in _duplicates(mode.id for mode in instance.modes):
        report('mode', mode_id, 'duplicate mode id')
    for mode in instance.modes:
        if mode.capacity <= 0:
            report('mode', mode.id, 'capacity must be positive')
        if mode.max_drops < 1 or mode.max_pickups < 1:
            report('mode', mode.id, 'stop limits must be positive integers')
        if mode.average_speed <= 0:
            report('mode', mode.id, 'average speed must be positive')
        if mode.fixed_cost < 0 or mode.cost_rate.default < 0:
            report('mode', mode.id, 'costs cannot be negative')
        if any(rate < 0 for _, _, rate in mode.cost_rate.lanes):
            report('mode', mode.id, 'lane rates cannot be negative')
        for cap_name, cap in mode.optional_caps().items():
            if cap is not None and cap <= 0:
                report(
                    'mode', mode.id, f'{cap_name} must be positive when set',
                )

    overlay = instance.overlay
    for pair in overlay.order_incompatibilities:
        if not 1 <= len(pair) <= 2:
            report(
                'overlay', 'order_incompatibilities',
                'pairs need one or two tags',
            )
    hos = overlay.hos
    if not all(
        math.isfinite(value) and value > 0
        for value in (
            hos.max_drive_hours, hos.max_duty_hours, hos.min_rest_hours,
        )
    ):
        report('overlay', 'hos', 'hours-of-service limits must be positive')
    if overlay.service_minutes_per_stop < 0:
        report('overlay', 'service_minutes_per_stop', 'cannot be negative')

    if instance._matrix is None:
        report('instance', 'distances', str(instance._matrix_error))
    else:
        referenced = {loc.id for loc in instance.locations}
        for loc_id in sorted(referenced):
            if loc_id not in instance._matrix:
                report('location', loc_id, 'missing from the distance matrix')

    return diagnostics


def load_instance(instance_string: str) -> Instance:
    """Parse an instance; raise InvalidInstanceError if an invariant fails."""
    instance = Instance.parse(instance_string)
    diagnostics = validate_instance(instance)
    if diagnostics:
        raise InvalidInstanceError(
            anchor_diagnostics(instance_string, diagnostics)
        )
    return instance
