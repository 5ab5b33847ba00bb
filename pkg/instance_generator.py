"""Seeded synthetic instances shaped after a profile, and instance summaries.

Locations are scattered uniformly over a square and tagged with the quadrant
they fall in. Order weights follow a log-normal distribution truncated to the
profile's [min, max] range, with its location parameter fitted so the sample
mean hits the profile's average; this is an approximation of real, heavily
skewed shipment weights, not a model of them.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from datetime import datetime
import json
import logging
import math
from typing import Any, Final, Self

import numpy as np
from scipy.optimize import brentq
from scipy.stats import truncnorm

from configs import ConfigError
from geometry import coordinate_distances
from instance import Instance, WEIGHT_UNITS
from locations import Location
from modes import RateTable, TransportMode
from orders import Order, Window
from overlay import ConstraintOverlay, DEFAULT_MAX_DRIVE_HOURS
from units import ceil_div, MINUTES_PER_DAY, MINUTES_PER_HOUR, to_milli


logger = logging.getLogger(__name__)

GENERATED_EPOCH: Final[datetime] = datetime(2024, 1, 1)
# Random slack added between the earliest possible arrival and the opening
# of a delivery window.
MAX_DELIVERY_SLACK_MINUTES: Final[int] = 240
SPAN_SPREAD: Final[tuple[float, float]] = (0.5, 1.5)
WEIGHT_MODEL_NOTE: Final[str] = (
    'order weights: truncated log-normal fitted to (min, avg, max); '
    'approximation'
)

PROFILE_KEYS: Final[frozenset[str]] = frozenset({
    'name', 'n_orders', 'n_origins', 'n_destinations', 'weight_min',
    'weight_avg', 'weight_max', 'capacities', 'max_drops', 'max_pickups',
    'max_distance', 'max_oor', 'max_first_last', 'avg_window_span_days',
    'pickup_span_days', 'speed', 'rate', 'fixed_cost', 'box', 'seed',
    'weight_unit',
})


def _optional_float(value: Any) -> float | None:
    return None if value is None else float(value)


@dataclass(frozen=True, match_args=False, slots=True)
class ProfileSpec:
    """The features a generated instance should have."""
    n_orders: int
    n_origins: int
    n_destinations: int
    weight_min: float
    weight_avg: float
    weight_max: float
    capacities: tuple[float, ...]
    max_drops: tuple[int, ...]
    avg_window_span_days: float
    name: str = 'profile'
    max_pickups: int = 1
    max_distance: float | None = None
    max_oor: float | None = None
    max_first_last: float | None = None
    pickup_span_days: float = 1.0
    speed: float = 50.0
    rate: float = 2.0
    fixed_cost: float = 0.0
    box: float = 350.0
    seed: int = 0
    weight_unit: str = 'pound'

    def __post_init__(self) -> None:
        capacities = tuple(float(cap) for cap in self.capacities)
        drops = self.max_drops
        if isinstance(drops, int):
            drops = (drops,) * len(capacities)
        drops = tuple(int(value) for value in drops)
        object.__setattr__(self, 'capacities', capacities)
        object.__setattr__(self, 'max_drops', drops)

        if self.n_origins < 1 or self.n_destinations < 1:
            raise ConfigError(
                'a profile needs at least one origin and one destination'
            )
        if self.n_orders < max(self.n_origins, self.n_destinations):
            raise ConfigError(
                'n_orders must be at least the number of origins and of'
                + ' destinations so that every location is used'
            )
        if not capacities:
            raise ConfigError('a profile needs at least one truck capacity')
        if len(drops) != len(capacities):
            raise ConfigError('give one max_drops value per truck capacity')
        if any(value < 1 for value in drops) or self.max_pickups < 1:
            raise ConfigError('drop and pickup limits must be positive')
        if self.weight_min <= 0:
            raise ConfigError('the minimum weight must be positive')
        if not self.weight_min <= self.weight_avg <= self.weight_max:
            raise ConfigError('the average weight must lie within [min, max]')
        if self.weight_min < self.weight_max and self.n_orders > 1 and not (
            self.weight_min < self.weight_avg < self.weight_max
        ):
            raise ConfigError(
                'with min < max the average weight must lie strictly '
                'between them'
            )
        if self.weight_max > max(capacities):
            raise ConfigError('the largest order would not fit any truck')
        if self.avg_window_span_days <= 0 or self.pickup_span_days < 0:
            raise ConfigError('window spans must be positive')
        if self.speed <= 0 or self.box <= 0:
            raise ConfigError('speed and box size must be positive')
        # Rests are only taken at stops, so no single leg may outlast a shift.
        if self.box * math.sqrt(2) / self.speed > DEFAULT_MAX_DRIVE_HOURS:
            raise ConfigError(
                'the box is too large: crossing it takes longer than one'
                + ' shift of driving at this speed'
            )
        if self.weight_unit not in WEIGHT_UNITS:
            raise ConfigError(
                f'weight unit must be one of {sorted(WEIGHT_UNITS)}'
            )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        unknown = sorted(set(data) - PROFILE_KEYS)
        if unknown:
            raise ConfigError(
                f'unknown key(s) in profile: {", ".join(unknown)}'
            )
        try:
            drops = data['max_drops']
            return cls(
                n_orders=int(data['n_orders']),
                n_origins=int(data['n_origins']),
                n_destinations=int(data['n_destinations']),
                weight_min=float(data['weight_min']),
                weight_avg=float(data['weight_avg']),
                weight_max=float(data['weight_max']),
                capacities=tuple(data['capacities']),
                max_drops=drops if isinstance(drops, int) else tuple(drops),
                avg_window_span_days=float(data['avg_window_span_days']),
                name=str(data.get('name', 'profile')),
                max_pickups=int(data.get('max_pickups', 1)),
                max_distance=_optional_float(data.get('max_distance')),
                max_oor=_optional_float(data.get('max_oor')),
                max_first_last=_optional_float(data.get('max_first_last')),
                pickup_span_days=float(data.get('pickup_span_days', 1.0)),
                speed=float(data.get('speed', 50.0)),
                rate=float(data.get('rate', 2.0)),
                fixed_cost=float(data.get('fixed_cost', 0.0)),
                box=float(data.get('box', 350.0)),
                seed=int(data.get('seed', 0)),
                weight_unit=str(data.get('weight_unit', 'pound')),
            )
        except KeyError as exc:
            raise ConfigError(f'profile is missing {exc.args[0]!r}') from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f'malformed profile: {exc}') from exc

    def to_dict(self) -> dict[str, Any]:
        return {
            'name': self.name,
            'n_orders': self.n_orders,
            'n_origins': self.n_origins,
            'n_destinations': self.n_destinations,
            'weight_min': self.weight_min,
            'weight_avg': self.weight_avg,
            'weight_max': self.weight_max,
            'capacities': list(self.capacities),
            'max_drops': list(self.max_drops),
            'max_pickups': self.max_pickups,
            'max_distance': self.max_distance,
            'max_oor': self.max_oor,
            'max_first_last': self.max_first_last,
            'avg_window_span_days': self.avg_window_span_days,
            'pickup_span_days': self.pickup_span_days,
            'speed': self.speed,
            'rate': self.rate,
            'fixed_cost': self.fixed_cost,
            'box': self.box,
            'seed': self.seed,
            'weight_unit': self.weight_unit,
        }


def parse_profile(profile_string: str) -> ProfileSpec:
    """Parse the contents of a profile file."""
    try:
        data = json.loads(profile_string)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f'line {exc.lineno}: profile is not valid JSON: {exc.msg}'
        ) from exc
    if not isinstance(data, Mapping):
        raise ConfigError('a profile must be an object')
    return ProfileSpec.from_dict(data)


def fit_weights(
    rng: np.random.Generator, n: int, low: float, average: float, high: float,
) -> np.ndarray:
    """Draw n weights in [low, high] whose mean is average.

    The draws are stratified quantiles of a truncated log-normal, with the
    smallest and largest pinned to low and high. The location parameter is
    found by root finding on the sample mean, which grows with it.
    """
    if n == 1:
        return np.array([average])
    if low == high:
        return np.full(n, low)
    quantiles = (np.arange(n) + rng.uniform(size=n)) / n
    sigma = max(0.25, math.log(high / low) / 4)
    log_low, log_high = math.log(low), math.log(high)

    def sample(mu: float) -> np.ndarray:
        a, b = (log_low - mu) / sigma, (log_high - mu) / sigma
        logs = truncnorm.ppf(quantiles, a, b, loc=mu, scale=sigma)
        values = np.clip(np.exp(logs), low, high)
        values[0], values[-1] = low, high
        return values

    def excess(mu: float) -> float:
        return float(sample(mu).mean()) - average

    lo_mu, hi_mu = log_low - 10 * sigma, log_high + 10 * sigma
    if excess(lo_mu) > 0 or excess(hi_mu) < 0:
        raise ConfigError(
            f'an average weight of {average} cannot be reached by {n} orders'
            + f' weighing between {low} and {high}'
        )
    mu = brentq(excess, lo_mu, hi_mu, xtol=1e-9)
    return sample(mu)


def _quadrant(x: float, y: float, box: float) -> str:
    half = box / 2
    return ('S' if y < half else 'N') + ('W' if x < half else 'E')


def _spread(
    rng: np.random.Generator, n_items: int, n_slots: int,
) -> np.ndarray:
    # Every slot is used once before the rest are drawn uniformly.
    slots = np.concatenate([
        np.arange(n_slots), rng.integers(0, n_slots, size=n_items - n_slots),
    ])
    return rng.permutation(slots)


def generate(profile: ProfileSpec) -> Instance:
    """Generate an instance; the result depends only on the profile."""
    rng = np.random.default_rng(profile.seed)
    origin_width = len(str(profile.n_origins))
    dest_width = len(str(profile.n_destinations))
    order_width = len(str(profile.n_orders))

    locations: list[Location] = []
    for prefix, count, width in (
        ('O', profile.n_origins, origin_width),
        ('D', profile.n_destinations, dest_width),
    ):
        points = rng.uniform(0.0, profile.box, size=(count, 2))
        for i, (x, y) in enumerate(points):
            x, y = round(float(x), 3), round(float(y), 3)
            locations.append(Location(
                f'{prefix}{i + 1:0{width}d}', (x, y),
                {_quadrant(x, y, profile.box)},
            ))
    origins = locations[:profile.n_origins]
    destinations = locations[profile.n_origins:]
    matrix = coordinate_distances(locations)

    origin_of = _spread(rng, profile.n_orders, profile.n_origins)
    destination_of = _spread(rng, profile.n_orders, profile.n_destinations)
    weights = rng.permutation(fit_weights(
        rng, profile.n_orders, profile.weight_min, profile.weight_avg,
        profile.weight_max,
    ))
    span_factors = rng.uniform(*SPAN_SPREAD, size=profile.n_orders)
    span_factors /= span_factors.mean()
    slack = rng.integers(
        0, MAX_DELIVERY_SLACK_MINUTES + 1, size=profile.n_orders,
    )

    speed = to_milli(profile.speed)
    pickup = Window(0, round(profile.pickup_span_days * MINUTES_PER_DAY))
    orders: list[Order] = []
    for k in range(profile.n_orders):
        origin = origins[int(origin_of[k])]
        destination = destinations[int(destination_of[k])]
        drive = ceil_div(
            matrix.d(origin.id, destination.id) * MINUTES_PER_HOUR, speed,
        )
        earliest = pickup.earliest + drive + int(slack[k])
        span = round(
            profile.avg_window_span_days * MINUTES_PER_DAY * span_factors[k]
        )
        orders.append(Order(
            id=f'ORD{k + 1:0{order_width}d}',
            origin=origin.id,
            destination=destination.id,
            weight=to_milli(round(float(weights[k]), 3)),
            pickup_window=pickup,
            delivery_window=Window(earliest, earliest + max(span, 1)),
        ))

    def optional(value: float | None) -> int | None:
        return None if value is None else to_milli(value)

    modes = tuple(
        TransportMode(
            id=f'M{i + 1}',
            capacity=to_milli(capacity),
            cost_rate=RateTable(to_milli(profile.rate)),
            average_speed=speed,
            max_drops=drops,
            max_pickups=profile.max_pickups,
            max_total_distance=optional(profile.max_distance),
            max_oor_distance=optional(profile.max_oor),
            max_first_last_drop_distance=optional(profile.max_first_last),
            max_first_last_pickup_distance=optional(profile.max_first_last),
            fixed_cost=to_milli(profile.fixed_cost),
        )
        for i, (capacity, drops) in enumerate(
            zip(profile.capacities, profile.max_drops, strict=True)
        )
    )
    instance = Instance(
        locations=tuple(locations),
        orders=tuple(orders),
        modes=modes,
        overlay=ConstraintOverlay(),
        weight_unit=profile.weight_unit,
        epoch=GENERATED_EPOCH,
    )
    logger.info(
        'generated %r from profile %s (seed %d)',
        instance, profile.name, profile.seed,
    )
    return instance


@dataclass(frozen=True, match_args=False, slots=True)
class InstanceSummary:
    """The feature rows used to describe a dataset."""
    n_orders: int
    n_modes: int
    min_weight: int
    avg_weight: float  # milli-units
    max_weight: int
    total_weight: int
    n_origins: int
    n_destinations: int
    smallest_capacity: int
    largest_capacity: int
    max_drops: int
    max_distance: int | None
    max_oor: int | None
    max_first_last: int | None
    avg_window_span_days: float
    capacities: tuple[int, ...] = field(default=(), repr=False)

    def rows(self) -> list[tuple[str, Any]]:
        """Return (label, value) rows in display units."""
        def units(milli: float | None) -> float | None:
            return None if milli is None else round(milli / 1000, 3)

        return [
            ('No. of Orders', self.n_orders),
            ('No. of Transport Modes', self.n_modes),
            ('Min Order Weight', units(self.min_weight)),
            ('Avg Order Weight', units(self.avg_weight)),
            ('Max Order Weight', units(self.max_weight)),
            ('Total Order Weight', units(self.total_weight)),
            ('No. of Origins', self.n_origins),
            ('No. of Destinations', self.n_destinations),
            ('Smallest Truck Capacity', units(self.smallest_capacity)),
            ('Largest Truck Capacity', units(self.largest_capacity)),
            ('Max No. of Drops', self.max_drops),
            ('Max Distance', units(self.max_distance)),
            ('Max OOR Distance', units(self.max_oor)),
            ('Max First-Last Drop Distance', units(self.max_first_last)),
            (
                'Avg Delivery Window Span (days)',
                round(self.avg_window_span_days, 2),
            ),
        ]


def _largest(values: Sequence[int | None]) -> int | None:
    present = [value for value in values if value is not None]
    return max(present) if present else None


def summarize(instance: Instance) -> InstanceSummary:
    """Compute the dataset features of an instance."""
    if not instance.orders or not instance.modes:
        raise ValueError('an instance needs orders and modes to be summarized')
    weights = [order.weight for order in instance.orders]
    capacities = tuple(sorted(mode.capacity for mode in instance.modes))
    spans = [order.delivery_window.span for order in instance.orders]
    return InstanceSummary(
        n_orders=len(instance.orders),
        n_modes=len(instance.modes),
        min_weight=min(weights),
        avg_weight=sum(weights) / len(weights),
        max_weight=max(weights),
        total_weight=sum(weights),
        n_origins=len({order.origin for order in instance.orders}),
        n_destinations=len({order.destination for order in instance.orders}),
        smallest_capacity=capacities[0],
        largest_capacity=capacities[-1],
        max_drops=max(mode.max_drops for mode in instance.modes),
        max_distance=_largest(
            [mode.max_total_distance for mode in instance.modes]
        ),
        max_oor=_largest([mode.max_oor_distance for mode in instance.modes]),
        max_first_last=_largest(
            [mode.max_first_last_drop_distance for mode in instance.modes]
        ),
        avg_window_span_days=sum(spans) / len(spans) / MINUTES_PER_DAY,
        capacities=capacities,
    )


if __name__ == '__main__':

    import sys
    from pathlib import Path

    _, arg_1 = sys.argv
    spec = parse_profile(Path(arg_1).read_text(encoding='utf-8'))
    for label, value in summarize(generate(spec)).rows():
        print(f'{label:>32}: {value}')
