"""Fixed-point quantities and instance-relative time used by the solver.

Weights, distances, rates, speeds and costs are all stored as integer
milli-units (the decimal value times 1000) so that sums and comparisons are
exact. Times are integer minutes counted from an instance epoch.
"""

from datetime import datetime, timedelta
from decimal import Decimal, ROUND_HALF_UP
from typing import Final


MILLI: Final[int] = 1000
MINUTES_PER_HOUR: Final[int] = 60
MINUTES_PER_DAY: Final[int] = 24 * MINUTES_PER_HOUR


def to_milli(value: float | int | str | Decimal) -> int:
    """Convert a decimal quantity to integer milli-units, rounding half up."""
    if isinstance(value, bool):
        raise TypeError('quantities cannot be booleans')
    decimal_value = Decimal(str(value)) * MILLI
    if not decimal_value.is_finite():
        raise ValueError(f'quantity must be finite, not {value!r}')
    return int(decimal_value.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def from_milli(milli: int) -> float:
    """Convert integer milli-units back to a float for output."""
    return milli / MILLI


def optional_from_milli(milli: int | None) -> float | None:
    """Like from_milli, passing None through."""
    return None if milli is None else from_milli(milli)


def format_milli(milli: int) -> str:
    """Format integer milli-units as a decimal string with three places."""
    sign = '-' if milli < 0 else ''
    whole, frac = divmod(abs(milli), MILLI)
    return f'{sign}{whole}.{frac:03d}'


def ceil_div(numerator: int, denominator: int) -> int:
    """Integer division rounding toward positive infinity."""
    if denominator <= 0:
        raise ValueError('denominator must be positive')
    return -(-numerator // denominator)


def scale_milli(milli: int, factor: float) -> int:
    """Scale milli-units by a decimal factor, rounding down."""
    return int(Decimal(milli) * Decimal(str(factor)))


def hours_to_minutes(hours: float) -> int:
    """Convert a number of hours to whole minutes, rounding half up."""
    minutes = Decimal(str(hours)) * MINUTES_PER_HOUR
    return int(minutes.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def parse_timestamp(timestamp: str) -> datetime:
    """Parse an ISO-8601 timestamp, dropping seconds below the minute."""
    moment = datetime.fromisoformat(timestamp.strip())
    return moment.replace(second=0, microsecond=0)


def minutes_since(epoch: datetime, moment: datetime) -> int:
    """Return the whole number of minutes from the epoch to a moment."""
    return (moment - epoch) // timedelta(minutes=1)


def timestamp_at(epoch: datetime, minutes: int) -> str:
    """Format the moment lying some minutes after the epoch as ISO-8601."""
    return (epoch + timedelta(minutes=minutes)).isoformat()
