"""Hours-of-service scheduling of a stop sequence against order time windows.

The scheduler is a deterministic forward simulation. The driver arrives at the
first stop as soon as its windows open and then drives each leg in turn. A
rest of the minimum off-duty length is inserted at a stop whenever the next
leg would push the shift past the driving or on-duty limit. Waiting for a
window to open is on-duty time; when waiting would break the on-duty limit the
driver rests at the stop instead. Rests are only ever taken at stops.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from datetime import datetime
import itertools
import logging
from typing import Any, Final, Self

from geometry import DistanceMatrix
from modes import TransportMode
from orders import Order, Window
from overlay import ConstraintOverlay
from units import (
    ceil_div, minutes_since, MINUTES_PER_HOUR, parse_timestamp, timestamp_at,
)
from violations import Violation


logger = logging.getLogger(__name__)

# Step between candidate start times and rest lengths in the exhaustive search.
SEARCH_GRID_MINUTES: Final[int] = 15


@dataclass(frozen=True, slots=True)
class ShiftSummary:
    """Driving and on-duty totals between two consecutive rests."""
    start: int
    end: int
    drive_minutes: int

    @property
    def duty_minutes(self) -> int:
        return self.end - self.start


@dataclass(frozen=True, match_args=False, slots=True)
class Schedule:
    """Per-stop arrival, service and departure times plus inserted rests."""
    stops: tuple[str, ...]
    arrivals: tuple[int, ...]
    service_starts: tuple[int, ...]
    departures: tuple[int, ...]
    leg_drive_minutes: tuple[int, ...]
    rest_periods: tuple[tuple[int, int], ...]
    shift_start: int

    def shifts(self) -> list[ShiftSummary]:
        """Split the schedule into on-duty shifts separated by rests."""
        boundaries = [self.shift_start]
        for rest_start, rest_end in self.rest_periods:
            boundaries.extend((rest_start, rest_end))
        boundaries.append(self.departures[-1])
        summaries: list[ShiftSummary] = []
        for start, end in zip(boundaries[::2], boundaries[1::2], strict=True):
            drive = sum(
                leg for leg, arrival in zip(
                    self.leg_drive_minutes, self.arrivals[1:], strict=True,
                )
                if start < arrival <= end
            )
            summaries.append(ShiftSummary(start, end, drive))
        return summaries

    def to_dict(self, epoch: datetime) -> dict[str, Any]:
        """Return the solution-file object with ISO-8601 timestamps."""
        return {
            'shift_start': timestamp_at(epoch, self.shift_start),
            'stops': [
                {
                    'location': stop,
                    'arrival': timestamp_at(epoch, arrival),
                    'service_start': timestamp_at(epoch, start),
                    'departure': timestamp_at(epoch, departure),
                }
                for stop, arrival, start, departure in zip(
                    self.stops, self.arrivals, self.service_starts,
                    self.departures, strict=True,
                )
            ],
            'leg_drive_minutes': list(self.leg_drive_minutes),
            'rest_periods': [
                [timestamp_at(epoch, start), timestamp_at(epoch, end)]
                for start, end in self.rest_periods
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], epoch: datetime) -> Self:
        """Rebuild a schedule from its solution-file object."""
        def minutes(text: str) -> int:
            return minutes_since(epoch, parse_timestamp(text))

        stops = data['stops']
        return cls(
            stops=tuple(stop['location'] for stop in stops),
            arrivals=tuple(minutes(stop['arrival']) for stop in stops),
            service_starts=tuple(
                minutes(stop['service_start']) for stop in stops
            ),
            departures=tuple(minutes(stop['departure']) for stop in stops),
            leg_drive_minutes=tuple(data['leg_drive_minutes']),
            rest_periods=tuple(
                (minutes(start), minutes(end))
                for start, end in data['rest_periods']
            ),
            shift_start=minutes(data['shift_start']),
        )


def drive_minutes(distance: int, mode: TransportMode) -> int:
    """Convert a milli-unit distance to whole driving minutes, rounding up."""
    return ceil_div(distance * MINUTES_PER_HOUR, mode.average_speed)


def stop_windows(
    stops: Sequence[str], orders: Iterable[Order],
) -> list[Window | None]:
    """Intersect the windows binding at each stop; None where nothing binds.

    An order's pickup window binds at its origin and its delivery window binds
    at its destination. The intersection may be empty (unordered).
    """
    windows: list[Window | None] = [None] * len(stops)
    position = {stop: i for i, stop in enumerate(stops)}
    for order in orders:
        for location, window in (
            (order.origin, order.pickup_window),
            (order.destination, order.delivery_window),
        ):
            i = position.get(location)
            if i is None:
                continue
            current = windows[i]
            windows[i] = (
                window if current is None else current.intersect(window)
            )
    return windows


def schedule_route(
    stops: Sequence[str],
    orders: Sequence[Order],
    mode: TransportMode,
    overlay: ConstraintOverlay,
    matrix: DistanceMatrix,
) -> Schedule | Violation:
    """Build the earliest-start HOS schedule, or say what makes it impossible.

    A missed window is blamed on hours of service when the same stop would
    have been reached in time by a driver without HOS limits.
    """
    hos = overlay.hos
    max_drive, max_duty = hos.max_drive_minutes, hos.max_duty_minutes
    min_rest = hos.min_rest_minutes
    service = overlay.service_minutes_per_stop

    windows = stop_windows(stops, orders)
    if any(w is not None and not w.is_ordered() for w in windows):
        return Violation.TIME_WINDOWS
    legs = [
        drive_minutes(matrix.d(a, b), mode)
        for a, b in itertools.pairwise(stops)
    ]
    if service > max_duty or any(
        leg > max_drive or leg > max_duty for leg in legs
    ):
        return Violation.HOS

    first_window = windows[0]
    t = 0 if first_window is None else first_window.earliest
    shift_start = t
    arrivals, service_starts, departures = [t], [t], [t + service]
    rests: list[tuple[int, int]] = []
    driven = 0
    t += service
    relaxed = t  # departure time of a driver with no HOS limits

    for leg, window in zip(legs, windows[1:], strict=True):
        if driven + leg > max_drive or t + leg - shift_start > max_duty:
            rests.append((t, t + min_rest))
            t += min_rest
            shift_start, driven = t, 0
        t += leg
        driven += leg
        arrival, relaxed_arrival = t, relaxed + leg

        opens = arrival if window is None else window.earliest
        closes = None if window is None else window.latest
        if closes is not None and arrival > closes:
            if relaxed_arrival <= closes:
                return Violation.HOS
            return Violation.TIME_WINDOWS

        start = max(arrival, opens)
        if start + service - shift_start > max_duty:
            # Waiting on duty is not possible, so rest at the stop instead.
            rest_end = max(arrival + min_rest, opens)
            if closes is not None and rest_end > closes:
                return Violation.HOS
            rests.append((arrival, rest_end))
            shift_start, driven, start = rest_end, 0, rest_end

        arrivals.append(arrival)
        service_starts.append(start)
        departures.append(start + service)
        t = start + service
        relaxed = service + (
            relaxed_arrival if window is None
            else max(relaxed_arrival, window.earliest)
        )

    return Schedule(
        stops=tuple(stops),
        arrivals=tuple(arrivals),
        service_starts=tuple(service_starts),
        departures=tuple(departures),
        leg_drive_minutes=tuple(legs),
        rest_periods=tuple(rests),
        shift_start=arrivals[0],
    )


def exhaustive_schedule_search(
    stops: Sequence[str],
    orders: Sequence[Order],
    mode: TransportMode,
    overlay: ConstraintOverlay,
    matrix: DistanceMatrix,
    grid: int = SEARCH_GRID_MINUTES,
) -> bool:
    """Search start times and rest placements for any HOS-feasible schedule.

    The first-stop arrival is tried on a grid across its window. At every stop
    the driver may rest before service (for the minimum length, or exactly
    until the window opens) and may rest again before the next leg. Meant for
    short routes only; the search is exponential in the number of stops.
    """
    hos = overlay.hos
    max_drive, max_duty = hos.max_drive_minutes, hos.max_duty_minutes
    min_rest = hos.min_rest_minutes
    service = overlay.service_minutes_per_stop
    windows = stop_windows(stops, orders)
    if any(w is not None and not w.is_ordered() for w in windows):
        return False
    legs = [
        drive_minutes(matrix.d(a, b), mode)
        for a, b in itertools.pairwise(stops)
    ]

    def visit(i: int, arrival: int, shift_start: int, driven: int) -> bool:
        window = windows[i]
        opens = arrival if window is None else window.earliest
        closes = None if window is None else window.latest
        rest_lengths = {0, min_rest}
        if opens - arrival >= min_rest:
            rest_lengths.add(opens - arrival)
        for rest in sorted(rest_lengths):
            shift, drive = (
                (shift_start, driven) if rest == 0 else (arrival + rest, 0)
            )
            start = max(arrival + rest, opens)
            if closes is not None and start > closes:
                continue
            if start + service - shift > max_duty:
                continue
            departure = start + service
            if i == len(stops) - 1:
                return True
            leg = legs[i]
            for rest_after in (0, min_rest):
                t = departure + rest_after
                next_shift, next_drive = (
                    (shift, drive) if rest_after == 0 else (t, 0)
                )
                if (
                    next_drive + leg > max_drive
                    or t + leg - next_shift > max_duty
                ):
                    continue
                if visit(i + 1, t + leg, next_shift, next_drive + leg):
                    return True
        return False

    first = windows[0]
    if first is None:
        return visit(0, 0, 0, 0)
    starts = range(first.earliest, first.latest + 1, grid)
    return any(visit(0, start, start, 0) for start in starts)


@dataclass(frozen=True, slots=True)
class SchedulingAudit:
    """How the greedy scheduler compared with the exhaustive search."""
    checked: int
    both_feasible: int
    both_infeasible: int
    exhaustive_only: int  # greedy missed a schedule that exists
    greedy_only: int  # greedy found a schedule the search did not


def audit_scheduler(
    cases: Iterable[tuple[
        Sequence[str], Sequence[Order], TransportMode, ConstraintOverlay,
        DistanceMatrix,
    ]],
) -> SchedulingAudit:
    """Run both schedulers on each case and count where they disagree."""
    counts = {'checked': 0, 'both_feasible': 0, 'both_infeasible': 0,
              'exhaustive_only': 0, 'greedy_only': 0}
    for stops, orders, mode, overlay, matrix in cases:
        greedy = isinstance(
            schedule_route(stops, orders, mode, overlay, matrix), Schedule,
        )
        exhaustive = exhaustive_schedule_search(
            stops, orders, mode, overlay, matrix,
        )
        counts['checked'] += 1
        if greedy and exhaustive:
            counts['both_feasible'] += 1
        elif not greedy and not exhaustive:
            counts['both_infeasible'] += 1
        elif exhaustive:
            counts['exhaustive_only'] += 1
            logger.info(
                'greedy scheduler missed a feasible schedule for %s', stops,
            )
        else:
            counts['greedy_only'] += 1
            logger.warning(
                'greedy schedule not found by exhaustive search: %s', stops,
            )
    audit = SchedulingAudit(**counts)
    logger.info(
        'scheduler audit: %d cases, %d missed by the greedy scheduler',
        audit.checked, audit.exhaustive_only,
    )
    return audit
