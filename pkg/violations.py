"""Classes of route constraint violations and how they act as routes grow."""

from enum import StrEnum
from typing import Final


class Violation(StrEnum):
    """The constraint class a rejected route breaks."""
    CAPACITY = 'capacity'
    MAX_STOPS = 'max_stops'
    TOTAL_DISTANCE = 'total_distance'
    OOR_DISTANCE = 'oor_distance'
    OOR_PERCENT = 'oor_percent'
    FIRST_LAST_DISTANCE = 'first_last_distance'
    TIME_WINDOWS = 'time_windows'
    HOS = 'hos'
    INCOMPATIBILITY = 'incompatibility'
    REGIONAL = 'regional'
    POSITION = 'position'
    REGION_SERVICE = 'region_service'


# Whether a violation of the class, once present on a route, persists on
# every route formed by appending stops (and their orders) at the end.
# Scheduling classes are excluded: appending orders that pick up at the origin
# narrows the origin window, which shifts the departure and can remove a wait.
MONOTONE_UNDER_EXTENSION: Final[dict[Violation, bool]] = {
    Violation.CAPACITY: True,
    Violation.MAX_STOPS: True,
    Violation.TOTAL_DISTANCE: True,
    Violation.OOR_DISTANCE: False,
    Violation.OOR_PERCENT: False,
    Violation.FIRST_LAST_DISTANCE: False,
    Violation.TIME_WINDOWS: False,
    Violation.HOS: False,
    Violation.INCOMPATIBILITY: True,
    Violation.REGIONAL: True,
    Violation.POSITION: True,
    Violation.REGION_SERVICE: True,
}


def is_monotone(violation: Violation) -> bool:
    """Return True if appending stops can never repair this violation."""
    return MONOTONE_UNDER_EXTENSION[violation]
