"""Cross-cutting rules that apply to every route, whatever its mode."""

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Final, Self

from units import hours_to_minutes


# Defaults from the US hours-of-service rules for property-carrying drivers.
DEFAULT_MAX_DRIVE_HOURS: Final[float] = 11.0
DEFAULT_MAX_DUTY_HOURS: Final[float] = 14.0
DEFAULT_MIN_REST_HOURS: Final[float] = 10.0


@dataclass(frozen=True, match_args=False, slots=True)
class HoursOfService:
    """Driving, on-duty and off-duty limits for a single driver shift."""
    max_drive_hours: float = DEFAULT_MAX_DRIVE_HOURS
    max_duty_hours: float = DEFAULT_MAX_DUTY_HOURS
    min_rest_hours: float = DEFAULT_MIN_REST_HOURS

    @property
    def max_drive_minutes(self) -> int:
        return hours_to_minutes(self.max_drive_hours)

    @property
    def max_duty_minutes(self) -> int:
        return hours_to_minutes(self.max_duty_hours)

    @property
    def min_rest_minutes(self) -> int:
        return hours_to_minutes(self.min_rest_hours)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Build HOS limits from an overlay-file object, filling defaults."""
        return cls(
            float(data.get('max_drive_hours', DEFAULT_MAX_DRIVE_HOURS)),
            float(data.get('max_duty_hours', DEFAULT_MAX_DUTY_HOURS)),
            float(data.get('min_rest_hours', DEFAULT_MIN_REST_HOURS)),
        )

    def to_dict(self) -> dict[str, float]:
        return {
            'max_drive_hours': self.max_drive_hours,
            'max_duty_hours': self.max_duty_hours,
            'min_rest_hours': self.min_rest_hours,
        }


class RuleKind(StrEnum):
    """Whether a regional pair rule permits or prohibits a pairing."""
    ALLOW = 'allow'
    FORBID = 'forbid'


@dataclass(order=True, frozen=True, slots=True)
class RegionalRule:
    """A rule about pairing orders that touch two region tags."""
    region_tag_a: str
    region_tag_b: str
    kind: RuleKind

    def mentions(self, tag: str) -> bool:
        """Return True if the rule names this region tag on either side."""
        return tag in (self.region_tag_a, self.region_tag_b)

    def partner_of(self, tag: str) -> str:
        """Return the tag on the other side of the rule from the given one."""
        if tag == self.region_tag_a:
            return self.region_tag_b
        return self.region_tag_a


@dataclass(frozen=True, match_args=False, slots=True)
class ConstraintOverlay:
    """Incompatibilities, regional rules, HOS limits and stop service time."""
    order_incompatibilities: frozenset[frozenset[str]] = frozenset()
    regional_pair_rules: tuple[RegionalRule, ...] = ()
    hos: HoursOfService = field(default_factory=HoursOfService)
    service_minutes_per_stop: int = 0

    def are_incompatible(
        self, tags_1: Iterable[str], tags_2: Iterable[str],
    ) -> bool:
        """Return True if any tag pair across the two sets is incompatible."""
        tags_2 = tuple(tags_2)
        return any(
            frozenset((tag_1, tag_2)) in self.order_incompatibilities
            for tag_1 in tags_1 for tag_2 in tags_2
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Build an overlay from its instance-file object."""
        return cls(
            order_incompatibilities=frozenset(
                frozenset(pair)
                for pair in data.get('order_incompatibilities', ())
            ),
            regional_pair_rules=tuple(sorted(
                RegionalRule(
                    str(rule['region_tag_a']),
                    str(rule['region_tag_b']),
                    RuleKind(rule['kind']),
                )
                for rule in data.get('regional_pair_rules', ())
            )),
            hos=HoursOfService.from_dict(data.get('hos', {})),
            service_minutes_per_stop=int(
                data.get('service_minutes_per_stop', 0)
            ),
        )

    def to_dict(self) -> dict[str, Any]:
        """Return the instance-file object for this overlay."""
        return {
            'order_incompatibilities': sorted(
                sorted(pair) for pair in self.order_incompatibilities
            ),
            'regional_pair_rules': [
                {
                    'region_tag_a': rule.region_tag_a,
                    'region_tag_b': rule.region_tag_b,
                    'kind': str(rule.kind),
                }
                for rule in self.regional_pair_rules
            ],
            'hos': self.hos.to_dict(),
            'service_minutes_per_stop': self.service_minutes_per_stop,
        }
