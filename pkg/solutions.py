"""A solution is the set of routes chosen to carry every order exactly once."""

from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import StrEnum
import json
from pathlib import Path
from typing import Any, Self

from fileio import atomic_write_text
from instance import Instance
from routes import Route
from units import format_milli, optional_from_milli, to_milli


class SolutionStatus(StrEnum):
    OPTIMAL = 'optimal'
    FEASIBLE_WITH_BOUND = 'feasible_with_bound'
    INFEASIBLE = 'infeasible'


@dataclass(frozen=True, match_args=False, slots=True)
class Solution:
    """The chosen routes, their total cost and what is known of optimality."""
    routes: tuple[Route, ...]
    route_ids: tuple[str, ...]
    status: SolutionStatus
    lower_bound: int | None = None
    wall_time: float = field(default=0.0, compare=False)
    uncovered_orders: tuple[str, ...] = ()
    certificate: str | None = None
    total_cost: int | None = field(init=False)

    def __post_init__(self) -> None:
        if len(self.routes) != len(self.route_ids):
            raise ValueError('every route in a solution needs an id')
        seen: set[str] = set()
        for route in self.routes:
            for order_id in route.orders:
                if order_id in seen:
                    raise ValueError(
                        f'order {order_id} is carried by two routes'
                    )
                seen.add(order_id)
        if self.status is SolutionStatus.INFEASIBLE:
            if self.routes:
                raise ValueError('an infeasible solution has no routes')
            total = None
        else:
            total = sum(route.cost for route in self.routes)
        object.__setattr__(self, 'total_cost', total)

    def __iter__(self) -> Iterator[tuple[str, Route]]:
        return zip(self.route_ids, self.routes, strict=True)

    def __len__(self) -> int:
        return len(self.routes)

    @property
    def covered_orders(self) -> frozenset[str]:
        return frozenset(
            order_id for route in self.routes for order_id in route.orders
        )

    @classmethod
    def infeasible(
        cls,
        uncovered_orders: tuple[str, ...] = (),
        certificate: str | None = None,
        wall_time: float = 0.0,
    ) -> Self:
        return cls((), (), SolutionStatus.INFEASIBLE, None, wall_time,
                   tuple(sorted(uncovered_orders)), certificate)

    def to_dict(self, instance: Instance) -> dict[str, Any]:
        """Return the solution-file object."""
        return {
            'status': str(self.status),
            'total_cost': optional_from_milli(self.total_cost),
            'lower_bound': optional_from_milli(self.lower_bound),
            'wall_time_seconds': round(self.wall_time, 3),
            'routes': [
                {'id': rid, **route.to_dict(instance)} for rid, route in self
            ],
            'uncovered_orders': list(self.uncovered_orders),
            'certificate': self.certificate,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], instance: Instance) -> Self:
        """Rebuild a solution from its solution-file object."""
        routes = data.get('routes', [])
        lower_bound = data.get('lower_bound')
        solution = cls(
            tuple(Route.from_dict(route, instance) for route in routes),
            tuple(str(route['id']) for route in routes),
            SolutionStatus(data['status']),
            None if lower_bound is None else to_milli(lower_bound),
            float(data.get('wall_time_seconds', 0.0)),
            tuple(data.get('uncovered_orders', ())),
            data.get('certificate'),
        )
        stated = data.get('total_cost')
        if stated is not None and to_milli(stated) != solution.total_cost:
            raise ValueError(
                'total_cost does not equal the sum of route costs'
            )
        return solution

    def save_file(self, file_path: Path, instance: Instance) -> None:
        """Save the solution as a JSON file, replacing any previous one."""
        text = json.dumps(self.to_dict(instance), indent=2) + '\n'
        atomic_write_text(file_path, text)

    @classmethod
    def load_file(cls, file_path: Path, instance: Instance) -> Self:
        """Load a solution from a JSON file."""
        data = json.loads(file_path.read_text(encoding='utf-8'))
        return cls.from_dict(data, instance)


def format_routes_table(solution: Solution, instance: Instance) -> str:
    """Render the chosen routes as an aligned plain-text table."""
    if solution.status is SolutionStatus.INFEASIBLE:
        lines = ['No feasible selection of routes.']
        if solution.uncovered_orders:
            lines.append(
                'Orders no route can carry: '
                + ', '.join(solution.uncovered_orders)
            )
        if solution.certificate:
            lines.append(f'Binding constraint: {solution.certificate}')
        return '\n'.join(lines) + '\n'

    header = (
        'route', 'mode', 'shape', 'stops', 'orders', 'weight', 'distance',
        'cost',
    )
    rows = [header]
    for rid, route in solution:
        weight = sum(
            instance.order(order_id).weight for order_id in route.orders
        )
        rows.append((
            rid,
            route.mode,
            str(route.direction),
            ' > '.join(route.stops),
            ', '.join(route.orders),
            format_milli(weight),
            format_milli(route.total_distance),
            format_milli(route.cost),
        ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    numeric = {5, 6, 7}
    lines = [
        '  '.join(
            cell.rjust(width) if i in numeric else cell.ljust(width)
            for i, (cell, width) in enumerate(zip(row, widths, strict=True))
        ).rstrip()
        for row in rows
    ]
    assert solution.total_cost is not None
    lines.append('')
    lines.append(
        f'Total cost: {format_milli(solution.total_cost)} ({solution.status})'
    )
    if (
        solution.lower_bound is not None
        and solution.status is not SolutionStatus.OPTIMAL
    ):
        lines.append(f'Lower bound: {format_milli(solution.lower_bound)}')
    return '\n'.join(lines) + '\n'
