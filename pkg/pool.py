"""The candidate pool: every distinct feasible route that was generated."""

from collections import Counter, defaultdict
from collections.abc import Iterable, Iterator
from typing import Final, Self

from routes import Route, RouteKey


ROUTE_ID_PREFIX: Final[str] = 'R'


def route_id(position: int) -> str:
    """Return the stable id of the route at a 0-based position in key order."""
    return f'{ROUTE_ID_PREFIX}{position + 1:05d}'


class CandidatePool:
    """Routes deduplicated by (mode, stop sequence, order set).

    The first route inserted under a key is kept; later duplicates only add
    their generator name to the key's provenance.
    """

    __slots__ = ('_routes', '_provenance', 'prune_counts')

    def __init__(self) -> None:
        self._routes: dict[RouteKey, Route] = {}
        self._provenance: defaultdict[RouteKey, set[str]] = defaultdict(set)
        self.prune_counts: Counter[str] = Counter()

    def __len__(self) -> int:
        return len(self._routes)

    def __contains__(self, key: object) -> bool:
        return key in self._routes

    def __iter__(self) -> Iterator[Route]:
        """Iterate over the routes in key order."""
        return iter(self.sorted_routes())

    def add(self, route: Route, source: str) -> bool:
        """Insert a route; return False if its key was already present."""
        key = route.key
        self._provenance[key].add(source)
        if key in self._routes:
            return False
        self._routes[key] = route
        return True

    def add_all(self, routes: Iterable[Route], source: str) -> int:
        """Insert several routes and return how many were new."""
        return sum(self.add(route, source) for route in routes)

    def merge(self, other: Self) -> None:
        """Absorb another pool's routes, provenance and statistics."""
        for key, route in other._routes.items():
            self._routes.setdefault(key, route)
            self._provenance[key].update(other._provenance[key])
        self.prune_counts.update(other.prune_counts)

    def provenance(self, key: RouteKey) -> frozenset[str]:
        """Return the names of the generators that produced a route."""
        return frozenset(self._provenance.get(key, ()))

    def sorted_routes(self) -> list[Route]:
        return [self._routes[key] for key in sorted(self._routes)]

    def with_ids(self) -> dict[str, Route]:
        """Return the routes keyed by ids assigned in key order."""
        return {
            route_id(i): route for i, route in enumerate(self.sorted_routes())
        }

    def coverage(self) -> dict[str, list[str]]:
        """Return, for every covered order, the ids of its covering routes."""
        covering: defaultdict[str, list[str]] = defaultdict(list)
        for rid, route in self.with_ids().items():
            for order_id in route.orders:
                covering[order_id].append(rid)
        return dict(sorted(covering.items()))

    def depth_counts(self) -> dict[int, int]:
        """Return how many routes there are per number of non-hub stops."""
        counts = Counter(
            len(route.stops) - 1 for route in self._routes.values()
        )
        return dict(sorted(counts.items()))
