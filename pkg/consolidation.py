"""Order consolidation: packing the orders of one OD pair into one-drop combos.

The exact method enumerates every feasible subset of a group. The heuristics
(FFD, BFD, FFS and Singletons) pack the orders like items into bins, possibly
against a scaled-down "partial container" capacity that leaves room for later
multi-drop consolidation.
"""

from collections import Counter, defaultdict
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
import logging
import zlib

import numpy as np

from configs import (
    ConfigError,
    ConsolidationConfig,
    ConsolidationMethod,
    MAX_ENUMERATION_GROUP,
)
from feasibility import build_route, validate
from instance import Instance
from modes import TransportMode
from routes import Route
from units import scale_milli
from violations import Violation


logger = logging.getLogger(__name__)


class EnumerationLimitError(ValueError):
    """Raised when exact enumeration is asked to scan too many subsets."""


@dataclass(frozen=True, match_args=False, slots=True)
class ODGroup:
    """All orders sharing one origin and one destination."""
    origin: str
    destination: str
    orders: tuple[str, ...]  # sorted order ids
    weights: tuple[int, ...]  # milli-units, parallel to orders

    def __post_init__(self) -> None:
        if not self.orders:
            raise ValueError('an OD group needs at least one order')
        if len(self.orders) != len(self.weights):
            raise ValueError('every order in an OD group needs a weight')

    def __repr__(self) -> str:
        return (
            f'{self.__class__.__name__}({self.origin!r} -> '
            + f'{self.destination!r}, {len(self.orders)} orders)'
        )

    def __len__(self) -> int:
        return len(self.orders)

    def items(self) -> Iterator[tuple[str, int]]:
        """Iterate over (order id, weight) pairs in order-id order."""
        return zip(self.orders, self.weights, strict=True)

    def weight_of(self, order_id: str) -> int:
        return self.weights[self.orders.index(order_id)]


@dataclass(frozen=True, match_args=False, slots=True)
class Combo:
    """A nonempty subset of one OD group's orders that travels in one truck."""
    od: ODGroup
    orders: tuple[str, ...]  # sorted order ids
    total_weight: int
    oversize: bool = field(default=False, compare=False)
    sources: frozenset[str] = field(default=frozenset(), compare=False)

    def __repr__(self) -> str:
        return f'{self.__class__.__name__}({list(self.orders)!r})'

    @property
    def origin(self) -> str:
        return self.od.origin

    @property
    def destination(self) -> str:
        return self.od.destination


def od_groups(instance: Instance) -> list[ODGroup]:
    """Group the orders of an instance by (origin, destination), sorted."""
    members: defaultdict[tuple[str, str], list[tuple[str, int]]] = (
        defaultdict(list)
    )
    for order in instance.iter_sorted_orders():
        members[order.od_pair].append((order.id, order.weight))
    return [
        ODGroup(
            origin, destination,
            tuple(order_id for order_id, _ in items),
            tuple(weight for _, weight in items),
        )
        for (origin, destination), items in sorted(members.items())
    ]


def _combo(
    group: ODGroup, members: Iterable[tuple[str, int]], source: str,
    oversize: bool = False,
) -> Combo:
    members = sorted(members)
    return Combo(
        group,
        tuple(order_id for order_id, _ in members),
        sum(weight for _, weight in members),
        oversize,
        frozenset({str(source)}),
    )


def enumerate_combos(
    group: ODGroup,
    mode: TransportMode,
    instance: Instance,
    *,
    allow_large: bool = False,
    stats: Counter[Violation] | None = None,
) -> list[Combo]:
    """Return every subset of the group that forms a feasible one-drop route.

    Subsets heavier than the mode capacity are cut off during the search,
    since adding orders never makes them lighter. The rest are validated one
    by one. Output is sorted by the order-id tuple.
    """
    if len(group) > MAX_ENUMERATION_GROUP and not allow_large:
        raise EnumerationLimitError(
            f'refusing to enumerate 2^{len(group)} subsets of {group!r};'
            + ' set allow_large_groups to override'
        )
    stops = (group.origin, group.destination)
    items = list(group.items())
    combos: list[Combo] = []

    def search(start: int, chosen: list[tuple[str, int]], weight: int) -> None:
        for i in range(start, len(items)):
            order_id, order_weight = items[i]
            if weight + order_weight > mode.capacity:
                if stats is not None:
                    stats[Violation.CAPACITY] += 1
                continue
            chosen.append(items[i])
            verdict = validate(
                stops, [member for member, _ in chosen], mode, instance,
            )
            if verdict.feasible:
                combos.append(_combo(group, chosen, ConsolidationMethod.EXACT))
            elif stats is not None:
                assert verdict.violation is not None
                stats[verdict.violation] += 1
            search(i + 1, chosen, weight + order_weight)
            chosen.pop()

    search(0, [], 0)
    combos.sort(key=lambda combo: combo.orders)
    return combos


def _decreasing(group: ODGroup) -> list[tuple[str, int]]:
    # Heaviest first; equal weights keep ascending order-id order.
    return sorted(group.items(), key=lambda item: (-item[1], item[0]))


def _pack(
    group: ODGroup,
    items: Sequence[tuple[str, int]],
    effective_capacity: int,
    best_fit: bool,
    source: str,
) -> list[Combo]:
    if effective_capacity <= 0:
        raise ValueError('effective capacity must be positive')
    bins: list[list[tuple[str, int]]] = []
    loads: list[int] = []
    oversize: list[tuple[str, int]] = []
    for item in items:
        weight = item[1]
        if weight > effective_capacity:
            oversize.append(item)
            continue
        fitting = [
            i for i, load in enumerate(loads)
            if load + weight <= effective_capacity
        ]
        if not fitting:
            bins.append([item])
            loads.append(weight)
            continue
        if best_fit:
            # Tightest residual wins; ties go to the lowest index.
            chosen = min(
                fitting, key=lambda i: (effective_capacity - loads[i], i),
            )
        else:
            chosen = fitting[0]
        bins[chosen].append(item)
        loads[chosen] += weight
    combos = [_combo(group, members, source) for members in bins]
    combos.extend(
        _combo(group, [item], source, oversize=True) for item in oversize
    )
    return combos


def ffd(group: ODGroup, effective_capacity: int) -> list[Combo]:
    """First-fit decreasing: each order goes to the first truck it fits."""
    return _pack(
        group, _decreasing(group), effective_capacity, False,
        ConsolidationMethod.FFD,
    )


def bfd(group: ODGroup, effective_capacity: int) -> list[Combo]:
    """Best-fit decreasing: each order goes to the truck it leaves fullest."""
    return _pack(
        group, _decreasing(group), effective_capacity, True,
        ConsolidationMethod.BFD,
    )


def ffs(
    group: ODGroup, effective_capacity: int, seed: int | Sequence[int],
) -> list[Combo]:
    """First-fit on a seeded shuffle of the orders."""
    rng = np.random.default_rng(seed)
    items = list(group.items())
    shuffled = [items[i] for i in rng.permutation(len(items))]
    return _pack(
        group, shuffled, effective_capacity, False, ConsolidationMethod.FFS,
    )


def singletons(group: ODGroup) -> list[Combo]:
    """One truck per order."""
    return [
        _combo(group, [item], ConsolidationMethod.SINGLETONS)
        for item in group.items()
    ]


def group_seed(seed: int, group: ODGroup) -> list[int]:
    """Derive a per-group seed so shuffles ignore the processing order."""
    key = f'{group.origin}\x00{group.destination}'.encode()
    return [seed, zlib.crc32(key)]


def consolidate(
    group: ODGroup,
    mode: TransportMode,
    instance: Instance,
    config: ConsolidationConfig,
    stats: Counter[Violation] | None = None,
) -> list[Combo]:
    """Run the configured consolidation methods on one OD group.

    Small groups (below the threshold) and the exact method use full subset
    enumeration. Otherwise every heuristic runs at every partial container
    factor, the results are merged by order set, and each combo is validated
    as a one-drop route at full capacity. An order left uncovered while its
    own singleton route is feasible gets that singleton added.
    """
    if set(config.methods) == {ConsolidationMethod.SINGLETONS}:
        raise ConfigError('singletons is never used by itself')
    small = config.threshold is not None and len(group) < config.threshold
    if small or ConsolidationMethod.EXACT in config.methods:
        return enumerate_combos(
            group, mode, instance,
            allow_large=config.allow_large_groups, stats=stats,
        )

    merged: dict[tuple[str, ...], Combo] = {}
    sources: defaultdict[tuple[str, ...], set[str]] = defaultdict(set)
    for factor in config.partial_container:
        effective_capacity = scale_milli(mode.capacity, factor)
        if effective_capacity <= 0:
            continue
        for method in config.methods:
            match method:
                case ConsolidationMethod.FFD:
                    packed = ffd(group, effective_capacity)
                case ConsolidationMethod.BFD:
                    packed = bfd(group, effective_capacity)
                case ConsolidationMethod.FFS:
                    seed = group_seed(config.seed, group)
                    packed = ffs(group, effective_capacity, seed)
                case ConsolidationMethod.SINGLETONS:
                    packed = singletons(group)
                case _:
                    raise ConfigError(
                        f'unknown consolidation method {method!r}'
                    )
            for combo in packed:
                merged.setdefault(combo.orders, combo)
                sources[combo.orders].add(str(method))

    stops = (group.origin, group.destination)
    released: list[Combo] = []
    for orders, combo in merged.items():
        verdict = validate(stops, orders, mode, instance)
        if not verdict.feasible:
            if stats is not None:
                assert verdict.violation is not None
                stats[verdict.violation] += 1
            continue
        released.append(Combo(
            group, orders, combo.total_weight, combo.oversize,
            frozenset(sources[orders]),
        ))

    covered = {order_id for combo in released for order_id in combo.orders}
    for order_id, weight in group.items():
        if order_id in covered:
            continue
        if validate(stops, [order_id], mode, instance).feasible:
            logger.debug('adding singleton %s to keep it covered', order_id)
            released.append(Combo(
                group, (order_id,), weight, sources=frozenset({'coverage'}),
            ))

    released.sort(key=lambda combo: combo.orders)
    return released


def one_drop_route(
    combo: Combo, mode: TransportMode, instance: Instance,
) -> Route | None:
    """Build the validated origin-to-destination route carrying a combo."""
    return build_route(
        (combo.origin, combo.destination), combo.orders, mode, instance,
    )
