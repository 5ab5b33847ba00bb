"""Choosing the cheapest routes that cover every order exactly once.

The selection is a set partitioning problem over the candidate pool. It is
never relaxed to set covering: a route whose orders overlap a chosen route is
excluded even when it would be cheaper to ship an order twice.
"""

from collections import Counter, defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
import logging
import time
from typing import Any, Final, Self

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from pool import CandidatePool


logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT: Final[int] = 25
GAP_CHECK_INTERVAL: Final[int] = 256
MAX_TOTAL_ROUTES: Final[str] = 'max_total_routes'
COVERAGE: Final[str] = 'coverage'


class UncoverableOrdersError(ValueError):
    """Raised when some orders are not covered by any candidate route."""

    def __init__(self, orders: Iterable[str]) -> None:
        self.orders = tuple(sorted(orders))
        super().__init__(
            'no feasible route covers order(s): ' + ', '.join(self.orders)
        )


class SelectionError(ValueError):
    """Raised when a set of chosen routes is not a valid partition."""


class SPProof(StrEnum):
    OPTIMAL = 'optimal'
    TIME_LIMITED = 'time_limited'
    GAP_LIMITED = 'gap_limited'
    INFEASIBLE = 'infeasible'


def _mode_cap_name(mode: str) -> str:
    return f'per_mode_caps:{mode}'


@dataclass(frozen=True, match_args=False, slots=True)
class SideConstraints:
    """Limits on how many routes may be chosen in total and per mode."""
    max_total_routes: int | None = None
    per_mode_caps: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        caps = self.per_mode_caps
        if isinstance(caps, Mapping):
            caps = caps.items()
        caps = tuple(sorted((str(mode), int(cap)) for mode, cap in caps))
        if len({mode for mode, _ in caps}) != len(caps):
            raise ValueError('each mode may have only one cap')
        if any(cap < 0 for _, cap in caps):
            raise ValueError('mode caps must be non-negative')
        if self.max_total_routes is not None and self.max_total_routes < 0:
            raise ValueError('max_total_routes must be non-negative')
        object.__setattr__(self, 'per_mode_caps', caps)

    def __bool__(self) -> bool:
        return self.max_total_routes is not None or bool(self.per_mode_caps)

    def cap_for(self, mode: str) -> int | None:
        return dict(self.per_mode_caps).get(mode)

    def names(self) -> list[str]:
        """Name every constraint, in the order certificates try them."""
        names = [] if self.max_total_routes is None else [MAX_TOTAL_ROUTES]
        names.extend(_mode_cap_name(mode) for mode, _ in self.per_mode_caps)
        return names

    def without(self, name: str) -> Self:
        """Return a copy with one named constraint removed."""
        if name == MAX_TOTAL_ROUTES:
            return self.__class__(None, self.per_mode_caps)
        caps = tuple(
            (mode, cap) for mode, cap in self.per_mode_caps
            if _mode_cap_name(mode) != name
        )
        if len(caps) == len(self.per_mode_caps):
            raise ValueError(f'no side constraint named {name!r}')
        return self.__class__(self.max_total_routes, caps)

    def merged(self, other: Self) -> Self:
        """Combine two sets of limits, keeping the tighter value of each."""
        totals = [
            value for value in (self.max_total_routes, other.max_total_routes)
            if value is not None
        ]
        caps = dict(self.per_mode_caps)
        for mode, cap in other.per_mode_caps:
            caps[mode] = min(cap, caps.get(mode, cap))
        return self.__class__(
            min(totals) if totals else None, tuple(caps.items()),
        )

    def violated_by(self, modes: Iterable[str]) -> str | None:
        """Return the first constraint broken by routes of these modes."""
        counts = Counter(modes)
        total = sum(counts.values())
        if self.max_total_routes is not None and total > self.max_total_routes:
            return MAX_TOTAL_ROUTES
        for mode, cap in self.per_mode_caps:
            if counts[mode] > cap:
                return _mode_cap_name(mode)
        return None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> Self:
        if not data:
            return cls()
        unknown = set(data) - {MAX_TOTAL_ROUTES, 'per_mode_caps'}
        if unknown:
            raise ValueError(f'unknown side constraint(s): {sorted(unknown)}')
        return cls(
            data.get(MAX_TOTAL_ROUTES),
            tuple((data.get('per_mode_caps') or {}).items()),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            MAX_TOTAL_ROUTES: self.max_total_routes,
            'per_mode_caps': dict(self.per_mode_caps),
        }


@dataclass(frozen=True, match_args=False, slots=True)
class Column:
    """One candidate route as the selection problem sees it."""
    id: str
    orders: frozenset[str]
    cost: int
    mode: str = ''

    def __post_init__(self) -> None:
        if not self.orders:
            raise ValueError(f'route {self.id} covers no orders')
        if self.cost < 0:
            raise ValueError(f'route {self.id} has a negative cost')
        object.__setattr__(self, 'orders', frozenset(self.orders))


def pool_columns(pool: CandidatePool) -> list[Column]:
    """Turn a pool into columns, using the pool's stable route ids."""
    return [
        Column(rid, frozenset(route.orders), route.cost, route.mode)
        for rid, route in pool.with_ids().items()
    ]


@dataclass(frozen=True, match_args=False, slots=True)
class SPProblem:
    """A preprocessed selection problem.

    columns holds the routes left after dominance. fixed lists the routes
    that had to be chosen because some order had no alternative; conflict
    is set when fixing showed that no partition can exist.
    """
    orders: tuple[str, ...]
    columns: tuple[Column, ...]
    side_constraints: SideConstraints = SideConstraints()
    fixed: tuple[str, ...] = ()
    conflict: str | None = None
    dominated: int = field(default=0, compare=False)
    _by_id: dict[str, Column] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id = {column.id: column for column in self.columns}
        if len(by_id) != len(self.columns):
            raise ValueError('route ids must be unique')
        missing = [rid for rid in self.fixed if rid not in by_id]
        if missing:
            raise ValueError(f'fixed routes are not columns: {missing}')
        object.__setattr__(self, '_by_id', by_id)

    def __repr__(self) -> str:
        return (
            f'{self.__class__.__name__}({len(self.orders)} orders, '
            + f'{len(self.columns)} routes, {len(self.fixed)} fixed)'
        )

    def column(self, rid: str) -> Column:
        try:
            return self._by_id[rid]
        except KeyError:
            raise KeyError(f'unknown route id {rid!r}') from None

    def covering(self, order_id: str) -> list[Column]:
        return [column for column in self.columns if order_id in column.orders]

    def cost_of(self, chosen: Iterable[str]) -> int:
        return sum(self.column(rid).cost for rid in chosen)


@dataclass(frozen=True, match_args=False, slots=True)
class SPSolution:
    """The outcome of a selection search."""
    chosen: tuple[str, ...]
    objective: int | None
    bound: int | None
    proof: SPProof
    nodes_explored: int = 0
    wall_time: float = field(default=0.0, compare=False)
    certificate: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'chosen', tuple(sorted(self.chosen)))
        if self.proof is SPProof.INFEASIBLE:
            if self.chosen or self.objective is not None:
                raise ValueError('an infeasible result cannot choose routes')
        elif self.objective is None:
            raise ValueError('a feasible result needs an objective')
        elif self.bound is not None and self.bound > self.objective:
            raise ValueError('the bound cannot exceed the objective')

    @property
    def feasible(self) -> bool:
        return self.proof is not SPProof.INFEASIBLE

    @property
    def gap(self) -> float | None:
        """Return (objective - bound) / bound, or None when undefined."""
        if self.objective is None or self.bound is None:
            return None
        if self.bound == 0:
            return 0.0 if self.objective == 0 else None
        return (self.objective - self.bound) / self.bound


def _dominance(
    columns: Iterable[Column], by_mode: bool,
) -> tuple[list[Column], int]:
    # Cheapest wins; equal costs go to the smaller route id.
    best: dict[tuple[frozenset[str], str], Column] = {}
    seen = 0
    for column in columns:
        seen += 1
        key = (column.orders, column.mode if by_mode else '')
        current = best.get(key)
        if current is None or (
            (column.cost, column.id) < (current.cost, current.id)
        ):
            best[key] = column
    kept = sorted(best.values(), key=lambda column: column.id)
    return kept, seen - len(kept)


def _fix_forced(
    orders: Sequence[str], columns: Sequence[Column],
) -> tuple[list[str], str | None]:
    """Repeatedly choose the only route left for some order."""
    available = list(columns)
    covered: set[str] = set()
    fixed: list[str] = []
    while True:
        covering: defaultdict[str, list[Column]] = defaultdict(list)
        for column in available:
            for order_id in column.orders:
                covering[order_id].append(column)
        uncovered = [
            order_id for order_id in orders if order_id not in covered
        ]
        stranded = [
            order_id for order_id in uncovered if not covering[order_id]
        ]
        if stranded:
            conflict = (
                f'order {stranded[0]} cannot be covered once routes '
                + f'{", ".join(sorted(fixed))} are chosen'
            )
            return fixed, conflict
        forced = [
            order_id for order_id in uncovered
            if len(covering[order_id]) == 1
        ]
        if not forced:
            return fixed, None
        column = covering[forced[0]][0]
        logger.debug(
            'fixing route %s, the only route for %s', column.id, forced[0],
        )
        fixed.append(column.id)
        covered |= column.orders
        available = [
            other for other in available
            if other.orders.isdisjoint(column.orders)
        ]


def build_sp(
    pool: CandidatePool | Iterable[Column],
    side_constraints: SideConstraints | None = None,
    orders: Iterable[str] | None = None,
) -> SPProblem:
    """Preprocess a pool into a selection problem.

    Routes covering the same order set are reduced to the cheapest (ties by
    route id); with per-mode caps, only routes of the same mode dominate each
    other. Routes of a mode capped at zero are filtered out of the pool.
    Orders covered by a single remaining route have that route fixed, which
    is repeated until no order is forced.

    Raises UncoverableOrdersError if some order has no covering route.
    """
    if side_constraints is None:
        side_constraints = SideConstraints()
    columns = (
        pool_columns(pool) if isinstance(pool, CandidatePool) else list(pool)
    )
    if orders is None:
        order_ids = sorted({
            order_id for column in columns for order_id in column.orders
        })
    else:
        order_ids = sorted(set(orders))
        wanted = set(order_ids)
        columns = [column for column in columns if column.orders <= wanted]

    banned = {mode for mode, cap in side_constraints.per_mode_caps if cap == 0}
    if banned:
        columns = [column for column in columns if column.mode not in banned]

    covered = {order_id for column in columns for order_id in column.orders}
    uncovered = [order_id for order_id in order_ids if order_id not in covered]
    if uncovered:
        raise UncoverableOrdersError(uncovered)

    kept, dominated = _dominance(columns, bool(side_constraints.per_mode_caps))
    fixed, conflict = _fix_forced(order_ids, kept)
    logger.info(
        'selection problem: %d orders, %d routes (%d dominated), %d fixed',
        len(order_ids), len(kept), dominated, len(fixed),
    )
    return SPProblem(
        tuple(order_ids), tuple(kept), side_constraints,
        tuple(fixed), conflict, dominated,
    )


@dataclass(frozen=True, match_args=False, slots=True)
class _Outcome:
    chosen: tuple[str, ...]
    objective: int | None
    bound: int | None
    proof: SPProof
    nodes: int


class _Search:
    """Depth-first branch and bound over one group of orders.

    Orders are bits of an int mask. A node records the covered mask, the
    cost so far, the chosen column indexes, the per-mode counts and the
    bound of its parent.
    """

    def __init__(
        self,
        orders: Sequence[str],
        columns: Sequence[Column],
        side: SideConstraints,
        base_modes: Counter[str],
        deadline: float | None,
        gap_tolerance: float,
    ) -> None:
        bit = {order_id: 1 << k for k, order_id in enumerate(orders)}
        self.n = len(orders)
        self.full = (1 << self.n) - 1
        self.columns = sorted(
            columns, key=lambda column: (column.cost, column.id),
        )
        self.masks = [
            sum(bit[order_id] for order_id in column.orders)
            for column in self.columns
        ]
        self.costs = [column.cost for column in self.columns]
        self.shares = [
            column.cost // len(column.orders) for column in self.columns
        ]
        self.modes = sorted(
            {column.mode for column in self.columns} | set(base_modes)
        )
        mode_index = {mode: m for m, mode in enumerate(self.modes)}
        self.column_mode = [mode_index[column.mode] for column in self.columns]
        self.base_counts = tuple(base_modes[mode] for mode in self.modes)
        self.total_cap = side.max_total_routes
        self.mode_caps = tuple(side.cap_for(mode) for mode in self.modes)
        self.constrained = bool(side)

        # Columns covering each order, by (cost, id) and by per-order share.
        self.by_order: list[list[int]] = [[] for _ in range(self.n)]
        for j, mask in enumerate(self.masks):
            for k in range(self.n):
                if mask >> k & 1:
                    self.by_order[k].append(j)
        self.by_share = [
            sorted(options, key=lambda j: (self.shares[j], j))
            for options in self.by_order
        ]
        self.deadline = deadline
        self.gap_tolerance = gap_tolerance

    def _fits(self, j: int, counts: tuple[int, ...]) -> bool:
        if not self.constrained:
            return True
        if self.total_cap is not None and sum(counts) + 1 > self.total_cap:
            return False
        m = self.column_mode[j]
        cap = self.mode_caps[m]
        return cap is None or counts[m] + 1 <= cap

    def bound(self, covered: int, cost: int) -> int | None:
        """Lower bound on any completion, or None if some order is stranded."""
        total = cost
        for k in range(self.n):
            if covered >> k & 1:
                continue
            for j in self.by_share[k]:
                if not self.masks[j] & covered:
                    total += self.shares[j]
                    break
            else:
                return None
        return total

    def _branch_options(
        self, covered: int, counts: tuple[int, ...],
    ) -> list[int] | None:
        best: list[int] | None = None
        for k in range(self.n):
            if covered >> k & 1:
                continue
            options = [
                j for j in self.by_order[k]
                if not self.masks[j] & covered and self._fits(j, counts)
            ]
            if best is None or len(options) < len(best):
                best = options
                if not options:
                    break
        return best

    def _gap_closed(self, incumbent: int, global_bound: int) -> bool:
        gap = incumbent - global_bound
        if gap <= 0:
            return True
        return global_bound > 0 and gap <= self.gap_tolerance * global_bound

    def run(self) -> _Outcome:
        root_bound = self.bound(0, 0)
        if root_bound is None:
            return _Outcome((), None, None, SPProof.INFEASIBLE, 0)
        # (covered, cost, chosen, counts, parent bound)
        stack: list[tuple[int, int, tuple[int, ...], tuple[int, ...], int]] = [
            (0, 0, (), self.base_counts, root_bound),
        ]
        incumbent: int | None = None
        best: tuple[int, ...] = ()
        nodes = 0
        proof = SPProof.OPTIMAL

        while stack:
            if incumbent is not None:
                if (
                    self.deadline is not None
                    and time.perf_counter() > self.deadline
                ):
                    proof = SPProof.TIME_LIMITED
                    break
                if nodes % GAP_CHECK_INTERVAL == 0:
                    global_bound = min(entry[4] for entry in stack)
                    if self._gap_closed(incumbent, global_bound):
                        if incumbent > global_bound:
                            proof = SPProof.GAP_LIMITED
                        break
            covered, cost, chosen, counts, parent_bound = stack.pop()
            nodes += 1
            if incumbent is not None and parent_bound >= incumbent:
                continue
            if covered == self.full:
                if incumbent is None or cost < incumbent:
                    incumbent, best = cost, chosen
                continue
            node_bound = self.bound(covered, cost)
            if node_bound is None or (
                incumbent is not None and node_bound >= incumbent
            ):
                continue
            options = self._branch_options(covered, counts)
            if not options:
                continue
            for j in reversed(options):
                child_counts = counts
                if self.constrained:
                    m = self.column_mode[j]
                    child_counts = (
                        *counts[:m], counts[m] + 1, *counts[m + 1:],
                    )
                stack.append((
                    covered | self.masks[j], cost + self.costs[j],
                    (*chosen, j), child_counts, node_bound,
                ))

        if incumbent is None:
            return _Outcome((), None, None, SPProof.INFEASIBLE, nodes)
        if proof is SPProof.OPTIMAL:
            bound = incumbent
        else:
            bound = min(
                incumbent,
                min((entry[4] for entry in stack), default=incumbent),
            )
        chosen_ids = tuple(self.columns[j].id for j in best)
        return _Outcome(chosen_ids, incumbent, bound, proof, nodes)


def _components(
    orders: Sequence[str], columns: Sequence[Column],
) -> list[tuple[list[str], list[Column]]]:
    """Split orders into groups that no route connects."""
    index = {order_id: k for k, order_id in enumerate(orders)}
    n = len(orders)
    rows: list[int] = []
    cols: list[int] = []
    for j, column in enumerate(columns):
        for order_id in column.orders:
            rows.append(index[order_id])
            cols.append(n + j)
    size = n + len(columns)
    graph = coo_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size),
    )
    _, labels = connected_components(graph, directed=False)

    groups: dict[int, tuple[list[str], list[Column]]] = {}
    for order_id in orders:
        label = int(labels[index[order_id]])
        groups.setdefault(label, ([], []))[0].append(order_id)
    for j, column in enumerate(columns):
        groups[int(labels[n + j])][1].append(column)
    return list(groups.values())


def _combine(outcomes: Sequence[_Outcome]) -> _Outcome:
    if any(outcome.proof is SPProof.INFEASIBLE for outcome in outcomes):
        return _Outcome(
            (), None, None, SPProof.INFEASIBLE,
            sum(o.nodes for o in outcomes),
        )
    proofs = {outcome.proof for outcome in outcomes}
    if SPProof.TIME_LIMITED in proofs:
        proof = SPProof.TIME_LIMITED
    elif SPProof.GAP_LIMITED in proofs:
        proof = SPProof.GAP_LIMITED
    else:
        proof = SPProof.OPTIMAL
    return _Outcome(
        tuple(rid for outcome in outcomes for rid in outcome.chosen),
        sum(outcome.objective or 0 for outcome in outcomes),
        sum(outcome.bound or 0 for outcome in outcomes),
        proof,
        sum(outcome.nodes for outcome in outcomes),
    )


def _search(
    problem: SPProblem,
    side: SideConstraints,
    deadline: float | None,
    gap_tolerance: float,
) -> _Outcome:
    fixed = [problem.column(rid) for rid in problem.fixed]
    fixed_modes = Counter(column.mode for column in fixed)
    if side.violated_by(column.mode for column in fixed) is not None:
        return _Outcome((), None, None, SPProof.INFEASIBLE, 0)
    covered = {order_id for column in fixed for order_id in column.orders}
    fixed_ids = {column.id for column in fixed}
    orders = [
        order_id for order_id in problem.orders if order_id not in covered
    ]
    columns = [
        column for column in problem.columns
        if column.id not in fixed_ids and column.orders.isdisjoint(covered)
    ]
    fixed_cost = sum(column.cost for column in fixed)

    if not orders:
        outcome = _Outcome((), 0, 0, SPProof.OPTIMAL, 0)
    elif side:
        outcome = _Search(
            orders, columns, side, fixed_modes, deadline, gap_tolerance,
        ).run()
    else:
        outcome = _combine([
            _Search(
                group, group_columns, side, Counter(), deadline,
                gap_tolerance,
            ).run()
            for group, group_columns in _components(orders, columns)
        ])
    if outcome.proof is SPProof.INFEASIBLE:
        return outcome
    assert outcome.objective is not None and outcome.bound is not None
    return _Outcome(
        (*problem.fixed, *outcome.chosen),
        outcome.objective + fixed_cost,
        outcome.bound + fixed_cost,
        outcome.proof,
        outcome.nodes,
    )


def _certificate(problem: SPProblem) -> str:
    """Name the side constraint whose removal makes the problem feasible."""
    if problem.conflict is not None:
        return f'{COVERAGE}: {problem.conflict}'
    side = problem.side_constraints
    for name in side.names():
        relaxed = _search(problem, side.without(name), None, 0.0)
        if relaxed.proof is not SPProof.INFEASIBLE:
            return name
    return (
        f'{COVERAGE}: no combination of routes covers every order '
        'exactly once'
    )


def share_bound(problem: SPProblem) -> int | None:
    """Lower bound on every partition, the one the search starts from.

    Each uncovered order pays the smallest per-order share of a route that
    can still carry it. None means some order has no such route.
    """
    if problem.conflict is not None:
        return None
    fixed = [problem.column(rid) for rid in problem.fixed]
    fixed_ids = {column.id for column in fixed}
    covered = {order_id for column in fixed for order_id in column.orders}
    total = sum(column.cost for column in fixed)
    for order_id in problem.orders:
        if order_id in covered:
            continue
        shares = [
            column.cost // len(column.orders)
            for column in problem.covering(order_id)
            if column.id not in fixed_ids and column.orders.isdisjoint(covered)
        ]
        if not shares:
            return None
        total += min(shares)
    return total


def solve_sp(
    problem: SPProblem,
    time_limit: float | None = None,
    gap_tolerance: float = 0.0,
) -> SPSolution:
    """Find the cheapest exact partition of the orders by branch and bound.

    The search branches on the uncovered order with the fewest usable routes
    and tries that order's routes cheapest first. Without side constraints,
    order groups that share no route are solved separately. The time limit
    only stops the search once some partition has been found.
    """
    if gap_tolerance < 0:
        raise ValueError('gap tolerance must be non-negative')
    if time_limit is not None and time_limit <= 0:
        raise ValueError('time limit must be positive')
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit

    if problem.conflict is not None:
        outcome = _Outcome((), None, None, SPProof.INFEASIBLE, 0)
    else:
        outcome = _search(
            problem, problem.side_constraints, deadline, gap_tolerance,
        )

    certificate = None
    if outcome.proof is SPProof.INFEASIBLE:
        certificate = _certificate(problem)
        logger.warning('route selection is infeasible: %s', certificate)
    else:
        logger.info(
            'route selection %s: cost %d, bound %d, %d nodes',
            outcome.proof, outcome.objective, outcome.bound, outcome.nodes,
        )
    return SPSolution(
        outcome.chosen,
        outcome.objective,
        outcome.bound,
        outcome.proof,
        outcome.nodes,
        time.perf_counter() - start,
        certificate,
    )


def brute_force_sp(problem: SPProblem) -> SPSolution:
    """Scan every subset of routes; only for small problems.

    Ties between equally cheap partitions go to the lexicographically
    smallest sorted id tuple.
    """
    if len(problem.columns) > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f'brute force is limited to {BRUTE_FORCE_LIMIT} routes,'
            + f' got {len(problem.columns)}'
        )
    start = time.perf_counter()
    everything = frozenset(problem.orders)
    columns = sorted(problem.columns, key=lambda column: column.id)
    side = problem.side_constraints
    best: tuple[int, tuple[str, ...]] | None = None
    visited = 0

    def visit(
        i: int, covered: frozenset[str], cost: int, chosen: list[Column],
    ) -> None:
        nonlocal best, visited
        visited += 1
        if covered == everything:
            candidate = (cost, tuple(sorted(column.id for column in chosen)))
            if best is None or candidate < best:
                best = candidate
            return
        if i == len(columns):
            return
        column = columns[i]
        if column.orders.isdisjoint(covered):
            chosen.append(column)
            if side.violated_by(c.mode for c in chosen) is None:
                visit(
                    i + 1, covered | column.orders, cost + column.cost,
                    chosen,
                )
            chosen.pop()
        visit(i + 1, covered, cost, chosen)

    visit(0, frozenset(), 0, [])
    elapsed = time.perf_counter() - start
    if best is None:
        return SPSolution((), None, None, SPProof.INFEASIBLE, visited, elapsed)
    cost, chosen_ids = best
    return SPSolution(
        chosen_ids, cost, cost, SPProof.OPTIMAL, visited, elapsed,
    )


def check_partition(problem: SPProblem, chosen: Iterable[str]) -> None:
    """Raise SelectionError unless the chosen routes partition the orders."""
    seen: dict[str, str] = {}
    modes: list[str] = []
    for rid in chosen:
        try:
            column = problem.column(rid)
        except KeyError as error:
            raise SelectionError(str(error.args[0])) from None
        modes.append(column.mode)
        for order_id in sorted(column.orders):
            if order_id in seen:
                raise SelectionError(
                    f'order {order_id} is covered by both '
                    f'{seen[order_id]} and {rid}'
                )
            seen[order_id] = rid
    missing = [order_id for order_id in problem.orders if order_id not in seen]
    if missing:
        raise SelectionError(f'orders left uncovered: {", ".join(missing)}')
    broken = problem.side_constraints.violated_by(modes)
    if broken is not None:
        raise SelectionError(f'the chosen routes exceed {broken}')
