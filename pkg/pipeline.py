"""End-to-end solves: generate candidate routes, then pick the cheapest set.

For every requested direction and every transport mode, the orders of each
OD pair are consolidated into one-drop routes, which are then extended one
drop at a time up to the mode's drop limit. MP1D routes come from running the
same steps on the mirrored instance. All routes meet in one deduplicated
pool, and the selection problem built from it is solved by the configured
solver.
"""

from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import StrEnum
import logging
import time
from typing import Any, Final

from configs import (
    ConfigError,
    ConsolidationConfig,
    DirectionChoice,
    ExtensionStrategy,
    GeneratorConfig,
    SolverConfig,
    SPConfig,
)
from consolidation import (
    Combo, consolidate, ODGroup, od_groups, one_drop_route,
)
from instance import Instance
from mirroring import mirror_mp1d, unmirror_route
from modes import TransportMode
from neighborhood import (
    build_neighbor_index,
    exact_extend,
    ExtensionStats,
    NeighborIndex,
    NeighborStrategy,
    restricted_extend,
)
from parallel import parallel_map, worker_context
from pool import CandidatePool
from routes import Route, RouteKey
from set_partitioning import (
    build_sp,
    SideConstraints,
    solve_sp,
    SPProblem,
    SPProof,
    SPSolution,
    UncoverableOrdersError,
)
from solutions import Solution, SolutionStatus
from sp_ilp import ExternalCommandSolver, formulate_sp_ilp
from units import optional_from_milli
from violations import Violation


logger = logging.getLogger(__name__)

# Instances solved exactly within this many seconds count as easy; heuristic
# runs finishing within it count as medium.
COMPLEXITY_SECONDS: Final[float] = 600.0
DEFAULT_GAP_THRESHOLD: Final[float] = 5.0
# Smallest time slice handed to the selection solver once the run's time
# limit is used up; the built-in search still returns its first partition.
MIN_SOLVE_SECONDS: Final[float] = 0.001
# Routes of one extension level are cut into this many chunks per worker.
CHUNKS_PER_JOB: Final[int] = 4


class Complexity(StrEnum):
    EASY = 'easy'
    MEDIUM = 'medium'
    HARD = 'hard'


@dataclass(eq=False, match_args=False, slots=True)
class GenerationResult:
    """The candidate pool and what happened while filling it."""
    pool: CandidatePool
    truncated: bool = False
    extension: ExtensionStats = field(default_factory=ExtensionStats)
    consolidation: Counter[Violation] = field(default_factory=Counter)
    combos: int = 0


def _consolidation_task(
    group: ODGroup,
) -> tuple[list[Combo], Counter[Violation]]:
    mode, instance, config = worker_context()
    rejected: Counter[Violation] = Counter()
    return consolidate(group, mode, instance, config, rejected), rejected


def _extension_task(routes: list[Route]) -> tuple[list[Route], ExtensionStats]:
    combos, depth, instance, index, prune = worker_context()
    stats = ExtensionStats()
    if index is None:
        extended = exact_extend(
            routes, combos, depth, instance, prune=prune, stats=stats,
        )
    else:
        extended = restricted_extend(
            routes, combos, depth, index, instance, prune=prune, stats=stats,
        )
    return extended, stats


def _chunks(routes: Sequence[Route], count: int) -> list[list[Route]]:
    size = max(-(-len(routes) // max(count, 1)), 1)
    return [list(routes[i:i + size]) for i in range(0, len(routes), size)]


def _extension_plans(
    instance: Instance, config: GeneratorConfig,
) -> list[tuple[str, NeighborIndex | None]]:
    extension = config.extension
    if extension.is_exact:
        return [(str(ExtensionStrategy.EXACT), None)]
    plans: list[tuple[str, NeighborIndex | None]] = []
    for strategy in extension.strategies:
        match strategy:
            case ExtensionStrategy.KNN:
                index = build_neighbor_index(
                    instance, NeighborStrategy.DISTANCE, extension.knn_k,
                )
            case ExtensionStrategy.KCORN:
                index = build_neighbor_index(
                    instance, NeighborStrategy.OOR, extension.kcorn_k,
                )
            case _:
                raise ConfigError(f'unknown extension strategy {strategy!r}')
        plans.append((str(strategy), index))
    return plans


def _generate_direction(
    instance: Instance,
    config: GeneratorConfig,
    result: GenerationResult,
    jobs: int,
    deadline: float | None,
) -> CandidatePool:
    """Fill a pool with the 1PMD routes of one (possibly mirrored) instance."""
    pool = CandidatePool()
    groups = od_groups(instance)
    plans: list[tuple[str, NeighborIndex | None]] = []
    if config.extension.strategies:
        plans = _extension_plans(instance, config)

    for mode in instance.iter_sorted_modes():
        combos: list[Combo] = []
        for group_combos, rejected in parallel_map(
            _consolidation_task, groups, jobs,
            (mode, instance, config.consolidation),
        ):
            combos.extend(group_combos)
            result.consolidation.update(rejected)
        result.combos += len(combos)

        level: list[Route] = []
        for combo in combos:
            route = one_drop_route(combo, mode, instance)
            if route is None:
                continue
            for source in sorted(combo.sources):
                pool.add(route, source)
            level.append(route)
        logger.info(
            'mode %s: %d combos from %d OD groups',
            mode.id, len(combos), len(groups),
        )

        for depth in range(2, mode.max_drops + 1):
            if not plans or not level:
                break
            if deadline is not None and time.perf_counter() > deadline:
                logger.warning(
                    'generation time budget spent; skipping routes with %d or'
                    + ' more drops for mode %s', depth, mode.id,
                )
                result.truncated = True
                break
            reached: dict[RouteKey, Route] = {}
            for source, index in plans:
                context = (
                    combos, depth, instance, index, config.extension.prune,
                )
                chunks = _chunks(level, jobs * CHUNKS_PER_JOB)
                for extended, stats in parallel_map(
                    _extension_task, chunks, jobs, context,
                ):
                    result.extension.merge(stats)
                    for route in extended:
                        pool.add(route, source)
                        reached.setdefault(route.key, route)
            level = [reached[key] for key in sorted(reached)]
            logger.info(
                'mode %s: %d routes with %d drops', mode.id, len(level), depth,
            )
    return pool


def generate_pool(
    instance: Instance,
    config: GeneratorConfig,
    *,
    jobs: int = 1,
    deadline: float | None = None,
) -> GenerationResult:
    """Generate every candidate route the configuration asks for."""
    result = GenerationResult(CandidatePool())
    directions = {
        DirectionChoice.ONE_PICKUP_MULTI_DROP: (False,),
        DirectionChoice.MULTI_PICKUP_ONE_DROP: (True,),
        DirectionChoice.BOTH: (False, True),
    }[config.direction]

    for mirrored in directions:
        if not mirrored:
            result.pool.merge(
                _generate_direction(instance, config, result, jobs, deadline)
            )
            continue
        mirror = mirror_mp1d(instance)
        mirror_pool = _generate_direction(
            mirror, config, result, jobs, deadline,
        )
        for route in mirror_pool:
            unmirrored = unmirror_route(route, instance)
            if unmirrored is None:
                continue
            for source in sorted(mirror_pool.provenance(route.key)):
                result.pool.add(unmirrored, source)

    stats = result.extension
    counts = result.pool.prune_counts
    counts['pruned_routes'] += stats.pruned_routes
    counts['skipped_candidates'] += stats.skipped_candidates
    for violation, count in (stats.violations + result.consolidation).items():
        counts[f'rejected_{violation}'] += count
    logger.info(
        'candidate pool: %d routes %s',
        len(result.pool), result.pool.depth_counts(),
    )
    return result


def side_constraints_for(instance: Instance, sp: SPConfig) -> SideConstraints:
    """Combine configured route limits with the fleet caps of the modes."""
    configured = SideConstraints(sp.max_total_routes, sp.per_mode_caps)
    fleet = SideConstraints(None, tuple(
        (mode.id, mode.fleet_cap) for mode in instance.iter_sorted_modes()
        if mode.fleet_cap is not None
    ))
    return configured.merged(fleet)


def solve_selection(
    problem: SPProblem, sp: SPConfig, time_limit: float | None = None,
) -> SPSolution:
    """Dispatch a selection problem to the configured solver."""
    match sp.solver:
        case 'builtin':
            return solve_sp(problem, time_limit, sp.gap_tolerance)
        case 'pulp':
            return formulate_sp_ilp(problem).solve(
                time_limit, sp.gap_tolerance,
            )
        case tuple() as command:
            return ExternalCommandSolver(command).solve(problem, time_limit)
        case _:
            raise ConfigError(f'unknown sp solver {sp.solver!r}')


@dataclass(frozen=True, match_args=False, slots=True)
class RunReport:
    """What one solve produced and how long each phase took."""
    config_name: str
    status: SolutionStatus
    total_cost: int | None
    lower_bound: int | None = None
    route_count: int = 0
    pool_size: int = 0
    pool_by_depth: Mapping[int, int] = field(default_factory=dict)
    proof: SPProof | None = None
    nodes_explored: int = 0
    generation_truncated: bool = False
    uncovered_orders: tuple[str, ...] = ()
    certificate: str | None = None
    generation_seconds: float = field(default=0.0, compare=False)
    model_seconds: float = field(default=0.0, compare=False)
    solve_seconds: float = field(default=0.0, compare=False)
    relative_gap: float | None = None
    baseline: str | None = None
    baseline_exact: bool | None = None
    gap_flagged: bool = False

    @property
    def total_seconds(self) -> float:
        return (
            self.generation_seconds + self.model_seconds + self.solve_seconds
        )

    def to_dict(self, include_times: bool = True) -> dict[str, Any]:
        data: dict[str, Any] = {
            'config': self.config_name,
            'status': str(self.status),
            'total_cost': optional_from_milli(self.total_cost),
            'lower_bound': optional_from_milli(self.lower_bound),
            'route_count': self.route_count,
            'pool_size': self.pool_size,
            'pool_by_depth': {
                str(k): v for k, v in sorted(self.pool_by_depth.items())
            },
            'proof': None if self.proof is None else str(self.proof),
            'nodes_explored': self.nodes_explored,
            'generation_truncated': self.generation_truncated,
            'uncovered_orders': list(self.uncovered_orders),
            'certificate': self.certificate,
            'relative_gap': self.relative_gap,
            'baseline': self.baseline,
            'baseline_exact': self.baseline_exact,
            'gap_flagged': self.gap_flagged,
        }
        if include_times:
            data |= {
                'generation_seconds': round(self.generation_seconds, 3),
                'model_seconds': round(self.model_seconds, 3),
                'solve_seconds': round(self.solve_seconds, 3),
                'total_seconds': round(self.total_seconds, 3),
            }
        return data


def _status_of(proof: SPProof) -> SolutionStatus:
    match proof:
        case SPProof.OPTIMAL:
            return SolutionStatus.OPTIMAL
        case SPProof.TIME_LIMITED | SPProof.GAP_LIMITED:
            return SolutionStatus.FEASIBLE_WITH_BOUND
        case _:
            return SolutionStatus.INFEASIBLE


def run(
    instance: Instance,
    config: SolverConfig,
    *,
    jobs: int = 1,
    name: str | None = None,
) -> tuple[Solution, RunReport]:
    """Solve an instance: generate the pool, build the model, select routes.

    Orders that no generated route can carry make the run infeasible before
    any selection is attempted; the report lists them. The SP time limit
    counts from the start of the run.
    """
    name = name or config.preset or 'custom'
    start = time.perf_counter()
    budget = config.generator.generation_time_budget
    deadline = None if budget is None else start + budget

    generation = generate_pool(
        instance, config.generator, jobs=jobs, deadline=deadline,
    )
    pool = generation.pool
    generated = time.perf_counter()

    def report(solution: Solution, **fields: Any) -> RunReport:
        return RunReport(
            config_name=name,
            status=solution.status,
            total_cost=solution.total_cost,
            lower_bound=solution.lower_bound,
            route_count=len(solution),
            pool_size=len(pool),
            pool_by_depth=pool.depth_counts(),
            generation_truncated=generation.truncated,
            uncovered_orders=solution.uncovered_orders,
            certificate=solution.certificate,
            generation_seconds=generated - start,
            **fields,
        )

    covered = set(pool.coverage())
    uncovered = tuple(
        order.id for order in instance.iter_sorted_orders()
        if order.id not in covered
    )
    if uncovered:
        logger.warning(
            'no feasible route carries order(s): %s', ', '.join(uncovered),
        )
        solution = Solution.infeasible(
            uncovered, 'coverage', generated - start,
        )
        return solution, report(solution)

    side = side_constraints_for(instance, config.sp)
    try:
        problem = build_sp(pool, side, [order.id for order in instance.orders])
    except UncoverableOrdersError as error:
        # Only routes of modes capped at zero trucks carry these orders.
        logger.warning('%s', error)
        solution = Solution.infeasible(
            error.orders, 'per_mode_caps', time.perf_counter() - start,
        )
        return solution, report(solution)
    built = time.perf_counter()

    time_limit = config.sp.time_limit
    if time_limit is not None:
        time_limit = max(time_limit - (built - start), MIN_SOLVE_SECONDS)
    selection = solve_selection(problem, config.sp, time_limit)
    solved = time.perf_counter()

    status = _status_of(selection.proof)
    if status is SolutionStatus.INFEASIBLE:
        solution = Solution.infeasible(
            (), selection.certificate, solved - start,
        )
    else:
        routes_by_id = pool.with_ids()
        solution = Solution(
            tuple(routes_by_id[rid] for rid in selection.chosen),
            selection.chosen,
            status,
            selection.bound,
            solved - start,
        )
    return solution, report(
        solution,
        proof=selection.proof,
        nodes_explored=selection.nodes_explored,
        model_seconds=built - generated,
        solve_seconds=solved - built,
    )


def relative_gap(cost: int | None, baseline_cost: int | None) -> float | None:
    """Return 100 * (cost - baseline) / baseline, or None when undefined."""
    if cost is None or baseline_cost is None:
        return None
    if baseline_cost == 0:
        return 0.0 if cost == 0 else None
    return 100.0 * (cost - baseline_cost) / baseline_cost


def compare(
    instance: Instance,
    configs: Mapping[str, SolverConfig],
    baseline: str,
    *,
    gap_threshold: float = DEFAULT_GAP_THRESHOLD,
    jobs: int = 1,
) -> dict[str, RunReport]:
    """Run several configurations and measure each one's gap to a baseline.

    If the baseline does not prove optimality, gaps are measured against the
    cheapest cost any configuration found and the reports say so.
    """
    if baseline not in configs:
        raise ConfigError(
            f'baseline {baseline!r} is not among the compared configs'
        )
    reports = {
        config_name: run(instance, config, jobs=jobs, name=config_name)[1]
        for config_name, config in configs.items()
    }
    base = reports[baseline]
    exact = base.status is SolutionStatus.OPTIMAL
    if exact:
        reference = base.total_cost
    else:
        reference = min(
            (
                r.total_cost for r in reports.values()
                if r.total_cost is not None
            ),
            default=None,
        )
        logger.warning(
            'baseline %s is not optimal; gaps use the best known cost',
            baseline,
        )

    compared: dict[str, RunReport] = {}
    for config_name, report in reports.items():
        gap = relative_gap(report.total_cost, reference)
        compared[config_name] = replace(
            report,
            relative_gap=gap,
            baseline=baseline,
            baseline_exact=exact,
            gap_flagged=gap is not None and gap > gap_threshold,
        )
    return compared


def classify(
    report: RunReport,
    exact_attempted: bool,
    exact_report: RunReport | None = None,
) -> Complexity:
    """Put an instance in a complexity class from its solve times.

    Easy: the exact method proved optimality within the limit. Medium: the
    exact method was not attempted or did not finish in time, but the
    reported (heuristic) run did. Hard: neither.
    """
    exact = exact_report if exact_report is not None else (
        report if exact_attempted else None
    )
    if (
        exact is not None
        and exact.status is SolutionStatus.OPTIMAL
        and exact.total_seconds < COMPLEXITY_SECONDS
    ):
        return Complexity.EASY
    if (
        report.status is not SolutionStatus.INFEASIBLE
        and report.total_seconds < COMPLEXITY_SECONDS
    ):
        return Complexity.MEDIUM
    return Complexity.HARD
