"""The route selection problem as an integer linear program, and the file
bridge that lets an outside solver do the selection instead."""

import dataclasses
import json
import logging
import math
from pathlib import Path
import subprocess
import tempfile
import time
from typing import Any, Final
import warnings

import pulp as pl

from set_partitioning import (
    check_partition,
    Column,
    share_bound,
    SideConstraints,
    solve_sp,
    SPProblem,
    SPProof,
    SPSolution,
)
from units import format_milli, to_milli


logger = logging.getLogger(__name__)

SP_FILE_FORMAT: Final[str] = 'rvrp-sp/1'
# Costs are integers; the solver's dual bound is rounded up past this slack.
BOUND_TOLERANCE: Final[float] = 1e-6
# Time given to the built-in search after the MILP ran out of time empty.
MIN_SEARCH_SECONDS: Final[float] = 0.001


class SolverUnavailableWarning(UserWarning):
    """Issued when the preferred MILP solver cannot be executed."""


class ExternalSolverError(RuntimeError):
    """Raised when an external selection program fails or writes nothing."""


def create_route_vars(problem: SPProblem) -> dict[str, pl.LpVariable]:
    """Return one binary decision variable per route: 1 if it is chosen."""
    return {
        column.id: pl.LpVariable(f'route__{column.id}', cat=pl.LpBinary)
        for column in problem.columns
    }


def get_binary_value(var: pl.LpVariable) -> int:
    """Extract the value of a PuLP variable that is expected to be binary."""
    float_value = pl.value(var)
    assert isinstance(float_value, float | int)
    int_value = round(float_value)
    assert int_value in (0, 1)
    return int_value


# HiGHS (from highspy) is noticeably faster than the CBC binary PuLP ships
# with. PuLP falls back on CBC when highspy is not installed.
PREFERRED_SOLVER: Final[str] = 'HiGHS'


@dataclasses.dataclass(eq=False, match_args=False, slots=True)
class SPILP:
    """A PuLP problem together with the route variables it was built from."""
    sp: SPProblem
    problem: pl.LpProblem
    route_vars: dict[str, pl.LpVariable]

    def solve(
        self,
        time_limit: float | None = None,
        gap_tolerance: float = 0.0,
        **kwargs: Any,
    ) -> SPSolution:
        """Solve the ILP with PuLP and convert the result."""
        if time_limit is not None:
            kwargs.setdefault('timeLimit', time_limit)
        kwargs.setdefault('gapRel', gap_tolerance)
        kwargs.setdefault('msg', False)
        solver = pl.getSolver(PREFERRED_SOLVER, **kwargs)
        start = time.perf_counter()

        # Catching the failure is much quicker than asking PuLP to list the
        # available solvers up front.
        try:
            self.problem.solve(solver)
        except pl.PulpSolverError:
            if solver.available():
                raise
            warnings.warn(
                f'preferred solver {PREFERRED_SOLVER!r} is unavailable,'
                + ' using PuLP default solver instead',
                SolverUnavailableWarning,
            )
            fallback = {
                key: value for key, value in kwargs.items()
                if key in ('timeLimit', 'gapRel', 'msg')
            }
            self.problem.solve(pl.PULP_CBC_CMD(**fallback))
        elapsed = time.perf_counter() - start
        return self.result(elapsed, time_limit is not None, gap_tolerance)

    def result(
        self,
        elapsed: float = 0.0,
        time_limited: bool = False,
        gap_tolerance: float = 0.0,
    ) -> SPSolution:
        """Convert the state PuLP left on the problem into a solution.

        A run stopped by its time limit before finding any partition hands
        over to the built-in search, which always returns one.
        """
        status = pl.LpStatus[self.problem.status]
        if status == 'Infeasible':
            return SPSolution(
                (), None, None, SPProof.INFEASIBLE, 0, elapsed, 'milp',
            )
        incumbent = self.problem.sol_status in (
            pl.LpSolutionOptimal, pl.LpSolutionIntegerFeasible,
        )
        if status != 'Optimal' or not incumbent:
            if not time_limited:
                raise RuntimeError(
                    f'milp solver finished with status {status!r}'
                )
            logger.warning(
                'milp solver stopped with no partition (%s);'
                + ' finishing with the built-in search', status,
            )
            found = solve_sp(self.sp, MIN_SEARCH_SECONDS, gap_tolerance)
            if not found.feasible or found.proof is SPProof.OPTIMAL:
                return found
            bounds = (found.bound, self._lower_bound(found.objective))
            return dataclasses.replace(
                found,
                bound=max(bound for bound in bounds if bound is not None),
                proof=SPProof.TIME_LIMITED,
                wall_time=elapsed + found.wall_time,
            )

        chosen = tuple(
            rid for rid, var in self.route_vars.items()
            if get_binary_value(var)
        )
        check_partition(self.sp, chosen)
        objective = self.sp.cost_of(chosen)
        if self.problem.sol_status == pl.LpSolutionIntegerFeasible:
            proof = SPProof.TIME_LIMITED
            bound = self._lower_bound(objective)
        else:
            proof, bound = SPProof.OPTIMAL, objective
        return SPSolution(chosen, objective, bound, proof, 0, elapsed)

    def _lower_bound(self, objective: int | None) -> int | None:
        """Best of the solver's dual bound and the per-order share bound."""
        bounds = [
            bound for bound in (self._solver_bound(), share_bound(self.sp))
            if bound is not None
        ]
        if not bounds or objective is None:
            return None
        return min(max(bounds), objective)

    def _solver_bound(self) -> int | None:
        # Only the highspy backend exposes its dual bound.
        try:
            value = self.problem.solverModel.getInfo().mip_dual_bound
        except AttributeError:
            return None
        if not math.isfinite(value):
            return None
        return math.ceil(value - BOUND_TOLERANCE)


def formulate_sp_ilp(problem: SPProblem) -> SPILP:
    """Construct the integer linear program for a route selection problem."""
    ilp = pl.LpProblem('SP_ILP', pl.LpMinimize)
    route_vars = create_route_vars(problem)

    ilp += pl.lpSum(
        column.cost * route_vars[column.id] for column in problem.columns
    )

    # Constraints: every order is on exactly one chosen route
    for order_id in problem.orders:
        equation = pl.lpSum(
            route_vars[column.id] for column in problem.covering(order_id)
        ) == 1
        ilp += (equation, f'cover__{order_id}')

    # Constraints: routes forced during preprocessing
    for rid in problem.fixed:
        ilp += (route_vars[rid] == 1, f'fixed__{rid}')

    # Constraints: fleet limits
    side = problem.side_constraints
    if side.max_total_routes is not None:
        ilp += (
            pl.lpSum(route_vars.values()) <= side.max_total_routes,
            'max_total_routes',
        )
    for mode, cap in side.per_mode_caps:
        inequality = pl.lpSum(
            route_vars[column.id] for column in problem.columns
            if column.mode == mode
        ) <= cap
        ilp += (inequality, f'mode_cap__{mode}')

    return SPILP(problem, ilp, route_vars)


def sp_to_dict(problem: SPProblem) -> dict[str, Any]:
    """Return the bridge-file document for a selection problem."""
    return {
        'format': SP_FILE_FORMAT,
        'orders': list(problem.orders),
        'routes': [
            {
                'id': column.id,
                'cost': format_milli(column.cost),
                'mode': column.mode,
                'orders': sorted(column.orders),
            }
            for column in problem.columns
        ],
        'fixed': list(problem.fixed),
        'side_constraints': problem.side_constraints.to_dict(),
    }


def write_sp_file(problem: SPProblem, file_path: Path) -> None:
    """Write a selection problem for an external solver to read."""
    text = json.dumps(sp_to_dict(problem), indent=2) + '\n'
    file_path.write_text(text, encoding='utf-8')


def read_sp_file(file_path: Path) -> SPProblem:
    """Read a selection problem back from its bridge file."""
    document = json.loads(file_path.read_text(encoding='utf-8'))
    if document.get('format') != SP_FILE_FORMAT:
        raise ValueError(f'not a {SP_FILE_FORMAT} file: {file_path}')
    return SPProblem(
        tuple(document['orders']),
        tuple(
            Column(
                route['id'], frozenset(route['orders']),
                to_milli(route['cost']), route.get('mode', ''),
            )
            for route in document['routes']
        ),
        SideConstraints.from_dict(document.get('side_constraints')),
        tuple(document.get('fixed', ())),
    )


def read_selection_file(
    problem: SPProblem, file_path: Path, elapsed: float = 0.0,
) -> SPSolution:
    """Read the routes an external solver chose and check they partition.

    Lines are route ids; blank lines and lines starting with '#' are ignored.
    Optional 'status: <proof>' and 'bound: <cost>' lines report what the
    solver proved. Without a status line the result is taken as optimal.
    """
    chosen: list[str] = []
    proof = SPProof.OPTIMAL
    bound: int | None = None
    with file_path.open('r', encoding='utf-8') as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            key, sep, value = line.partition(':')
            match key.strip().lower() if sep else None:
                case 'status':
                    proof = SPProof(value.strip())
                case 'bound':
                    bound = to_milli(value.strip())
                case None:
                    chosen.append(line)
                case _:
                    raise ExternalSolverError(
                        f'unrecognized selection line: {line!r}'
                    )

    if proof is SPProof.INFEASIBLE:
        if chosen:
            raise ExternalSolverError(
                'an infeasible selection cannot list routes'
            )
        return SPSolution((), None, None, proof, 0, elapsed, 'external')
    check_partition(problem, chosen)
    objective = problem.cost_of(chosen)
    if proof is SPProof.OPTIMAL:
        bound = objective
    elif bound is not None:
        bound = min(bound, objective)
    return SPSolution(tuple(chosen), objective, bound, proof, 0, elapsed)


@dataclasses.dataclass(frozen=True, match_args=False, slots=True)
class ExternalCommandSolver:
    """Runs `command PROBLEM_FILE SELECTION_FILE` and reads the selection."""
    command: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.command:
            raise ValueError('external solver command must not be empty')
        object.__setattr__(self, 'command', tuple(self.command))

    def solve(
        self, problem: SPProblem, time_limit: float | None = None,
    ) -> SPSolution:
        with tempfile.TemporaryDirectory(prefix='rvrp-sp-') as work_dir:
            problem_path = Path(work_dir) / 'problem.json'
            selection_path = Path(work_dir) / 'selection.txt'
            write_sp_file(problem, problem_path)
            args = [*self.command, str(problem_path), str(selection_path)]
            logger.info(
                'running external selection solver: %s', ' '.join(args),
            )
            start = time.perf_counter()
            try:
                completed = subprocess.run(
                    args, capture_output=True, text=True, timeout=time_limit,
                    check=False,
                )
            except (OSError, subprocess.TimeoutExpired) as error:
                raise ExternalSolverError(
                    f'external solver failed: {error}'
                ) from error
            elapsed = time.perf_counter() - start
            if completed.returncode != 0:
                raise ExternalSolverError(
                    'external solver exited with status'
                    + f' {completed.returncode}: {completed.stderr.strip()}'
                )
            if not selection_path.exists():
                raise ExternalSolverError(
                    'external solver wrote no selection file'
                )
            return read_selection_file(problem, selection_path, elapsed)


if __name__ == '__main__':

    import sys

    _, arg_1, arg_2 = sys.argv
    sp = read_sp_file(Path(arg_1))
    result = formulate_sp_ilp(sp).solve()
    with Path(arg_2).open('w', encoding='utf-8') as out:
        out.write(f'status: {result.proof}\n')
        for rid in result.chosen:
            out.write(f'{rid}\n')
