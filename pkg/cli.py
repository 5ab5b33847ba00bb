#!/usr/bin/env python3
"""Command-line entry point: solve, validate, gen and bench.

Exit codes: 0 success, 1 infeasible, 2 invalid input, 3 time limit reached
with a solution in hand, 4 internal error. Command-line flags override the
configuration file, which overrides the preset defaults.
"""

import argparse
from collections.abc import Sequence
from dataclasses import replace
from enum import IntEnum
import json
import logging
import os
from pathlib import Path
import sys
from typing import Any

from bench import bench, parse_bench_spec, print_report
from configs import (
    ConfigError,
    DEFAULT_PRESET,
    DirectionChoice,
    load_config,
    PRESETS,
    SolverConfig,
    with_overrides,
)
from feasibility import RouteInputError, validate
from fileio import (
    append_manifest,
    atomic_write_json,
    atomic_write_text,
    config_hash,
    package_versions,
)
from instance import InvalidInstanceError, load_instance
from instance_generator import generate, parse_profile, WEIGHT_MODEL_NOTE
from pipeline import run
from routes import Direction
from set_partitioning import SelectionError, SPProof
from solutions import format_routes_table, SolutionStatus
from sp_ilp import ExternalSolverError


logger = logging.getLogger(__name__)


class ExitStatus(IntEnum):
    SUCCESS = 0
    INFEASIBLE = 1
    INVALID_INPUT = 2
    TIMEOUT = 3
    INTERNAL_ERROR = 4


def _read(path: str) -> str:
    return Path(path).read_text(encoding='utf-8')


def resolve_config(args: argparse.Namespace) -> SolverConfig:
    """Combine the config file, the preset flag and the override flags."""
    data: dict[str, Any] = {}
    if args.config is not None:
        try:
            data = json.loads(_read(args.config))
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f'line {exc.lineno}: configuration is not valid JSON: '
                f'{exc.msg}'
            ) from exc
        if not isinstance(data, dict):
            raise ConfigError('a solver configuration must be an object')
    if args.preset is not None:
        data['preset'] = args.preset
    return with_overrides(
        load_config(data),
        time_limit=args.time_limit,
        seed=args.seed,
        direction=args.direction,
    )


def _manifest(
    out_dir: Path, command: str, argv: Sequence[str], **record: Any,
) -> None:
    append_manifest(out_dir / 'manifest.jsonl', {
        'command': command,
        'argv': list(argv),
        'versions': package_versions(),
        **record,
    })


def cmd_solve(args: argparse.Namespace) -> ExitStatus:
    instance = load_instance(_read(args.instance))
    config = resolve_config(args)
    solution, report = run(instance, config, jobs=args.jobs)

    out_dir = Path(args.out_dir)
    solution.save_file(out_dir / 'solution.json', instance)
    table = format_routes_table(solution, instance)
    atomic_write_text(out_dir / 'routes.txt', table)
    atomic_write_json(out_dir / 'report.json', report.to_dict())
    config_data = config.to_dict()
    _manifest(
        out_dir, 'solve', args.argv,
        instance=args.instance,
        seed=config.generator.seed,
        config=config_data,
        config_hash=config_hash(config_data),
        status=str(solution.status),
    )

    if args.output_format == 'structured':
        print(json.dumps({
            'solution': solution.to_dict(instance),
            'report': report.to_dict(),
        }, indent=2))
    else:
        print(table, end='')

    if solution.status is SolutionStatus.INFEASIBLE:
        return ExitStatus.INFEASIBLE
    if report.proof is SPProof.TIME_LIMITED:
        return ExitStatus.TIMEOUT
    return ExitStatus.SUCCESS


def cmd_validate(args: argparse.Namespace) -> ExitStatus:
    instance = load_instance(_read(args.instance))
    if args.route is None:
        print(f'{args.instance}: ok ({instance!r})')
        return ExitStatus.SUCCESS
    try:
        route = json.loads(_read(args.route))
        mode = instance.mode(route['mode'])
        direction = Direction(
            route.get('direction', Direction.ONE_PICKUP_MULTI_DROP)
        )
        stops, orders = route['stops'], route['orders']
    except json.JSONDecodeError as exc:
        raise RouteInputError(
            f'line {exc.lineno}: route is not valid JSON: {exc.msg}'
        ) from exc
    except KeyError as exc:
        raise RouteInputError(
            f'unknown or missing route field: {exc.args[0]}'
        ) from None
    except (TypeError, ValueError) as exc:
        raise RouteInputError(f'malformed route: {exc}') from exc
    verdict = validate(stops, orders, mode, instance, direction)
    if args.output_format == 'structured':
        print(json.dumps({
            'feasible': verdict.feasible,
            'violation': (
                None if verdict.violation is None else str(verdict.violation)
            ),
        }))
    elif verdict.feasible:
        print('feasible')
    else:
        print(f'violation={verdict.violation}')
    return ExitStatus.SUCCESS if verdict.feasible else ExitStatus.INFEASIBLE


def cmd_gen(args: argparse.Namespace) -> ExitStatus:
    profile = parse_profile(_read(args.profile))
    if args.seed is not None:
        profile = replace(profile, seed=args.seed)
    instance = generate(profile)
    out_path = Path(args.out)
    atomic_write_text(out_path, instance.dumps())
    _manifest(
        out_path.parent, 'gen', args.argv,
        profile=profile.to_dict(),
        seed=profile.seed,
        config_hash=config_hash(profile.to_dict()),
        notes=[WEIGHT_MODEL_NOTE],
    )
    print(f'wrote {instance!r} to {out_path}')
    return ExitStatus.SUCCESS


def cmd_bench(args: argparse.Namespace) -> ExitStatus:
    spec = parse_bench_spec(_read(args.spec))
    results = bench(spec, Path(args.out_dir), jobs=args.jobs)
    if args.output_format == 'structured':
        print(json.dumps({
            result.name: {
                'complexity': str(result.complexity),
                'reports': {
                    name: report.to_dict()
                    for name, report in result.reports.items()
                },
            }
            for result in results
        }, indent=2))
    else:
        print_report(results)
    return ExitStatus.SUCCESS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '-v', '--verbose', action='count', default=0,
        help='log progress to stderr (-v for info, -vv for debug)',
    )
    common.add_argument(
        '--output-format', choices=('text', 'structured'), default='text',
        help='print human-readable text or JSON on stdout',
    )
    common.add_argument(
        '--jobs', type=int, default=os.cpu_count() or 1,
        help='worker processes for route generation (default: all cores)',
    )
    parser = argparse.ArgumentParser(
        prog='rvrp',
        description=(
            'Rich vehicle routing by route generation and set partitioning.'
        ),
    )
    commands = parser.add_subparsers(dest='command', required=True)

    solve = commands.add_parser(
        'solve', parents=[common], help='solve an instance file',
    )
    solve.add_argument('instance', help='instance JSON file')
    solve.add_argument('--config', help='solver configuration JSON file')
    solve.add_argument(
        '--out-dir', default='.', help='where result files are written',
    )
    solve.add_argument(
        '--preset', choices=sorted(PRESETS),
        help=f'named configuration (default: {DEFAULT_PRESET})',
    )
    solve.add_argument(
        '--time-limit', type=float,
        help='seconds for the whole solve; the best solution found is kept',
    )
    solve.add_argument(
        '--seed', type=int, help='seed for randomized consolidation',
    )
    solve.add_argument(
        '--direction', choices=[choice.value for choice in DirectionChoice],
        help='route shapes to generate',
    )
    solve.set_defaults(handler=cmd_solve)

    check = commands.add_parser(
        'validate', parents=[common], help='check an instance or a route',
    )
    check.add_argument('instance', help='instance JSON file')
    check.add_argument(
        '--route', help='route JSON file to validate against the instance',
    )
    check.set_defaults(handler=cmd_validate)

    gen = commands.add_parser(
        'gen', parents=[common], help='generate an instance from a profile',
    )
    gen.add_argument('profile', help='profile JSON file')
    gen.add_argument('out', help='instance file to write')
    gen.add_argument('--seed', type=int, help='override the profile seed')
    gen.set_defaults(handler=cmd_gen)

    bench_cmd = commands.add_parser(
        'bench', parents=[common], help='compare configurations on profiles',
    )
    bench_cmd.add_argument('spec', help='bench specification JSON file')
    bench_cmd.add_argument(
        'out_dir', help='where tables and figure data are written',
    )
    bench_cmd.set_defaults(handler=cmd_bench)
    return parser


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    logging.captureWarnings(True)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    configure_logging(args.verbose)
    if args.jobs < 1:
        parser.error('--jobs must be a positive integer')

    try:
        return int(args.handler(args))
    except (InvalidInstanceError, ConfigError, RouteInputError) as exc:
        print(f'error: {exc}', file=sys.stderr)
        return ExitStatus.INVALID_INPUT
    except OSError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return ExitStatus.INVALID_INPUT
    except (SelectionError, ExternalSolverError) as exc:
        print(f'error: {exc}', file=sys.stderr)
        return ExitStatus.INTERNAL_ERROR
    except Exception:
        logger.exception('internal error')
        return ExitStatus.INTERNAL_ERROR


if __name__ == '__main__':
    sys.exit(main())
