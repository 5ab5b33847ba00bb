#!/usr/bin/env python3
"""The script compares solver configurations across generated instances.

When called on the command line, pass in the path to a bench specification
file and an output directory. The script writes a gap table and a time table
(rows = configurations, columns = instances), long-form data for execution
time and objective value plots, the feature table of the instances, and a
manifest line recording how the results were produced.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field
import json
import logging
from pathlib import Path
from typing import Any, Final

import pandas as pd

from configs import ConfigError, load_config, SolverConfig, with_overrides
from fileio import (
    append_manifest,
    atomic_write_text,
    config_hash,
    package_versions,
)
from instance_generator import (
    generate, ProfileSpec, summarize, WEIGHT_MODEL_NOTE,
)
from parallel import parallel_map
from pipeline import (
    classify, compare, Complexity, DEFAULT_GAP_THRESHOLD, RunReport,
)
from set_partitioning import SPProof
from solutions import SolutionStatus


logger = logging.getLogger(__name__)

NA: Final[str] = 'NA'
BENCH_KEYS: Final[frozenset[str]] = frozenset({
    'profiles', 'configs', 'baseline', 'time_limit', 'gap_threshold',
    'complexity_reference',
})


@dataclass(frozen=True, match_args=False, slots=True)
class BenchSpec:
    """Which instances to generate and which configurations to compare."""
    profiles: tuple[ProfileSpec, ...]
    configs: Mapping[str, SolverConfig]
    baseline: str
    time_limit: float | None = None
    gap_threshold: float = DEFAULT_GAP_THRESHOLD
    complexity_reference: str | None = None
    raw: Mapping[str, Any] = field(
        default_factory=dict, repr=False, compare=False,
    )

    def __post_init__(self) -> None:
        if not self.profiles:
            raise ConfigError('a bench needs at least one profile')
        names = [profile.name for profile in self.profiles]
        if len(set(names)) != len(names):
            raise ConfigError('profile names must be unique within a bench')
        if self.baseline not in self.configs:
            raise ConfigError(
                f'baseline {self.baseline!r} is not a configured run'
            )
        reference = self.complexity_reference
        if reference is not None and reference not in self.configs:
            raise ConfigError(
                f'complexity reference {reference!r} is not a configured run'
            )

    @property
    def heuristic(self) -> str:
        """The configuration whose times decide the medium and hard classes."""
        if self.complexity_reference is not None:
            return self.complexity_reference
        others = [name for name in self.configs if name != self.baseline]
        return others[-1] if others else self.baseline


def parse_bench_spec(spec_string: str) -> BenchSpec:
    """Parse the contents of a bench specification file."""
    try:
        data = json.loads(spec_string)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f'line {exc.lineno}: bench spec is not valid JSON: {exc.msg}'
        ) from exc
    if not isinstance(data, Mapping):
        raise ConfigError('a bench spec must be an object')
    unknown = sorted(set(data) - BENCH_KEYS)
    if unknown:
        raise ConfigError(
            f'unknown key(s) in bench spec: {", ".join(unknown)}'
        )
    time_limit = data.get('time_limit')
    configs = {
        str(name): with_overrides(load_config(block), time_limit=time_limit)
        for name, block in dict(data.get('configs', {})).items()
    }
    if not configs:
        raise ConfigError('a bench needs at least one configuration')
    return BenchSpec(
        tuple(
            ProfileSpec.from_dict(profile)
            for profile in data.get('profiles', ())
        ),
        configs,
        str(data.get('baseline', next(iter(configs)))),
        None if time_limit is None else float(time_limit),
        float(data.get('gap_threshold', DEFAULT_GAP_THRESHOLD)),
        data.get('complexity_reference'),
        data,
    )


@dataclass(frozen=True, match_args=False, slots=True)
class InstanceResult:
    name: str
    features: list[tuple[str, Any]]
    reports: Mapping[str, RunReport]
    complexity: Complexity


def _timed_out(report: RunReport) -> bool:
    return (
        report.proof is SPProof.TIME_LIMITED
        or report.status is SolutionStatus.INFEASIBLE
    )


def bench_profile(task: tuple[ProfileSpec, BenchSpec]) -> InstanceResult:
    """Generate one instance and run every configuration on it."""
    profile, spec = task
    instance = generate(profile)
    reports = compare(
        instance, spec.configs, spec.baseline,
        gap_threshold=spec.gap_threshold,
    )
    exact = reports[spec.baseline]
    complexity = classify(
        reports[spec.heuristic], exact_attempted=True, exact_report=exact,
    )
    logger.info('bench instance %s is %s', profile.name, complexity)
    return InstanceResult(
        profile.name, summarize(instance).rows(), reports, complexity,
    )


def gap_table(results: list[InstanceResult]) -> pd.DataFrame:
    """Relative gaps in percent; NA where a run timed out or found nothing."""
    table = pd.DataFrame({
        result.name: {
            name: (
                None if _timed_out(report) or report.relative_gap is None
                else round(report.relative_gap, 2)
            )
            for name, report in result.reports.items()
        }
        for result in results
    })
    table.index.name = 'config'
    return table


def time_table(results: list[InstanceResult]) -> pd.DataFrame:
    """Total execution seconds; NA where a run hit its time limit."""
    table = pd.DataFrame({
        result.name: {
            name: (
                None if _timed_out(report)
                else round(report.total_seconds, 1)
            )
            for name, report in result.reports.items()
        }
        for result in results
    })
    table.index.name = 'config'
    return table


def feature_table(results: list[InstanceResult]) -> pd.DataFrame:
    columns = {result.name: dict(result.features) for result in results}
    for result in results:
        columns[result.name]['Complexity'] = str(result.complexity)
    table = pd.DataFrame(columns)
    table.index.name = 'feature'
    return table


def figure_data(
    results: list[InstanceResult],
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Long-form time and objective rows per (instance, config)."""
    rows = [
        {'instance': result.name, **report.to_dict()}
        for result in results for report in result.reports.values()
    ]
    frame = pd.DataFrame(rows).rename(columns={'config': 'algorithm'})
    times = frame[[
        'instance', 'algorithm', 'generation_seconds', 'model_seconds',
        'solve_seconds', 'total_seconds',
    ]]
    objectives = frame[[
        'instance', 'algorithm', 'total_cost', 'lower_bound', 'status',
    ]]
    return times, objectives


def bench(
    spec: BenchSpec, out_dir: Path, jobs: int = 1,
) -> list[InstanceResult]:
    """Run the whole bench and write its report files into out_dir."""
    results = parallel_map(
        bench_profile, [(profile, spec) for profile in spec.profiles], jobs,
    )
    times, objectives = figure_data(results)
    outputs = {
        'gaps.csv': gap_table(results),
        'times.csv': time_table(results),
        'features.csv': feature_table(results),
        'figure_times.csv': times,
        'figure_objectives.csv': objectives,
    }
    for file_name, table in outputs.items():
        index = file_name in ('gaps.csv', 'times.csv', 'features.csv')
        atomic_write_text(
            out_dir / file_name, table.to_csv(index=index, na_rep=NA),
        )

    append_manifest(out_dir / 'manifest.jsonl', {
        'command': 'bench',
        'profiles': [profile.to_dict() for profile in spec.profiles],
        'seeds': [profile.seed for profile in spec.profiles],
        'configs': {
            name: config.to_dict() for name, config in spec.configs.items()
        },
        'config_hash': config_hash(dict(spec.raw)),
        'baseline': spec.baseline,
        'time_limit': spec.time_limit,
        'versions': package_versions(),
        'notes': [WEIGHT_MODEL_NOTE],
    })
    return results


def print_report(results: list[InstanceResult]) -> None:
    """Print the gap and time tables for the user."""
    print()
    print('Relative gap (%):')
    print(gap_table(results).to_string(na_rep=NA))
    print()
    print('Execution time (s):')
    print(time_table(results).to_string(na_rep=NA))
    print()
    for result in results:
        print(f'{result.name}: {result.complexity}')
    print()


if __name__ == '__main__':

    import sys

    _, arg_1, arg_2 = sys.argv
    bench_spec = parse_bench_spec(Path(arg_1).read_text(encoding='utf-8'))
    print_report(bench(bench_spec, Path(arg_2)))
