"""Solver configuration: route generation settings, SP settings and presets.

A configuration file is a JSON object. A named preset provides the base
values, explicit blocks override it field by field, and command-line flags
override both.
"""

from collections.abc import Mapping
from dataclasses import dataclass, replace
from enum import StrEnum
import json
from typing import Any, Final, Self, TypeVar


class ConfigError(ValueError):
    """Raised for solver, profile or bench settings that cannot be honored."""


class ConsolidationMethod(StrEnum):
    """Ways of packing the orders of one origin-destination pair."""
    EXACT = 'exact'
    FFD = 'ffd'
    BFD = 'bfd'
    FFS = 'ffs'
    SINGLETONS = 'singletons'


class ExtensionStrategy(StrEnum):
    """Ways of choosing the next stop when growing multi-drop routes."""
    EXACT = 'exact'
    KNN = 'knn'
    KCORN = 'kcorn'


class DirectionChoice(StrEnum):
    """Which route shapes to generate."""
    ONE_PICKUP_MULTI_DROP = '1PMD'
    MULTI_PICKUP_ONE_DROP = 'MP1D'
    BOTH = 'both'


# Largest OD group whose 2^L - 1 subsets are enumerated without an override.
MAX_ENUMERATION_GROUP: Final[int] = 25


E = TypeVar('E', bound=StrEnum)


def _enum_tuple(kind: type[E], values: Any, name: str) -> tuple[E, ...]:
    if isinstance(values, str):
        values = [values]
    try:
        return tuple(kind(value) for value in values)
    except (TypeError, ValueError):
        allowed = ', '.join(member.value for member in kind)
        raise ConfigError(f'{name} must be chosen from: {allowed}') from None


def _check_keys(
    block: Mapping[str, Any], allowed: set[str], name: str,
) -> None:
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f'unknown key(s) in {name}: {", ".join(unknown)}')


@dataclass(frozen=True, match_args=False, slots=True)
class ConsolidationConfig:
    """How OD groups are turned into one-drop order combinations."""
    methods: tuple[ConsolidationMethod, ...] = (ConsolidationMethod.BFD,)
    partial_container: tuple[float, ...] = (1.0,)
    threshold: int | None = None
    seed: int = 0
    allow_large_groups: bool = False

    def __post_init__(self) -> None:
        methods = _enum_tuple(ConsolidationMethod, self.methods, 'methods')
        object.__setattr__(self, 'methods', methods)
        object.__setattr__(
            self, 'partial_container',
            tuple(map(float, self.partial_container)),
        )
        if not methods:
            raise ConfigError('at least one consolidation method is required')
        if set(methods) == {ConsolidationMethod.SINGLETONS}:
            raise ConfigError('singletons is never used by itself')
        if not self.partial_container:
            raise ConfigError(
                'at least one partial container factor is required'
            )
        if not all(0.0 < factor <= 1.0 for factor in self.partial_container):
            raise ConfigError('partial container factors must lie in (0, 1]')
        if self.threshold is not None and self.threshold < 1:
            raise ConfigError('the enumeration threshold must be positive')

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        _check_keys(data, {
            'methods', 'partial_container', 'threshold', 'seed',
            'allow_large_groups',
        }, 'consolidation')
        threshold = data.get('threshold')
        return cls(
            methods=data.get('methods', (ConsolidationMethod.BFD,)),
            partial_container=tuple(data.get('partial_container', (1.0,))),
            threshold=None if threshold is None else int(threshold),
            seed=int(data.get('seed', 0)),
            allow_large_groups=bool(data.get('allow_large_groups', False)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            'methods': [str(method) for method in self.methods],
            'partial_container': list(self.partial_container),
            'threshold': self.threshold,
            'seed': self.seed,
            'allow_large_groups': self.allow_large_groups,
        }


@dataclass(frozen=True, match_args=False, slots=True)
class ExtensionConfig:
    """How one-drop routes are extended into multi-drop routes.

    With no strategies, generation stops at one-drop routes.
    """
    strategies: tuple[ExtensionStrategy, ...] = ()
    knn_k: int = 15
    kcorn_k: int = 15
    prune: bool = True

    def __post_init__(self) -> None:
        strategies = _enum_tuple(
            ExtensionStrategy, self.strategies, 'strategies',
        )
        object.__setattr__(self, 'strategies', strategies)
        if self.knn_k < 1 or self.kcorn_k < 1:
            raise ConfigError('neighbor counts k must be positive')

    @property
    def is_exact(self) -> bool:
        return ExtensionStrategy.EXACT in self.strategies

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        _check_keys(
            data, {'strategies', 'knn_k', 'kcorn_k', 'prune'}, 'extension',
        )
        return cls(
            strategies=data.get('strategies', ()),
            knn_k=int(data.get('knn_k', 15)),
            kcorn_k=int(data.get('kcorn_k', 15)),
            prune=bool(data.get('prune', True)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            'strategies': [str(strategy) for strategy in self.strategies],
            'knn_k': self.knn_k,
            'kcorn_k': self.kcorn_k,
            'prune': self.prune,
        }


@dataclass(frozen=True, match_args=False, slots=True)
class GeneratorConfig:
    """Everything that decides which candidate routes are generated."""
    consolidation: ConsolidationConfig = ConsolidationConfig()
    extension: ExtensionConfig = ExtensionConfig()
    direction: DirectionChoice = DirectionChoice.ONE_PICKUP_MULTI_DROP
    generation_time_budget: float | None = None

    def __post_init__(self) -> None:
        try:
            direction = DirectionChoice(self.direction)
        except ValueError:
            raise ConfigError(
                f'unknown direction {self.direction!r}'
            ) from None
        object.__setattr__(self, 'direction', direction)
        budget = self.generation_time_budget
        if budget is not None and budget <= 0:
            raise ConfigError('the generation time budget must be positive')

    @property
    def seed(self) -> int:
        return self.consolidation.seed


@dataclass(frozen=True, match_args=False, slots=True)
class SPConfig:
    """How the set-partitioning model is solved.

    ``solver`` is ``'builtin'`` (branch and bound), ``'pulp'`` (PuLP MILP) or
    an external command given as a tuple of program arguments.
    """
    solver: str | tuple[str, ...] = 'builtin'
    time_limit: float | None = None
    gap_tolerance: float = 0.0
    max_total_routes: int | None = None
    per_mode_caps: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        match self.solver:
            case 'builtin' | 'pulp':
                pass
            case tuple() if self.solver and all(
                isinstance(arg, str) for arg in self.solver
            ):
                pass
            case _:
                raise ConfigError(
                    "sp solver must be 'builtin', 'pulp' or {'command': [...]}"
                )
        if self.time_limit is not None and self.time_limit < 0:
            raise ConfigError('the time limit cannot be negative')
        if self.gap_tolerance < 0:
            raise ConfigError('the gap tolerance cannot be negative')
        if self.max_total_routes is not None and self.max_total_routes < 0:
            raise ConfigError('max_total_routes cannot be negative')
        if any(cap < 0 for _, cap in self.per_mode_caps):
            raise ConfigError('per-mode caps cannot be negative')

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        _check_keys(data, {
            'solver', 'time_limit', 'gap_tolerance', 'max_total_routes',
            'per_mode_caps',
        }, 'sp')
        solver = data.get('solver', 'builtin')
        if isinstance(solver, Mapping):
            solver = tuple(str(arg) for arg in solver.get('command', ()))
        time_limit = data.get('time_limit')
        max_routes = data.get('max_total_routes')
        return cls(
            solver=solver,
            time_limit=None if time_limit is None else float(time_limit),
            gap_tolerance=float(data.get('gap_tolerance', 0.0)),
            max_total_routes=None if max_routes is None else int(max_routes),
            per_mode_caps=tuple(sorted(
                (str(mode), int(cap))
                for mode, cap in dict(data.get('per_mode_caps', {})).items()
            )),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            'solver': (
                self.solver if isinstance(self.solver, str)
                else {'command': list(self.solver)}
            ),
            'time_limit': self.time_limit,
            'gap_tolerance': self.gap_tolerance,
            'max_total_routes': self.max_total_routes,
            'per_mode_caps': dict(self.per_mode_caps),
        }


@dataclass(frozen=True, match_args=False, slots=True)
class SolverConfig:
    """A complete solve configuration: generation plus set partitioning."""
    generator: GeneratorConfig
    sp: SPConfig = SPConfig()
    preset: str | None = None

    def to_dict(self) -> dict[str, Any]:
        """Return the configuration-file object that reproduces this config."""
        generator = self.generator
        return {
            'preset': self.preset,
            'consolidation': generator.consolidation.to_dict(),
            'extension': generator.extension.to_dict(),
            'direction': str(generator.direction),
            'generation_time_budget': generator.generation_time_budget,
            'seed': generator.seed,
            'sp': self.sp.to_dict(),
        }


def _preset(
    name: str,
    consolidation: ConsolidationConfig,
    strategies: tuple[ExtensionStrategy, ...] = (),
    k: int = 15,
) -> SolverConfig:
    return SolverConfig(
        GeneratorConfig(
            consolidation,
            ExtensionConfig(strategies=strategies, knn_k=k, kcorn_k=k),
        ),
        preset=name,
    )


# OD groups smaller than this are enumerated exactly by the neighbor presets.
NEIGHBOR_PRESET_THRESHOLD: Final[int] = 8

# The neighbor presets consolidate a superset of what bfd does, and bkk's
# neighbor lists extend bkk10's, so their pools nest.
_NEIGHBOR_CONSOLIDATION: Final[ConsolidationConfig] = ConsolidationConfig(
    methods=(ConsolidationMethod.BFD, ConsolidationMethod.SINGLETONS),
    partial_container=(1.0, 0.5),
    threshold=NEIGHBOR_PRESET_THRESHOLD,
)

PRESETS: Final[dict[str, SolverConfig]] = {
    'exact': _preset(
        'exact',
        ConsolidationConfig(methods=(ConsolidationMethod.EXACT,)),
        (ExtensionStrategy.EXACT,),
    ),
    'bfd': _preset(
        'bfd', ConsolidationConfig(methods=(ConsolidationMethod.BFD,)),
    ),
    'bkk10': _preset(
        'bkk10', _NEIGHBOR_CONSOLIDATION,
        (ExtensionStrategy.KNN, ExtensionStrategy.KCORN), k=10,
    ),
    'bkk': _preset(
        'bkk', _NEIGHBOR_CONSOLIDATION,
        (ExtensionStrategy.KNN, ExtensionStrategy.KCORN), k=15,
    ),
}
DEFAULT_PRESET: Final[str] = 'bkk'

CONFIG_KEYS: Final[frozenset[str]] = frozenset({
    'preset', 'consolidation', 'extension', 'direction',
    'generation_time_budget', 'seed', 'sp',
})


def load_config(data: Mapping[str, Any]) -> SolverConfig:
    """Resolve a configuration-file object against its preset."""
    if not isinstance(data, Mapping):
        raise ConfigError('a solver configuration must be an object')
    _check_keys(data, set(CONFIG_KEYS), 'configuration')
    preset_name = data.get('preset') or DEFAULT_PRESET
    if preset_name not in PRESETS:
        raise ConfigError(
            f'unknown preset {preset_name!r}; choose from {sorted(PRESETS)}'
        )
    base = PRESETS[preset_name]
    generator = base.generator
    try:
        consolidation = ConsolidationConfig.from_dict({
            **generator.consolidation.to_dict(),
            **data.get('consolidation', {}),
        })
        extension = ExtensionConfig.from_dict({
            **generator.extension.to_dict(), **data.get('extension', {}),
        })
        sp = SPConfig.from_dict({**base.sp.to_dict(), **data.get('sp', {})})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f'malformed configuration: {exc}') from exc
    if 'seed' in data:
        consolidation = replace(consolidation, seed=int(data['seed']))
    budget = data.get('generation_time_budget')
    return SolverConfig(
        GeneratorConfig(
            consolidation,
            extension,
            data.get('direction', generator.direction),
            None if budget is None else float(budget),
        ),
        sp,
        preset_name,
    )


def parse_config(config_string: str) -> SolverConfig:
    """Parse the contents of a solver configuration file."""
    try:
        data = json.loads(config_string)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f'line {exc.lineno}: configuration is not valid JSON: {exc.msg}'
        ) from exc
    return load_config(data)


def with_overrides(
    config: SolverConfig,
    *,
    time_limit: float | None = None,
    seed: int | None = None,
    direction: str | None = None,
) -> SolverConfig:
    """Apply command-line overrides on top of a resolved configuration."""
    generator = config.generator
    if seed is not None:
        generator = replace(
            generator,
            consolidation=replace(generator.consolidation, seed=seed),
        )
    if direction is not None:
        generator = replace(generator, direction=direction)
    sp = config.sp
    if time_limit is not None:
        sp = replace(sp, time_limit=time_limit)
    return replace(config, generator=generator, sp=sp)
