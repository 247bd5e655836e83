"""
Experiment configuration, figure presets and the runners behind the CLI.
"""

import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from qwalk2d.config import Config, ConfigurationError
from qwalk2d.correlations import mid_pp, mid_xy, robustness_ratio
from qwalk2d.hilbert import HilbertSpec, marginal_distribution, purity, to_density
from qwalk2d.noise import ChannelSchedule, NoiseKind, NoiseSpec, iter_density
from qwalk2d.schemes import (
    SchemeKind, WalkScheme, evolve_pure, initial_state, step_pure_iterative,
)

logger = logging.getLogger(__name__)

SCHEMES = tuple(kind.value for kind in SchemeKind)
NOISES = (
    'none', 'bitflip', 'bitflip-axis', 'bitflip-step', 'phaseflip', 'phaseflip-axis', 'phaseflip-step',
    'stateflip', 'depolarizing',
)
MEASURES = ('distribution', 'mid_pp', 'mid_xy', 'robustness', 'purity')
FORMATS = ('csv', 'svg')


class TableKind(Enum):
    DISTRIBUTION = "distribution"
    SERIES = "series"


DISTRIBUTION_HEADER = ('x', 'y', 'p')
SERIES_HEADER = ('step', 'p', 'measure', 'value')


@dataclass
class ResultTable:
    kind: TableKind
    rows: List[tuple] = dataclasses.field(default_factory=list)
    title: str = ''

    @property
    def header(self) -> Tuple[str, ...]:
        return DISTRIBUTION_HEADER if self.kind == TableKind.DISTRIBUTION else SERIES_HEADER

    def extend(self, other: 'ResultTable') -> None:
        if other.kind != self.kind:
            raise ConfigurationError("cannot merge a distribution table with a series table")
        self.rows.extend(other.rows)


def _split_list(value) -> Tuple[str, ...]:
    if isinstance(value, str):
        return tuple(item.strip() for item in value.split(',') if item.strip())
    return tuple(value)


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = 'grover'
    steps: int = 0
    noise: str = 'none'
    p_values: Tuple[float, ...] = (0.0,)
    k: int = 3
    theta: float = math.pi / 4
    measures: Tuple[str, ...] = ('distribution',)
    schedule: Optional[str] = None
    output: Optional[str] = None
    formats: Tuple[str, ...] = ('csv',)
    seed: int = 0
    label: str = ''

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> 'ExperimentConfig':
        """Build a config from CLI or key=value file strings"""
        try:
            kwargs = {}
            if values.get('scheme') is not None:
                kwargs['scheme'] = str(values['scheme']).lower()
            if values.get('steps') is not None:
                kwargs['steps'] = int(values['steps'])
            if values.get('noise') is not None:
                kwargs['noise'] = str(values['noise']).lower()
            if values.get('p') is not None:
                kwargs['p_values'] = tuple(float(p) for p in _split_list(values['p']))
            if values.get('k') is not None:
                kwargs['k'] = int(values['k'])
            if values.get('theta') is not None:
                kwargs['theta'] = float(values['theta'])
            if values.get('measure') is not None:
                kwargs['measures'] = _split_list(values['measure'])
            if values.get('schedule') is not None:
                kwargs['schedule'] = str(values['schedule']).lower().replace('-', '_')
            if values.get('out') is not None:
                kwargs['output'] = str(values['out'])
            if values.get('format') is not None:
                kwargs['formats'] = _split_list(values['format'])
            if values.get('seed') is not None:
                kwargs['seed'] = int(values['seed'])
        except ValueError as e:
            raise ConfigurationError(f"Malformed experiment value: {e}") from e
        return cls(**kwargs)

    @property
    def is_distribution(self) -> bool:
        return self.measures == ('distribution',)

    def walk_scheme(self) -> WalkScheme:
        if self.scheme == SchemeKind.ALTERNATE.value:
            return WalkScheme.alternate(self.theta)
        return WalkScheme(SchemeKind(self.scheme))

    def noise_spec(self, p: float) -> NoiseSpec:
        return resolve_noise(self.noise, self.scheme, p, self.k, self.schedule)

    def validate(self) -> None:
        """Raise ConfigurationError for anything the runners cannot execute"""
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"Unknown scheme '{self.scheme}'; choose from {', '.join(SCHEMES)}")
        if self.steps < 0:
            raise ConfigurationError(f"steps must be non-negative, got {self.steps}")
        if not self.measures:
            raise ConfigurationError("At least one measure is required")
        unknown = [m for m in self.measures if m not in MEASURES]
        if unknown:
            raise ConfigurationError(f"Unknown measure(s): {', '.join(unknown)}")
        if 'distribution' in self.measures and len(self.measures) > 1:
            raise ConfigurationError("The distribution measure cannot be combined with series measures")
        if not self.p_values:
            raise ConfigurationError("At least one noise level p is required")
        if self.is_distribution and len(self.p_values) > 1:
            raise ConfigurationError("A distribution run takes a single noise level p")
        bad_formats = [f for f in self.formats if f not in FORMATS]
        if bad_formats or not self.formats:
            raise ConfigurationError(f"Unknown output format(s): {', '.join(bad_formats) or 'none given'}")
        for p in self.p_values:
            self.noise_spec(p)

        if self.needs_density():
            dim = HilbertSpec(self.walk_scheme().coin_dim, self.steps).dim
            if dim > Config.MAX_DENSITY_DIM:
                raise ConfigurationError(
                    f"Density dimension {dim} exceeds QWALK_MAX_DENSITY_DIM={Config.MAX_DENSITY_DIM}; "
                    f"reduce steps below {self.steps}"
                )

    def needs_density(self) -> bool:
        if not self.is_distribution:
            return True
        return any(self.noise_spec(p).kind != NoiseKind.NONE and p > 0 for p in self.p_values)


_NOISE_KINDS = {
    ('bitflip', ChannelSchedule.PER_STEP): NoiseKind.BITFLIP_PER_STEP,
    ('bitflip', ChannelSchedule.PER_AXIS): NoiseKind.BITFLIP_PER_AXIS,
    ('phaseflip', ChannelSchedule.PER_STEP): NoiseKind.PHASEFLIP_PER_STEP,
    ('phaseflip', ChannelSchedule.PER_AXIS): NoiseKind.PHASEFLIP_PER_AXIS,
}


def resolve_noise(noise: str, scheme: str, p: float, k: int = 3,
                  schedule: Optional[str] = None) -> NoiseSpec:
    """Map a CLI noise name and scheme onto a NoiseSpec"""
    if noise not in NOISES:
        raise ConfigurationError(f"Unknown noise '{noise}'; choose from {', '.join(NOISES)}")
    if scheme not in SCHEMES:
        raise ConfigurationError(f"Unknown scheme '{scheme}'")
    try:
        explicit = ChannelSchedule(schedule) if schedule else None
    except ValueError:
        raise ConfigurationError(f"Unknown schedule '{schedule}'; choose per_axis or per_step")

    if explicit == ChannelSchedule.PER_AXIS and scheme == SchemeKind.GROVER.value:
        raise ConfigurationError("Invalid combination: schedule per_axis with scheme grover")

    family, _, suffix = noise.partition('-')
    if suffix:
        implied = ChannelSchedule.PER_AXIS if suffix == 'axis' else ChannelSchedule.PER_STEP
        if explicit is not None and explicit != implied:
            raise ConfigurationError(f"Invalid combination: noise {noise} with schedule {explicit.value}")
        explicit = implied
    grover = scheme == SchemeKind.GROVER.value

    if family == 'none':
        kind = NoiseKind.NONE
    elif family == 'stateflip':
        if grover:
            kind = NoiseKind.STATEFLIP4
        else:
            kind = _NOISE_KINDS[('bitflip', explicit or ChannelSchedule.PER_STEP)]
    elif family == 'depolarizing':
        if explicit == ChannelSchedule.PER_AXIS:
            raise ConfigurationError("Invalid combination: noise depolarizing with schedule per_axis")
        kind = NoiseKind.DEPOLARIZING4 if grover else NoiseKind.DEPOLARIZING2
    else:
        if grover:
            raise ConfigurationError(f"Invalid combination: noise {noise} with scheme grover")
        kind = _NOISE_KINDS[(family, explicit or ChannelSchedule.PER_STEP)]

    if kind == NoiseKind.NONE:
        return NoiseSpec(kind)
    try:
        return NoiseSpec(kind, p, k)
    except ValueError as e:
        raise ConfigurationError(str(e)) from e


def _measure_name(config: ExperimentConfig, measure: str) -> str:
    return f"{measure}[{config.label}]" if config.label else measure


def _distribution_rows(config: ExperimentConfig) -> List[tuple]:
    scheme = config.walk_scheme()
    p = config.p_values[0]
    state = initial_state(scheme, steps=config.steps)

    if not config.needs_density():
        logger.debug(f"{scheme.label}: pure-state fast path for {config.steps} steps")
        distribution = marginal_distribution(evolve_pure(scheme, state, config.steps))
    else:
        rho = to_density(state)
        for rho in iter_density(scheme, rho, config.noise_spec(p), config.steps):
            pass
        distribution = marginal_distribution(rho)

    coords = distribution.spec.coordinates
    return [
        (int(x), int(y), distribution.at(int(x), int(y)))
        for x in coords for y in coords
    ]


def _series_rows(config: ExperimentConfig) -> List[tuple]:
    """Rows for a single noise level, in step order"""
    scheme = config.walk_scheme()
    p = config.p_values[0]
    state = initial_state(scheme, steps=config.steps)
    baseline = state

    rows = []
    for rho in iter_density(scheme, to_density(state), config.noise_spec(p), config.steps):
        q_xy = None
        for measure in config.measures:
            if measure == 'mid_pp':
                value = mid_pp(rho)
            elif measure == 'purity':
                value = purity(rho)
            else:
                q_xy = mid_xy(rho) if q_xy is None else q_xy
                value = q_xy
                if measure == 'robustness':
                    value = robustness_ratio(q_xy, mid_xy(to_density(baseline)))
            rows.append((rho.step, p, _measure_name(config, measure), value))
        if baseline.step < config.steps:
            baseline = step_pure_iterative(scheme, baseline)
    return rows


def _run_point(config: ExperimentConfig) -> List[tuple]:
    if config.is_distribution:
        return _distribution_rows(config)
    return _series_rows(config)


def run_experiment(config: ExperimentConfig) -> ResultTable:
    """Run one experiment; several p values are swept"""
    config.validate()
    if len(config.p_values) > 1:
        return run_sweep(config)

    logger.info(
        f"▶️ {config.scheme} t={config.steps} noise={config.noise} p={config.p_values[0]} "
        f"measures={','.join(config.measures)}"
    )
    kind = TableKind.DISTRIBUTION if config.is_distribution else TableKind.SERIES
    return ResultTable(kind, _run_point(config), config.label or config.scheme)


def run_sweep(config: ExperimentConfig) -> ResultTable:
    """Independent runs over config.p_values, concatenated in (p, step) order"""
    config.validate()
    if config.is_distribution:
        points = [config]
    else:
        points = [dataclasses.replace(config, p_values=(p,)) for p in config.p_values]

    logger.info(f"🔁 Sweeping {config.scheme} over p={list(config.p_values)} with {Config.SWEEP_WORKERS} worker(s)")
    if Config.SWEEP_WORKERS > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=Config.SWEEP_WORKERS) as pool:
            results = list(pool.map(_run_point, points))
    else:
        results = [_run_point(point) for point in points]

    kind = TableKind.DISTRIBUTION if config.is_distribution else TableKind.SERIES
    table = ResultTable(kind, title=config.label or config.scheme)
    for rows in results:
        table.rows.extend(rows)
    return table


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    full_steps: int
    runs: Tuple[ExperimentConfig, ...]

    @property
    def steps(self) -> int:
        return max(run.steps for run in self.runs)


def _runs(schemes: Sequence[str], **kwargs) -> Tuple[ExperimentConfig, ...]:
    return tuple(ExperimentConfig(scheme=scheme, label=scheme, **kwargs) for scheme in schemes)


ALL_SCHEMES = ('grover', 'alternate', 'pauli')
TWO_STATE = ('alternate', 'pauli')
SWEEP = (0.0, 0.1, 0.3, 0.5)

PRESETS: Dict[str, Preset] = {preset.name: preset for preset in (
    Preset('fig1', "Noiseless distributions of the three walks", 25,
           _runs(ALL_SCHEMES, steps=25)),
    Preset('fig2', "Noiseless particle-position and x-y correlations", 10,
           _runs(ALL_SCHEMES, steps=8, measures=('mid_pp', 'mid_xy'))),
    Preset('fig3', "Grover distributions under k=23 state flips", 15,
           tuple(ExperimentConfig(scheme='grover', steps=8, noise='stateflip', k=23, p_values=(p,), label=f"p{p}")
                 for p in (0.1, 0.9))),
    Preset('fig4', "Grover correlations under k=23 state flips", 10,
           (ExperimentConfig(scheme='grover', steps=6, noise='stateflip', k=23, p_values=(0.0, 0.1, 0.5, 0.9),
                             measures=('mid_pp', 'mid_xy'), label='grover'),)),
    Preset('fig5', "Two-state distributions with bit flips after each axis", 25,
           tuple(ExperimentConfig(scheme=scheme, steps=10, noise='bitflip-axis', p_values=(p,), label=f"{scheme}_p{p}")
                 for scheme in TWO_STATE for p in (0.1, 0.9))),
    Preset('fig6', "Particle-position correlations, bit flips after each axis", 10,
           _runs(TWO_STATE, steps=8, noise='bitflip-axis', p_values=(0.0, 0.2, 0.6, 1.0), measures=('mid_pp',))),
    Preset('fig7', "x-y correlations, bit flips after each axis", 10,
           _runs(TWO_STATE, steps=8, noise='bitflip-axis', p_values=(0.0, 0.2, 0.6, 1.0), measures=('mid_xy',))),
    Preset('fig8', "Particle-position correlations, bit flips after each step", 10,
           _runs(TWO_STATE, steps=8, noise='bitflip-step', p_values=SWEEP, measures=('mid_pp',))),
    Preset('fig9', "x-y correlations, bit flips after each step", 10,
           _runs(TWO_STATE, steps=8, noise='bitflip-step', p_values=SWEEP, measures=('mid_xy',))),
    Preset('fig10', "Grover x-y correlations for k=3, 6 and 23 state flips", 10,
           tuple(ExperimentConfig(scheme='grover', steps=6, noise='stateflip', k=k, p_values=(0.1,),
                                  measures=('mid_xy',), label=f"k{k}")
                 for k in (3, 6, 23))),
    Preset('fig11', "Distributions under depolarizing noise", 15,
           _runs(('grover', 'alternate'), steps=8, noise='depolarizing', p_values=(0.1,))),
    Preset('fig12', "Grover correlations under depolarizing noise", 10,
           _runs(('grover',), steps=6, noise='depolarizing', p_values=SWEEP, measures=('mid_pp', 'mid_xy'))),
    Preset('fig13', "Two-state particle-position correlations under depolarizing noise", 10,
           _runs(TWO_STATE, steps=8, noise='depolarizing', p_values=SWEEP, measures=('mid_pp',))),
    Preset('fig14', "Two-state x-y correlations under depolarizing noise", 10,
           _runs(TWO_STATE, steps=8, noise='depolarizing', p_values=SWEEP, measures=('mid_xy',))),
    Preset('fig15', "Relative decay of x-y correlations under state flips, p=0.2", 10,
           _runs(ALL_SCHEMES, steps=8, noise='stateflip', k=23, p_values=(0.2,), measures=('robustness',))),
    Preset('fig16', "Relative decay of x-y correlations under depolarizing noise, p=0.2", 10,
           _runs(ALL_SCHEMES, steps=8, noise='depolarizing', p_values=(0.2,), measures=('robustness',))),
)}


def get_preset(name: str) -> Preset:
    preset = PRESETS.get(name.lower())
    if preset is None:
        raise ConfigurationError(f"Unknown preset '{name}'; choose from {', '.join(PRESETS)}")
    return preset


def run_preset(name: str) -> List[Tuple[str, ResultTable]]:
    """
    Run every configuration of a preset.

    Distribution runs come back as separate named tables; series runs are
    merged into one table whose measure column carries the run label.
    """
    preset = get_preset(name)
    logger.info(f"📊 Preset {preset.name}: {preset.description} (t={preset.steps}, full t={preset.full_steps})")

    tables: List[Tuple[str, ResultTable]] = []
    merged: Optional[ResultTable] = None
    for config in preset.runs:
        table = run_experiment(config)
        if table.kind == TableKind.DISTRIBUTION:
            table.title = f"{preset.name} {config.label}"
            tables.append((f"{preset.name}_{config.label}", table))
        elif merged is None:
            merged = ResultTable(TableKind.SERIES, list(table.rows), preset.name)
        else:
            merged.extend(table)
    if merged is not None:
        tables.append((preset.name, merged))
    return tables
