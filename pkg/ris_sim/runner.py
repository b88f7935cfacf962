"""
Run orchestration: resolve a preset or scenario file, plan, synthesize, measure and
write plot-ready CSV/JSON files together with a manifest describing the run.
"""

import csv
import io
import json
import logging
import os
import statistics
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

from ris_sim import __version__
from ris_sim.conf import ris_setting
from ris_sim.control import parse_strategy
from ris_sim.envelope import magnitude_db, magnitude_surface, synthesize
from ris_sim.exceptions import ContractError
from ris_sim.geometry import (
    RNG_NAME, RNG_STREAMS, SamplingGrid, check_fft_size, scenario_from_dict, scenario_to_dict,
)
from ris_sim.imperfections import (
    DopplerErrorModel, HoldModel, Imperfections, RealisticRisModel, apply_doppler_error,
    apply_hold, apply_realistic_ris,
)
from ris_sim.models import SimulationRun
from ris_sim.presets import (
    SURFACE_THETA_POINTS, Preset, get_preset, with_strategy,
)
from ris_sim.spectrum import doppler_spectrum, fade_metrics

logger = logging.getLogger(__name__)

DIGITS = '.17g'
SEED_LIMIT = 2 ** 64


class RunJSONEncoder(DjangoJSONEncoder):
    """DjangoJSONEncoder that also understands numpy values and paths."""

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, Path):
            return str(o)
        return super().default(o)


def _number(value):
    value = float(value)
    if np.isinf(value):
        return '-inf' if value < 0 else 'inf'
    return format(value, DIGITS)


def _json_float(value):
    # JSON has no infinity; the CSV sentinel string is reused
    return _number(value) if np.isinf(value) else float(value)


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file renamed into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(handle, 'w', newline='', encoding='utf-8') as stream:
            stream.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise
    return path


def _csv_text(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_json(path, data):
    return write_atomic(path, json.dumps(data, cls=RunJSONEncoder, indent=2, sort_keys=True) + '\n')


def write_trace_csv(path, trace):
    rows = (
        (_number(t), _number(sample.real), _number(sample.imag), _number(mag), _number(mag_db))
        for t, sample, mag, mag_db in zip(trace.times, trace.samples, trace.magnitude,
                                          trace.magnitude_db)
    )
    return write_atomic(path, _csv_text(('t_s', 're', 'im', 'mag', 'mag_db'), rows))


def write_spectrum_csv(path, spectrum):
    rows = (
        (_number(f), _number(m), _number(db))
        for f, m, db in zip(spectrum.frequencies, spectrum.normalized_magnitude,
                            spectrum.normalized_db)
    )
    return write_atomic(path, _csv_text(('freq_hz', 'norm_mag', 'norm_mag_db'), rows))


def write_assignments_csv(path, times, assignments):
    rows = (
        (_number(t), assignment.describe(), _number(assignment.magnitude_db))
        for t, assignment in zip(times, assignments)
    )
    return write_atomic(path, _csv_text(('t_s', 'permutation', 'mag_db'), rows))


def write_surface_csv(path, times, thetas, surface):
    db = magnitude_db(surface)
    rows = (
        (_number(t), _number(theta), _number(db[row, column]))
        for row, theta in enumerate(thetas)
        for column, t in enumerate(times)
    )
    return write_atomic(path, _csv_text(('t_s', 'theta_rad', 'mag_db'), rows))


@dataclass
class SimulationResult:
    trace: object
    spectrum: object
    metrics: object
    plan: object
    assignments: Optional[tuple] = None
    hold_samples: int = 1


def simulate(scenario, grid, strategy, imperfections=None, seed=None, cap=None, fft_size=None):
    """
    Plan on the controller's view of ``scenario``, then synthesize from the true one.

    ``strategy`` is a Strategy or its command-line spelling.
    """
    if isinstance(strategy, str):
        strategy = parse_strategy(strategy)
    imperfections = imperfections or Imperfections()
    hold_samples = imperfections.hold.resolve(grid) if imperfections.hold else 1

    controller = scenario
    if imperfections.doppler_error is not None:
        controller = apply_doppler_error(scenario, imperfections.doppler_error)

    if cap is None:
        cap = ris_setting('PERMUTATION_CAP')
    result = strategy.build(controller, grid, seed=seed, plant=scenario,
                            hold_samples=hold_samples, cap=cap)
    plan = result.plan
    if not strategy.holds_internally:
        plan = apply_hold(plan, hold_samples)
    if imperfections.realistic_ris is not None:
        plan = apply_realistic_ris(plan, imperfections.realistic_ris)

    trace = synthesize(scenario, plan, grid)
    return SimulationResult(
        trace=trace,
        spectrum=doppler_spectrum(trace, fft_size or grid.fft_size),
        metrics=fade_metrics(trace),
        plan=plan,
        assignments=result.assignments,
        hold_samples=hold_samples,
    )


def check_seed(seed):
    if not 0 <= seed < SEED_LIMIT:
        raise ContractError(f"Seed must lie in [0, 2**64), got {seed}")


@dataclass
class RunConfig:
    preset: Optional[str] = None
    scenario_path: Optional[Path] = None
    strategy: Optional[str] = None
    seed: Optional[int] = None
    fft_size: Optional[int] = None
    output_dir: Optional[Path] = None
    u_hz: Optional[float] = None
    hold_q: Optional[int] = None
    hold_tr_us: Optional[float] = None
    realistic_ris: bool = False
    cap: Optional[int] = None
    record: Optional[bool] = None

    def __post_init__(self):
        if (self.preset is None) == (self.scenario_path is None):
            raise ContractError("Give exactly one of a preset name and a scenario file")
        if self.hold_q is not None and self.hold_tr_us is not None:
            raise ContractError("Give at most one of a hold length and a hold interval")
        if self.seed is not None:
            check_seed(self.seed)
        if self.fft_size is not None:
            check_fft_size(self.fft_size)
        if self.cap is not None and self.cap < 1:
            raise ContractError(f"Permutation cap must be at least 1, got {self.cap}")

    def imperfection_overrides(self, base):
        """``base`` with the command-line imperfection flags applied on top."""
        changes = {}
        if self.realistic_ris:
            changes['realistic_ris'] = RealisticRisModel()
        if self.u_hz is not None:
            changes['doppler_error'] = DopplerErrorModel(self.u_hz) if self.u_hz else None
        if self.hold_q is not None:
            changes['hold'] = HoldModel(hold_samples=self.hold_q)
        if self.hold_tr_us is not None:
            changes['hold'] = HoldModel(hold_interval=self.hold_tr_us * 1e-6)
        return replace(base, **changes)


@dataclass
class RunManifest:
    name: str
    parameters: dict
    seed: Optional[int]
    output_dir: Path
    files: list = field(default_factory=list)
    metrics: Optional[dict] = None
    duration_s: float = 0.0
    rng: str = RNG_NAME
    version: str = __version__
    variants: Tuple['RunManifest', ...] = ()

    def to_dict(self):
        data = {
            'name': self.name,
            'parameters': self.parameters,
            'seed': self.seed,
            'rng': self.rng,
            'rng_streams': {name: list(key) for name, key in RNG_STREAMS.items()},
            'software': f'ris_sim {self.version}',
            'numpy': np.__version__,
            'duration_s': self.duration_s,
            'output_dir': str(self.output_dir),
            'files': [str(Path(f).relative_to(self.output_dir)) for f in self.files],
        }
        if self.metrics is not None:
            data['metrics'] = self.metrics
        if self.variants:
            data['variants'] = [variant.name for variant in self.variants]
        return data


def _metrics_dict(result, grid):
    return {
        'delta_r_db': _json_float(result.metrics.delta_r_db),
        'r_bar_db': _json_float(result.metrics.r_bar_db),
        'n_s': grid.sample_count,
        't_s': grid.sample_interval,
    }


def _seeded(imperfections, seed):
    if imperfections.doppler_error is not None and imperfections.doppler_error.seed is None:
        return replace(imperfections,
                       doppler_error=replace(imperfections.doppler_error, seed=seed))
    return imperfections


def _execute(name, scenario, grid, strategy, imperfections, seed, out_dir, config,
             surface=False):
    started = time.perf_counter()
    imperfections = _seeded(imperfections, seed)
    fft_size = config.fft_size or grid.fft_size
    result = simulate(scenario, grid, strategy, imperfections, seed, config.cap, fft_size)

    files = [
        write_trace_csv(out_dir / 'trace.csv', result.trace),
        write_spectrum_csv(out_dir / 'spectrum.csv', result.spectrum),
    ]
    metrics = _metrics_dict(result, grid)
    files.append(write_json(out_dir / 'metrics.json', metrics))
    if result.assignments is not None:
        files.append(write_assignments_csv(out_dir / 'assignments.csv', grid.times,
                                           result.assignments))
    if surface:
        thetas = np.linspace(0.0, 2.0 * np.pi, SURFACE_THETA_POINTS, endpoint=False)
        files.append(write_surface_csv(out_dir / 'surface.csv', grid.times, thetas,
                                       magnitude_surface(scenario, grid, thetas)))

    parameters = {
        'strategy': strategy,
        'scenario': scenario_to_dict(scenario, seed),
        'grid': {'n_s': grid.sample_count, 't_s': grid.sample_interval, 'fft': fft_size},
        'imperfections': imperfections.to_dict(),
        'hold_samples': result.hold_samples,
    }
    manifest = RunManifest(name, parameters, seed, out_dir, files, metrics)
    manifest.duration_s = time.perf_counter() - started
    files.append(write_json(out_dir / 'manifest.json', manifest.to_dict()))
    logger.info("%s [%s]: delta_r=%.4g dB, r_bar=%.4g dB -> %s", name, strategy,
                result.metrics.delta_r_db, result.metrics.r_bar_db, out_dir)
    _record(manifest, config)
    return manifest


def _record(manifest, config):
    record = config.record if config.record is not None else ris_setting('RECORD_RUNS')
    if not record:
        return
    SimulationRun.objects.create(
        preset=manifest.name,
        strategy=manifest.parameters['strategy'],
        seed=None if manifest.seed is None else str(manifest.seed),
        output_dir=str(manifest.output_dir),
        delta_r_db=float(manifest.metrics['delta_r_db']),
        r_bar_db=float(manifest.metrics['r_bar_db']),
        manifest=json.loads(json.dumps(manifest.to_dict(), cls=RunJSONEncoder)),
    )


def _load_scenario_file(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except OSError as exc:
        raise ContractError(f"Can not read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ContractError(f"Scenario file {path} is not valid JSON: {exc}") from exc
    scenario, seed = scenario_from_dict(data)
    imperfections = Imperfections.from_dict(data.get('imperfections'))
    grid_data = data.get('grid') or {}
    grid = SamplingGrid.for_route(
        scenario.carrier, scenario.mobile, grid_data.get('route_wavelengths', 6),
        grid_data.get('samples_per_wavelength', 32), grid_data.get('fft_size', 256))
    strategy = data.get('strategy', 'none')
    return Preset(path.stem, f'Scenario file {path}', lambda seed=None: scenario, grid,
                  strategy, imperfections), seed


def _table_rows(results):
    """Median Δ_r and r̄ per (split, method) over the seeds of a table sweep."""
    grouped = {}
    for variant, _seed, metrics in results:
        grouped.setdefault(variant, []).append(metrics)
    rows = []
    for variant, entries in grouped.items():
        split, method = variant.split('/')
        rows.append((
            split, method,
            _number(statistics.median(float(m['delta_r_db']) for m in entries)),
            _number(statistics.median(float(m['r_bar_db']) for m in entries)),
            len(entries),
        ))
    return rows


def run(config):
    """Execute a preset (every variant and seed of a sweep) or a scenario file."""
    started = time.perf_counter()
    if config.preset is not None:
        preset = get_preset(config.preset)
        file_seed = None
    else:
        preset, file_seed = _load_scenario_file(config.scenario_path)
    if config.strategy:
        parse_strategy(config.strategy)
        preset = with_strategy(preset, config.strategy)

    seed = config.seed
    if seed is None:
        seed = file_seed if file_seed is not None else ris_setting('DEFAULT_SEED')
    check_seed(seed)
    out_dir = Path(config.output_dir or ris_setting('OUTPUT_DIR')) / preset.name

    if not preset.is_sweep:
        imperfections = config.imperfection_overrides(preset.imperfections)
        return _execute(preset.name, preset.build_scenario(seed), preset.grid, preset.strategy,
                        imperfections, seed, out_dir, config, preset.surface)

    manifests, results = [], []
    seeds = [(seed + offset) % SEED_LIMIT for offset in range(preset.seed_count)]
    for variant in preset.variants:
        imperfections = config.imperfection_overrides(variant.imperfections)
        for variant_seed in seeds:
            variant_dir = out_dir / variant.name
            if preset.seed_count > 1:
                variant_dir = variant_dir / f'seed-{variant_seed}'
            manifest = _execute(
                f'{preset.name}/{variant.name}', variant.build_scenario(variant_seed),
                variant.grid, variant.strategy, imperfections, variant_seed, variant_dir,
                config, variant.surface)
            manifests.append(manifest)
            results.append((variant.name, variant_seed, manifest.metrics))

    files = [write_json(out_dir / 'summary.json', {
        'preset': preset.name,
        'seeds': seeds,
        'runs': [
            {'variant': name, 'seed': variant_seed, **metrics}
            for name, variant_seed, metrics in results
        ],
    })]
    if preset.name == 'table1':
        files.append(write_atomic(out_dir / 'table.csv', _csv_text(
            ('split', 'method', 'median_delta_r_db', 'median_r_bar_db', 'seeds'),
            _table_rows(results))))

    manifest = RunManifest(preset.name, preset.summary(), seed, out_dir, files,
                           variants=tuple(manifests))
    manifest.duration_s = time.perf_counter() - started
    files.append(write_json(out_dir / 'manifest.json', manifest.to_dict()))
    return manifest
