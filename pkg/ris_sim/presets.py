"""
Built-in experiment presets. Every preset pins its own scenario, grid, strategy and
imperfections; sweep presets bundle variants that run into sub-directories.

Placement parameters for the random multi-IO geometry come from settings
(``RIS_SIM['BS_POSITION']`` etc.), so the multi-IO presets are built lazily.
"""

import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

from ris_sim.conf import ris_setting
from ris_sim.exceptions import UnknownNameError
from ris_sim.geometry import (
    CarrierConfig, InteractorKind, LosPath, MobileConfig, Rectangle, SamplingGrid, Scenario,
    derive_angled_interactor, derive_two_ray_interactor, random_scenario,
)
from ris_sim.imperfections import (
    DopplerErrorModel, HoldModel, Imperfections, RealisticRisModel,
)

REFERENCE_CARRIER = CarrierConfig.pinned(3e9, 0.1)
REFERENCE_SPEED = 10.0
HIGH_SPEED = 100.0

ROUTE_WAVELENGTHS = 6
MULTI_IO_ROUTE_WAVELENGTHS = 30
HIGH_MOBILITY_ROUTE_WAVELENGTHS = 3
# n_s equals the FFT size, so a constant envelope occupies a single bin
NLOS_ROUTE_WAVELENGTHS = 8
SAMPLES_PER_WAVELENGTH = 32
# t_s = λ/(320·V) = 3.125 µs at V = 100 m/s
HIGH_MOBILITY_SAMPLES_PER_WAVELENGTH = 320

INTERACTOR_COUNT = 10
SURFACE_THETA_POINTS = 360
TABLE_SEED_COUNT = 10

METHODS = ('method1', 'method2', 'method3')


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    scenario: Callable[[Optional[int]], Scenario]
    grid: SamplingGrid
    strategy: str = 'none'
    imperfections: Imperfections = field(default_factory=Imperfections)
    surface: bool = False
    parameters: dict = field(default_factory=dict, compare=False)
    variants: Tuple['Preset', ...] = ()
    seed_count: int = 1

    @property
    def is_sweep(self):
        return bool(self.variants)

    @property
    def figure(self):
        """Figure or table the preset reproduces, read off its name; empty for the rest."""
        match = re.match(r'fig(\d+)', self.name)
        if match:
            return f'Fig. {match.group(1)}'
        return 'Table I' if self.name == 'table1' else ''

    def build_scenario(self, seed=None):
        return self.scenario(seed)

    def summary(self):
        """Parameters shown by ``list_presets``."""
        info = {
            'figure': self.figure,
            'description': self.description,
            'strategy': self.strategy,
            'n_s': self.grid.sample_count,
            't_s': self.grid.sample_interval,
            'fft': self.grid.fft_size,
        }
        info.update(self.parameters)
        if self.variants:
            info['variants'] = [variant.name for variant in self.variants]
            info['seeds'] = self.seed_count
        return info


def _mobile(speed=REFERENCE_SPEED):
    return MobileConfig.for_carrier(speed, REFERENCE_CARRIER)


def _route_grid(speed=REFERENCE_SPEED, route=ROUTE_WAVELENGTHS,
                samples_per_wavelength=SAMPLES_PER_WAVELENGTH, fft_size=256):
    return SamplingGrid.for_route(REFERENCE_CARRIER, _mobile(speed), route,
                                  samples_per_wavelength, fft_size)


def two_ray_scenario(d_los, d1, kind=InteractorKind.PLAIN_IO, speed=REFERENCE_SPEED,
                     drop_constant_phases=False, los=True):
    mobile = _mobile(speed)
    reflector = derive_two_ray_interactor(d_los, d1, REFERENCE_CARRIER, mobile, kind)
    scenario = Scenario(REFERENCE_CARRIER, mobile, LosPath(d_los), (reflector,))
    if drop_constant_phases:
        scenario = scenario.with_constant_phases_dropped()
    return scenario if los else scenario.without_los()


def two_io_scenario(first=InteractorKind.PLAIN_IO, second=InteractorKind.PLAIN_IO, los=True,
                    d_los=1000.0, d1=1000.0, d2=500.0, alpha=math.radians(60.0)):
    """BS–MS link plus a boresight IO d1 ahead and an angled IO d2 away, seen at ``alpha``."""
    mobile = _mobile()
    interactors = (
        derive_two_ray_interactor(d_los, d1, REFERENCE_CARRIER, mobile, first),
        derive_angled_interactor(d_los, d2, alpha, REFERENCE_CARRIER, mobile, second),
    )
    scenario = Scenario(REFERENCE_CARRIER, mobile, LosPath(d_los), interactors)
    return scenario if los else scenario.without_los()


def multi_io_scenario(ris_count, seed, los=True, interactor_count=INTERACTOR_COUNT):
    if seed is None:
        seed = ris_setting('DEFAULT_SEED')
    scenario = random_scenario(
        ris_setting('BS_POSITION'), ris_setting('MS_POSITION'),
        Rectangle(*ris_setting('SCENARIO_RECTANGLE')), interactor_count, ris_count, seed,
        REFERENCE_CARRIER, _mobile())
    return scenario if los else scenario.without_los()


def _fixed(builder, *args, **kwargs):
    return lambda seed=None: builder(*args, **kwargs)


def _multi(ris_count, los=True):
    return lambda seed=None: multi_io_scenario(ris_count, seed, los)


def _method_sweep(name, description, ris_count, los=True, seed_count=1, **extra):
    grid = _route_grid(route=MULTI_IO_ROUTE_WAVELENGTHS, fft_size=1024)
    scenario = _multi(ris_count, los)
    variants = tuple(
        Preset(method, f'{description}, {method}', scenario, grid, method)
        for method in METHODS)
    parameters = {'N': ris_count, 'M': INTERACTOR_COUNT - ris_count, 'los': los}
    parameters.update(extra)
    return Preset(name, description, scenario, grid, variants=variants,
                  parameters=parameters, seed_count=seed_count)


def _two_ray(name, description, d_los, d1, strategy='none',
             kind=InteractorKind.PLAIN_IO, drop_constant_phases=True):
    return Preset(
        name, description,
        _fixed(two_ray_scenario, d_los, d1, kind, drop_constant_phases=drop_constant_phases),
        _route_grid(), strategy,
        parameters={'d_los_m': d_los, 'd1_m': d1, 'V_mps': REFERENCE_SPEED})


def _fig2_3_presets():
    presets = []
    for suffix, (d_los, d1) in zip('abcd', ((1000.0, 1000.0), (1250.0, 750.0),
                                            (1500.0, 500.0), (1750.0, 250.0))):
        presets.append(_two_ray(f'fig2-{suffix}', 'Two-ray fade pattern without RIS',
                                d_los, d1))
    presets.append(_two_ray('fig3', 'Two-ray Doppler spectrum without RIS',
                            1500.0, 500.0))
    return presets


def _single_ris_presets():
    ris = InteractorKind.RIS
    return [
        _two_ray('fig4', 'Single RIS aligned to the LOS path',
                 1500.0, 500.0, 'align-to-los', ris),
        _two_ray('fig5', 'Single RIS out-phased with the LOS path',
                 1750.0, 250.0, 'out-phase-los', ris),
        _two_ray('fig6-200', 'Doppler synthesis at 200 Hz',
                 1500.0, 500.0, 'doppler-synthesis:200', ris, drop_constant_phases=False),
        _two_ray('fig6-400', 'Doppler synthesis at 400 Hz',
                 1500.0, 500.0, 'doppler-synthesis:400', ris, drop_constant_phases=False),
        _two_ray('fig7', 'Random RIS phase every sample',
                 1500.0, 500.0, 'random', ris, drop_constant_phases=False),
        _two_ray('fast-fade', 'RIS alternating between co- and out-phasing',
                 1500.0, 500.0, 'fast-fade', ris, drop_constant_phases=False),
    ]


def _nlos_single_presets():
    grid = _route_grid(route=NLOS_ROUTE_WAVELENGTHS)
    parameters = {'d_los_m': 1000.0, 'd1_m': 1000.0, 'los': False}
    return [
        Preset('fig9-a', 'Blocked LOS, plain reflector',
               _fixed(two_ray_scenario, 1000.0, 1000.0, los=False), grid, 'none',
               parameters=parameters),
        Preset('fig9-b', 'Blocked LOS, RIS eliminating the Doppler shift',
               _fixed(two_ray_scenario, 1000.0, 1000.0, InteractorKind.RIS, los=False),
               grid, 'nlos-eliminate', parameters=parameters),
    ]


def _two_io_presets():
    grid = _route_grid()
    ris, plain = InteractorKind.RIS, InteractorKind.PLAIN_IO
    parameters = {'d_los_m': 1000.0, 'd1_m': 1000.0, 'd2_m': 500.0, 'alpha_deg': 60.0}
    single = _fixed(two_io_scenario, ris, plain)

    def preset(name, description, scenario, strategy, **kwargs):
        return Preset(name, description, scenario, grid, strategy,
                      parameters=parameters, **kwargs)

    return [
        preset('fig11', 'Two plain IOs, no RIS',
               _fixed(two_io_scenario, plain, plain), 'none'),
        preset('fig12-m1', 'RIS on IO 1 aligned to the LOS path', single,
               'align-to-los'),
        preset('fig12-m2', 'RIS on IO 1 aligned to IO 2', single, 'co-phase-io:1'),
        preset('fig12-m3', 'RIS on IO 1 cancelling IO 2', single, 'cancel-io:1'),
        preset('fig13', '|r| over every RIS phase and time', single,
               'optimal-single-ris', surface=True),
        preset('fig14', 'Closed-form optimal RIS phase', single,
               'optimal-single-ris'),
        preset('two-ris', 'Two RISs aligned to the LOS path',
               _fixed(two_io_scenario, ris, ris), 'two-ris-align'),
        preset('two-ris-nlos', 'Two RISs without LOS, Doppler eliminated',
               _fixed(two_io_scenario, ris, ris, los=False), 'two-ris-align'),
    ]


def _multi_io_presets():
    grid = _route_grid(route=MULTI_IO_ROUTE_WAVELENGTHS, fft_size=1024)
    return [
        Preset('fig17-noris', 'Ten plain IOs, no RIS', _multi(0), grid, 'none',
               parameters={'N': 0, 'M': 10}),
        Preset('fig17-allris', 'Ten RISs aligned to the LOS path', _multi(10), grid,
               'method1', parameters={'N': 10, 'M': 0}),
        _method_sweep('fig18','Setup I with LOS, N=3, M=7', 3),
        _method_sweep('fig19','Setup I with LOS, N=5, M=5', 5),
        _method_sweep('fig20','Setup II with LOS, N=7, M=3', 7),
        _method_sweep('fig21','Setup I without LOS, N=3, M=7', 3, los=False),
        _method_sweep('fig22','Setup II without LOS, N=7, M=3', 7, los=False),
        _table1(),
    ]


def _table1():
    grid = _route_grid(route=MULTI_IO_ROUTE_WAVELENGTHS, fft_size=1024)
    variants = []
    for ris_count in (3, 5, 7):
        for method in METHODS:
            variants.append(Preset(
                f'n{ris_count}-m{INTERACTOR_COUNT - ris_count}/{method}',
                f'N={ris_count}, M={INTERACTOR_COUNT - ris_count}, {method}',
                _multi(ris_count), grid, method))
    return Preset(
        'table1', 'Methods 1-3 over (N, M) in {(3,7), (5,5), (7,3)}',
        _multi(3), grid, variants=tuple(variants), seed_count=TABLE_SEED_COUNT,
        parameters={'splits': [[3, 7], [5, 5], [7, 3]], 'methods': list(METHODS)})


def _practical_presets():
    realistic = Imperfections(realistic_ris=RealisticRisModel())
    two_ray = _fixed(two_ray_scenario, 1500.0, 500.0, InteractorKind.RIS)
    two_io = _fixed(two_io_scenario, InteractorKind.RIS, InteractorKind.PLAIN_IO)
    grid = _route_grid()

    def realistic_sweep(name, description, scenario):
        variants = (
            Preset('p-ris', f'{description}, perfect RIS', scenario, grid,
                   'align-to-los'),
            Preset('i-ris', f'{description}, realistic RIS', scenario, grid,
                   'align-to-los', realistic),
        )
        return Preset(name, description, scenario, grid, 'align-to-los',
                      variants=variants, parameters=realistic.realistic_ris.to_dict())

    multi_grid = _route_grid(route=MULTI_IO_ROUTE_WAVELENGTHS, fft_size=1024)
    error_variants = tuple(
        Preset(f'u{bound:g}/{method}', f'U={bound:g} Hz, {method}', _multi(7),
               multi_grid, method,
               Imperfections(doppler_error=DopplerErrorModel(bound)) if bound else Imperfections())
        for bound in (0.0, 1.0, 4.0) for method in METHODS)

    high_mobility = _route_grid(HIGH_SPEED, HIGH_MOBILITY_ROUTE_WAVELENGTHS,
                                HIGH_MOBILITY_SAMPLES_PER_WAVELENGTH, 1024)
    fast = _fixed(two_ray_scenario, 1500.0, 500.0, InteractorKind.RIS, HIGH_SPEED)
    hold_variants = tuple(
        Preset(f'q{q}', f'Phases held for {q} samples', fast, high_mobility,
               'align-to-los', Imperfections(hold=HoldModel(hold_samples=q)))
        for q in (1, 20, 50))

    speed_variants = tuple(
        Preset(f'v{speed:g}',
               f'V={speed:g} m/s (f_D={speed / REFERENCE_CARRIER.wavelength:g} Hz), t_r=12.5 us',
               _fixed(two_ray_scenario, 1500.0, 500.0, InteractorKind.RIS, speed),
               high_mobility, 'align-to-los',
               Imperfections(hold=HoldModel(hold_interval=12.5e-6)))
        for speed in (50.0, 200.0, 400.0))

    return [
        realistic_sweep('fig23-a', 'Single RIS, N=1, M=0', two_ray),
        realistic_sweep('fig23-b', 'RIS on IO 1 with a plain IO 2, N=M=1', two_io),
        Preset('fig24', 'N=7, M=3 with erroneous Doppler feedback', _multi(7),
               multi_grid, variants=error_variants,
               parameters={'u_hz': [0, 1, 4], 'methods': list(METHODS)}),
        Preset('fig25a', 'High mobility, phases held for Q samples', fast,
               high_mobility, 'align-to-los', variants=hold_variants,
               parameters={'Q': [1, 20, 50], 'V_mps': HIGH_SPEED}),
        Preset('fig25b', 'Hold interval 12.5 us under increasing Doppler', fast,
               high_mobility, 'align-to-los', variants=speed_variants,
               parameters={'t_r_s': 12.5e-6, 'V_mps': [50, 200, 400]}),
    ]


def build_presets():
    presets = (_fig2_3_presets() + _single_ris_presets() + _nlos_single_presets()
               + _two_io_presets() + _multi_io_presets() + _practical_presets())
    return {preset.name: preset for preset in presets}


def preset_names():
    return tuple(build_presets())


def get_preset(name):
    presets = build_presets()
    try:
        return presets[name]
    except KeyError:
        raise UnknownNameError('preset', name, tuple(presets)) from None


def with_strategy(preset, strategy):
    """The preset (and every variant) run under ``strategy`` instead."""
    return replace(preset, strategy=strategy,
                   variants=tuple(with_strategy(v, strategy) for v in preset.variants))
