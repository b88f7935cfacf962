"""
Propagation geometry: carrier, mobile, interactors (plain IOs and RISs), scenarios
and the discrete time axis.

Every reflected ray is described by its arrival angle with respect to the mobile
route, its initial radio path distance and the Doppler shift that angle implies.
Rays are assumed parallel over the whole (short) route, so radio paths shrink by
V·t·cos(angle) and amplitudes stay frozen.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from django.db import models

from ris_sim.exceptions import ContractError, DomainError

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 2.99792458e8
TWO_PI = 2.0 * math.pi
RNG_NAME = 'numpy.random.PCG64'
# spawn keys of the independent streams drawn from one run seed
RNG_STREAMS = {'placement': (), 'doppler_error': (1,), 'random_phases': (2,)}


def stream_rng(seed, stream):
    """Generator for one named stream of ``seed``; placement keeps the root sequence."""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=RNG_STREAMS[stream]))


def check_fft_size(fft_size):
    if fft_size < 1 or fft_size & (fft_size - 1):
        raise DomainError(f"FFT size must be a power of two, got {fft_size}")


class InteractorKind(models.TextChoices):
    PLAIN_IO = 'plain_io', 'Plain IO'
    RIS = 'ris', 'RIS'


def wrap_phase(value):
    """Reduce a phase (scalar or array) to [0, 2π)."""
    wrapped = np.mod(value, TWO_PI)
    # np.mod can round a tiny negative input up to exactly 2π
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    return float(wrapped) if wrapped.ndim == 0 else wrapped


def path_phase(distance, wavelength):
    """Constant phase 2π·d/λ mod 2π, computed from the fractional wavelength count."""
    return wrap_phase(TWO_PI * math.fmod(distance / wavelength, 1.0))


@dataclass(frozen=True)
class CarrierConfig:
    carrier_frequency: float
    wavelength: float

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise DomainError("Carrier frequency must be greater than 0")
        if not self.wavelength > 0:
            raise DomainError("Wavelength must be greater than 0")

    @classmethod
    def from_frequency(cls, carrier_frequency):
        if not carrier_frequency > 0:
            raise DomainError("Carrier frequency must be greater than 0")
        return cls(carrier_frequency, SPEED_OF_LIGHT / carrier_frequency)

    @classmethod
    def pinned(cls, carrier_frequency, wavelength):
        """Carrier with an explicit wavelength (λ = 0.1 m for the 3 GHz presets)."""
        return cls(carrier_frequency, wavelength)


@dataclass(frozen=True)
class MobileConfig:
    speed: float
    max_doppler: float

    def __post_init__(self):
        if self.speed < 0:
            raise DomainError("Mobile speed can not be negative")

    @classmethod
    def for_carrier(cls, speed, carrier):
        if speed < 0:
            raise DomainError("Mobile speed can not be negative")
        return cls(speed, speed / carrier.wavelength)


@dataclass(frozen=True)
class LosPath:
    distance: float

    def __post_init__(self):
        if not self.distance > 0:
            raise DomainError("LOS distance must be greater than 0")


@dataclass(frozen=True)
class Interactor:
    kind: str
    arrival_angle: float
    initial_radio_path: float
    constant_phase: float
    doppler: float

    def __post_init__(self):
        if self.kind not in InteractorKind.values:
            raise DomainError(f"Unknown interactor kind: {self.kind}")
        if not self.initial_radio_path > 0:
            raise DomainError("Initial radio path must be greater than 0")
        if not 0.0 <= self.constant_phase < TWO_PI:
            raise DomainError("Constant phase must lie in [0, 2π)")

    @classmethod
    def from_path(cls, kind, arrival_angle, radio_path, carrier, mobile):
        if not radio_path > 0:
            raise DomainError("Initial radio path must be greater than 0")
        return cls(
            kind=kind,
            arrival_angle=float(arrival_angle),
            initial_radio_path=float(radio_path),
            constant_phase=path_phase(radio_path, carrier.wavelength),
            doppler=mobile.max_doppler * math.cos(arrival_angle),
        )

    @property
    def is_ris(self):
        return self.kind == InteractorKind.RIS

    @property
    def plain_reflection(self):
        # RIS reflection comes from the phase plan; unit gain is the baseline
        return complex(-1.0) if not self.is_ris else complex(1.0)


@dataclass(frozen=True)
class Scenario:
    carrier: CarrierConfig
    mobile: MobileConfig
    los: Optional[LosPath] = None
    interactors: Tuple[Interactor, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'interactors', tuple(self.interactors))
        if self.los is None and not self.interactors:
            raise ContractError(
                "A scenario without LOS path needs at least one interactor")

    @property
    def wavelength(self):
        return self.carrier.wavelength

    @property
    def ris(self):
        return tuple(io for io in self.interactors if io.is_ris)

    @property
    def plain_ios(self):
        return tuple(io for io in self.interactors if not io.is_ris)

    @property
    def ris_indices(self):
        return tuple(i for i, io in enumerate(self.interactors) if io.is_ris)

    @property
    def plain_indices(self):
        return tuple(i for i, io in enumerate(self.interactors) if not io.is_ris)

    @property
    def ris_count(self):
        return len(self.ris)

    @property
    def plain_count(self):
        return len(self.plain_ios)

    def without_los(self):
        return Scenario(self.carrier, self.mobile, None, self.interactors)

    def with_interactors(self, interactors):
        return Scenario(self.carrier, self.mobile, self.los, tuple(interactors))

    def with_constant_phases_dropped(self):
        """Zero every ψ/φ, the "integer multiple of 2π" simplification."""
        return self.with_interactors(
            replace(io, constant_phase=0.0) for io in self.interactors)


@dataclass(frozen=True)
class SamplingGrid:
    sample_count: int
    sample_interval: float
    fft_size: int

    def __post_init__(self):
        if self.sample_count < 1:
            raise DomainError("Sample count must be at least 1")
        if not self.sample_interval > 0:
            raise DomainError("Sample interval must be greater than 0")
        check_fft_size(self.fft_size)

    @classmethod
    def for_route(cls, carrier, mobile, route_wavelengths, samples_per_wavelength=32,
                  fft_size=256):
        """
        Grid covering ``route_wavelengths`` of travel with a sampling distance of
        λ/``samples_per_wavelength`` (t_s = λ/(samples_per_wavelength·V)).
        """
        if not mobile.speed > 0:
            raise DomainError("A route grid needs a moving mobile")
        sample_interval = carrier.wavelength / (samples_per_wavelength * mobile.speed)
        sample_count = int(round(route_wavelengths * samples_per_wavelength))
        return cls(sample_count, sample_interval, fft_size)

    @property
    def sampling_frequency(self):
        return 1.0 / self.sample_interval

    @property
    def duration(self):
        return self.sample_count * self.sample_interval

    @property
    def times(self):
        return np.arange(self.sample_count) * self.sample_interval


@dataclass(frozen=True)
class Rectangle:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise DomainError("Placement rectangle is degenerate")


def derive_two_ray_interactor(d_los, d1, carrier, mobile, kind=InteractorKind.PLAIN_IO):
    """Reflector straight ahead of the mobile, d1 meters away: d_R(t) = d_LOS + 2·d1 − V·t."""
    if not d_los > 0 or not d1 > 0:
        raise DomainError("Two-ray distances must be greater than 0")
    return Interactor.from_path(kind, 0.0, d_los + 2.0 * d1, carrier, mobile)


def angled_radio_path(d_los, d2, alpha):
    return math.sqrt(d2 ** 2 * math.tan(alpha) ** 2 + (d_los + d2) ** 2) + d2 / math.cos(alpha)


def derive_angled_interactor(d_los, d2, alpha, carrier, mobile, kind=InteractorKind.PLAIN_IO):
    """Reflector whose ray reaches the mobile at ``alpha`` from the route."""
    if not d_los > 0 or not d2 > 0:
        raise DomainError("Angled reflector distances must be greater than 0")
    if not 0.0 <= alpha < math.pi / 2:
        raise DomainError("Arrival angle must lie in [0, π/2)")
    return Interactor.from_path(kind, alpha, angled_radio_path(d_los, d2, alpha),
                                carrier, mobile)


def random_scenario(bs_pos, ms_pos, rect, R, N, seed, carrier, mobile):
    """
    Place R interactors uniformly inside ``rect``; the first N are RISs.

    The mobile travels along the BS→MS direction, away from the base station, so
    the LOS ray carries −f_D and each reflected ray carries f_D·cos(angle between
    the route and the MS→IO direction).
    """
    if N > R:
        raise DomainError(f"RIS count {N} exceeds interactor count {R}")
    if N < 0 or R < 0:
        raise DomainError("Interactor counts can not be negative")
    bs = np.asarray(bs_pos, dtype=float)
    ms = np.asarray(ms_pos, dtype=float)
    d_los = float(np.linalg.norm(ms - bs))
    if not d_los > 0:
        raise DomainError("Base station and mobile can not coincide")
    route = (ms - bs) / d_los

    rng = stream_rng(seed, 'placement')
    xs = rng.uniform(rect.x_min, rect.x_max, size=R)
    ys = rng.uniform(rect.y_min, rect.y_max, size=R)

    interactors = []
    for index, (x, y) in enumerate(zip(xs, ys)):
        position = np.array([x, y])
        to_io = position - ms
        distance_to_ms = float(np.linalg.norm(to_io))
        radio_path = float(np.linalg.norm(position - bs)) + distance_to_ms
        cos_angle = float(np.clip(np.dot(route, to_io) / distance_to_ms, -1.0, 1.0))
        kind = InteractorKind.RIS if index < N else InteractorKind.PLAIN_IO
        interactors.append(Interactor.from_path(
            kind, math.acos(cos_angle), radio_path, carrier, mobile))

    logger.debug("Placed %d interactors (%d RIS) with seed %s", R, N, seed)
    return Scenario(carrier, mobile, LosPath(d_los), tuple(interactors))


def scenario_to_dict(scenario, seed=None):
    return {
        'carrier_hz': scenario.carrier.carrier_frequency,
        'wavelength_m': scenario.carrier.wavelength,
        'speed_mps': scenario.mobile.speed,
        'd_los_m': scenario.los.distance if scenario.los else None,
        'interactors': [
            {
                'kind': str(io.kind),
                'alpha_rad': io.arrival_angle,
                'd_tilde_m': io.initial_radio_path,
                'psi_rad': io.constant_phase,
                'doppler_hz': io.doppler,
            }
            for io in scenario.interactors
        ],
        'seed': seed,
    }


def _interactor_from_dict(entry, d_los, carrier, mobile):
    kind = entry.get('kind', InteractorKind.PLAIN_IO)
    geometry = entry.get('geometry')
    if geometry == 'two_ray':
        if d_los is None:
            raise ContractError("Two-ray interactor geometry needs d_los_m")
        return derive_two_ray_interactor(d_los, entry['d1_m'], carrier, mobile, kind)
    if geometry == 'angled':
        if d_los is None:
            raise ContractError("Angled interactor geometry needs d_los_m")
        return derive_angled_interactor(
            d_los, entry['d2_m'], entry['alpha_rad'], carrier, mobile, kind)
    if geometry is not None:
        raise ContractError(f"Unknown interactor geometry: {geometry}")

    interactor = Interactor.from_path(
        kind, entry['alpha_rad'], entry['d_tilde_m'], carrier, mobile)
    if entry.get('psi_rad') is not None:
        interactor = replace(interactor, constant_phase=wrap_phase(float(entry['psi_rad'])))
    if entry.get('doppler_hz') is not None:
        interactor = replace(interactor, doppler=float(entry['doppler_hz']))
    return interactor


def scenario_from_dict(data):
    """Build a scenario from its JSON form; returns ``(scenario, seed)``."""
    try:
        if data.get('wavelength_m') is not None:
            carrier = CarrierConfig.pinned(data['carrier_hz'], data['wavelength_m'])
        else:
            carrier = CarrierConfig.from_frequency(data['carrier_hz'])
        mobile = MobileConfig.for_carrier(data['speed_mps'], carrier)
        d_los = data.get('d_los_m')
        interactors = tuple(
            _interactor_from_dict(entry, d_los, carrier, mobile)
            for entry in data.get('interactors', []))
    except KeyError as exc:
        raise ContractError(f"Scenario JSON is missing the field {exc}") from exc
    los = LosPath(d_los) if d_los is not None else None
    return Scenario(carrier, mobile, los, interactors), data.get('seed')
