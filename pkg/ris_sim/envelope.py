"""
Received complex envelope r(t) for every scenario shape, and the closed-form
magnitudes used as oracles.

r(t) = λ/4π · [ e^{-j2πf_D t}/d_LOS
               + Σ_RIS a_i·e^{j(2πf_{R,i}t − ψ_i + θ_i(t))}/d̃_{R,i}
               − Σ_IO  e^{j(2πf_{I,k}t − φ_k)}/d̃_{I,k} ]
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ris_sim.exceptions import ContractError, DomainError
from ris_sim.geometry import TWO_PI, SamplingGrid, wrap_phase

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi


def magnitude_db(magnitude):
    """10·log10 of a magnitude; this is the convention behind every dB figure here."""
    with np.errstate(divide='ignore'):
        return 10.0 * np.log10(magnitude)


@dataclass(frozen=True, eq=False)
class PhasePlan:
    """
    Reflection phases θ_i(t) of every RIS, one row per RIS (scenario order) and one
    column per grid sample, plus the reflection amplitude of each RIS.
    """
    phases: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        phases = np.array(self.phases, dtype=float, ndmin=2)
        if phases.ndim != 2:
            raise ContractError("Phase plan must be a (ris, sample) array")
        if not np.all(np.isfinite(phases)):
            raise ContractError("Phase plan contains non-finite phases")
        amplitudes = np.broadcast_to(
            np.asarray(self.amplitudes, dtype=float), (phases.shape[0],)).copy()
        if np.any(amplitudes <= 0) or np.any(amplitudes > 1):
            raise ContractError("RIS amplitude must lie in (0, 1]")
        phases = wrap_phase(phases)
        phases.setflags(write=False)
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'phases', phases)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @classmethod
    def from_phases(cls, phases, amplitude=1.0):
        return cls(phases, amplitude)

    @classmethod
    def zeros(cls, ris_count, sample_count):
        return cls(np.zeros((ris_count, sample_count)), 1.0)

    @classmethod
    def empty(cls, sample_count):
        return cls.zeros(0, sample_count)

    @property
    def ris_count(self):
        return self.phases.shape[0]

    @property
    def sample_count(self):
        return self.phases.shape[1]

    def with_amplitude(self, amplitude):
        return PhasePlan(self.phases, amplitude)

    def with_phases(self, phases):
        return PhasePlan(phases, self.amplitudes)


@dataclass(frozen=True, eq=False)
class EnvelopeTrace:
    samples: np.ndarray
    grid: SamplingGrid
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.grid.sample_count,):
            raise ContractError(
                f"Trace holds {samples.size} samples, grid expects {self.grid.sample_count}")
        if not np.all(np.isfinite(samples)):
            raise ContractError("Trace contains non-finite samples")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    @property
    def times(self):
        return self.t0 + self.grid.times

    @property
    def magnitude(self):
        return np.abs(self.samples)

    @property
    def magnitude_db(self):
        return magnitude_db(self.magnitude)

    @property
    def power_db(self):
        with np.errstate(divide='ignore'):
            return 10.0 * np.log10(self.magnitude ** 2)


def los_component(scenario, times):
    """e^{-j2πf_D t}/d_LOS, or zeros without a LOS path."""
    if scenario.los is None:
        return np.zeros(len(times), dtype=complex)
    return np.exp(-1j * TWO_PI * scenario.mobile.max_doppler * times) / scenario.los.distance


def ris_components(scenario, times):
    """(N, n) array of e^{j(2πf_{R,i}t − ψ_i)}/d̃_{R,i}, the RIS rays before θ."""
    rows = [
        np.exp(1j * (TWO_PI * io.doppler * times - io.constant_phase)) / io.initial_radio_path
        for io in scenario.ris
    ]
    if not rows:
        return np.zeros((0, len(times)), dtype=complex)
    return np.vstack(rows)


def plain_component(scenario, times):
    """Σ_k −e^{j(2πf_{I,k}t − φ_k)}/d̃_{I,k} over the plain IOs."""
    total = np.zeros(len(times), dtype=complex)
    for io in scenario.plain_ios:
        total -= np.exp(1j * (TWO_PI * io.doppler * times - io.constant_phase)) \
            / io.initial_radio_path
    return total


def synthesize(scenario, phase_plan, grid, t0=0.0):
    if phase_plan.phases.shape != (scenario.ris_count, grid.sample_count):
        raise ContractError(
            f"Phase plan shape {phase_plan.phases.shape} does not cover "
            f"{scenario.ris_count} RIS over {grid.sample_count} samples")
    times = t0 + grid.times
    total = los_component(scenario, times)
    if scenario.ris_count:
        steered = ris_components(scenario, times) * np.exp(1j * phase_plan.phases)
        total = total + np.sum(phase_plan.amplitudes[:, None] * steered, axis=0)
    total = total + plain_component(scenario, times)
    return EnvelopeTrace(scenario.wavelength / FOUR_PI * total, grid, t0)


def magnitude_surface(scenario, grid, thetas, t0=0.0):
    """
    |r(t)| of a single-RIS scenario for every candidate phase in ``thetas``;
    rows follow ``thetas``, columns follow the grid.
    """
    if scenario.ris_count != 1:
        raise ContractError("The magnitude surface needs exactly one RIS")
    times = t0 + grid.times
    fixed = los_component(scenario, times) + plain_component(scenario, times)
    ris = ris_components(scenario, times)[0]
    thetas = np.asarray(thetas, dtype=float)
    surface = fixed[None, :] + ris[None, :] * np.exp(1j * thetas)[:, None]
    return scenario.wavelength / FOUR_PI * np.abs(surface)


def two_ray_magnitude_closed_form(d_los, d1, f_D, wavelength, t):
    d_r = d_los + 2.0 * d1
    inner = 1.0 / d_los ** 2 + 1.0 / d_r ** 2 \
        - 2.0 * np.cos(FOUR_PI * f_D * np.asarray(t)) / (d_los * d_r)
    return wavelength / FOUR_PI * np.sqrt(np.maximum(inner, 0.0))


def max_min_magnitude(d_los, d1, wavelength):
    d_r = d_los + 2.0 * d1
    scale = wavelength / FOUR_PI
    return scale * (1.0 / d_los + 1.0 / d_r), scale * (1.0 / d_los - 1.0 / d_r)


def stale_phase_magnitude(d_los, d1, f_D, wavelength, delta_t):
    """|r| a time ``delta_t`` after the RIS phase was last aligned to the LOS ray."""
    if np.any(np.asarray(delta_t) < 0):
        raise DomainError("Hold offset can not be negative")
    d_r = d_los + 2.0 * d1
    inner = 1.0 / d_los ** 2 + 1.0 / d_r ** 2 \
        + 2.0 * np.cos(FOUR_PI * f_D * np.asarray(delta_t)) / (d_los * d_r)
    return wavelength / FOUR_PI * np.sqrt(np.maximum(inner, 0.0))


@dataclass(frozen=True)
class ElementWiseRis:
    """
    A practical RIS made of ``element_count`` scatterers on a square planar grid
    facing the incident ray, mounted where the two-ray reflector sits.
    """
    element_count: int
    element_gain: float
    element_spacing: Optional[float] = None

    def __post_init__(self):
        if self.element_count < 1:
            raise DomainError("An element-wise RIS needs at least one element")
        if not self.element_gain > 0:
            raise DomainError("Element gain must be greater than 0")

    def element_offsets(self, wavelength):
        """(N, 2) in-plane offsets of the elements, centered on the reflector."""
        spacing = self.element_spacing or wavelength / 2.0
        side = math.ceil(math.sqrt(self.element_count))
        index = np.arange(self.element_count)
        rows, cols = index // side, index % side
        centre = (side - 1) / 2.0
        return np.column_stack(((cols - centre) * spacing, (rows - centre) * spacing))

    def path_lengths(self, d_los, d1, speed, times, wavelength):
        """d_{R_n}(t): BS → element n → mobile, the mobile advancing towards the surface."""
        offsets = self.element_offsets(wavelength)
        lateral = np.sum(offsets ** 2, axis=1)[:, None]
        incident = np.sqrt((d_los + d1) ** 2 + lateral)
        outgoing = np.sqrt((d1 - speed * np.asarray(times))[None, :] ** 2 + lateral)
        return incident + outgoing

    def alignment_phases(self, d_los, d1, speed, times, wavelength):
        """θ_n(t) = 2π(d_{R_n}(t) − d_LOS(t))/λ, co-phasing every element with the LOS ray."""
        d_los_t = d_los + speed * np.asarray(times)
        paths = self.path_lengths(d_los, d1, speed, times, wavelength)
        return wrap_phase(TWO_PI * np.mod((paths - d_los_t[None, :]) / wavelength, 1.0))


def two_ray_distances(scenario):
    """Recover (d_LOS, d1) from a LOS + single boresight reflector scenario."""
    if scenario.los is None or len(scenario.interactors) != 1:
        raise ContractError("Expected a LOS path and exactly one reflector")
    reflector = scenario.interactors[0]
    if reflector.arrival_angle != 0.0:
        raise ContractError("The two-ray reflector must sit on the mobile route")
    d_los = scenario.los.distance
    return d_los, (reflector.initial_radio_path - d_los) / 2.0


def element_wise_synthesize(scenario_two_ray, ris, grid, phases=None):
    """
    Envelope of the two-ray geometry with the reflector replaced by ``ris``;
    ``phases`` is an (element, sample) array, zeros when omitted.
    """
    d_los, d1 = two_ray_distances(scenario_two_ray)
    wavelength = scenario_two_ray.wavelength
    speed = scenario_two_ray.mobile.speed
    times = grid.times
    remaining = d1 - speed * times
    if np.any(remaining <= 0):
        raise DomainError("The mobile reaches the surface within the grid")

    if phases is None:
        phases = np.zeros((ris.element_count, grid.sample_count))
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (ris.element_count, grid.sample_count):
        raise ContractError("Element phases must cover every element and sample")

    los = wavelength / (FOUR_PI * d_los) \
        * np.exp(-1j * TWO_PI * np.mod((d_los + speed * times) / wavelength, 1.0))
    gain = wavelength ** 2 * ris.element_gain / (FOUR_PI ** 2 * (d_los + d1) * remaining)
    paths = ris.path_lengths(d_los, d1, speed, times, wavelength)
    element_phase = TWO_PI * np.mod(paths / wavelength, 1.0)
    elements = np.sum(np.exp(1j * (phases - element_phase)), axis=0)
    return EnvelopeTrace(los + gain * elements, grid)


def held_sample_indices(sample_count, hold_samples):
    """Index of the last update instant for every sample under a zero-order hold of Q samples."""
    if hold_samples < 1:
        raise DomainError("Hold length must be at least one sample")
    index = np.arange(sample_count)
    return index - index % hold_samples
