"""
Practical non-idealities: realistic reflection hardware, erroneous Doppler
feedback and discrete-time phase updates.

The controller and the plant are kept apart: Doppler errors only ever reach the
scenario handed to the planner, the envelope is always synthesized from truth.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ris_sim.envelope import held_sample_indices
from ris_sim.exceptions import ContractError, DomainError
from ris_sim.geometry import TWO_PI, stream_rng, wrap_phase

logger = logging.getLogger(__name__)

# relative slack when deciding whether t_r is a whole number of samples
HOLD_RATIO_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RealisticRisModel:
    amplitude_db: float = -1.0
    phase_min: float = math.radians(-150.0)
    phase_max: float = math.radians(140.0)

    def __post_init__(self):
        if not self.phase_min < self.phase_max:
            raise DomainError("Minimum reflection phase must be below the maximum")
        if self.phase_max - self.phase_min >= TWO_PI:
            raise DomainError("Reflection phase range must be narrower than 2π")
        if self.amplitude_db > 0:
            raise DomainError("A passive RIS can not amplify (amplitude_db must be <= 0)")

    @property
    def amplitude(self):
        return 10.0 ** (self.amplitude_db / 20.0)

    @property
    def span(self):
        return self.phase_max - self.phase_min

    def achievable(self, phases):
        """Nearest achievable phase on the circle for every requested phase, in [0, 2π)."""
        phases = np.asarray(phases, dtype=float)
        relative = np.mod(phases - self.phase_min, TWO_PI)
        inside = relative <= self.span
        to_max = relative - self.span
        to_min = TWO_PI - relative
        clamped = np.where(to_max <= to_min, self.phase_max, self.phase_min)
        return wrap_phase(np.where(inside, phases, clamped))

    def to_dict(self):
        return {
            'amplitude_db': self.amplitude_db,
            'phase_min_deg': math.degrees(self.phase_min),
            'phase_max_deg': math.degrees(self.phase_max),
        }


def apply_realistic_ris(plan, model):
    """Clamp every phase into the hardware range and set the reflection amplitude."""
    if plan.ris_count == 0:
        return plan
    return plan.with_phases(model.achievable(plan.phases)).with_amplitude(model.amplitude)


@dataclass(frozen=True)
class DopplerErrorModel:
    bound_u: float
    seed: Optional[int] = None

    def __post_init__(self):
        if self.bound_u < 0:
            raise DomainError("Doppler error bound can not be negative")

    def draw(self, count):
        # errors scale with U for a fixed seed, so U=1 and U=4 share their draw
        unit = stream_rng(self.seed, 'doppler_error').uniform(-1.0, 1.0, size=count)
        return self.bound_u * unit

    def to_dict(self):
        return {'u_hz': self.bound_u, 'seed': self.seed}


def apply_doppler_error(scenario, model):
    """
    The scenario as the controller sees it: every interactor Doppler shift is off
    by an error in [−U, U]. The LOS Doppler f_D is never perturbed.
    """
    if model.bound_u == 0 or not scenario.interactors:
        return scenario
    errors = model.draw(len(scenario.interactors))
    logger.debug("Doppler estimation errors (Hz): %s", np.array2string(errors, precision=3))
    return scenario.with_interactors(
        replace(io, doppler=io.doppler + float(error))
        for io, error in zip(scenario.interactors, errors))


@dataclass(frozen=True)
class HoldModel:
    """Phases stay fixed for ``hold_samples`` samples, or for ``hold_interval`` seconds."""
    hold_samples: Optional[int] = None
    hold_interval: Optional[float] = None

    def __post_init__(self):
        if (self.hold_samples is None) == (self.hold_interval is None):
            raise ContractError("Set exactly one of hold_samples and hold_interval")
        if self.hold_samples is not None and self.hold_samples < 1:
            raise DomainError("Hold length must be at least one sample")
        if self.hold_interval is not None and not self.hold_interval > 0:
            raise DomainError("Hold interval must be greater than 0")

    def resolve(self, grid):
        """Q, the number of grid samples per update."""
        if self.hold_samples is not None:
            return self.hold_samples
        ratio = self.hold_interval / grid.sample_interval
        hold_samples = math.floor(ratio + HOLD_RATIO_TOLERANCE)
        if hold_samples < 1:
            raise DomainError(
                f"Hold interval {self.hold_interval} s is shorter than one sample "
                f"({grid.sample_interval} s)")
        if abs(ratio - hold_samples) > HOLD_RATIO_TOLERANCE * max(ratio, 1.0):
            logger.warning(
                "Hold interval %.6g s is not a multiple of the sample interval %.6g s; "
                "rounding down to %d samples", self.hold_interval, grid.sample_interval,
                hold_samples)
        return hold_samples

    def to_dict(self):
        return {'hold_samples': self.hold_samples, 'hold_interval_s': self.hold_interval}


def apply_hold(plan, hold, grid=None):
    """Zero-order hold of a phase plan; ``hold`` is Q or a HoldModel (which may need ``grid``)."""
    if isinstance(hold, HoldModel):
        if hold.hold_interval is not None and grid is None:
            raise ContractError("Resolving a hold interval needs the sampling grid")
        hold = hold.resolve(grid)
    if hold == 1:
        return plan
    held = held_sample_indices(plan.sample_count, hold)
    return plan.with_phases(plan.phases[:, held])


def hold_criterion(max_doppler):
    """Longest update interval, 1/(40π·f_D), that keeps the held envelope ripple negligible."""
    if not max_doppler > 0:
        raise DomainError("Maximum Doppler shift must be greater than 0")
    return 1.0 / (40.0 * math.pi * max_doppler)


@dataclass(frozen=True)
class Imperfections:
    realistic_ris: Optional[RealisticRisModel] = None
    doppler_error: Optional[DopplerErrorModel] = None
    hold: Optional[HoldModel] = None

    @property
    def is_ideal(self):
        return self.realistic_ris is None and self.doppler_error is None and self.hold is None

    def to_dict(self):
        return {
            'realistic_ris': self.realistic_ris.to_dict() if self.realistic_ris else None,
            'doppler_error': self.doppler_error.to_dict() if self.doppler_error else None,
            'hold': self.hold.to_dict() if self.hold else None,
        }

    @classmethod
    def from_dict(cls, data):
        """The optional ``imperfections`` object of a scenario file."""
        if not data:
            return cls()
        realistic = data.get('realistic_ris')
        if realistic is True:
            realistic = {}
        doppler = data.get('doppler_error')
        hold = data.get('hold')
        try:
            return cls(
                realistic_ris=RealisticRisModel(
                    realistic.get('amplitude_db', -1.0),
                    math.radians(realistic.get('phase_min_deg', -150.0)),
                    math.radians(realistic.get('phase_max_deg', 140.0)),
                ) if realistic is not None and realistic is not False else None,
                doppler_error=DopplerErrorModel(
                    float(doppler['u_hz']), doppler.get('seed')) if doppler else None,
                hold=HoldModel(
                    hold.get('hold_samples'), hold.get('hold_interval_s')) if hold else None,
            )
        except (KeyError, AttributeError, TypeError) as exc:
            raise ContractError(f"Malformed imperfections object: {exc}") from exc
