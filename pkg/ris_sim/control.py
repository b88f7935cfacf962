"""
RIS phase control.

Every strategy turns the controller's view of a scenario into a PhasePlan. The
controller may hold erroneous Doppler estimates (see imperfections); the plant
used for synthesis is always the true scenario.

Phase bookkeeping: the RIS ray i before steering is e^{j(2πf_{R,i}t − ψ_i)}, so
steering it onto a target phase Φ(t) takes θ_i(t) = Φ(t) − 2πf_{R,i}t + ψ_i.
The LOS ray sits at −2πf_D t, plain IO k (reflection −1) at 2πf_{I,k}t − φ_k + π.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from django.db import models

from ris_sim.envelope import (
    FOUR_PI, PhasePlan, held_sample_indices, los_component, magnitude_db, plain_component,
    ris_components, synthesize,
)
from ris_sim.exceptions import (
    ContractError, DomainError, PermutationCapExceeded, UnknownNameError,
)
from ris_sim.geometry import TWO_PI, stream_rng, wrap_phase

logger = logging.getLogger(__name__)

DEFAULT_PERMUTATION_CAP = 10 ** 6


def _ris_base_phase(scenario, times):
    """(N, n) phase 2πf_{R,i}t − ψ_i of every RIS ray before steering."""
    if not scenario.ris_count:
        return np.zeros((0, len(times)))
    return np.vstack([TWO_PI * io.doppler * times - io.constant_phase for io in scenario.ris])


def _plain_phase(io, times):
    return TWO_PI * io.doppler * times - io.constant_phase + math.pi


def _los_phase(scenario, times):
    return -TWO_PI * scenario.mobile.max_doppler * times


def _require_ris(scenario):
    if not scenario.ris_count:
        raise ContractError("None of the RIS strategies apply to a scenario without RIS")


def plan_align_to_los(scenario, grid):
    """Method 1: θ_i(t) = −2πf_{R,i}t + ψ_i − 2πf_D t."""
    if scenario.los is None:
        raise ContractError(
            "Aligning to the LOS path needs a LOS path; align to the strongest path")
    times = grid.times
    return PhasePlan(_los_phase(scenario, times)[None, :] - _ris_base_phase(scenario, times), 1.0)


def plan_out_phase_los(scenario_two_ray, grid):
    """Place the single RIS ray opposite the LOS ray: θ(t) = −4πf_D t + π."""
    if scenario_two_ray.los is None or scenario_two_ray.ris_count != 1 \
            or scenario_two_ray.plain_count:
        raise ContractError("Out-phasing needs a LOS path and exactly one RIS")
    aligned = plan_align_to_los(scenario_two_ray, grid)
    return aligned.with_phases(aligned.phases + math.pi)


def plan_fast_fade(scenario, grid):
    """Alternate every RIS between LOS-aligned and LOS-opposed phases each sample."""
    aligned = plan_align_to_los(scenario, grid)
    flip = np.where(np.arange(grid.sample_count) % 2 == 1, math.pi, 0.0)
    return aligned.with_phases(aligned.phases + flip[None, :])


def plan_doppler_synthesis(scenario, f_tilde, grid):
    """Give every RIS ray the Doppler shift ``f_tilde``: θ_i(t) = 2π(f̃ − f_{R,i})t."""
    _require_ris(scenario)
    if abs(f_tilde) >= 0.5 * grid.sampling_frequency:
        raise DomainError(
            f"Desired Doppler {f_tilde} Hz exceeds half the sampling frequency "
            f"({0.5 * grid.sampling_frequency} Hz)")
    times = grid.times
    dopplers = np.array([io.doppler for io in scenario.ris])
    return PhasePlan(TWO_PI * (f_tilde - dopplers)[:, None] * times[None, :], 1.0)


def plan_random(scenario, grid, seed):
    """Fresh i.i.d. uniform [0, 2π) phase for every RIS at every sample."""
    rng = stream_rng(seed, 'random_phases')
    return PhasePlan(rng.uniform(0.0, TWO_PI, size=(scenario.ris_count, grid.sample_count)), 1.0)


def plan_passive(scenario, grid):
    return PhasePlan.zeros(scenario.ris_count, grid.sample_count)


def plan_nlos_eliminate(scenario_nlos, grid):
    """Freeze every RIS ray at 0 Hz: θ_i(t) = −2πf_{R,i}t + ψ_i."""
    if scenario_nlos.los is not None or scenario_nlos.plain_count:
        raise ContractError(
            "Doppler elimination needs a scenario without LOS path and without plain IOs")
    _require_ris(scenario_nlos)
    return PhasePlan(-_ris_base_phase(scenario_nlos, grid.times), 1.0)


def _cancellation_phase(scenario, ris_position, io, times):
    """θ that puts RIS ``ris_position`` opposite plain IO ``io``."""
    ris = scenario.ris[ris_position]
    return TWO_PI * (io.doppler - ris.doppler) * times + ris.constant_phase - io.constant_phase


def _plain_position(scenario, target):
    """Position among the plain IOs of interactor-list index ``target``."""
    if target not in scenario.plain_indices:
        raise ContractError(f"Interactor {target} is not a plain IO")
    return scenario.plain_indices.index(target)


def plan_cancel_io(scenario, target, grid):
    """
    The first RIS sacrifices itself to cancel plain IO ``target`` (interactor
    index); any other RIS aligns to the LOS path.
    """
    _require_ris(scenario)
    io = scenario.plain_ios[_plain_position(scenario, target)]
    times = grid.times
    if scenario.los is not None:
        phases = np.array(plan_align_to_los(scenario, grid).phases)
    else:
        phases = np.zeros((scenario.ris_count, grid.sample_count))
    phases[0] = _cancellation_phase(scenario, 0, io, times)
    return PhasePlan(phases, 1.0)


def plan_co_phase_io(scenario, target, grid):
    """The first RIS reinforces plain IO ``target``; degrades an eavesdropper's link."""
    cancel = plan_cancel_io(scenario, target, grid)
    phases = np.array(cancel.phases)
    phases[0] = phases[0] + math.pi
    return cancel.with_phases(phases)


def plan_two_ris_align(scenario, grid):
    """Two RISs co-phased with the LOS ray, or frozen at 0 Hz without one."""
    if scenario.ris_count != 2:
        raise ContractError("Two-RIS alignment needs exactly two RIS")
    if scenario.los is not None:
        return plan_align_to_los(scenario, grid)
    return plan_nlos_eliminate(scenario, grid)


def strongest_path(scenario):
    """(kind, position) of the shortest reflected path; ties go to the plain IO."""
    best_ris = min(range(scenario.ris_count),
                   key=lambda i: scenario.ris[i].initial_radio_path, default=None)
    best_io = min(range(scenario.plain_count),
                  key=lambda k: scenario.plain_ios[k].initial_radio_path, default=None)
    if best_io is None or (best_ris is not None and
                           scenario.ris[best_ris].initial_radio_path
                           < scenario.plain_ios[best_io].initial_radio_path):
        return 'ris', best_ris
    return 'plain_io', best_io


def plan_align_to_strongest(scenario, grid):
    """
    NLOS Method 1. A RIS anchor keeps θ_a = 0 and the others follow it; a plain IO
    anchor is joined by every RIS with the extra π of its −1 reflection.
    """
    _require_ris(scenario)
    times = grid.times
    base = _ris_base_phase(scenario, times)
    kind, anchor = strongest_path(scenario)
    if kind == 'ris':
        phases = base[anchor][None, :] - base
        phases[anchor] = 0.0
    else:
        phases = _plain_phase(scenario.plain_ios[anchor], times)[None, :] - base
    return PhasePlan(phases, 1.0)


def optimal_single_ris_phase(scenario, t):
    """
    θ₁(t) maximizing |r(t)| for a single RIS against every fixed ray.

    Writing the fixed rays as c(t) and w = e^{j(2πf_R t − ψ)}·conj(c), the
    objective is A·cosθ + B·sinθ with A = Re(w), B = −Im(w) (for the LOS + RIS +
    one IO geometry these are the usual harmonic-addition coefficients), solved by
    θ = π/2·(1 − sgn A) − atan(−B/A).
    """
    if scenario.ris_count != 1:
        raise ContractError("The closed-form optimum needs exactly one RIS")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    fixed = los_component(scenario, times) + plain_component(scenario, times)
    ris = scenario.ris[0]
    w = np.exp(1j * (TWO_PI * ris.doppler * times - ris.constant_phase)) * np.conj(fixed)
    a, b = w.real, -w.imag

    with np.errstate(divide='ignore', invalid='ignore'):
        theta = math.pi / 2 * (1 - np.sign(a)) - np.arctan(-b / a)

    degenerate = a == 0
    if np.any(degenerate):
        # sgn(0) is ambiguous: compare the two stationary points ±π/2 directly
        ris_ray = ris_components(scenario, times[degenerate])[0]
        candidates = np.array([math.pi / 2, -math.pi / 2])
        gains = np.abs(fixed[degenerate][None, :]
                       + ris_ray[None, :] * np.exp(1j * candidates)[:, None])
        theta[degenerate] = candidates[np.argmax(gains, axis=0)]

    theta = wrap_phase(theta)
    return float(theta[0]) if np.ndim(t) == 0 else theta


def plan_optimal_single_ris(scenario, grid):
    return PhasePlan(optimal_single_ris_phase(scenario, grid.times)[None, :], 1.0)


class SearchMethod(models.TextChoices):
    M1 = 'M1', 'Align to LOS / strongest path'
    M2 = 'M2', 'Permutation search, maximum |r|'
    M3 = 'M3', 'Permutation search, smoothest |r|'


class LosMode(models.TextChoices):
    LOS = 'LOS', 'With LOS path'
    NLOS = 'NLOS', 'Without LOS path'


@dataclass(frozen=True)
class Assignment:
    """
    One permutation-search decision. ``pairs`` maps RIS positions (0-based among the
    RISs) to the plain IO positions they cancel; ``remainder`` lists the RISs steered
    onto the anchor: 'los', ('ris', a) or ('plain_io', a), or None when every RIS
    is paired.
    """
    pairs: Tuple[Tuple[int, int], ...] = ()
    remainder: Tuple[int, ...] = ()
    anchor: object = 'los'
    magnitude: float = 0.0

    @property
    def magnitude_db(self):
        return float(magnitude_db(self.magnitude))

    def describe(self):
        return ' '.join(f'{ris}->{io}' for ris, io in self.pairs) or '-'


@dataclass
class SearchResult:
    plan: PhasePlan
    assignments: Optional[Tuple[Assignment, ...]] = None


def permutation_count(ris_count, plain_count):
    return math.perm(max(ris_count, plain_count), min(ris_count, plain_count))


def _permutation_table(pool, length):
    table = np.array(list(itertools.permutations(range(pool), length)), dtype=int)
    return table.reshape(len(table), length)


class AssignmentSearch:
    """
    Every RIS→plain IO assignment of a scenario, evaluated at one instant on the
    controller's view. Rows follow lexicographic permutation order.

    With N ≤ M the table holds N-permutations of the plain IOs (RIS i cancels
    entry i); with N > M it holds M-permutations of the RISs (entry k cancels IO k)
    and the unpaired RISs follow the LOS ray, or the strongest unpaired RIS
    without LOS.
    """

    def __init__(self, scenario, los_mode):
        self.scenario = scenario
        self.los_mode = los_mode
        n, m = scenario.ris_count, scenario.plain_count
        if n > m:
            self.pair_ris = _permutation_table(n, m)
            self.pair_io = np.broadcast_to(np.arange(m), self.pair_ris.shape)
        else:
            self.pair_io = _permutation_table(m, n)
            self.pair_ris = np.broadcast_to(np.arange(n), self.pair_io.shape)
        rows = len(self.pair_ris)
        self.rows = np.arange(rows)[:, None]
        self.remainder = np.ones((rows, n), dtype=bool)
        self.remainder[self.rows, self.pair_ris] = False
        self.has_anchor = self.remainder.any(axis=1)
        distances = np.array([io.initial_radio_path for io in scenario.ris])
        self.anchor = np.argmin(np.where(self.remainder, distances[None, :], np.inf), axis=1)
        self.scale = scenario.wavelength / FOUR_PI

    def __len__(self):
        return len(self.pair_ris)

    def evaluate(self, t0):
        """Candidate phase sets (P, N) and the estimated samples r_n(t0) (P,)."""
        scenario = self.scenario
        times = np.array([t0])
        base = _ris_base_phase(scenario, times)[:, 0]
        plain = np.array([_plain_phase(io, times)[0] for io in scenario.plain_ios])
        fixed = (los_component(scenario, times) + plain_component(scenario, times))[0]
        rays = ris_components(scenario, times)[:, 0]

        thetas = np.empty(self.remainder.shape)
        # opposite the plain ray, which already carries the π of its −1 reflection
        thetas[self.rows, self.pair_ris] = plain[self.pair_io] - math.pi - base[self.pair_ris]
        if self.los_mode == LosMode.LOS:
            target = np.full(len(self), _los_phase(scenario, times)[0])
        else:
            target = base[self.anchor]
        thetas = np.where(self.remainder, target[:, None] - base[None, :], thetas)
        if self.los_mode == LosMode.NLOS:
            thetas[self.has_anchor, self.anchor[self.has_anchor]] = 0.0

        samples = self.scale * (fixed + np.exp(1j * thetas) @ rays)
        return thetas, samples

    def assignment(self, row, magnitude):
        pairs = tuple(sorted(zip(self.pair_ris[row].tolist(), self.pair_io[row].tolist())))
        remainder = tuple(np.flatnonzero(self.remainder[row]).tolist())
        if self.los_mode == LosMode.LOS:
            anchor = 'los'
        elif self.has_anchor[row]:
            anchor = ('ris', int(self.anchor[row]))
        else:
            anchor = None
        return Assignment(pairs, remainder, anchor, float(magnitude))


def _resolve_los_mode(scenario, los_mode):
    if los_mode is None:
        return LosMode.LOS if scenario.los is not None else LosMode.NLOS
    if los_mode == LosMode.LOS and scenario.los is None:
        raise ContractError("LOS mode needs a LOS path")
    if los_mode == LosMode.NLOS and scenario.los is not None:
        raise ContractError("NLOS mode needs a scenario without LOS path")
    return LosMode(los_mode)


def plan_method(scenario, grid, method, los_mode=None, *, plant=None, hold_samples=1, cap=None):
    """
    Methods 1–3 for any mix of N RISs and M plain IOs, with or without LOS.

    M2 picks, at every update instant, the assignment maximizing the estimated
    |r_n(t₀)|; M3 the one whose |r_n(t₀)| is closest to the realised |r(t₋₁)|
    (M2's choice at the first instant). Phases are recomputed every
    ``hold_samples`` samples and held in between. ``plant`` is the true scenario
    behind the realised samples; it defaults to ``scenario``.
    """
    if not scenario.ris_count:
        raise ContractError("None of the methods are applicable without RIS")
    method = SearchMethod(method)
    los_mode = _resolve_los_mode(scenario, los_mode)
    held = held_sample_indices(grid.sample_count, hold_samples)

    if method == SearchMethod.M1:
        if los_mode == LosMode.LOS:
            plan, anchor = plan_align_to_los(scenario, grid), 'los'
        else:
            plan, anchor = plan_align_to_strongest(scenario, grid), strongest_path(scenario)
        plan = plan.with_phases(plan.phases[:, held])
        estimate = np.abs(synthesize(scenario, plan, grid).samples)
        everyone = tuple(range(scenario.ris_count))
        return SearchResult(plan, tuple(
            Assignment((), everyone, anchor, float(value)) for value in estimate))

    count = permutation_count(scenario.ris_count, scenario.plain_count)
    cap = DEFAULT_PERMUTATION_CAP if cap is None else cap
    if cap < 1:
        raise ContractError(f"Permutation cap must be at least 1, got {cap}")
    if count > cap:
        raise PermutationCapExceeded(count, cap)

    search = AssignmentSearch(scenario, los_mode)
    plant = plant or scenario
    times = grid.times
    plant_fixed = los_component(plant, times) + plain_component(plant, times)
    plant_rays = ris_components(plant, times)

    phases = np.empty((scenario.ris_count, grid.sample_count))
    assignments = []
    previous = None
    theta = chosen = None
    for k, t0 in enumerate(times):
        if held[k] == k:
            thetas, samples = search.evaluate(t0)
            magnitudes = np.abs(samples)
            if method == SearchMethod.M2 or previous is None:
                row = int(np.argmax(magnitudes))
            else:
                row = int(np.argmin(np.abs(magnitudes - previous)))
            decision = search.assignment(row, magnitudes[row])
            if chosen is not None and decision.pairs != chosen.pairs:
                logger.debug("t=%.6g s: assignment %s -> %s",
                             t0, chosen.describe(), decision.describe())
            theta, chosen = thetas[row], decision
        phases[:, k] = theta
        assignments.append(chosen)
        previous = abs(search.scale * (plant_fixed[k] + np.exp(1j * theta) @ plant_rays[:, k]))

    return SearchResult(PhasePlan(phases, 1.0), tuple(assignments))


class Strategy:
    """A phase-control policy; ``build`` returns the plan for the controller's scenario."""
    name = ''
    # policies that apply the hold themselves (the whole controller is held)
    holds_internally = False

    def build(self, scenario, grid, *, seed=None, plant=None, hold_samples=1, cap=None):
        return SearchResult(self.plan(scenario, grid, seed=seed))

    def plan(self, scenario, grid, seed=None):
        raise NotImplementedError

    def label(self):
        return self.name


class Passive(Strategy):
    name = 'none'

    def plan(self, scenario, grid, seed=None):
        return plan_passive(scenario, grid)


class AlignToLos(Strategy):
    name = 'align-to-los'

    def plan(self, scenario, grid, seed=None):
        _require_ris(scenario)
        return plan_align_to_los(scenario, grid)


class OutPhaseLos(Strategy):
    name = 'out-phase-los'

    def plan(self, scenario, grid, seed=None):
        return plan_out_phase_los(scenario, grid)


class FastFade(Strategy):
    name = 'fast-fade'

    def plan(self, scenario, grid, seed=None):
        _require_ris(scenario)
        return plan_fast_fade(scenario, grid)


@dataclass(frozen=True)
class CancelIo(Strategy):
    target: int
    name = 'cancel-io'

    def plan(self, scenario, grid, seed=None):
        return plan_cancel_io(scenario, self.target, grid)

    def label(self):
        return f'{self.name}:{self.target}'


@dataclass(frozen=True)
class CoPhaseIo(Strategy):
    target: int
    name = 'co-phase-io'

    def plan(self, scenario, grid, seed=None):
        return plan_co_phase_io(scenario, self.target, grid)

    def label(self):
        return f'{self.name}:{self.target}'


class OptimalSingleRis(Strategy):
    name = 'optimal-single-ris'

    def plan(self, scenario, grid, seed=None):
        return plan_optimal_single_ris(scenario, grid)


@dataclass(frozen=True)
class RandomPhase(Strategy):
    seed: Optional[int] = None
    name = 'random'

    def plan(self, scenario, grid, seed=None):
        return plan_random(scenario, grid, self.seed if self.seed is not None else seed)

    def label(self):
        return self.name if self.seed is None else f'{self.name}:{self.seed}'


@dataclass(frozen=True)
class DopplerSynthesis(Strategy):
    f_tilde: float
    name = 'doppler-synthesis'

    def plan(self, scenario, grid, seed=None):
        return plan_doppler_synthesis(scenario, self.f_tilde, grid)

    def label(self):
        return f'{self.name}:{self.f_tilde:g}'


class NlosDopplerEliminate(Strategy):
    name = 'nlos-eliminate'

    def plan(self, scenario, grid, seed=None):
        return plan_nlos_eliminate(scenario, grid)


class TwoRisAlign(Strategy):
    name = 'two-ris-align'

    def plan(self, scenario, grid, seed=None):
        return plan_two_ris_align(scenario, grid)


class AlignToStrongest(Strategy):
    name = 'align-to-strongest'

    def plan(self, scenario, grid, seed=None):
        return plan_align_to_strongest(scenario, grid)


class _MethodStrategy(Strategy):
    method = SearchMethod.M1
    holds_internally = True

    def build(self, scenario, grid, *, seed=None, plant=None, hold_samples=1, cap=None):
        return plan_method(scenario, grid, self.method, plant=plant,
                           hold_samples=hold_samples, cap=cap)


class MethodOne(_MethodStrategy):
    name = 'method1'
    method = SearchMethod.M1


class PermSearchMax(_MethodStrategy):
    name = 'method2'
    method = SearchMethod.M2


class PermSearchSmooth(_MethodStrategy):
    name = 'method3'
    method = SearchMethod.M3


_SIMPLE_STRATEGIES = {
    cls.name: cls for cls in (
        Passive, AlignToLos, OutPhaseLos, FastFade, OptimalSingleRis, NlosDopplerEliminate,
        TwoRisAlign, AlignToStrongest, MethodOne, PermSearchMax, PermSearchSmooth,
    )
}
_ALIASES = {'perm-search-max': 'method2', 'perm-search-smooth': 'method3'}
STRATEGY_NAMES = tuple(sorted(
    list(_SIMPLE_STRATEGIES) + list(_ALIASES)
    + ['cancel-io:<k>', 'co-phase-io:<k>', 'random[:seed]', 'doppler-synthesis:<hz>']))


def parse_strategy(text):
    """Strategy from its command-line spelling, e.g. ``cancel-io:2`` or ``method3``."""
    name, _, argument = text.strip().lower().partition(':')
    name = _ALIASES.get(name, name)
    try:
        if name in _SIMPLE_STRATEGIES and not argument:
            return _SIMPLE_STRATEGIES[name]()
        if name == 'random':
            return RandomPhase(int(argument) if argument else None)
        if name == 'cancel-io' and argument:
            return CancelIo(int(argument))
        if name == 'co-phase-io' and argument:
            return CoPhaseIo(int(argument))
        if name == 'doppler-synthesis' and argument:
            return DopplerSynthesis(float(argument))
    except ValueError as exc:
        raise UnknownNameError('strategy', text, STRATEGY_NAMES) from exc
    raise UnknownNameError('strategy', text, STRATEGY_NAMES)
