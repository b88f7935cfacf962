"""
Randomized checks of the envelope, spectrum, control and hardware models against
independent oracles; every property runs over 1000 generated cases.
"""
# Django
from django.test import SimpleTestCase

# Python
import itertools
import math

import numpy as np
from hypothesis import given, settings
import hypothesis.strategies as st

# Local
from ris_sim.control import SearchMethod, plan_align_to_los, plan_method, plan_random
from ris_sim.envelope import (
    FOUR_PI, PhasePlan, max_min_magnitude, synthesize, two_ray_magnitude_closed_form,
)
from ris_sim.geometry import InteractorKind, SamplingGrid, Scenario, TWO_PI
from ris_sim.imperfections import DopplerErrorModel, RealisticRisModel
from ris_sim.presets import multi_io_scenario, two_ray_scenario
from ris_sim.spectrum import doppler_spectrum

SEEDS = st.integers(min_value=0, max_value=2 ** 32 - 1)
SHORT_GRID = SamplingGrid(32, 3.125e-4, 64)


def circular_distance(a, b):
    difference = np.mod(np.asarray(a) - np.asarray(b), TWO_PI)
    return np.minimum(difference, TWO_PI - difference)


def random_plan(scenario, grid, seed):
    return plan_random(scenario, grid, seed)


class EnvelopePropertyTest(SimpleTestCase):

    @given(st.floats(10.0, 5000.0), st.floats(0.1, 5.0), st.floats(1.0, 100.0))
    @settings(max_examples=1000, deadline=None)
    def test_phasor_sum_matches_the_two_ray_closed_form(self, d_los, ratio, speed):
        scenario = two_ray_scenario(d_los, ratio * d_los, speed=speed, drop_constant_phases=True)
        grid = SamplingGrid.for_route(scenario.carrier, scenario.mobile, 6)
        trace = synthesize(scenario, PhasePlan.empty(grid.sample_count), grid)
        expected = two_ray_magnitude_closed_form(
            d_los, ratio * d_los, scenario.mobile.max_doppler, scenario.wavelength, grid.times)
        np.testing.assert_allclose(trace.magnitude, expected, rtol=1e-12)

    @given(st.integers(0, 10), SEEDS, st.booleans())
    @settings(max_examples=1000, deadline=None)
    def test_magnitude_never_exceeds_the_coherent_sum(self, ris_count, seed, los):
        scenario = multi_io_scenario(ris_count, seed, los)
        trace = synthesize(scenario, random_plan(scenario, SHORT_GRID, seed), SHORT_GRID)
        bound = sum(1.0 / io.initial_radio_path for io in scenario.interactors)
        if scenario.los is not None:
            bound += 1.0 / scenario.los.distance
        bound *= scenario.wavelength / FOUR_PI
        self.assertTrue(np.all(trace.magnitude <= bound * (1 + 1e-12)))

    @given(st.integers(0, 10), SEEDS)
    @settings(max_examples=1000, deadline=None)
    def test_envelope_is_the_sum_of_its_rays(self, ris_count, seed):
        scenario = multi_io_scenario(ris_count, seed)
        plan = random_plan(scenario, SHORT_GRID, seed)
        total = synthesize(
            Scenario(scenario.carrier, scenario.mobile, scenario.los),
            PhasePlan.empty(SHORT_GRID.sample_count), SHORT_GRID).samples
        ris_row = 0
        for io in scenario.interactors:
            single = Scenario(scenario.carrier, scenario.mobile, None, (io,))
            if io.is_ris:
                part = PhasePlan.from_phases(plan.phases[ris_row:ris_row + 1])
                ris_row += 1
            else:
                part = PhasePlan.empty(SHORT_GRID.sample_count)
            total = total + synthesize(single, part, SHORT_GRID).samples
        full = synthesize(scenario, plan, SHORT_GRID).samples
        np.testing.assert_allclose(full, total, rtol=0, atol=1e-17)

    @given(st.floats(100.0, 5000.0), st.floats(0.1, 5.0), SEEDS)
    @settings(max_examples=1000, deadline=None)
    def test_two_ray_stays_between_its_extremes(self, d_los, ratio, seed):
        scenario = two_ray_scenario(d_los, ratio * d_los, InteractorKind.RIS)
        plan = random_plan(scenario, SHORT_GRID, seed)
        magnitude = synthesize(scenario, plan, SHORT_GRID).magnitude
        high, low = max_min_magnitude(d_los, ratio * d_los, scenario.wavelength)
        self.assertTrue(np.all(magnitude <= high * (1 + 1e-12)))
        self.assertTrue(np.all(magnitude >= low * (1 - 1e-9)))

    @given(st.floats(100.0, 5000.0), st.floats(0.1, 5.0), SEEDS)
    @settings(max_examples=1000, deadline=None)
    def test_lone_reflector_has_a_flat_envelope(self, d_los, ratio, seed):
        scenario = two_ray_scenario(d_los, ratio * d_los, InteractorKind.RIS, los=False)
        magnitude = synthesize(scenario, random_plan(scenario, SHORT_GRID, seed),
                               SHORT_GRID).magnitude
        expected = scenario.wavelength / (FOUR_PI * scenario.interactors[0].initial_radio_path)
        np.testing.assert_allclose(magnitude, expected, rtol=1e-12)

    @given(st.integers(1, 10), SEEDS)
    @settings(max_examples=1000, deadline=None)
    def test_aligned_ris_without_plain_ios_add_up(self, ris_count, seed):
        scenario = multi_io_scenario(ris_count, seed, interactor_count=ris_count)
        magnitude = synthesize(scenario, plan_align_to_los(scenario, SHORT_GRID),
                               SHORT_GRID).magnitude
        expected = 1.0 / scenario.los.distance \
            + sum(1.0 / io.initial_radio_path for io in scenario.interactors)
        np.testing.assert_allclose(magnitude, expected * scenario.wavelength / FOUR_PI,
                                   rtol=1e-9)

    @given(st.integers(0, 10), SEEDS)
    @settings(max_examples=1000, deadline=None)
    def test_spectrum_keeps_the_energy(self, ris_count, seed):
        scenario = multi_io_scenario(ris_count, seed)
        trace = synthesize(scenario, random_plan(scenario, SHORT_GRID, seed), SHORT_GRID)
        spectrum = doppler_spectrum(trace)
        energy = np.sum(trace.magnitude ** 2)
        self.assertAlmostEqual(np.sum(spectrum.raw_magnitude ** 2) / (SHORT_GRID.fft_size * energy),
                               1.0, delta=1e-9)


class ControlPropertyTest(SimpleTestCase):

    @given(SEEDS, st.booleans())
    @settings(max_examples=1000, deadline=None)
    def test_method_two_picks_the_best_assignment(self, seed, los):
        """
        Two RISs against two plain IOs: at every sample the chosen |r| equals the best
        of the two explicit RIS→IO pairings.
        """
        scenario = multi_io_scenario(2, seed, los, interactor_count=4)
        grid = SamplingGrid(8, 3.125e-4, 8)
        result = plan_method(scenario, grid, SearchMethod.M2)
        trace = synthesize(scenario, result.plan, grid)
        scale = scenario.wavelength / FOUR_PI
        ris, plain = scenario.ris, scenario.plain_ios

        for k, t in enumerate(grid.times):
            fixed = sum(-np.exp(1j * (TWO_PI * io.doppler * t - io.constant_phase))
                        / io.initial_radio_path for io in plain)
            if scenario.los is not None:
                fixed += np.exp(-1j * TWO_PI * scenario.mobile.max_doppler * t) \
                    / scenario.los.distance
            candidates = []
            for pairing in itertools.permutations(range(2)):
                total = fixed
                for i, target in enumerate(pairing):
                    # the RIS ray is steered onto e^{j(2πf_I t − φ)}, opposite the IO ray
                    io = plain[target]
                    total += np.exp(1j * (TWO_PI * io.doppler * t - io.constant_phase)) \
                        / ris[i].initial_radio_path
                candidates.append(scale * abs(total))
            best = max(candidates)
            self.assertAlmostEqual(result.assignments[k].magnitude / best, 1.0, delta=1e-9)
            self.assertAlmostEqual(trace.magnitude[k] / best, 1.0, delta=1e-9)

    @given(SEEDS, st.integers(0, 10))
    @settings(max_examples=1000, deadline=None)
    def test_same_seed_same_run(self, seed, ris_count):
        first = multi_io_scenario(ris_count, seed)
        self.assertEqual(first, multi_io_scenario(ris_count, seed))
        self.assertTrue(np.array_equal(random_plan(first, SHORT_GRID, seed).phases,
                                       random_plan(first, SHORT_GRID, seed).phases))
        self.assertTrue(np.array_equal(DopplerErrorModel(4.0, seed).draw(10),
                                       DopplerErrorModel(4.0, seed).draw(10)))


class RealisticRisPropertyTest(SimpleTestCase):

    @given(st.lists(st.floats(-50.0, 50.0), min_size=1, max_size=20))
    @settings(max_examples=1000, deadline=None)
    def test_achievable_phases_are_a_fixed_point(self, phases):
        model = RealisticRisModel()
        once = model.achievable(phases)
        twice = model.achievable(once)
        self.assertTrue(np.all(circular_distance(once, twice) <= 1e-12))
        # every achieved phase lies within the hardware range
        relative = np.mod(once - model.phase_min + 1e-12, TWO_PI)
        self.assertTrue(np.all(relative <= model.span + 2e-12))

    @given(st.floats(-50.0, 50.0))
    @settings(max_examples=1000, deadline=None)
    def test_reachable_phases_are_kept(self, phase):
        model = RealisticRisModel()
        relative = math.fmod(phase - model.phase_min, TWO_PI) % TWO_PI
        if relative < model.span - 1e-9:
            self.assertLessEqual(float(circular_distance(model.achievable([phase]), phase)[0]),
                                 1e-12)
