# Django
from django.test import SimpleTestCase

# Python
import math

import numpy as np

# Local
from ris_sim.control import plan_align_to_los
from ris_sim.envelope import (
    FOUR_PI, ElementWiseRis, EnvelopeTrace, PhasePlan, element_wise_synthesize,
    held_sample_indices, magnitude_db, magnitude_surface, max_min_magnitude,
    stale_phase_magnitude, synthesize, two_ray_magnitude_closed_form,
)
from ris_sim.exceptions import ContractError, DomainError
from ris_sim.geometry import InteractorKind, LosPath, SamplingGrid, Scenario
from ris_sim.presets import REFERENCE_CARRIER, two_io_scenario, two_ray_scenario

SCALE = REFERENCE_CARRIER.wavelength / FOUR_PI


def route_grid(scenario, wavelengths=6, fft_size=256):
    return SamplingGrid.for_route(scenario.carrier, scenario.mobile, wavelengths,
                                  fft_size=fft_size)


class MagnitudeConventionTest(SimpleTestCase):

    def test_db_is_ten_log_of_the_magnitude(self):
        self.assertAlmostEqual(float(magnitude_db(10.0)), 10.0, places=12)
        self.assertAlmostEqual(float(magnitude_db(8.0)), 9.0309, places=4)

    def test_zero_magnitude_is_minus_infinity(self):
        self.assertEqual(float(magnitude_db(0.0)), float('-inf'))


class PhasePlanTest(SimpleTestCase):

    def test_phases_are_wrapped(self):
        plan = PhasePlan.from_phases([[-math.pi / 2, 3 * math.pi]])
        np.testing.assert_allclose(plan.phases, [[1.5 * math.pi, math.pi]], rtol=0, atol=1e-12)

    def test_plan_is_read_only(self):
        plan = PhasePlan.zeros(2, 4)
        with self.assertRaises(ValueError):
            plan.phases[0, 0] = 1.0

    def test_amplitude_must_lie_in_the_unit_interval(self):
        with self.assertRaises(ContractError):
            PhasePlan.from_phases([[0.0]], amplitude=0.0)
        with self.assertRaises(ContractError):
            PhasePlan.from_phases([[0.0]], amplitude=1.5)

    def test_non_finite_phase_is_rejected(self):
        with self.assertRaises(ContractError):
            PhasePlan.from_phases([[float('nan')]])

    def test_empty_plan(self):
        plan = PhasePlan.empty(5)
        self.assertEqual((plan.ris_count, plan.sample_count), (0, 5))

    def test_plans_compare_by_identity(self):
        plan = PhasePlan.zeros(2, 4)
        self.assertEqual(plan, plan)
        self.assertNotEqual(plan, PhasePlan.zeros(2, 4))
        self.assertEqual(len({plan, plan.with_amplitude(0.5)}), 2)


class SynthesisTest(SimpleTestCase):

    def setUp(self):
        self.scenario = two_ray_scenario(1500.0, 500.0, drop_constant_phases=True)
        self.grid = route_grid(self.scenario)

    def test_los_only_trace_is_flat(self):
        scenario = Scenario(REFERENCE_CARRIER, self.scenario.mobile, LosPath(1000.0))
        trace = synthesize(scenario, PhasePlan.empty(self.grid.sample_count), self.grid)
        np.testing.assert_allclose(trace.magnitude, SCALE / 1000.0, rtol=1e-12)

    def test_two_ray_magnitude_at_time_zero(self):
        """
        With the constant phases dropped the reflected ray starts opposite the LOS ray,
        so |r(0)| = λ/4π·(1/1500 − 1/2500) = 2.1221e−6.
        """
        trace = synthesize(self.scenario, PhasePlan.empty(self.grid.sample_count), self.grid)
        self.assertAlmostEqual(trace.magnitude[0] / 2.1221e-6, 1.0, delta=1e-4)

    def test_two_ray_trace_matches_the_closed_form(self):
        trace = synthesize(self.scenario, PhasePlan.empty(self.grid.sample_count), self.grid)
        expected = two_ray_magnitude_closed_form(
            1500.0, 500.0, self.scenario.mobile.max_doppler, REFERENCE_CARRIER.wavelength,
            self.grid.times)
        np.testing.assert_allclose(trace.magnitude, expected, rtol=1e-12)

    def test_time_offset_shifts_the_trace(self):
        later = synthesize(self.scenario, PhasePlan.empty(self.grid.sample_count), self.grid,
                           t0=self.grid.sample_interval)
        trace = synthesize(self.scenario, PhasePlan.empty(self.grid.sample_count), self.grid)
        np.testing.assert_allclose(later.magnitude[:-1], trace.magnitude[1:], rtol=1e-9)

    def test_plan_shape_must_match(self):
        scenario = two_ray_scenario(1500.0, 500.0, InteractorKind.RIS)
        with self.assertRaises(ContractError):
            synthesize(scenario, PhasePlan.zeros(1, 3), self.grid)

    def test_trace_length_must_match_the_grid(self):
        with self.assertRaises(ContractError):
            EnvelopeTrace(np.zeros(3), self.grid)

    def test_traces_compare_by_identity(self):
        trace = synthesize(self.scenario, PhasePlan.empty(self.grid.sample_count), self.grid)
        again = synthesize(self.scenario, PhasePlan.empty(self.grid.sample_count), self.grid)
        self.assertEqual(trace, trace)
        self.assertNotEqual(trace, again)


class ClosedFormTest(SimpleTestCase):

    def test_max_and_min_for_1500_500(self):
        """λ/4π·(1/1500 + 1/2500) = 8.4883e−6 is the best a co-phased reflector can do."""
        high, low = max_min_magnitude(1500.0, 500.0, REFERENCE_CARRIER.wavelength)
        self.assertAlmostEqual(high / 8.4883e-6, 1.0, delta=1e-4)
        self.assertAlmostEqual(low / 2.1221e-6, 1.0, delta=1e-4)

    def test_out_phasing_depth_for_1750_250(self):
        high, low = max_min_magnitude(1750.0, 250.0, REFERENCE_CARRIER.wavelength)
        self.assertAlmostEqual(high / low, 8.0, places=9)
        self.assertAlmostEqual(2 * float(magnitude_db(high / low)), 18.0618, places=4)

    def test_closed_form_reaches_its_maximum_at_a_quarter_period(self):
        # 4π·f_D·t = π at t = 2.5 ms for f_D = 100 Hz
        value = two_ray_magnitude_closed_form(1500.0, 500.0, 100.0, 0.1, 2.5e-3)
        self.assertAlmostEqual(float(value) / 8.4883e-6, 1.0, delta=1e-4)

    def test_stale_phase_without_delay_is_the_maximum(self):
        high, _ = max_min_magnitude(1500.0, 500.0, 0.1)
        self.assertAlmostEqual(float(stale_phase_magnitude(1500.0, 500.0, 500.0, 0.1, 0.0)),
                               high, delta=1e-18)

    def test_stale_phase_rejects_negative_delay(self):
        with self.assertRaises(DomainError):
            stale_phase_magnitude(1500.0, 500.0, 500.0, 0.1, -1e-6)


class MagnitudeSurfaceTest(SimpleTestCase):

    def setUp(self):
        self.scenario = two_io_scenario(InteractorKind.RIS, InteractorKind.PLAIN_IO)
        self.grid = route_grid(self.scenario)

    def test_each_row_is_a_constant_phase_trace(self):
        thetas = np.array([0.0, 1.0, 4.0])
        surface = magnitude_surface(self.scenario, self.grid, thetas)
        self.assertEqual(surface.shape, (3, self.grid.sample_count))
        for row, theta in enumerate(thetas):
            plan = PhasePlan.from_phases(np.full((1, self.grid.sample_count), theta))
            trace = synthesize(self.scenario, plan, self.grid)
            np.testing.assert_allclose(surface[row], trace.magnitude, rtol=1e-12)

    def test_needs_a_single_ris(self):
        with self.assertRaises(ContractError):
            magnitude_surface(two_io_scenario(), self.grid, [0.0])


class ElementWiseRisTest(SimpleTestCase):
    """
    An 8×8 surface with a large element gain replaces the two-ray reflector at
    d_LOS = 1500 m, d1 = 500 m.
    """

    def setUp(self):
        self.scenario = two_ray_scenario(1500.0, 500.0, InteractorKind.RIS)
        self.grid = route_grid(self.scenario)
        self.ris = ElementWiseRis(64, 1e3)

    def element_gain(self):
        times = self.grid.times
        speed = self.scenario.mobile.speed
        return 0.01 * 1e3 / (FOUR_PI ** 2 * 2000.0 * (500.0 - speed * times))

    def test_aligned_elements_add_coherently_to_the_los_ray(self):
        phases = self.ris.alignment_phases(1500.0, 500.0, self.scenario.mobile.speed,
                                           self.grid.times, REFERENCE_CARRIER.wavelength)
        trace = element_wise_synthesize(self.scenario, self.ris, self.grid, phases)
        expected = SCALE / 1500.0 + 64 * self.element_gain()
        np.testing.assert_allclose(trace.magnitude, expected, rtol=1e-9)

    def test_alignment_removes_the_fade(self):
        phases = self.ris.alignment_phases(1500.0, 500.0, self.scenario.mobile.speed,
                                           self.grid.times, REFERENCE_CARRIER.wavelength)
        aligned = element_wise_synthesize(self.scenario, self.ris, self.grid, phases).magnitude
        passive = element_wise_synthesize(self.scenario, self.ris, self.grid).magnitude
        self.assertGreater(np.ptp(passive), 10 * np.ptp(aligned))

    def test_single_element_matches_the_aligned_reflector(self):
        """
        One element whose gain equals the two-ray reflector's path loss at t = 0
        reproduces the aligned single-RIS envelope λ/4π·(1/1500 + 1/2500); only
        its 1/(d1 − Vt) spreading drifts along the 6λ route.
        """
        ris = ElementWiseRis(1, FOUR_PI * 2000.0 * 500.0 / (REFERENCE_CARRIER.wavelength * 2500.0))
        phases = ris.alignment_phases(1500.0, 500.0, self.scenario.mobile.speed,
                                      self.grid.times, REFERENCE_CARRIER.wavelength)
        element = element_wise_synthesize(self.scenario, ris, self.grid, phases).magnitude
        plan = plan_align_to_los(self.scenario, self.grid)
        reflector = synthesize(self.scenario, plan, self.grid).magnitude
        self.assertAlmostEqual(element[0] / reflector[0], 1.0, delta=1e-9)
        np.testing.assert_allclose(element, reflector, rtol=1e-3)

    def test_element_offsets_are_centred(self):
        offsets = self.ris.element_offsets(REFERENCE_CARRIER.wavelength)
        self.assertEqual(offsets.shape, (64, 2))
        np.testing.assert_allclose(offsets.mean(axis=0), 0.0, atol=1e-15)

    def test_mobile_reaching_the_surface_is_rejected(self):
        scenario = two_ray_scenario(1500.0, 0.3, InteractorKind.RIS)
        with self.assertRaises(DomainError):
            element_wise_synthesize(scenario, self.ris, route_grid(scenario))

    def test_needs_a_two_ray_scenario(self):
        with self.assertRaises(ContractError):
            element_wise_synthesize(two_io_scenario(), self.ris, self.grid)

    def test_invalid_surfaces(self):
        with self.assertRaises(DomainError):
            ElementWiseRis(0, 1.0)
        with self.assertRaises(DomainError):
            ElementWiseRis(4, 0.0)


class HeldSampleIndicesTest(SimpleTestCase):

    def test_every_sample_points_at_its_last_update(self):
        self.assertEqual(held_sample_indices(10, 4).tolist(), [0, 0, 0, 0, 4, 4, 4, 4, 8, 8])

    def test_unit_hold_is_the_identity(self):
        self.assertEqual(held_sample_indices(5, 1).tolist(), [0, 1, 2, 3, 4])

    def test_zero_hold_is_rejected(self):
        with self.assertRaises(DomainError):
            held_sample_indices(5, 0)
