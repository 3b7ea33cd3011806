import numpy as np
from django.test import SimpleTestCase
from scipy import fft, stats

from cohort.models import SCENE_ORDER, GYRO_Y, Label, ScenePosition
from cohort.synthesis import (
    CohortSpec, cycle_boundaries, disease_counts, generate_cohort, respiratory_waveform,
)
from screening.exceptions import ConfigurationError


def fixed_rate(rate):
    return {Label.HEALTHY: (rate, rate), Label.NON_HEALTHY: (rate, rate)}


class CohortSpecTests(SimpleTestCase):

    def test_rejects_out_of_range_separation(self):
        with self.assertRaises(ConfigurationError):
            CohortSpec(class_separation=1.5)

    def test_rejects_non_positive_range(self):
        with self.assertRaises(ConfigurationError):
            CohortSpec(breath_rate_hz={'H': (0.0, 0.3), 'NH': (0.2, 0.3)})

    def test_string_keys_are_normalized(self):
        spec = CohortSpec(breath_rate_hz={'H': (0.2, 0.3), 'NH': (0.25, 0.25)})
        self.assertEqual(spec.breath_rate_hz[Label.NON_HEALTHY], (0.25, 0.25))


class GenerateCohortTests(SimpleTestCase):

    def test_deterministic(self):
        spec = CohortSpec(n_healthy=2, n_nonhealthy=2, seed=1)
        first, second = generate_cohort(spec), generate_cohort(spec)
        for a, b in zip(first, second):
            self.assertEqual(a.metadata(), b.metadata())
            for scene in SCENE_ORDER:
                np.testing.assert_array_equal(a.recordings[scene].signals, b.recordings[scene].signals)

    def test_zero_patients_is_empty(self):
        self.assertEqual(len(generate_cohort(CohortSpec(n_healthy=0, n_nonhealthy=0))), 0)

    def test_scene_length_and_labels(self):
        dataset = generate_cohort(CohortSpec(n_healthy=3, n_nonhealthy=4, seed=2))
        self.assertEqual(dataset.count(Label.HEALTHY), 3)
        self.assertEqual(dataset.count(Label.NON_HEALTHY), 4)
        for patient in dataset:
            self.assertTrue(patient.trainable)
            for recording in patient.recordings.values():
                self.assertEqual(recording.n_samples, 1000)
            self.assertEqual(set(dataset.ground_truth[patient.patient_id]), {s.value for s in SCENE_ORDER})

    def test_fundamental_after_transient(self):
        spec = CohortSpec(n_healthy=1, n_nonhealthy=1, noise_std=0.0, breath_rate_hz=fixed_rate(0.25), seed=5)
        for patient in generate_cohort(spec):
            for recording in patient.recordings.values():
                gy = recording.signals[250:, GYRO_Y]
                n_fft = 100 * 50
                spectrum = np.abs(fft.rfft(gy - gy.mean(), n=n_fft))
                peak = fft.rfftfreq(n_fft, d=1 / 50)[np.argmax(spectrum)]
                self.assertAlmostEqual(peak, 0.25, delta=0.011)

    def test_accel_carries_gravity(self):
        patient = generate_cohort(CohortSpec(n_healthy=1, n_nonhealthy=0, seed=4)).patients[0]
        az = patient.recordings[ScenePosition.M1].accel[250:, 2]
        self.assertGreater(az.mean(), 9.0)

    def test_zero_separation_classes_indistinguishable(self):
        spec = CohortSpec(n_healthy=20, n_nonhealthy=20, class_separation=0.0, seed=12)
        dataset = generate_cohort(spec)
        amplitude = {label: [] for label in Label}
        for patient in dataset:
            gy = patient.recordings[ScenePosition.T1].signals[250:, GYRO_Y]
            amplitude[patient.label].append(np.ptp(gy))
        result = stats.mannwhitneyu(amplitude[Label.HEALTHY], amplitude[Label.NON_HEALTHY])
        self.assertGreater(result.pvalue, 0.01)


class WaveformTests(SimpleTestCase):

    def test_boundaries_are_waveform_maxima(self):
        rate, phase0, ratio = 0.25, 1.0, 0.65
        t = np.arange(1000) / 50
        wave = respiratory_waveform(2 * np.pi * rate * t + phase0, ratio, 0.1)
        for index in cycle_boundaries(rate, phase0, ratio, 1000, 50.0):
            lo, hi = max(index - 25, 0), min(index + 26, 1000)
            self.assertLessEqual(abs(lo + np.argmax(wave[lo:hi]) - index), 1)

    def test_disease_counts_largest_remainder(self):
        counts = disease_counts(45, {'a': 32, 'b': 17, 'c': 2, 'd': 5})
        self.assertEqual(sum(counts.values()), 45)
        self.assertEqual(counts['a'], 26)
