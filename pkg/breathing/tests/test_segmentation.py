import numpy as np
from django.test import SimpleTestCase

from breathing.exceptions import IncompleteSession, RecordingTooShort
from breathing.filters import lowpass_fft, lowpass_fft_reflect
from breathing.models import DspConfig, PeakSet
from breathing.segmentation import (
    preprocess_patient, scene_peaks, segment_patient, segmentation_iou, trim_transient, window_cycles,
)
from cohort.models import GYRO_Y, SCENE_ORDER, Label, PatientRecord, RawRecording, ScenePosition
from cohort.synthesis import CohortSpec, generate_cohort
from cohort.tests.factories import make_patient, sine_recording

# gy = -cos(pi t / 2): maxima at t = 2, 6, 10, ... s
PHASE = -np.pi / 2


class TrimTransientTests(SimpleTestCase):

    def test_trim_five_seconds(self):
        self.assertEqual(trim_transient(sine_recording(ScenePosition.M1), 5.0).n_samples, 750)

    def test_zero_trim_is_identity(self):
        recording = sine_recording(ScenePosition.M1)
        np.testing.assert_array_equal(trim_transient(recording, 0.0).signals, recording.signals)

    def test_too_short(self):
        with self.assertRaisesMessage(RecordingTooShort, 'recording shorter than transient window'):
            trim_transient(sine_recording(ScenePosition.M1, n_samples=200), 5.0)


class WindowCyclesTests(SimpleTestCase):

    def test_windows_between_maxima(self):
        recording = sine_recording(ScenePosition.L1)
        cycles = window_cycles(recording, PeakSet(maxima=(50, 250, 450), minima=(150, 350)))
        self.assertEqual([c.source_window for c in cycles], [(50, 250), (250, 450)])
        for cycle in cycles:
            self.assertEqual(cycle.channels.shape, (6, 300))
            self.assertEqual(cycle.phase_bounds, 150)

    def test_fewer_than_two_maxima(self):
        self.assertEqual(window_cycles(sine_recording(ScenePosition.L1), PeakSet(maxima=(50,))), ())

    def test_windows_disjoint_and_ordered(self):
        recording = trim_transient(sine_recording(ScenePosition.T1, rate_hz=0.3), 5.0)
        _, peaks = scene_peaks(recording, DspConfig())
        windows = [c.source_window for c in window_cycles(recording, peaks)]
        for (_, end), (start, _) in zip(windows, windows[1:]):
            self.assertLessEqual(end, start)


class PreprocessPatientTests(SimpleTestCase):
    cfg = DspConfig()

    def test_noiseless_patient_yields_three_examples(self):
        patient = make_patient(phase=PHASE)
        examples = preprocess_patient(patient, self.cfg)
        self.assertEqual(len(examples), 3)
        for k, example in enumerate(examples):
            self.assertEqual(example.cycle_index, k)
            self.assertEqual(example.patient_id, patient.patient_id)
            for scene in SCENE_ORDER:
                cycle = example.scenes[scene]
                self.assertEqual(cycle.channels.shape, (6, 300))
                self.assertTrue(np.all(np.isfinite(cycle.channels)))

    def test_whole_periods_give_exact_windows(self):
        # 16 s after trimming is four full periods, so the circular filter is exact.
        examples = preprocess_patient(make_patient(phase=PHASE, n_samples=1050), self.cfg)
        expected = [(300, 500), (500, 700), (700, 900)]
        self.assertEqual(len(examples), 3)
        for example, (start, end) in zip(examples, expected):
            start_found, end_found = example.scenes[ScenePosition.M1].source_window
            self.assertLessEqual(abs(start_found - start), 1)
            self.assertLessEqual(abs(end_found - end), 1)

    def test_filter_follows_edge_mode(self):
        recording = trim_transient(sine_recording(ScenePosition.M1, phase=PHASE), 5.0)
        spec = self.cfg.filter_spec(recording.sample_rate_hz)
        circular, _ = scene_peaks(recording, self.cfg)
        reflected, _ = scene_peaks(recording, DspConfig(reflect_edges=True))
        np.testing.assert_allclose(circular, lowpass_fft(recording.signals[:, GYRO_Y], spec), atol=1e-12)
        np.testing.assert_allclose(reflected, lowpass_fft_reflect(recording.signals[:, GYRO_Y], spec), atol=1e-12)
        self.assertGreater(np.max(np.abs(circular - reflected)), 1e-3)

    def test_min_rule_over_scenes(self):
        lengths = dict(zip(SCENE_ORDER, (1200, 1400, 1200, 1600, 1200)))
        recordings = {scene: sine_recording(scene, n_samples=n, phase=PHASE) for scene, n in lengths.items()}
        patient = PatientRecord(patient_id='P1', label=Label.HEALTHY, disease_class='None', age=50,
                                sex='M', height_cm=175, weight_kg=80, recordings=recordings)
        segmentation = segment_patient(patient, self.cfg)
        self.assertEqual(list(segmentation.cycles_per_scene.values()), [4, 5, 4, 6, 4])
        self.assertEqual(len(segmentation.examples), 4)

    def test_flat_scene_flags_patient(self):
        patient = make_patient(phase=PHASE)
        recordings = dict(patient.recordings)
        recordings[ScenePosition.RX1] = RawRecording.from_signals('Rx1', 50.0, np.ones((1000, 6)))
        flat = PatientRecord(**{**patient.metadata(), 'recordings': recordings})
        segmentation = segment_patient(flat, self.cfg)
        self.assertTrue(segmentation.flagged)
        self.assertEqual(segmentation.examples, ())

    def test_incomplete_session(self):
        with self.assertRaises(IncompleteSession):
            preprocess_patient(make_patient(scenes=SCENE_ORDER[:4]), self.cfg)

    def test_synthetic_windows_match_ground_truth(self):
        spec = CohortSpec(n_healthy=4, n_nonhealthy=4, noise_std=0.005, seed=21,
                          breath_rate_hz={'H': (0.25, 0.25), 'NH': (0.25, 0.25)})
        dataset = generate_cohort(spec)
        scores = []
        for patient in dataset:
            truth = dataset.ground_truth[patient.patient_id]
            for example in preprocess_patient(patient, self.cfg):
                for scene in SCENE_ORDER:
                    window = example.scenes[scene].source_window
                    scores.extend(segmentation_iou([window], truth[scene.value]))
        self.assertTrue(scores)
        self.assertGreaterEqual(np.mean(np.asarray(scores) >= 0.8), 0.9)


class SegmentationIouTests(SimpleTestCase):

    def test_perfect_and_partial_overlap(self):
        self.assertEqual(segmentation_iou([(0, 100)], (0, 100, 200)), [1.0])
        self.assertAlmostEqual(segmentation_iou([(50, 150)], (0, 100, 200))[0], 1 / 3)
