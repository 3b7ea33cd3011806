import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from cohort.exceptions import ManifestNotFound
from cohort.models import SCENE_ORDER, Dataset
from cohort.storage import GROUND_TRUTH_NAME, MANIFEST_NAME, load_dataset, save_dataset
from cohort.synthesis import CohortSpec, generate_cohort
from cohort.tests.factories import make_patient


class LoadDatasetTests(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.root = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_empty_directory_is_fatal(self):
        with self.assertRaisesMessage(ManifestNotFound, 'manifest not found'):
            load_dataset(self.root)

    def test_single_complete_patient(self):
        save_dataset(Dataset(patients=(make_patient('P1'),)), self.root)
        dataset = load_dataset(self.root)
        self.assertEqual(len(dataset), 1)
        self.assertTrue(dataset.get('P1').trainable)
        self.assertEqual(dataset.diagnostics, ())

    def test_patient_with_four_scenes_is_flagged(self):
        patients = (make_patient('P1'), make_patient('P2', scenes=SCENE_ORDER[:4]))
        save_dataset(Dataset(patients=patients), self.root)
        dataset = load_dataset(self.root)
        self.assertEqual(len(dataset), 2)
        self.assertEqual([p.patient_id for p in dataset.flagged()], ['P2'])
        self.assertEqual([d.code for d in dataset.diagnostics], ['missing_scenes'])

    def test_malformed_signal_file_skips_patient(self):
        save_dataset(Dataset(patients=(make_patient('P1'), make_patient('P2'))), self.root)
        (self.root / 'P2' / 'M1.csv').write_text('t,gx,gy\n0,1,2\n')
        dataset = load_dataset(self.root)
        self.assertEqual(dataset.patient_ids, ('P1',))
        self.assertEqual(dataset.diagnostics[0].patient_id, 'P2')
        self.assertEqual(dataset.diagnostics[0].code, 'bad_header')

    def test_missing_signal_file_and_bad_entry(self):
        save_dataset(Dataset(patients=(make_patient('P1'),)), self.root)
        manifest = json.loads((self.root / MANIFEST_NAME).read_text())
        broken = dict(manifest['patients'][0], patient_id='P2', scenes={'M1': 'nowhere.csv'})
        invalid = dict(manifest['patients'][0], patient_id='P3', label='H', disease_class='AorticAneurysm')
        manifest['patients'] += [broken, invalid]
        (self.root / MANIFEST_NAME).write_text(json.dumps(manifest))
        dataset = load_dataset(self.root)
        codes = {d.patient_id: d.code for d in dataset.diagnostics}
        self.assertEqual(dataset.patient_ids, ('P1',))
        self.assertEqual(codes, {'P2': 'signal_file_missing', 'P3': 'invalid_manifest_entry'})

    def test_malformed_ground_truth_becomes_diagnostic(self):
        save_dataset(generate_cohort(CohortSpec(n_healthy=1, n_nonhealthy=1, seed=3)), self.root)
        (self.root / GROUND_TRUTH_NAME).write_text('{not json')
        dataset = load_dataset(self.root)
        self.assertEqual(len(dataset), 2)
        self.assertEqual(dict(dataset.ground_truth), {})
        self.assertEqual([d.code for d in dataset.diagnostics], ['ground_truth_invalid'])

    def test_ground_truth_of_wrong_shape_is_ignored(self):
        save_dataset(Dataset(patients=(make_patient('P1'),)), self.root)
        (self.root / GROUND_TRUTH_NAME).write_text('[1, 2, 3]')
        dataset = load_dataset(self.root)
        self.assertEqual(dataset.patient_ids, ('P1',))
        self.assertEqual([d.code for d in dataset.diagnostics], ['ground_truth_invalid'])

    def test_scene_path_that_is_a_directory_skips_patient(self):
        save_dataset(Dataset(patients=(make_patient('P1'), make_patient('P2'))), self.root)
        manifest = json.loads((self.root / MANIFEST_NAME).read_text())
        manifest['patients'][1]['scenes']['M1'] = 'P2'
        (self.root / MANIFEST_NAME).write_text(json.dumps(manifest))
        dataset = load_dataset(self.root)
        self.assertEqual(dataset.patient_ids, ('P1',))
        self.assertEqual([(d.patient_id, d.code) for d in dataset.diagnostics],
                         [('P2', 'signal_file_unreadable')])

    def test_non_finite_timestamp_skips_patient(self):
        save_dataset(Dataset(patients=(make_patient('P1'), make_patient('P2'))), self.root)
        path = self.root / 'P2' / 'M3.csv'
        lines = path.read_text().splitlines()
        cells = lines[5].split(',')
        lines[5] = ','.join(['', *cells[1:]])
        path.write_text('\n'.join(lines) + '\n')
        dataset = load_dataset(self.root)
        self.assertEqual(dataset.patient_ids, ('P1',))
        self.assertEqual([(d.patient_id, d.code) for d in dataset.diagnostics], [('P2', 'non_finite')])

    def test_non_finite_channel_skips_patient(self):
        save_dataset(Dataset(patients=(make_patient('P1'), make_patient('P2'))), self.root)
        path = self.root / 'P2' / 'M2.csv'
        lines = path.read_text().splitlines()
        cells = lines[3].split(',')
        cells[2] = 'inf'
        lines[3] = ','.join(cells)
        path.write_text('\n'.join(lines) + '\n')
        dataset = load_dataset(self.root)
        self.assertEqual(dataset.patient_ids, ('P1',))
        self.assertEqual(dataset.diagnostics[0].code, 'non_finite')

    def test_round_trip_is_byte_identical(self):
        dataset = generate_cohort(CohortSpec(n_healthy=1, n_nonhealthy=1, seed=3))
        first, second = self.root / 'a', self.root / 'b'
        save_dataset(dataset, first)
        save_dataset(load_dataset(first), second)
        for path in sorted(first.rglob('*.csv')):
            self.assertEqual(path.read_bytes(), (second / path.relative_to(first)).read_bytes())
        self.assertEqual(json.loads((first / MANIFEST_NAME).read_text()),
                         json.loads((second / MANIFEST_NAME).read_text()))
        self.assertEqual(load_dataset(second).ground_truth.keys(), dataset.ground_truth.keys())
