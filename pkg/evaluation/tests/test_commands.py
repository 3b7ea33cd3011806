import json
import tempfile
from io import StringIO
from pathlib import Path

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

TINY_SPACE = {'hidden': [2], 'layers': [1], 'families': ['LSTM'], 'learning_rates': [0.05],
              'head_presets': {'small': [2]}}
SHORT_TRAINING = {'max_epochs': 2, 'patience': 1, 'batch_size': 8}


class EvaluationCommandTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls.tmp.name)
        call_command('synth', '--n-healthy', '4', '--n-nonhealthy', '4', '--seed', '4',
                     '--out', str(cls.root / 'data'), stdout=StringIO())
        cls.space = cls.write(TINY_SPACE, 'space.json')
        cls.training = cls.write(SHORT_TRAINING, 'train.json')

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    @classmethod
    def write(cls, data, name):
        path = cls.root / name
        path.write_text(json.dumps(data))
        return str(path)

    def common(self, *extra):
        return ('--data', str(self.root / 'data'), '--model-space', self.space, '--train-config', self.training,
                '--target-len', '30', *extra)

    def test_loocv_writes_report(self):
        out = self.root / 'report'
        stdout = StringIO()
        call_command('loocv', *self.common('--seeds', '4', '--trials', '1', '--out', str(out)), stdout=stdout)

        for seed in range(4):
            confusion = pd.read_csv(out / f'confusion_seed{seed}.csv', index_col=0)
            self.assertEqual(int(confusion.to_numpy().sum()), 8)
        manifest = json.loads((out / 'run.json').read_text())
        summary = json.loads((out / 'summary.json').read_text())
        self.assertEqual(manifest['subcommand'], 'loocv')
        self.assertEqual(manifest['resolved']['evaluation']['seeds'], 4)
        self.assertEqual(manifest['resolved']['dsp']['target_len'], 30)
        self.assertEqual(len(summary['seeds']), 4)
        self.assertIsNone(summary['holdout']['mean'])
        self.assertIn('8 patients, 4 seeds', stdout.getvalue())
        dataset = summary['dataset']['examples_per_label']
        self.assertEqual(dataset['H']['patients_with_examples'] + dataset['NH']['patients_with_examples'], 8)
        self.assertTrue((out / 'demographics.csv').is_file())

        images = self.root / 'images'
        call_command('report', '--report', str(out), '--data', str(self.root / 'data'), '--patient', 'P0001',
                     '--out', str(images), stdout=StringIO())
        names = {p.name for p in images.iterdir()}
        self.assertIn('filter_response.png', names)
        self.assertIn('heatmap.png', names)
        self.assertEqual(len([n for n in names if n.startswith('segmentation_P0001_')]), 5)

    def test_loocv_summary_is_byte_identical_across_runs(self):
        first, second = self.root / 'run_a', self.root / 'run_b'
        for out in (first, second):
            call_command('loocv', *self.common('--seeds', '2', '--trials', '1', '--out', str(out)),
                         stdout=StringIO())
        for name in ('summary.json', 'metrics.csv', 'heatmap.csv', 'folds.csv'):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)

    def test_compare_ranks_configurations(self):
        space = self.write({**TINY_SPACE, 'hidden': [2, 3]}, 'space2.json')
        out = self.root / 'compare'
        call_command('compare', '--data', str(self.root / 'data'), '--model-space', space,
                     '--train-config', self.training, '--target-len', '30', '--seeds', '1', '--out', str(out),
                     stdout=StringIO())
        table = pd.read_csv(out / 'comparison.csv')
        self.assertEqual(sorted(table['model']), ['LSTM(2,1)', 'LSTM(3,1)'])
        self.assertTrue((out / 'LSTM-2x1-small' / 'summary.json').is_file())

    def test_report_of_trained_model(self):
        model = self.root / 'model'
        call_command('train', '--data', str(self.root / 'data'), '--model-config',
                     self.write({'family': 'LSTM', 'hidden': 2, 'layers': 1, 'head_sizes': [2]}, 'model.json'),
                     '--train-config', self.training, '--out', str(model), stdout=StringIO())
        images = self.root / 'trained'
        call_command('report', '--checkpoint', str(model), '--data', str(self.root / 'data'),
                     '--target-len', '30', '--out', str(images), stdout=StringIO())
        heatmap = pd.read_csv(images / 'prediction' / 'heatmap.csv', index_col=0)
        self.assertEqual(heatmap.shape, (5, 8))

    def test_invalid_search_space_exits_one(self):
        space = self.write({'hidden': [2], 'learning_rates': [0.1], 'learning_rate_range': [1e-4, 1e-2]}, 'bad.json')
        with self.assertRaises(CommandError) as raised:
            call_command('loocv', '--data', str(self.root / 'data'), '--model-space', space,
                         '--out', str(self.root / 'bad'))
        self.assertEqual(raised.exception.returncode, 1)
        self.assertIn('invalid_config', str(raised.exception))

    def test_missing_report_exits_one(self):
        with self.assertRaises(CommandError) as raised:
            call_command('report', '--report', str(self.root / 'nowhere'), '--out', str(self.root / 'x'))
        self.assertEqual(raised.exception.returncode, 1)
        self.assertIn('report_not_found', str(raised.exception))

    def test_checkpoint_needs_data(self):
        with self.assertRaises(CommandError):
            call_command('report', '--checkpoint', 'model.npz', '--out', str(self.root / 'y'))
