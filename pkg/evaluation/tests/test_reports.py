import json
import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from breathing.models import DspConfig, FilterSpec
from cohort.models import SCENE_ORDER, DiseaseClass, Label
from cohort.tests.factories import make_patient
from evaluation.crossval import evaluate
from evaluation.exceptions import ReportNotFound
from evaluation.metrics import metrics_from_labels
from evaluation.models import EvaluationConfig, FoldPlan, FoldResult, HoldoutMode, SeedReport
from evaluation.reports import (
    export_heatmap, per_disease_table, plot_filter_response, plot_segmentation, probability_grid, read_heatmap,
    read_report, write_report,
)
from evaluation.tests.factories import (
    ONE_TRIAL, SHORT_TRAINING, TINY_SPACE, label_cohort, level_objective, toy_cohort,
)


def fold(seed, patient_id, truth, disease, predicted):
    return FoldResult(plan=FoldPlan(seed, patient_id, (), ()), truth=truth, disease_class=disease,
                      predicted=predicted, confidence=0.5, cycle_probabilities=(0.5,), best_point={},
                      validation_f1=1.0, n_parameters=1)


def seed_report(seed, folds):
    metrics = metrics_from_labels([f.truth for f in folds], [f.predicted for f in folds])
    return SeedReport(seed, folds, metrics, metrics)


class HeatmapTests(SimpleTestCase):

    def setUp(self):
        self.grid = probability_grid({'A': (0.1, 0.2, 0.3, 0.4, 0.5), 'B': (0.9,), 'C': (0.5, 0.6)},
                                     {'A': 'H', 'B': 'NH', 'C': 'NH'}, k=4)

    def test_layout(self):
        with tempfile.TemporaryDirectory() as tmp:
            table = export_heatmap(self.grid, tmp, k=4)
            lines = (Path(tmp) / 'heatmap.csv').read_text().splitlines()
            self.assertTrue((Path(tmp) / 'heatmap.png').stat().st_size > 0)
        self.assertEqual(table.shape, (5, 3))
        self.assertEqual(list(table.index), ['cycle_1', 'cycle_2', 'cycle_3', 'cycle_4', 'ground_truth'])
        self.assertEqual(list(table.columns), ['A', 'B', 'C'])
        self.assertEqual(len(lines), 6)
        self.assertEqual(lines[-1], 'ground_truth,0.0,1.0,1.0')

    def test_missing_cycle_is_a_gap(self):
        with tempfile.TemporaryDirectory() as tmp:
            export_heatmap(self.grid, tmp, k=4)
            lines = (Path(tmp) / 'heatmap.csv').read_text().splitlines()
            restored = read_heatmap(tmp)
        self.assertEqual(lines[2], 'cycle_2,0.2,,0.6')
        self.assertTrue(math.isnan(restored.loc['cycle_2', 'B']))
        self.assertEqual(restored.loc['cycle_1', 'B'], 0.9)

    def test_probabilities_beyond_k_are_dropped(self):
        self.assertEqual(self.grid.loc['A'].tolist(), [0.1, 0.2, 0.3, 0.4, 0.0])


class PerDiseaseTableTests(SimpleTestCase):

    def test_rows_sum_to_confusion_totals(self):
        folds = [
            fold(0, 'H1', 'H', 'None', 'H'),
            fold(0, 'H2', 'H', 'None', 'NH'),
            fold(0, 'N1', 'NH', 'CoronaryArteryDisease', 'NH'),
            fold(0, 'N2', 'NH', 'ValvularInsufficiency', 'H'),
        ]
        report = seed_report(0, folds)
        table = per_disease_table([report]).set_index('disease_class')
        self.assertEqual(table.loc['None', 'n_patients'], report.metrics.tn + report.metrics.fp)
        nonhealthy = table.drop(index=DiseaseClass.NONE.value)
        self.assertEqual(nonhealthy['n_patients'].sum(), report.metrics.tp + report.metrics.fn)
        self.assertEqual(nonhealthy['misclassified_seed0'].sum(), report.metrics.fn)
        self.assertEqual(table.loc['None', 'accuracy_mean'], 0.5)
        self.assertNotIn(DiseaseClass.AORTIC_ANEURYSM.value, table.index)


class WriteReportTests(SimpleTestCase):

    def run_evaluation(self):
        cohort = label_cohort(6, 4, n_samples=8)
        return evaluate(cohort, toy_cohort(cohort), TINY_SPACE, SHORT_TRAINING, ONE_TRIAL,
                        EvaluationConfig(seeds=2, holdout_mode=HoldoutMode.PER_FOLD_ENSEMBLE),
                        objective=level_objective)

    def test_report_directory(self):
        with tempfile.TemporaryDirectory() as tmp:
            write_report(self.run_evaluation(), tmp)
            root = Path(tmp)
            names = {p.name for p in root.iterdir()}
            metrics = (root / 'metrics.csv').read_text().splitlines()
            folds = (root / 'folds.csv').read_text().splitlines()
            trial_logs = list((root / 'trials').iterdir())
            summary = read_report(tmp)
        self.assertTrue({'confusion_seed0.csv', 'confusion_seed1.csv', 'metrics.csv', 'per_disease.csv',
                         'folds.csv', 'heatmap.csv', 'heatmap.png', 'summary.json'} <= names)
        self.assertEqual(len(metrics), 1 + 2 + 2)
        self.assertEqual(len(folds), 1 + 16)
        self.assertEqual(len(trial_logs), 16)
        self.assertEqual(summary['aggregate']['accuracy']['mean'], 1.0)
        self.assertEqual(summary['seeds'][0]['confusion'], [[4, 0], [0, 4]])
        self.assertEqual(summary['holdout']['per_seed'], {'0': 1.0, '1': 1.0})

    def test_summary_is_deterministic(self):
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            write_report(self.run_evaluation(), first)
            write_report(self.run_evaluation(), second)
            self.assertEqual((Path(first) / 'summary.json').read_text(), (Path(second) / 'summary.json').read_text())
            self.assertEqual(json.loads((Path(first) / 'summary.json').read_text())['config']['seeds'], [0, 1])

    def test_missing_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ReportNotFound):
                read_report(tmp)


class FigureTests(SimpleTestCase):

    def test_filter_response_and_segmentation(self):
        recording = make_patient(label=Label.HEALTHY).recordings[SCENE_ORDER[0]]
        with tempfile.TemporaryDirectory() as tmp:
            response = plot_filter_response(FilterSpec(0.7, 50.0), Path(tmp) / 'response.png')
            overlay = plot_segmentation(recording, DspConfig(), Path(tmp) / 'overlay.png')
            self.assertGreater(response.stat().st_size, 0)
            self.assertGreater(overlay.stat().st_size, 0)
