import numpy as np
from django.test import SimpleTestCase

from evaluation.metrics import aggregate_metrics, compute_metrics, confusion_counts, metrics_from_labels


class ComputeMetricsTests(SimpleTestCase):

    def test_hand_computed_case(self):
        m = compute_metrics(tp=8, tn=9, fp=1, fn=2)
        self.assertAlmostEqual(m.sensitivity, 0.8)
        self.assertAlmostEqual(m.specificity, 0.9)
        self.assertAlmostEqual(m.tnr, 0.9)
        self.assertAlmostEqual(m.accuracy, 0.85)
        self.assertAlmostEqual(m.precision, 8 / 9)
        self.assertAlmostEqual(m.f1, 0.8421, places=4)
        self.assertEqual(m.total, 20)

    def test_no_positives_leaves_sensitivity_absent(self):
        m = compute_metrics(tp=0, tn=10, fp=0, fn=0)
        self.assertEqual(m.specificity, 1.0)
        self.assertIsNone(m.sensitivity)
        self.assertIsNone(m.precision)
        self.assertIsNone(m.f1)
        self.assertEqual(m.accuracy, 1.0)

    def test_all_zero_counts(self):
        m = compute_metrics(0, 0, 0, 0)
        self.assertEqual(set(m.absent), {'sensitivity', 'specificity', 'precision', 'f1', 'accuracy', 'tnr'})

    def test_negative_count_rejected(self):
        with self.assertRaises(ValueError):
            compute_metrics(1, -1, 0, 0)

    def test_matches_recount_of_prediction_lists(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = int(rng.integers(0, 30))
            truth = rng.choice(['H', 'NH'], size=n).tolist()
            predicted = rng.choice(['H', 'NH'], size=n).tolist()
            pairs = list(zip(truth, predicted))
            tp = pairs.count(('NH', 'NH'))
            tn = pairs.count(('H', 'H'))
            fp = pairs.count(('H', 'NH'))
            fn = pairs.count(('NH', 'H'))
            m = metrics_from_labels(truth, predicted)
            self.assertEqual((m.tp, m.tn, m.fp, m.fn), (tp, tn, fp, fn))
            self.assertEqual(m.total, n)
            if tp + fn:
                self.assertAlmostEqual(m.sensitivity, tp / (tp + fn))
            if tn + fp:
                self.assertAlmostEqual(m.specificity, tn / (tn + fp))
            if tp:
                precision, recall = tp / (tp + fp), tp / (tp + fn)
                self.assertAlmostEqual(m.f1, 2 * precision * recall / (precision + recall))
            if n:
                self.assertAlmostEqual(m.accuracy, (tp + tn) / n)

    def test_confusion_counts_of_empty_lists(self):
        self.assertEqual(confusion_counts([], []), (0, 0, 0, 0))


class AggregateMetricsTests(SimpleTestCase):

    def test_mean_and_population_sd(self):
        per_seed = [compute_metrics(8, 9, 1, 2), compute_metrics(9, 8, 2, 1)]
        aggregate = aggregate_metrics(per_seed)
        accuracies = [m.accuracy for m in per_seed]
        self.assertEqual(aggregate['accuracy']['mean'], float(np.mean(accuracies)))
        self.assertEqual(aggregate['accuracy']['sd'], float(np.std(accuracies)))
        self.assertEqual(aggregate['accuracy']['n'], 2)

    def test_absent_ratio_is_excluded_and_counted(self):
        per_seed = [compute_metrics(0, 10, 0, 0), compute_metrics(5, 5, 0, 0)]
        with self.assertLogs('evaluation.metrics', 'WARNING'):
            aggregate = aggregate_metrics(per_seed)
        self.assertEqual(aggregate['sensitivity'], {'mean': 1.0, 'sd': 0.0, 'n': 1, 'excluded': 1})
        self.assertEqual(aggregate['specificity']['n'], 2)
