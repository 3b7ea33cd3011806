from collections import Counter
from dataclasses import replace

from django.test import SimpleTestCase, tag

from breathing.models import DspConfig
from cohort.models import Dataset, Label
from cohort.synthesis import CohortSpec, generate_cohort
from cohort.tests.factories import make_patient
from evaluation.crossval import compare_architectures, evaluate, holdout_tnr, loocv, plan_folds, prepare_cohort
from evaluation.exceptions import CohortTooSmall, HoldoutNotHealthy, PatientWithoutExamples
from evaluation.models import EvaluationConfig, FoldPlan, HoldoutMode
from evaluation.tests.factories import (
    ONE_TRIAL, SHORT_TRAINING, TINY_SPACE, ConstantModel, label_cohort, level_objective, toy_cohort,
)
from network.models import EncoderFamily
from training.exceptions import LeakageError
from training.fit import fit
from training.models import TrainConfig
from training.prediction import predict_cycles
from training.tests.factories import toy_examples
from tuning.models import SearchConfig, SearchSpace


def labels_of(dataset, ids):
    return Counter(dataset.get(pid).label for pid in ids)


class PlanFoldsTests(SimpleTestCase):

    def test_folds_partition_the_cohort(self):
        cohort = label_cohort(4, 4, n_samples=8)
        plans = plan_folds(cohort, seed=0, validation_fraction=0.25, holdout_ids=('X1',))
        self.assertEqual([p.test_patient_id for p in plans], list(cohort.patient_ids))
        for plan in plans:
            self.assertEqual(sorted(plan.patient_ids), sorted(cohort.patient_ids))
            self.assertEqual(len(plan.val_ids), 2)
            self.assertEqual(labels_of(cohort, plan.val_ids), {Label.HEALTHY: 1, Label.NON_HEALTHY: 1})
            train = labels_of(cohort, plan.train_ids)
            self.assertLessEqual(abs(train[Label.HEALTHY] - train[Label.NON_HEALTHY]), 1)
            self.assertEqual(plan.excluded_holdout_ids, ('X1',))

    def test_small_cohort_is_rejected(self):
        with self.assertRaises(CohortTooSmall):
            plan_folds(label_cohort(2, 1, n_samples=8), seed=0)

    def test_overlapping_plan_is_leakage(self):
        with self.assertRaises(LeakageError):
            FoldPlan(0, 'P1', ('P2', 'P3'), ('P3',))
        with self.assertRaises(LeakageError):
            FoldPlan(0, 'P1', ('P2',), ('P3',), excluded_holdout_ids=('P2',))


class PrepareCohortTests(SimpleTestCase):

    def test_patients_without_cycles_are_left_out(self):
        dataset = Dataset([make_patient('P1'), make_patient('P2', Label.NON_HEALTHY),
                           make_patient('P3', amplitude=0.0)])
        with self.assertLogs('evaluation.crossval', 'WARNING'):
            cohort, examples, left_out = prepare_cohort(dataset, DspConfig(target_len=20))
        self.assertEqual(cohort.patient_ids, ('P1', 'P2'))
        self.assertEqual(left_out, ('P3',))
        self.assertTrue(examples['P1'])
        first = examples['P1'][0]
        self.assertEqual(next(iter(first.scenes.values())).channels.shape, (6, 20))


class LoocvTests(SimpleTestCase):

    def setUp(self):
        self.cohort = label_cohort(4, 4, n_samples=8)
        self.examples = toy_cohort(self.cohort)

    def run_loocv(self, **kwargs):
        return loocv(self.cohort, self.examples, TINY_SPACE, SHORT_TRAINING, ONE_TRIAL,
                     objective=level_objective, **kwargs)

    def test_one_prediction_per_patient(self):
        report = self.run_loocv(seed=3)
        self.assertEqual(sorted(f.plan.test_patient_id for f in report.folds), list(self.cohort.patient_ids))
        self.assertEqual(report.metrics.total, len(self.cohort))
        self.assertEqual(report.metrics.accuracy, 1.0)
        self.assertEqual(report.cycle_metrics.total, 3 * len(self.cohort))
        self.assertEqual(report.confusion, [[4, 0], [0, 4]])
        for fold in report.folds:
            self.assertEqual(len(fold.cycle_probabilities), 3)
            self.assertEqual(fold.best_point['family'], 'LSTM')
            self.assertEqual(fold.plan.seed, 3)

    def test_threads_do_not_change_results(self):
        single = self.run_loocv(seed=1)
        pooled = self.run_loocv(seed=1, threads=3)
        self.assertEqual([f.to_row() for f in single.folds], [f.to_row() for f in pooled.folds])

    def test_patient_without_examples(self):
        del self.examples['N02']
        with self.assertRaises(PatientWithoutExamples):
            self.run_loocv()

    def test_trained_folds(self):
        report = loocv(self.cohort, self.examples, TINY_SPACE, SHORT_TRAINING, ONE_TRIAL, seed=0)
        self.assertEqual(report.metrics.total, 8)
        for fold in report.folds:
            self.assertTrue(0.0 <= fold.confidence <= 1.0)
            self.assertIsNotNone(fold.model)
        self.assertEqual(len(report.trials), 8)


class HoldoutTnrTests(SimpleTestCase):

    def setUp(self):
        self.holdout = toy_examples('H01', Label.HEALTHY) + toy_examples('H02', Label.HEALTHY, seed=1)

    def test_constant_healthy_predictor(self):
        result = holdout_tnr({0: ConstantModel(0.1)}, {0: self.holdout})
        self.assertEqual(result['per_seed'], {0: 1.0})
        self.assertEqual(result['mean'], 1.0)
        self.assertEqual(result['sd'], 0.0)

    def test_constant_nonhealthy_predictor(self):
        self.assertEqual(holdout_tnr({0: ConstantModel(0.9)}, {0: self.holdout})['mean'], 0.0)

    def test_ensemble_averages_members(self):
        result = holdout_tnr({0: [ConstantModel(0.2), ConstantModel(0.6)]}, {0: self.holdout})
        self.assertEqual(result['mean'], 1.0)

    def test_empty_holdout_is_absent(self):
        result = holdout_tnr({}, {0: []})
        self.assertEqual(result, {'per_seed': {0: None}, 'mean': None, 'sd': None})

    def test_nonhealthy_holdout_is_rejected(self):
        with self.assertRaises(HoldoutNotHealthy):
            holdout_tnr({0: ConstantModel(0.1)}, {0: toy_examples('N01', Label.NON_HEALTHY)})


class EvaluateTests(SimpleTestCase):

    def setUp(self):
        self.cohort = label_cohort(6, 4, n_samples=8)
        self.examples = toy_cohort(self.cohort)

    def test_report_over_seeds(self):
        eval_cfg = EvaluationConfig(seeds=2, holdout_mode=HoldoutMode.PER_FOLD_ENSEMBLE)
        report = evaluate(self.cohort, self.examples, TINY_SPACE, SHORT_TRAINING, ONE_TRIAL, eval_cfg,
                          root_seed=5, objective=level_objective)
        self.assertEqual([r.seed for r in report.seeds], [5, 6])
        for seed in report.seeds:
            self.assertEqual(seed.metrics.total, 8)
            self.assertEqual(len(seed.holdout_ids), 2)
            self.assertEqual(seed.holdout_tnr, 1.0)
        self.assertEqual(report.aggregate['accuracy'], {'mean': 1.0, 'sd': 0.0, 'n': 2, 'excluded': 0})
        self.assertEqual(report.holdout['mean'], 1.0)
        self.assertEqual(report.heatmap.shape, (8, 5))
        self.assertTrue(report.heatmap['cycle_4'].isna().all())
        self.assertEqual(report.prediction_sd['median'], 0.0)
        self.assertEqual(report.config['seeds'], [5, 6])

    def test_final_retrain_holdout(self):
        eval_cfg = EvaluationConfig(seeds=1)
        report = evaluate(self.cohort, self.examples, TINY_SPACE, SHORT_TRAINING, ONE_TRIAL, eval_cfg,
                          objective=level_objective)
        tnr = report.seeds[0].holdout_tnr
        self.assertIn(tnr, (0.0, 0.5, 1.0))
        self.assertEqual(report.holdout['per_seed'], {0: tnr})

    def test_aggregate_recomputed_from_per_seed_matrices(self):
        eval_cfg = EvaluationConfig(seeds=3, holdout_mode=HoldoutMode.PER_FOLD_ENSEMBLE)
        report = evaluate(self.cohort, self.examples, TINY_SPACE, SHORT_TRAINING, ONE_TRIAL, eval_cfg,
                          objective=level_objective)
        accuracies = [(m[0][0] + m[1][1]) / sum(map(sum, m)) for m in (s.confusion for s in report.seeds)]
        self.assertEqual(report.aggregate['accuracy']['mean'], sum(accuracies) / len(accuracies))


class CompareArchitecturesTests(SimpleTestCase):

    def test_configurations_ranked_by_validation_score(self):
        cohort = label_cohort(4, 4, n_samples=8)
        space = SearchSpace(hidden=(3, 2), layers=(1,), families=(EncoderFamily.LSTM,), learning_rates=(0.05,),
                            head_presets={'small': (2,)})
        eval_cfg = EvaluationConfig(seeds=1, holdout_mode=HoldoutMode.PER_FOLD_ENSEMBLE)
        table, reports = compare_architectures(cohort, toy_cohort(cohort), space, SHORT_TRAINING, eval_cfg,
                                               objective=level_objective)
        self.assertEqual(table['model'].tolist(), ['LSTM(2,1)', 'LSTM(3,1)'])
        self.assertTrue(table['n_parameters'].is_monotonic_increasing)
        self.assertEqual(set(reports), {'LSTM-2x1-small', 'LSTM-3x1-small'})
        self.assertEqual(table['accuracy_mean'].tolist(), [1.0, 1.0])


def examples_of(examples, patient_ids):
    return [example for pid in patient_ids for example in examples[pid]]


@tag('slow')
class SyntheticCohortTests(SimpleTestCase):
    """End-to-end runs on generated cohorts with a small trained network."""

    space = SearchSpace(hidden=(4, 8), layers=(1,), families=(EncoderFamily.LSTM,),
                        learning_rates=(0.01, 0.02, 0.04), head_presets={'small': (8,)})
    training = TrainConfig(max_epochs=40, patience=8, batch_size=16)
    search = SearchConfig(trials=5, initial_trials=2)
    dsp = DspConfig(target_len=30)

    def cohort_examples(self, dataset):
        cohort, examples, _ = prepare_cohort(dataset, self.dsp)
        return cohort, examples

    def run_cohort(self, separation, seeds=4, search=None, n_healthy=10, n_nonhealthy=10):
        dataset = generate_cohort(CohortSpec(n_healthy=n_healthy, n_nonhealthy=n_nonhealthy,
                                             class_separation=separation, seed=7))
        cohort, examples = self.cohort_examples(dataset)
        return evaluate(cohort, examples, self.space, self.training, search or self.search,
                        EvaluationConfig(seeds=seeds, holdout_mode=HoldoutMode.PER_FOLD_ENSEMBLE, threads=4))

    def test_separable_cohort(self):
        report = self.run_cohort(1.0)
        self.assertGreaterEqual(report.aggregate['accuracy']['mean'], 0.9)
        self.assertLess(report.prediction_sd['median'], 0.15)

    def test_inseparable_cohort_is_near_chance(self):
        report = self.run_cohort(0.0)
        self.assertGreaterEqual(report.aggregate['accuracy']['mean'], 0.35)
        self.assertLessEqual(report.aggregate['accuracy']['mean'], 0.65)

    def test_accuracy_grows_with_separation(self):
        accuracies = [self.run_cohort(separation, seeds=1, search=ONE_TRIAL).aggregate['accuracy']['mean']
                      for separation in (0.0, 0.5, 1.0)]
        self.assertEqual(accuracies, sorted(accuracies))
        self.assertGreater(accuracies[-1], accuracies[0])

    def test_holdout_tnr_tracks_specificity(self):
        report = self.run_cohort(1.0, seeds=2, search=ONE_TRIAL, n_healthy=16, n_nonhealthy=10)
        self.assertTrue(all(len(r.holdout_ids) == 6 for r in report.seeds))
        self.assertLessEqual(abs(report.holdout['mean'] - report.aggregate['specificity']['mean']), 0.15)

    def test_trained_model_scores_every_nh_cycle_above_half(self):
        dataset = generate_cohort(CohortSpec(n_healthy=8, n_nonhealthy=9, class_separation=1.0, seed=3))
        held_out = [p for p in dataset if p.label == Label.NON_HEALTHY][-1]
        cohort, examples = self.cohort_examples(dataset)
        by_label = {label: [p.patient_id for p in cohort if p.label == label and p.patient_id != held_out.patient_id]
                    for label in Label}
        val_ids = by_label[Label.HEALTHY][:2] + by_label[Label.NON_HEALTHY][:2]
        train_ids = [pid for ids in by_label.values() for pid in ids if pid not in val_ids]
        model, _ = fit(examples_of(examples, train_ids), examples_of(examples, val_ids),
                       self.space.model_config(self.space.points()[-1]), replace(self.training, max_epochs=80))
        prediction = predict_cycles(model, held_out, self.dsp)
        self.assertFalse(prediction.flagged)
        self.assertTrue(prediction.probabilities)
        self.assertTrue(all(p > 0.5 for p in prediction.probabilities))
