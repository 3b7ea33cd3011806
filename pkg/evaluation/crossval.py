"""
Patient-level leave-one-out evaluation.

For every undersampling seed the balanced cohort is split leave-one-patient-
out; the remaining patients are divided into training and validation parts
stratified by label, a model is selected by Bayesian search on them and the
held-out patient is predicted. Every example read goes through a
:class:`~training.permissions.SplitGuard` that knows each patient's split.
"""
import logging
from dataclasses import asdict, replace

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.model_selection import LeaveOneOut

from breathing.segmentation import segment_patient
from cohort.models import Label
from evaluation.exceptions import CohortTooSmall, HoldoutNotHealthy, PatientWithoutExamples
from evaluation.metrics import aggregate_metrics, metrics_from_labels
from evaluation.models import EvalReport, FoldPlan, FoldResult, HoldoutMode, SeedReport
from evaluation.reports import per_disease_table, prediction_grid, prediction_spread
from evaluation.sampling import duplicate_holdouts, undersample
from training.fit import fit
from training.models import AggregationRule, Split
from training.permissions import PREDICT, SplitGuard
from training.prediction import THRESHOLD, cycle_probabilities, predict_patient
from training.splits import stratified_split
from tuning.models import SearchConfig, SearchPoint
from tuning.search import run_search

logger = logging.getLogger(__name__)

MIN_PATIENTS = 4


def segment_cohort(dataset, dsp_cfg):
    """``patient_id -> PatientSegmentation`` for every trainable patient."""
    return {patient.patient_id: segment_patient(patient, dsp_cfg) for patient in dataset.trainable()}


def prepare_cohort(dataset, dsp_cfg, segmentations=None):
    """
    Segment every trainable patient. Returns the dataset restricted to
    patients with at least one example, the ``patient_id -> examples`` map
    and the ids of patients left out.
    """
    if segmentations is None:
        segmentations = segment_cohort(dataset, dsp_cfg)
    examples, left_out = {}, [p.patient_id for p in dataset.flagged()]
    for patient in dataset.trainable():
        segmentation = segmentations[patient.patient_id]
        if segmentation.flagged:
            left_out.append(patient.patient_id)
            continue
        examples[patient.patient_id] = segmentation.examples
    if left_out:
        logger.warning('cohort.left_out patients=%s', ','.join(sorted(left_out)))
    return dataset.subset(examples), examples, tuple(sorted(left_out))


def fold_seed(seed, index):
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _gather(examples, patient_ids):
    return [e for pid in patient_ids for e in examples[pid]]


def plan_folds(balanced, seed, validation_fraction=0.25, holdout_ids=()):
    ids = list(balanced.patient_ids)
    if len(ids) < MIN_PATIENTS:
        raise CohortTooSmall(len(ids), MIN_PATIENTS)
    labels = {p.patient_id: Label(p.label).value for p in balanced}
    plans = []
    for rest, (test,) in LeaveOneOut().split(ids):
        rest_ids = [ids[i] for i in rest]
        train_ids, val_ids = stratified_split(rest_ids, [labels[pid] for pid in rest_ids],
                                              validation_fraction, seed=seed)
        plans.append(FoldPlan(seed, ids[test], train_ids, val_ids, tuple(holdout_ids)))
    return plans


def fold_guard(plan):
    return SplitGuard({
        Split.TRAIN: plan.train_ids,
        Split.VALIDATION: plan.val_ids,
        Split.TEST: [plan.test_patient_id],
        Split.HOLDOUT: plan.excluded_holdout_ids,
    })


def run_fold(plan, index, balanced, examples, space, train_cfg, search_cfg, objective=None):
    guard = fold_guard(plan)
    train, val = _gather(examples, plan.train_ids), _gather(examples, plan.val_ids)
    fold_cfg = replace(train_cfg, seed=fold_seed(plan.seed, index))
    trials = []
    best = run_search(train, val, space, train_cfg=fold_cfg, search_cfg=search_cfg,
                      objective=objective, guard=guard, history=trials)
    model = best.model
    if model is None:
        model, _ = fit(train, val, space.model_config(best.point), fold_cfg, guard=guard)

    test = guard.access(examples[plan.test_patient_id], PREDICT)
    probabilities = cycle_probabilities(model, test)[plan.test_patient_id]
    prediction = predict_patient(probabilities, fold_cfg.aggregation)
    patient = balanced.get(plan.test_patient_id)
    logger.info('fold.done seed=%s patient=%s prob=%.4f predicted=%s truth=%s model=%s',
                plan.seed, plan.test_patient_id, prediction.confidence, prediction.label,
                patient.label.value, best.point.label)
    result = FoldResult(
        plan=plan,
        truth=patient.label.value,
        disease_class=patient.disease_class.value,
        predicted=prediction.label,
        confidence=prediction.confidence,
        cycle_probabilities=probabilities,
        best_point=best.point.to_dict(),
        validation_f1=best.objective,
        n_parameters=best.n_parameters,
        model=model,
    )
    return result, trials


def loocv(balanced, examples, model_space, train_cfg, search_cfg, seed=0, validation_fraction=0.25,
          holdout_ids=(), threads=1, objective=None):
    """
    One LOOCV pass over ``balanced``: one test prediction per patient plus
    the patient-level and cycle-level confusion counts of this seed.
    """
    for patient_id in balanced.patient_ids:
        if not examples.get(patient_id):
            raise PatientWithoutExamples(patient_id)
    plans = plan_folds(balanced, seed, validation_fraction, holdout_ids)
    outputs = Parallel(n_jobs=threads, prefer='threads')(
        delayed(run_fold)(plan, index, balanced, examples, model_space, train_cfg, search_cfg, objective)
        for index, plan in enumerate(plans)
    )
    folds = [fold for fold, _ in outputs]
    metrics = metrics_from_labels([f.truth for f in folds], [f.predicted for f in folds])
    if metrics.total != len(balanced):
        raise AssertionError(f'confusion total {metrics.total} != cohort size {len(balanced)}')

    cycle_truth, cycle_pred = [], []
    for fold in folds:
        for probability in fold.cycle_probabilities:
            cycle_truth.append(fold.truth)
            cycle_pred.append(Label.NON_HEALTHY.value if probability >= THRESHOLD else Label.HEALTHY.value)
    report = SeedReport(
        seed=seed,
        folds=folds,
        metrics=metrics,
        cycle_metrics=metrics_from_labels(cycle_truth, cycle_pred),
        holdout_ids=tuple(holdout_ids),
        trials=[(fold.plan.test_patient_id, trials) for fold, trials in outputs],
    )
    logger.info('loocv.done seed=%s patients=%d accuracy=%s', seed, len(folds), metrics.accuracy)
    return report


def final_model(balanced, examples, point, space, train_cfg, seed, validation_fraction=0.25, holdout_ids=()):
    """``point`` retrained on the whole balanced cohort, split into training and validation by label."""
    labels = {p.patient_id: Label(p.label).value for p in balanced}
    ids = list(balanced.patient_ids)
    train_ids, val_ids = stratified_split(ids, [labels[pid] for pid in ids], validation_fraction, seed=seed)
    guard = SplitGuard({Split.TRAIN: train_ids, Split.VALIDATION: val_ids, Split.HOLDOUT: holdout_ids})
    model, _ = fit(_gather(examples, train_ids), _gather(examples, val_ids), space.model_config(point),
                   replace(train_cfg, seed=fold_seed(seed, len(ids))), guard=guard)
    return model


def _ensemble_probabilities(model, examples):
    members = model if isinstance(model, (list, tuple)) else [model]
    per_member = [cycle_probabilities(member, examples) for member in members]
    return {pid: tuple(np.mean([member[pid] for member in per_member], axis=0).tolist())
            for pid in per_member[0]}


def holdout_tnr(models, holdouts, rule=AggregationRule.MEAN):
    """
    Share of holdout patients predicted healthy, per seed. ``models`` maps a
    seed to one trained model or to a list whose cycle probabilities are
    averaged; ``holdouts`` maps the seed to the holdout examples.
    """
    per_seed = {}
    for seed, examples in sorted(holdouts.items()):
        for example in examples:
            if Label(example.label) != Label.HEALTHY:
                raise HoldoutNotHealthy(example.patient_id)
        if not examples:
            per_seed[seed] = None
            continue
        probabilities = _ensemble_probabilities(models[seed], examples)
        labels = [predict_patient(probs, rule).label for probs in probabilities.values()]
        per_seed[seed] = float(np.mean([label == Label.HEALTHY.value for label in labels]))
        logger.info('holdout.tnr seed=%s patients=%d tnr=%.4f', seed, len(labels), per_seed[seed])
    values = [v for v in per_seed.values() if v is not None]
    return {
        'per_seed': per_seed,
        'mean': float(np.mean(values)) if values else None,
        'sd': float(np.std(values, ddof=0)) if values else None,
    }


def evaluate(dataset, examples, space, train_cfg, search_cfg, eval_cfg, root_seed=0, objective=None):
    """Undersampling, LOOCV and holdout TNR for each of ``eval_cfg.seeds`` seeds."""
    seeds = [root_seed + k for k in range(eval_cfg.seeds)]
    reports, models, holdouts = [], {}, {}
    for seed in seeds:
        balanced, holdout = undersample(dataset, seed)
        report = loocv(balanced, examples, space, train_cfg, search_cfg, seed, eval_cfg.validation_fraction,
                       holdout.patient_ids, eval_cfg.threads, objective)
        reports.append(report)
        if not len(holdout):
            continue
        if any(p.label != Label.HEALTHY for p in holdout):
            logger.warning('holdout.skip seed=%s reason=majority_class_not_healthy', seed)
            continue
        if eval_cfg.holdout_mode == HoldoutMode.PER_FOLD_ENSEMBLE:
            models[seed] = [fold.model for fold in report.folds]
        else:
            designated = report.folds[0]
            models[seed] = final_model(balanced, examples, SearchPoint(**designated.best_point), space, train_cfg,
                                       seed, eval_cfg.validation_fraction, holdout.patient_ids)
        guard = SplitGuard({Split.HOLDOUT: holdout.patient_ids})
        holdouts[seed] = guard.access(_gather(examples, [pid for pid in holdout.patient_ids if pid in examples]),
                                      PREDICT)

    holdout = holdout_tnr(models, holdouts, train_cfg.aggregation)
    for report in reports:
        report.holdout_tnr = holdout['per_seed'].get(report.seed)

    first = reports[0]
    grid = prediction_grid(first.folds, eval_cfg.heatmap_cycles)
    return EvalReport(
        seeds=reports,
        aggregate=aggregate_metrics([r.metrics for r in reports]),
        per_disease=per_disease_table(reports),
        heatmap=grid,
        holdout=holdout,
        duplicate_holdouts=duplicate_holdouts({r.seed: r.holdout_ids for r in reports if r.holdout_ids}),
        prediction_sd=prediction_spread(first.folds),
        config={
            'space': space.to_dict(),
            'training': train_cfg.to_dict(),
            'search': asdict(search_cfg or SearchConfig()),
            'evaluation': eval_cfg.to_dict(),
            'seeds': seeds,
        },
    )


def compare_architectures(dataset, examples, space, train_cfg, eval_cfg, root_seed=0, objective=None):
    """
    LOOCV of every discrete configuration of ``space`` as a fixed model (no
    search), ranked by mean validation F1. The learning rate is the space's
    first explicit choice, else the training default.
    """
    learning_rate = space.learning_rates[0] if space.finite else train_cfg.learning_rate
    rows, reports = [], {}
    for family, hidden, layers, preset in space.discrete_points():
        fixed = replace(space, families=(family,), hidden=(hidden,), layers=(layers,),
                        head_presets={preset: space.head_presets[preset]}, learning_rates=(learning_rate,))
        point = fixed.points()[0]
        report = evaluate(dataset, examples, fixed, train_cfg, SearchConfig(trials=1, initial_trials=1),
                          eval_cfg, root_seed, objective)
        reports[point.slug] = report
        folds = [fold for seed in report.seeds for fold in seed.folds]
        row = {
            'model': f'{point.family.value}({hidden},{layers})',
            'head_preset': preset,
            'n_parameters': fixed.n_parameters(point),
            'validation_f1': float(np.mean([fold.validation_f1 for fold in folds])),
        }
        for name in ('sensitivity', 'specificity', 'f1', 'accuracy'):
            row[f'{name}_mean'] = report.aggregate[name]['mean']
            row[f'{name}_sd'] = report.aggregate[name]['sd']
        row['holdout_tnr_mean'] = report.holdout['mean']
        row['holdout_tnr_sd'] = report.holdout['sd']
        rows.append(row)
        logger.info('compare.model model=%s validation_f1=%.4f', row['model'], row['validation_f1'])
    frame = pd.DataFrame(rows).sort_values(['validation_f1', 'n_parameters'], ascending=[False, True],
                                           kind='stable').reset_index(drop=True)
    return frame, reports
