"""
Report tables and figures.

A report directory holds one confusion matrix per seed, the per-seed and
aggregate metrics, the per-disease table, the per-cycle heatmap (CSV and
PNG), the per-fold predictions and trial logs, and ``summary.json``.
"""
import json
import logging
from pathlib import Path

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from breathing.filters import filter_response  # noqa: E402
from breathing.segmentation import scene_peaks, trim_transient  # noqa: E402
from cohort.models import GYRO_Y, DiseaseClass, Label  # noqa: E402
from evaluation.exceptions import ReportNotFound  # noqa: E402
from evaluation.models import RATIOS  # noqa: E402
from tuning.search import trial_frame  # noqa: E402

logger = logging.getLogger(__name__)

SUMMARY_NAME = 'summary.json'
GROUND_TRUTH_ROW = 'ground_truth'


def _csv(frame, path, **kwargs):
    frame.to_csv(path, lineterminator='\n', **kwargs)
    return path


def per_disease_table(reports):
    """
    Patients and misclassifications per disease class and seed. NH rows sum
    to ``tp + fn`` of each seed and the healthy row to ``tn + fp``.
    """
    rows = []
    for disease in DiseaseClass:
        row = {'disease_class': disease.value}
        accuracies = []
        for report in reports:
            folds = [f for f in report.folds if f.disease_class == disease.value]
            wrong = sum(f.predicted != f.truth for f in folds)
            row['n_patients'] = len(folds)
            row[f'misclassified_seed{report.seed}'] = wrong
            if folds:
                accuracies.append(1 - wrong / len(folds))
        if not row['n_patients']:
            continue
        row['accuracy_mean'] = float(np.mean(accuracies))
        row['accuracy_sd'] = float(np.std(accuracies, ddof=0))
        rows.append(row)
    return pd.DataFrame(rows)


def probability_grid(probabilities, truth, k=4):
    """
    Patients x first ``k`` cycle probabilities (NaN where a patient has fewer)
    plus ground truth. ``probabilities`` and ``truth`` are keyed by patient.
    """
    patient_ids = sorted(probabilities)
    values = np.full((len(patient_ids), k), np.nan)
    for i, patient_id in enumerate(patient_ids):
        first = probabilities[patient_id][:k]
        values[i, :len(first)] = first
    grid = pd.DataFrame(values, index=patient_ids, columns=[f'cycle_{j + 1}' for j in range(k)])
    grid.index.name = 'patient_id'
    grid[GROUND_TRUTH_ROW] = [1.0 if Label(truth[pid]) == Label.NON_HEALTHY else 0.0 for pid in patient_ids]
    return grid


def prediction_grid(folds, k=4):
    return probability_grid({f.plan.test_patient_id: f.cycle_probabilities for f in folds},
                            {f.plan.test_patient_id: f.truth for f in folds}, k)


def prediction_spread(folds):
    """Standard deviation of each patient's cycle probabilities and their median."""
    per_patient = {f.plan.test_patient_id: float(np.std(f.cycle_probabilities, ddof=0))
                   for f in sorted(folds, key=lambda f: f.plan.test_patient_id)}
    return {
        'per_patient': per_patient,
        'median': float(np.median(list(per_patient.values()))) if per_patient else None,
    }


def render_heatmap(table, path):
    """Draw a heatmap table (rows: cycles then ground truth; columns: patients) to ``path``."""
    values = table.to_numpy(dtype=np.float64)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * table.shape[1] + 2), 0.6 * table.shape[0] + 1.5))
    sns.heatmap(values, mask=np.isnan(values), vmin=0.0, vmax=1.0, cmap='coolwarm', ax=ax,
                xticklabels=list(table.columns), yticklabels=list(table.index),
                cbar_kws={'label': 'P(non-healthy)'})
    ax.set_xlabel('patient')
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def export_heatmap(grid, out_dir, k=4):
    """
    Write ``heatmap.csv`` (rows: cycles 1..k then ground truth; columns:
    patients; missing cycles left empty) and ``heatmap.png``. Returns the
    written table.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cycles = [f'cycle_{j + 1}' for j in range(k)]
    table = grid.reindex(columns=cycles + [GROUND_TRUTH_ROW]).T
    table.index.name = 'row'
    _csv(table, out_dir / 'heatmap.csv', na_rep='')
    render_heatmap(table, out_dir / 'heatmap.png')
    return table


def read_heatmap(out_dir):
    path = Path(out_dir) / 'heatmap.csv'
    if not path.is_file():
        raise ReportNotFound(out_dir)
    return pd.read_csv(path, index_col='row', dtype={'row': str})


def confusion_frame(report):
    return pd.DataFrame(report.confusion, index=['true_H', 'true_NH'], columns=['pred_H', 'pred_NH'])


def metrics_frame(report):
    rows = []
    for seed in report.seeds:
        rows.append({'row': f'seed{seed.seed}', **seed.metrics.to_dict(), 'holdout_tnr': seed.holdout_tnr})
    for stat in ('mean', 'sd'):
        row = {'row': stat, **{name: report.aggregate[name][stat] for name in RATIOS},
               'holdout_tnr': report.holdout[stat]}
        rows.append(row)
    return pd.DataFrame(rows)


def summary(report):
    return {
        'seeds': [
            {
                'seed': seed.seed,
                'confusion': seed.confusion,
                'metrics': seed.metrics.to_dict(),
                'cycle_metrics': seed.cycle_metrics.to_dict(),
                'holdout_ids': list(seed.holdout_ids),
                'holdout_tnr': seed.holdout_tnr,
                'predictions': {f.plan.test_patient_id: {'predicted': f.predicted, 'confidence': f.confidence}
                                for f in seed.folds},
            }
            for seed in report.seeds
        ],
        'aggregate': report.aggregate,
        'holdout': {**report.holdout, 'per_seed': {str(k): v for k, v in report.holdout['per_seed'].items()}},
        'duplicate_holdouts': [list(pair) for pair in report.duplicate_holdouts],
        'per_disease': report.per_disease.to_dict(orient='records'),
        'prediction_sd': report.prediction_sd,
        'config': report.config,
    }


def write_report(report, out_dir, k=4, dataset=None):
    """
    Write every table and figure of ``report`` under ``out_dir``. ``dataset``,
    a dataset summary mapping, is embedded in ``summary.json`` when given.
    """
    out_dir = Path(out_dir)
    (out_dir / 'trials').mkdir(parents=True, exist_ok=True)
    for seed in report.seeds:
        _csv(confusion_frame(seed), out_dir / f'confusion_seed{seed.seed}.csv')
        for patient_id, trials in seed.trials:
            _csv(trial_frame(trials), out_dir / 'trials' / f'seed{seed.seed}_{patient_id}.csv', index=False)
    _csv(metrics_frame(report), out_dir / 'metrics.csv', index=False)
    _csv(report.per_disease, out_dir / 'per_disease.csv', index=False)
    folds = [fold.to_row() for seed in report.seeds for fold in seed.folds]
    _csv(pd.DataFrame(folds), out_dir / 'folds.csv', index=False)
    export_heatmap(report.heatmap, out_dir, k)
    payload = summary(report)
    if dataset is not None:
        payload['dataset'] = dataset
    (out_dir / SUMMARY_NAME).write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + '\n')
    logger.info('report.write dir=%s seeds=%d', out_dir, len(report.seeds))
    return out_dir


def read_report(out_dir):
    path = Path(out_dir) / SUMMARY_NAME
    if not path.is_file():
        raise ReportNotFound(out_dir)
    return json.loads(path.read_text())


def plot_filter_response(spec, path, n_samples=4096):
    """Measured gain of the low-pass filter against frequency."""
    freqs, gain = filter_response(spec, n_samples)
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(freqs, gain, drawstyle='steps-mid')
    ax.axvline(spec.cutoff_hz, color='tab:red', linestyle='--', label=f'cutoff {spec.cutoff_hz:g} Hz')
    ax.set_xlim(0, min(spec.sample_rate_hz / 2, 5 * spec.cutoff_hz))
    ax.set_xlabel('frequency [Hz]')
    ax.set_ylabel('gain')
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_segmentation(recording, cfg, path):
    """Raw and filtered gyro-y of one scene with the detected extrema and cycle windows."""
    trimmed = trim_transient(recording, cfg.trim_s)
    filtered, peaks = scene_peaks(trimmed, cfg)
    offset = recording.n_samples - trimmed.n_samples
    t = recording.timestamps[offset:]
    fig, ax = plt.subplots(figsize=(10, 3))
    ax.plot(t, trimmed.signals[:, GYRO_Y], color='0.6', linewidth=0.8, label='gyro y')
    ax.plot(t, filtered, color='tab:blue', label='low-pass')
    ax.plot(t[list(peaks.maxima)], filtered[list(peaks.maxima)], 'v', color='tab:red', label='maxima')
    ax.plot(t[list(peaks.minima)], filtered[list(peaks.minima)], '^', color='tab:green', label='minima')
    for k, (start, end) in enumerate(zip(peaks.maxima[:-1], peaks.maxima[1:])):
        ax.axvspan(t[start], t[end], color='tab:orange' if k % 2 else 'tab:purple', alpha=0.08)
    ax.set_title(f'{recording.scene.value}: {max(len(peaks.maxima) - 1, 0)} cycles')
    ax.set_xlabel('time [s]')
    ax.legend(loc='upper right', fontsize='small')
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
