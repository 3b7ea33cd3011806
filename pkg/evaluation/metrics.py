import logging

import numpy as np
from sklearn.metrics import confusion_matrix

from cohort.models import Label
from evaluation.models import RATIOS, Metrics

logger = logging.getLogger(__name__)

LABELS = [Label.HEALTHY.value, Label.NON_HEALTHY.value]


def _ratio(numerator, denominator):
    return numerator / denominator if denominator > 0 else None


def compute_metrics(tp, tn, fp, fn):
    """Screening metrics with NH as the positive class; a zero denominator leaves the ratio absent."""
    counts = (tp, tn, fp, fn)
    if any(int(c) != c or c < 0 for c in counts):
        raise ValueError(f'confusion counts must be non-negative integers, got {counts}')
    tp, tn, fp, fn = (int(c) for c in counts)
    sensitivity = _ratio(tp, tp + fn)
    specificity = _ratio(tn, tn + fp)
    precision = _ratio(tp, tp + fp)
    # Count form of the harmonic mean of precision and sensitivity; it is 0
    # rather than absent when positives exist but none is found.
    f1 = _ratio(2 * tp, 2 * tp + fp + fn)
    return Metrics(tp=tp, tn=tn, fp=fp, fn=fn, sensitivity=sensitivity, specificity=specificity,
                   precision=precision, f1=f1, accuracy=_ratio(tp + tn, tp + tn + fp + fn), tnr=specificity)


def confusion_counts(y_true, y_pred):
    """``(tp, tn, fp, fn)`` from H/NH label sequences."""
    if len(y_true) == 0:
        return 0, 0, 0, 0
    tn, fp, fn, tp = confusion_matrix([str(y) for y in y_true], [str(y) for y in y_pred], labels=LABELS).ravel()
    return int(tp), int(tn), int(fp), int(fn)


def metrics_from_labels(y_true, y_pred):
    return compute_metrics(*confusion_counts(y_true, y_pred))


def aggregate_metrics(per_seed):
    """
    Mean and population standard deviation of every ratio over seeds. Seeds
    where a ratio is absent are left out of that ratio and counted in
    ``excluded``.
    """
    aggregate = {}
    for name in RATIOS:
        values = [getattr(m, name) for m in per_seed if getattr(m, name) is not None]
        excluded = len(per_seed) - len(values)
        if excluded:
            logger.warning('metrics.absent metric=%s seeds_excluded=%d', name, excluded)
        aggregate[name] = {
            'mean': float(np.mean(values)) if values else None,
            'sd': float(np.std(values, ddof=0)) if values else None,
            'n': len(values),
            'excluded': excluded,
        }
    return aggregate
