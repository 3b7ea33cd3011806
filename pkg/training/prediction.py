import logging

import numpy as np

from breathing.segmentation import segment_patient
from cohort.models import Label
from training.exceptions import NoCyclePredictions
from training.models import AggregationRule, CyclePrediction, PatientPrediction

logger = logging.getLogger(__name__)

THRESHOLD = 0.5


def predict_cycles(model, patient, dsp_cfg):
    """Ordered per-cycle P(NH) for ``patient``; an empty, flagged result when it yields no cycle."""
    segmentation = segment_patient(patient, dsp_cfg)
    if segmentation.flagged:
        return CyclePrediction(patient.patient_id, (), True, segmentation.reason)
    probabilities = model.predict_examples(segmentation.examples)
    logger.debug('predict.cycles patient=%s cycles=%d', patient.patient_id, len(probabilities))
    return CyclePrediction(patient.patient_id, tuple(float(p) for p in probabilities))


def predict_patient(cycle_probs, rule=AggregationRule.MEAN):
    """
    Patient label from cycle probabilities. ``mean``: confidence is the mean
    probability. ``majority-vote``: confidence is the share of cycles voting
    NH. Either way the label is NH iff confidence >= 0.5.
    """
    probs = np.asarray(cycle_probs, dtype=np.float64)
    if probs.size == 0:
        raise NoCyclePredictions()
    if AggregationRule(rule) == AggregationRule.MAJORITY_VOTE:
        confidence = float(np.mean(probs >= THRESHOLD))
    else:
        confidence = float(np.mean(probs))
    label = Label.NON_HEALTHY if confidence >= THRESHOLD else Label.HEALTHY
    return PatientPrediction(label=label.value, confidence=confidence)


def cycle_probabilities(model, examples):
    """``patient_id -> probabilities`` in cycle order, for raw examples of any number of patients."""
    examples = sorted(examples, key=lambda e: (e.patient_id, e.cycle_index))
    probabilities = model.predict_examples(examples)
    grouped = {}
    for example, probability in zip(examples, probabilities):
        grouped.setdefault(example.patient_id, []).append(float(probability))
    return {patient_id: tuple(probs) for patient_id, probs in grouped.items()}
