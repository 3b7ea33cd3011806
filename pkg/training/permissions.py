"""
Split-access guard.

Every read of examples during training is tagged with its purpose (a
*stage*) and checked against the split each patient was assigned to, the
way request permissions gate a view: a permission class answers
``has_permission(split, stage)`` and the guard raises on the first denial.
"""
import logging
from collections import Counter

from training.exceptions import LeakageError
from training.models import Split

logger = logging.getLogger(__name__)

STANDARDIZE = 'standardize'
GRADIENT = 'gradient'
EARLY_STOPPING = 'early_stopping'
MODEL_SELECTION = 'model_selection'
PREDICT = 'predict'


class BaseSplitPermission:

    def has_permission(self, split, stage):
        return True


class FitsOnTrainingSplitOnly(BaseSplitPermission):
    # Statistics and gradient steps only ever see training patients.
    def has_permission(self, split, stage):
        if stage in (STANDARDIZE, GRADIENT):
            return split == Split.TRAIN
        return True


class ValidationDrivesSelection(BaseSplitPermission):
    def has_permission(self, split, stage):
        if stage in (EARLY_STOPPING, MODEL_SELECTION):
            return split == Split.VALIDATION
        return True


class NeverReadsHeldOutPatients(BaseSplitPermission):
    def has_permission(self, split, stage):
        if split in (Split.TEST, Split.HOLDOUT):
            return stage == PREDICT
        return True


class SplitGuard:
    permission_classes = [FitsOnTrainingSplitOnly, ValidationDrivesSelection, NeverReadsHeldOutPatients]

    def __init__(self, assignments=None):
        self.assignments = {}
        self.accesses = Counter()
        for split, patient_ids in (assignments or {}).items():
            self.register(split, patient_ids)

    def get_permissions(self):
        return [permission() for permission in self.permission_classes]

    def register(self, split, patient_ids):
        split = Split(split)
        for patient_id in patient_ids:
            known = self.assignments.get(patient_id)
            if known is not None and known != split:
                raise LeakageError(patient_id, known.value, f'assignment to {split.value}')
            self.assignments[patient_id] = split

    def split_of(self, patient_id):
        return self.assignments.get(patient_id)

    def access(self, examples, stage):
        """Check that ``stage`` may read every example; returns them unchanged."""
        permissions = self.get_permissions()
        for patient_id in sorted({e.patient_id for e in examples}):
            split = self.split_of(patient_id)
            if split is None:
                raise LeakageError(patient_id, 'unassigned', stage)
            for permission in permissions:
                if not permission.has_permission(split, stage):
                    logger.error('guard.deny patient=%s split=%s stage=%s', patient_id, split.value, stage)
                    raise LeakageError(patient_id, split.value, stage)
            self.accesses[(stage, split.value)] += 1
        return examples

    @classmethod
    def for_fit(cls, train_examples, val_examples):
        return cls({
            Split.TRAIN: {e.patient_id for e in train_examples},
            Split.VALIDATION: {e.patient_id for e in val_examples},
        })
