from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from django.conf import settings
from django.db import models

from breathing.standardization import stack_examples
from screening.exceptions import ConfigurationError

PREDICTION_BATCH = 64


class OptimizerKind(models.TextChoices):
    ADAM = 'adam', 'Adam'
    SGD = 'sgd', 'Plain SGD'


class AggregationRule(models.TextChoices):
    MEAN = 'mean', 'Mean probability'
    MAJORITY_VOTE = 'majority-vote', 'Majority vote'


class Split(models.TextChoices):
    TRAIN = 'train', 'Training'
    VALIDATION = 'validation', 'Validation'
    TEST = 'test', 'Test'
    HOLDOUT = 'holdout', 'Holdout'


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 300
    patience: int = 15
    batch_size: int = 16
    learning_rate: float = 1e-3
    optimizer: OptimizerKind = OptimizerKind.ADAM
    seed: int = 0
    gradient_clip_norm: float = 5.0
    aggregation: AggregationRule = AggregationRule.MEAN
    # Shuffling stream; derived from ``seed`` when unset.
    shuffle_seed: Optional[int] = None
    # Weight each class's examples so both classes carry equal total loss.
    class_balanced: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'optimizer', OptimizerKind(self.optimizer))
        object.__setattr__(self, 'aggregation', AggregationRule(self.aggregation))
        errors = []
        if self.max_epochs < 1:
            errors.append('max_epochs must be >= 1')
        if not 1 <= self.patience < self.max_epochs:
            errors.append('patience must satisfy 1 <= patience < max_epochs')
        if self.batch_size < 1:
            errors.append('batch_size must be >= 1')
        if not self.learning_rate > 0 or not self.gradient_clip_norm > 0:
            errors.append('learning_rate and gradient_clip_norm must be positive')
        if errors:
            raise ConfigurationError(section='training', errors='; '.join(errors))

    @classmethod
    def from_settings(cls, **overrides):
        training = settings.SCREENING['TRAINING']
        values = {
            'max_epochs': training['MAX_EPOCHS'],
            'patience': training['PATIENCE'],
            'batch_size': training['BATCH_SIZE'],
            'learning_rate': training['LEARNING_RATE'],
            'optimizer': training['OPTIMIZER'],
            'gradient_clip_norm': training['GRADIENT_CLIP_NORM'],
            'aggregation': training['AGGREGATION'],
            'class_balanced': training['CLASS_BALANCED'],
            'seed': settings.SCREENING['SEED'],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self):
        data = asdict(self)
        data['optimizer'] = self.optimizer.value
        data['aggregation'] = self.aggregation.value
        return data


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: Optional[float] = None
    val_accuracy: Optional[float] = None


@dataclass
class TrainingHistory:
    records: list = field(default_factory=list)
    best_epoch: Optional[int] = None
    stopped_early: bool = False

    @property
    def best_val_loss(self):
        losses = [r.val_loss for r in self.records if r.val_loss is not None]
        return min(losses) if losses else None

    def to_frame(self):
        columns = ['epoch', 'train_loss', 'train_accuracy', 'val_loss', 'val_accuracy']
        return pd.DataFrame([asdict(r) for r in self.records], columns=columns)

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False, lineterminator='\n')
        return path


@dataclass(eq=False)
class TrainedModel:
    """A fitted network with the standardizer of its training split."""
    network: object
    standardizer: object

    def arrays(self, examples):
        batch = self.standardizer.transform(stack_examples(examples))
        demographics = None
        if self.network.config.use_demographics:
            demographics = self.standardizer.transform_demographics([e.demographics for e in examples])
        return batch, demographics

    def predict_examples(self, examples):
        """Probabilities for raw (unstandardized) examples, in order."""
        examples = list(examples)
        if not examples:
            return np.empty(0)
        parts = []
        for start in range(0, len(examples), PREDICTION_BATCH):
            batch, demographics = self.arrays(examples[start:start + PREDICTION_BATCH])
            parts.append(self.network.predict_proba(batch, demographics))
        return np.concatenate(parts)


@dataclass(frozen=True)
class CyclePrediction:
    patient_id: str
    probabilities: tuple = ()
    flagged: bool = False
    reason: str = ''


@dataclass(frozen=True)
class PatientPrediction:
    label: str
    confidence: float
