from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from django.conf import settings
from django.db import models

from screening.exceptions import ConfigurationError
from training.exceptions import LeakageError

RATIOS = ('sensitivity', 'specificity', 'precision', 'f1', 'accuracy', 'tnr')


class HoldoutMode(models.TextChoices):
    FINAL_RETRAIN = 'final-retrain', 'One model retrained on the balanced cohort'
    PER_FOLD_ENSEMBLE = 'per-fold-ensemble', 'Mean of the LOOCV fold models'


@dataclass(frozen=True)
class EvaluationConfig:
    seeds: int = 4
    validation_fraction: float = 0.25
    heatmap_cycles: int = 4
    holdout_mode: HoldoutMode = HoldoutMode.FINAL_RETRAIN
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'holdout_mode', HoldoutMode(self.holdout_mode))
        errors = []
        if self.seeds < 1 or self.heatmap_cycles < 1 or self.threads < 1:
            errors.append('seeds, heatmap_cycles and threads must be >= 1')
        if not 0 < self.validation_fraction < 1:
            errors.append('validation_fraction must lie in (0, 1)')
        if errors:
            raise ConfigurationError(section='evaluation', errors='; '.join(errors))

    @classmethod
    def from_settings(cls, **overrides):
        evaluation = settings.SCREENING['EVALUATION']
        values = {
            'seeds': evaluation['SEEDS'],
            'validation_fraction': evaluation['VALIDATION_FRACTION'],
            'heatmap_cycles': evaluation['HEATMAP_CYCLES'],
            'holdout_mode': evaluation['HOLDOUT_MODE'],
            'threads': settings.SCREENING['THREADS'],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self):
        return {**asdict(self), 'holdout_mode': self.holdout_mode.value}


@dataclass(frozen=True)
class FoldPlan:
    seed: int
    test_patient_id: str
    train_ids: tuple
    val_ids: tuple
    excluded_holdout_ids: tuple = ()

    def __post_init__(self):
        parts = {'train': set(self.train_ids), 'validation': set(self.val_ids), 'test': {self.test_patient_id}}
        names = list(parts)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                overlap = sorted(parts[a] & parts[b])
                if overlap:
                    raise LeakageError(overlap[0], a, f'fold planning ({b})')
        leaked = sorted(set(self.excluded_holdout_ids) & set().union(*parts.values()))
        if leaked:
            raise LeakageError(leaked[0], 'holdout', 'fold planning')

    @property
    def patient_ids(self):
        return (*self.train_ids, *self.val_ids, self.test_patient_id)


@dataclass(frozen=True)
class Metrics:
    """Confusion counts and the ratios derived from them; ``None`` marks an undefined ratio."""
    tp: int
    tn: int
    fp: int
    fn: int
    sensitivity: Optional[float] = None
    specificity: Optional[float] = None
    precision: Optional[float] = None
    f1: Optional[float] = None
    accuracy: Optional[float] = None
    tnr: Optional[float] = None

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn

    @property
    def absent(self):
        return tuple(name for name in RATIOS if getattr(self, name) is None)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(eq=False)
class FoldResult:
    plan: FoldPlan
    truth: str
    disease_class: str
    predicted: str
    confidence: float
    cycle_probabilities: tuple
    best_point: dict
    validation_f1: float
    n_parameters: int
    model: object = field(default=None, repr=False)

    def to_row(self):
        return {
            'seed': self.plan.seed,
            'test_patient_id': self.plan.test_patient_id,
            'truth': self.truth,
            'disease_class': self.disease_class,
            'predicted': self.predicted,
            'confidence': self.confidence,
            'n_cycles': len(self.cycle_probabilities),
            'n_train': len(self.plan.train_ids),
            'n_val': len(self.plan.val_ids),
            'validation_f1': self.validation_f1,
            'n_parameters': self.n_parameters,
            **{f'best_{key}': value for key, value in self.best_point.items()},
        }


@dataclass(eq=False)
class SeedReport:
    seed: int
    folds: list
    metrics: Metrics
    cycle_metrics: Metrics
    holdout_ids: tuple = ()
    holdout_tnr: Optional[float] = None
    trials: list = field(default_factory=list, repr=False)

    @property
    def confusion(self):
        """``[[tn, fp], [fn, tp]]`` with rows true H/NH and columns predicted H/NH."""
        m = self.metrics
        return [[m.tn, m.fp], [m.fn, m.tp]]


@dataclass(eq=False)
class EvalReport:
    seeds: list
    aggregate: dict
    per_disease: object
    heatmap: object
    holdout: dict
    duplicate_holdouts: list = field(default_factory=list)
    prediction_sd: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
