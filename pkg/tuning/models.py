import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from django.conf import settings
from django.db import models

from network.classifier import count_parameters
from network.models import EncoderConfig, EncoderFamily, HeadActivation, HeadConfig, ModelConfig
from screening.exceptions import ConfigurationError


class TrialStatus(models.TextChoices):
    COMPLETED = 'completed', 'Completed'
    FAILED = 'failed', 'Failed'


@dataclass(frozen=True)
class SearchPoint:
    family: EncoderFamily
    hidden: int
    layers: int
    head_preset: str
    learning_rate: float

    def __post_init__(self):
        object.__setattr__(self, 'family', EncoderFamily(self.family))

    @property
    def discrete(self):
        return (self.family, self.hidden, self.layers, self.head_preset)

    def key(self):
        return (*self.discrete, float(self.learning_rate))

    @property
    def label(self):
        return f'{self.family.value}({self.hidden},{self.layers})/{self.head_preset}/lr={self.learning_rate:.3g}'

    @property
    def slug(self):
        """File-name safe label of the discrete part."""
        return f'{self.family.value}-{self.hidden}x{self.layers}-{self.head_preset}'

    def to_dict(self):
        return {
            'family': self.family.value,
            'hidden': self.hidden,
            'layers': self.layers,
            'head_preset': self.head_preset,
            'learning_rate': self.learning_rate,
        }


@dataclass(frozen=True)
class SearchSpace:
    """
    Mixed discrete/continuous model space. The learning rate is log-uniform
    over ``learning_rate_range`` unless ``learning_rates`` lists explicit
    choices, in which case the whole space is finite.
    """
    hidden: tuple = (32, 64, 128)
    layers: tuple = (2, 4, 6)
    families: tuple = (EncoderFamily.LSTM, EncoderFamily.BILSTM)
    learning_rate_range: tuple = (1e-4, 1e-2)
    learning_rates: tuple = ()
    head_presets: dict = field(default_factory=lambda: {'small': (32,), 'medium': (64, 16)})
    shared_across_scenes: bool = True
    head_activation: HeadActivation = HeadActivation.TANH
    use_demographics: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'hidden', tuple(int(h) for h in self.hidden))
        object.__setattr__(self, 'layers', tuple(int(n) for n in self.layers))
        object.__setattr__(self, 'families', tuple(EncoderFamily(f) for f in self.families))
        object.__setattr__(self, 'learning_rates', tuple(sorted(float(r) for r in self.learning_rates)))
        object.__setattr__(self, 'learning_rate_range', tuple(float(r) for r in self.learning_rate_range))
        object.__setattr__(self, 'head_presets',
                           {name: tuple(int(s) for s in sizes) for name, sizes in self.head_presets.items()})
        object.__setattr__(self, 'head_activation', HeadActivation(self.head_activation))
        errors = []
        if not (self.hidden and self.layers and self.families and self.head_presets):
            errors.append('every discrete dimension needs at least one value')
        if min(self.hidden + self.layers, default=1) < 1:
            errors.append('hidden and layers must be >= 1')
        low, high = self.learning_rate_range
        if not 0 < low <= high:
            errors.append('learning_rate_range must satisfy 0 < low <= high')
        if any(r <= 0 for r in self.learning_rates):
            errors.append('learning_rates must be positive')
        if errors:
            raise ConfigurationError(section='search space', errors='; '.join(errors))

    @classmethod
    def from_settings(cls, **overrides):
        search = settings.SCREENING['SEARCH']
        values = {
            'hidden': search['HIDDEN'],
            'layers': search['LAYERS'],
            'families': search['FAMILIES'],
            'learning_rate_range': search['LEARNING_RATE_RANGE'],
            'head_presets': search['HEAD_PRESETS'],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def finite(self):
        return bool(self.learning_rates)

    @property
    def log_lr_bounds(self):
        low, high = (self.learning_rates[0], self.learning_rates[-1]) if self.finite else self.learning_rate_range
        return math.log(low), math.log(high)

    def discrete_points(self):
        """Every (family, hidden, layers, head preset) combination in a fixed order."""
        return list(itertools.product(self.families, self.hidden, self.layers, self.head_presets))

    def points(self):
        """All points of a finite space."""
        if not self.finite:
            raise ValueError('a continuous learning-rate dimension has no finite enumeration')
        return [SearchPoint(*combo, rate) for combo in self.discrete_points() for rate in self.learning_rates]

    def __len__(self):
        return len(self.discrete_points()) * (len(self.learning_rates) if self.finite else 1)

    def model_config(self, point):
        return ModelConfig(
            encoder=EncoderConfig(family=point.family, hidden=point.hidden, layers=point.layers,
                                  shared_across_scenes=self.shared_across_scenes),
            head=HeadConfig(hidden_sizes=self.head_presets[point.head_preset], activation=self.head_activation),
            use_demographics=self.use_demographics,
            learning_rate=point.learning_rate,
        )

    def n_parameters(self, point):
        config = self.model_config(point)
        return count_parameters(config.encoder, config.head, config.use_demographics)

    def to_dict(self):
        return {
            'hidden': list(self.hidden),
            'layers': list(self.layers),
            'families': [f.value for f in self.families],
            'learning_rate_range': list(self.learning_rate_range),
            'learning_rates': list(self.learning_rates),
            'head_presets': {name: list(sizes) for name, sizes in self.head_presets.items()},
            'shared_across_scenes': self.shared_across_scenes,
            'head_activation': self.head_activation.value,
            'use_demographics': self.use_demographics,
        }


@dataclass(frozen=True)
class SearchConfig:
    trials: int = 5
    initial_trials: int = 2
    length_scale: float = 0.5
    noise: float = 1e-3

    def __post_init__(self):
        if self.trials < 1 or self.initial_trials < 1:
            raise ConfigurationError(section='search', errors='trials and initial_trials must be >= 1')
        if not self.length_scale > 0 or self.noise < 0:
            raise ConfigurationError(section='search', errors='length_scale must be positive and noise non-negative')

    @classmethod
    def from_settings(cls, **overrides):
        search = settings.SCREENING['SEARCH']
        values = {
            'trials': search['TRIALS'],
            'initial_trials': search['INITIAL_TRIALS'],
            'length_scale': search['LENGTH_SCALE'],
            'noise': search['NOISE'],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(eq=False)
class Trial:
    index: int
    point: SearchPoint
    status: TrialStatus
    objective: Optional[float] = None
    n_parameters: int = 0
    diagnostic: str = ''
    # Fitted model of a completed trial; never serialized.
    model: object = field(default=None, repr=False)

    @property
    def completed(self):
        return self.status == TrialStatus.COMPLETED

    def to_row(self):
        return {
            'trial': self.index,
            'status': TrialStatus(self.status).value,
            'objective': self.objective,
            **self.point.to_dict(),
            'n_parameters': self.n_parameters,
            'diagnostic': self.diagnostic,
        }
