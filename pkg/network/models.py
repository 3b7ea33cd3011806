from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from django.conf import settings
from django.db import models

from cohort.models import CHANNELS, SCENE_ORDER
from screening.exceptions import ConfigurationError

N_DEMOGRAPHICS = 3


class EncoderFamily(models.TextChoices):
    LSTM = 'LSTM', 'Unidirectional LSTM'
    BILSTM = 'BiLSTM', 'Bidirectional LSTM'


class Direction(models.TextChoices):
    FORWARD = 'forward', 'Forward'
    BACKWARD = 'backward', 'Backward'


class HeadActivation(models.TextChoices):
    TANH = 'tanh', 'tanh'
    RELU = 'relu', 'ReLU'


@dataclass(frozen=True, eq=False)
class LstmCellParams:
    """
    One direction of one LSTM layer. Gate blocks are stacked in the order
    input, forget, candidate, output along the first axis.
    """
    W: np.ndarray
    U: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        h4, d = self.W.shape
        if h4 % 4 or self.U.shape != (h4, h4 // 4) or self.b.shape != (h4,):
            raise ValueError(f'inconsistent LSTM shapes W{self.W.shape} U{self.U.shape} b{self.b.shape}')
        if not all(np.all(np.isfinite(a)) for a in (self.W, self.U, self.b)):
            raise ValueError('LSTM parameters must be finite')

    @property
    def hidden(self):
        return self.U.shape[1]

    @property
    def input_size(self):
        return self.W.shape[1]


@dataclass(frozen=True)
class EncoderConfig:
    family: EncoderFamily = EncoderFamily.BILSTM
    hidden: int = 128
    layers: int = 2
    shared_across_scenes: bool = True
    input_size: int = len(CHANNELS)

    def __post_init__(self):
        object.__setattr__(self, 'family', EncoderFamily(self.family))
        if self.hidden < 1 or self.layers < 1 or self.input_size < 1:
            raise ConfigurationError(section='encoder', errors='hidden, layers and input_size must be >= 1')

    @property
    def directions(self):
        if self.family == EncoderFamily.BILSTM:
            return (Direction.FORWARD, Direction.BACKWARD)
        return (Direction.FORWARD,)

    @property
    def output_size(self):
        """Width of one scene's embedding (and of every layer's output sequence)."""
        return self.hidden * len(self.directions)

    @property
    def embedding_size(self):
        return len(SCENE_ORDER) * self.output_size

    @property
    def label(self):
        return f'{self.family.value}({self.hidden},{self.layers})'


@dataclass(frozen=True)
class HeadConfig:
    hidden_sizes: tuple = (64, 16)
    activation: HeadActivation = HeadActivation.TANH

    def __post_init__(self):
        object.__setattr__(self, 'hidden_sizes', tuple(int(s) for s in self.hidden_sizes))
        object.__setattr__(self, 'activation', HeadActivation(self.activation))
        if any(size < 1 for size in self.hidden_sizes):
            raise ConfigurationError(section='head', errors='hidden sizes must be >= 1')


@dataclass(frozen=True)
class ModelConfig:
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    head: HeadConfig = field(default_factory=HeadConfig)
    use_demographics: bool = False
    # Overrides the training learning rate when set (search points carry one).
    learning_rate: Optional[float] = None

    def __post_init__(self):
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ConfigurationError(section='model', errors='learning_rate must be positive')

    @property
    def head_input_size(self):
        return self.encoder.embedding_size + (N_DEMOGRAPHICS if self.use_demographics else 0)

    @property
    def label(self):
        sizes = 'x'.join(str(s) for s in self.head.hidden_sizes) or 'linear'
        return f'{self.encoder.label}/head[{sizes}]'

    @classmethod
    def from_settings(cls, **overrides):
        model = settings.SCREENING['MODEL']
        values = {
            'family': model['FAMILY'],
            'hidden': model['HIDDEN'],
            'layers': model['LAYERS'],
            'shared_across_scenes': model['SHARED_ACROSS_SCENES'],
            'head_sizes': model['HEAD_SIZES'],
            'head_activation': model['HEAD_ACTIVATION'],
            'use_demographics': model['USE_DEMOGRAPHICS'],
            'learning_rate': None,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(values)

    @classmethod
    def from_dict(cls, data):
        return cls(
            encoder=EncoderConfig(
                family=data['family'], hidden=int(data['hidden']), layers=int(data['layers']),
                shared_across_scenes=bool(data.get('shared_across_scenes', True)),
            ),
            head=HeadConfig(hidden_sizes=tuple(data.get('head_sizes', (64, 16))),
                            activation=data.get('head_activation', HeadActivation.TANH)),
            use_demographics=bool(data.get('use_demographics', False)),
            learning_rate=data.get('learning_rate'),
        )

    def to_dict(self):
        return {
            'family': self.encoder.family.value,
            'hidden': self.encoder.hidden,
            'layers': self.encoder.layers,
            'shared_across_scenes': self.encoder.shared_across_scenes,
            'head_sizes': list(self.head.hidden_sizes),
            'head_activation': self.head.activation.value,
            'use_demographics': self.use_demographics,
            'learning_rate': self.learning_rate,
        }
