import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cohort.models import SCENE_ORDER, BreathingCycle

# Channels whose training variance is (numerically) zero keep unit scale.
MIN_STD = 1e-12


def stack_examples(examples):
    """``N x 5 x m x 6`` array of the examples' cycles in scene order."""
    return np.stack([example.stacked() for example in examples])


def _safe_std(values, axis):
    std = values.std(axis=axis)
    return np.where(std < MIN_STD, 1.0, std)


@dataclass(frozen=True, eq=False)
class Standardizer:
    """
    Zero-mean, unit-variance scaling per scene and channel. Statistics are
    fitted on training examples only and then applied unchanged to
    validation, test and holdout data. Demographics, when every fitted
    example carries them, are scaled the same way.
    """
    mean: np.ndarray
    std: np.ndarray
    demographics_mean: Optional[np.ndarray] = None
    demographics_std: Optional[np.ndarray] = None

    @classmethod
    def fit(cls, examples):
        batch = examples if isinstance(examples, np.ndarray) else stack_examples(examples)
        if len(batch) == 0:
            raise ValueError('cannot fit a standardizer on zero examples')
        demographics_mean = demographics_std = None
        if not isinstance(examples, np.ndarray) and all(e.demographics is not None for e in examples):
            demographics = np.asarray([e.demographics for e in examples], dtype=np.float64)
            demographics_mean, demographics_std = demographics.mean(axis=0), _safe_std(demographics, 0)
        return cls(mean=batch.mean(axis=(0, 2)), std=_safe_std(batch, (0, 2)),
                   demographics_mean=demographics_mean, demographics_std=demographics_std)

    @classmethod
    def identity(cls):
        return cls(mean=np.zeros((len(SCENE_ORDER), 6)), std=np.ones((len(SCENE_ORDER), 6)))

    def transform(self, batch):
        return (batch - self.mean[None, :, None, :]) / self.std[None, :, None, :]

    def transform_demographics(self, demographics):
        demographics = np.asarray(demographics, dtype=np.float64)
        if self.demographics_mean is None:
            return demographics
        return (demographics - self.demographics_mean) / self.demographics_std

    def apply(self, example):
        scenes = {}
        for j, scene in enumerate(SCENE_ORDER):
            cycle = example.scenes[scene]
            channels = (cycle.channels - self.mean[j][:, None]) / self.std[j][:, None]
            scenes[scene] = BreathingCycle(scene=scene, channels=channels,
                                           source_window=cycle.source_window,
                                           phase_bounds=cycle.phase_bounds)
        scaled = example.with_scenes(scenes)
        if example.demographics is not None and self.demographics_mean is not None:
            demographics = tuple(float(v) for v in self.transform_demographics(example.demographics))
            scaled = dataclasses.replace(scaled, demographics=demographics)
        return scaled

    def to_dict(self):
        data = {'mean': self.mean.tolist(), 'std': self.std.tolist()}
        if self.demographics_mean is not None:
            data['demographics_mean'] = self.demographics_mean.tolist()
            data['demographics_std'] = self.demographics_std.tolist()
        return data

    @classmethod
    def from_dict(cls, data):
        demographics_mean = data.get('demographics_mean')
        demographics_std = data.get('demographics_std')
        return cls(
            mean=np.asarray(data['mean'], dtype=float),
            std=np.asarray(data['std'], dtype=float),
            demographics_mean=None if demographics_mean is None else np.asarray(demographics_mean, dtype=float),
            demographics_std=None if demographics_std is None else np.asarray(demographics_std, dtype=float),
        )
