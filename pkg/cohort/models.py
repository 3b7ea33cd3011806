"""
Domain entities of a screening cohort.

A patient session holds one :class:`RawRecording` per scene (phone position)
with six IMU channels. Segmentation turns each recording into
:class:`BreathingCycle` windows, and aligned cycles of the five scenes form a
:class:`PatientExample`, the unit fed to the network.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np
from django.db import models

from cohort.validators import (
    validate_finite, validate_imu_channels, validate_label_disease, validate_positive,
)


class ScenePosition(models.TextChoices):
    LX1 = 'Lx1', 'Left chest'
    RX1 = 'Rx1', 'Right chest'
    M1 = 'M1', 'Middle chest'
    T1 = 'T1', 'Top abdomen'
    L1 = 'L1', 'Lower abdomen'


# Fixed concatenation order of scene embeddings.
SCENE_ORDER = tuple(ScenePosition)

CHANNELS = ('gx', 'gy', 'gz', 'ax', 'ay', 'az')
GYRO_Y = CHANNELS.index('gy')


class Label(models.TextChoices):
    HEALTHY = 'H', 'Healthy'
    NON_HEALTHY = 'NH', 'Non-healthy'


class DiseaseClass(models.TextChoices):
    NONE = 'None', 'Healthy'
    VALVULAR_INSUFFICIENCY = 'ValvularInsufficiency', 'Valvular insufficiency'
    CORONARY_ARTERY_DISEASE = 'CoronaryArteryDisease', 'Coronary artery disease'
    AORTIC_ANEURYSM = 'AorticAneurysm', 'Aortic aneurysm'
    UNSPECIFIED = 'Unspecified', 'Unspecified'


class Sex(models.TextChoices):
    MALE = 'M', 'Male'
    FEMALE = 'F', 'Female'


def _frozen_array(values, dtype=np.float64):
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class RawRecording:
    scene: ScenePosition
    sample_rate_hz: float
    gyro: np.ndarray
    accel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'scene', ScenePosition(self.scene))
        object.__setattr__(self, 'gyro', _frozen_array(self.gyro))
        object.__setattr__(self, 'accel', _frozen_array(self.accel))
        validate_positive(self.sample_rate_hz)
        validate_imu_channels(self.gyro, self.accel)
        validate_finite(self.gyro, 'gyro')
        validate_finite(self.accel, 'accel')

    @property
    def n_samples(self):
        return len(self.gyro)

    @property
    def duration(self):
        return self.n_samples / self.sample_rate_hz

    @property
    def timestamps(self):
        return np.arange(self.n_samples) / self.sample_rate_hz

    @property
    def signals(self):
        """All six channels as an ``n x 6`` array in ``CHANNELS`` order."""
        return np.hstack([self.gyro, self.accel])

    @classmethod
    def from_signals(cls, scene, sample_rate_hz, signals):
        signals = np.asarray(signals, dtype=np.float64)
        return cls(scene=scene, sample_rate_hz=sample_rate_hz,
                   gyro=signals[:, :3], accel=signals[:, 3:])

    def with_signals(self, signals):
        return RawRecording.from_signals(self.scene, self.sample_rate_hz, signals)


@dataclass(frozen=True, eq=False)
class PatientRecord:
    patient_id: str
    label: Label
    disease_class: DiseaseClass
    age: int
    sex: Sex
    height_cm: float
    weight_kg: float
    recordings: Mapping[ScenePosition, RawRecording] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'label', Label(self.label))
        object.__setattr__(self, 'disease_class', DiseaseClass(self.disease_class))
        object.__setattr__(self, 'sex', Sex(self.sex))
        validate_label_disease(self.label, self.disease_class)
        recordings = {ScenePosition(scene): rec for scene, rec in self.recordings.items()}
        for scene, rec in recordings.items():
            if rec.scene != scene:
                raise ValueError(f"recording keyed {scene} holds scene {rec.scene}")
        ordered = {scene: recordings[scene] for scene in SCENE_ORDER if scene in recordings}
        object.__setattr__(self, 'recordings', MappingProxyType(ordered))

    @property
    def missing_scenes(self):
        return tuple(scene for scene in SCENE_ORDER if scene not in self.recordings)

    @property
    def trainable(self):
        return not self.missing_scenes

    @property
    def is_positive(self):
        return self.label == Label.NON_HEALTHY

    @property
    def demographics(self):
        return (float(self.age), float(self.height_cm), float(self.weight_kg))

    def metadata(self):
        return {
            'patient_id': self.patient_id,
            'label': self.label.value,
            'disease_class': self.disease_class.value,
            'age': self.age,
            'sex': self.sex.value,
            'height_cm': self.height_cm,
            'weight_kg': self.weight_kg,
        }


@dataclass(frozen=True, eq=False)
class BreathingCycle:
    scene: ScenePosition
    channels: np.ndarray
    source_window: tuple
    phase_bounds: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'channels', _frozen_array(self.channels))
        if self.channels.ndim != 2 or self.channels.shape[0] != len(CHANNELS):
            raise ValueError(f"cycle channels must be 6 x m, got {self.channels.shape}")
        validate_finite(self.channels, f"{self.scene} cycle")

    @property
    def length(self):
        return self.channels.shape[1]


@dataclass(frozen=True, eq=False)
class PatientExample:
    patient_id: str
    label: Label
    cycle_index: int
    scenes: Mapping[ScenePosition, BreathingCycle]
    demographics: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, 'label', Label(self.label))
        missing = [scene for scene in SCENE_ORDER if scene not in self.scenes]
        if missing:
            raise ValueError(f"example {self.patient_id}#{self.cycle_index} lacks scenes {missing}")
        ordered = {scene: self.scenes[scene] for scene in SCENE_ORDER}
        object.__setattr__(self, 'scenes', MappingProxyType(ordered))

    @property
    def target(self):
        return 1.0 if self.label == Label.NON_HEALTHY else 0.0

    def stacked(self):
        """Cycles as a ``5 x m x 6`` time-major array in ``SCENE_ORDER``."""
        return np.stack([self.scenes[scene].channels.T for scene in SCENE_ORDER])

    def with_scenes(self, scenes):
        return dataclasses.replace(self, scenes=scenes)


@dataclass(frozen=True)
class LoadDiagnostic:
    patient_id: str
    path: str
    code: str
    message: str


@dataclass(frozen=True, eq=False)
class Dataset:
    patients: tuple = ()
    diagnostics: tuple = ()
    ground_truth: Mapping = field(default_factory=dict)

    def __post_init__(self):
        patients = tuple(sorted(self.patients, key=lambda p: p.patient_id))
        ids = [p.patient_id for p in patients]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate patient ids in dataset")
        object.__setattr__(self, 'patients', patients)
        object.__setattr__(self, 'diagnostics', tuple(self.diagnostics))
        object.__setattr__(self, 'ground_truth', MappingProxyType(dict(self.ground_truth)))

    def __len__(self):
        return len(self.patients)

    def __iter__(self):
        return iter(self.patients)

    @property
    def patient_ids(self):
        return tuple(p.patient_id for p in self.patients)

    def get(self, patient_id):
        for patient in self.patients:
            if patient.patient_id == patient_id:
                return patient
        raise KeyError(patient_id)

    def trainable(self):
        return self.subset(p.patient_id for p in self.patients if p.trainable)

    def flagged(self):
        return tuple(p for p in self.patients if not p.trainable)

    def subset(self, patient_ids):
        wanted = set(patient_ids)
        truth = {pid: bounds for pid, bounds in self.ground_truth.items() if pid in wanted}
        return Dataset(patients=tuple(p for p in self.patients if p.patient_id in wanted),
                       ground_truth=truth)

    def count(self, label):
        return sum(1 for p in self.patients if p.label == label)
