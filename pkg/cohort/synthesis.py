"""
Synthetic multi-scene IMU sessions with known cycle boundaries.

The respiratory component on gyro-y is a skewed-phase waveform: the phase
advances through inhalation over a fraction ``inhale_ratio`` of each cycle and
through exhalation over the rest, so the exhale is faster whenever the ratio
exceeds one half. Two harmonics shape the morphology, a slow drift and white
noise are added, and every channel opens with a band-limited motion burst.

Non-healthy patients differ from healthy ones only through
``class_separation``: a larger inhale ratio, stronger harmonics and a
scene-dependent lag of the secondary channels. Breath rate and amplitude are
drawn from per-class ranges that default to the same values, so a classifier
cannot succeed on rate or loudness alone.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from scipy import signal as sps

from cohort.models import (
    SCENE_ORDER, Dataset, DiseaseClass, Label, PatientRecord, RawRecording, ScenePosition, Sex,
)
from screening.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

GRAVITY = 9.81

DEFAULT_AMPLITUDE = {
    ScenePosition.LX1: (0.08, 0.12),
    ScenePosition.RX1: (0.08, 0.12),
    ScenePosition.M1: (0.06, 0.10),
    ScenePosition.T1: (0.10, 0.16),
    ScenePosition.L1: (0.08, 0.14),
}

# Share of the clinical non-healthy group per disease class.
DEFAULT_DISEASE_MIX = {
    DiseaseClass.VALVULAR_INSUFFICIENCY: 32,
    DiseaseClass.CORONARY_ARTERY_DISEASE: 17,
    DiseaseClass.AORTIC_ANEURYSM: 2,
    DiseaseClass.UNSPECIFIED: 5,
}

# Coupling of the respiratory waveform into the secondary channels
# (gx, gz, ax, ay, az) relative to the gyro-y amplitude, and their phase
# offsets in radians.
SECONDARY_COUPLING = np.array([0.35, 0.25, 0.05, 0.08, 0.12])
SECONDARY_OFFSET = np.array([0.3, -0.2, 0.5, 0.1, -0.4])

# Phone tilt per scene: gravity direction in the device frame.
SCENE_TILT = {
    ScenePosition.LX1: (0.12, -0.05),
    ScenePosition.RX1: (-0.12, -0.05),
    ScenePosition.M1: (0.0, -0.08),
    ScenePosition.T1: (0.03, 0.10),
    ScenePosition.L1: (-0.03, 0.15),
}

BASE_INHALE_RATIO = 0.55
SEPARATION_INHALE_GAIN = 0.2
BASE_HARMONIC = 0.03
SEPARATION_HARMONIC_GAIN = 0.07
SEPARATION_LAG = np.pi / 10


@dataclass(frozen=True)
class CohortSpec:
    n_healthy: int = 10
    n_nonhealthy: int = 10
    breath_rate_hz: dict = field(default_factory=lambda: {
        Label.HEALTHY: (0.20, 0.30), Label.NON_HEALTHY: (0.20, 0.30)})
    amplitude: dict = field(default_factory=lambda: {
        Label.HEALTHY: dict(DEFAULT_AMPLITUDE), Label.NON_HEALTHY: dict(DEFAULT_AMPLITUDE)})
    class_separation: float = 1.0
    transient_duration_s: float = 5.0
    noise_std: float = 0.01
    seed: int = 0
    sample_rate_hz: float = 50.0
    duration_s: float = 20.0
    disease_mix: dict = field(default_factory=lambda: dict(DEFAULT_DISEASE_MIX))
    age_range: tuple = (30, 80)
    height_range_cm: tuple = (155.0, 190.0)
    weight_range_kg: tuple = (50.0, 100.0)

    def __post_init__(self):
        object.__setattr__(self, 'breath_rate_hz', {
            Label(label): tuple(bounds) for label, bounds in self.breath_rate_hz.items()})
        object.__setattr__(self, 'amplitude', {
            Label(label): {ScenePosition(scene): tuple(bounds) for scene, bounds in per_scene.items()}
            for label, per_scene in self.amplitude.items()})
        object.__setattr__(self, 'disease_mix', {
            DiseaseClass(disease): weight for disease, weight in self.disease_mix.items()})
        errors = []
        if set(self.breath_rate_hz) != set(Label) or set(self.amplitude) != set(Label):
            errors.append('breath_rate_hz and amplitude need an entry per label')
        elif any(set(per_scene) != set(SCENE_ORDER) for per_scene in self.amplitude.values()):
            errors.append('amplitude needs a range for every scene')
        if self.n_healthy < 0 or self.n_nonhealthy < 0:
            errors.append('patient counts must be non-negative')
        if not 0.0 <= self.class_separation <= 1.0:
            errors.append('class_separation must lie in [0, 1]')
        if self.noise_std < 0 or self.transient_duration_s < 0:
            errors.append('noise_std and transient_duration_s must be non-negative')
        if self.sample_rate_hz <= 0 or self.duration_s <= 0:
            errors.append('sample_rate_hz and duration_s must be positive')
        ranges = [*self.breath_rate_hz.values(), self.age_range,
                  self.height_range_cm, self.weight_range_kg]
        for per_scene in self.amplitude.values():
            ranges.extend(per_scene.values())
        for low, high in ranges:
            if not 0 < low <= high:
                errors.append(f'range ({low}, {high}) must be positive and ordered')
        nyquist = self.sample_rate_hz / 2
        if any(high >= nyquist / 3 for _, high in self.breath_rate_hz.values()):
            errors.append('breath rate harmonics must stay below the Nyquist frequency')
        if errors:
            raise ConfigurationError(section='cohort', errors='; '.join(errors))

    @classmethod
    def from_settings(cls, **overrides):
        acquisition = settings.SCREENING['ACQUISITION']
        defaults = {
            'sample_rate_hz': acquisition['SAMPLE_RATE_HZ'],
            'duration_s': acquisition['SCENE_DURATION_S'],
            'transient_duration_s': settings.SCREENING['DSP']['TRIM_S'],
            'seed': settings.SCREENING['SEED'],
        }
        defaults.update(overrides)
        return cls(**defaults)

    @property
    def n_samples(self):
        return int(round(self.duration_s * self.sample_rate_hz))


def disease_counts(n_nonhealthy, mix):
    """Apportion ``n_nonhealthy`` over disease classes by largest remainder."""
    classes = list(mix)
    weights = np.array([mix[c] for c in classes], dtype=float)
    if n_nonhealthy == 0 or weights.sum() == 0:
        return {c: 0 for c in classes}
    quotas = n_nonhealthy * weights / weights.sum()
    counts = np.floor(quotas).astype(int)
    order = np.argsort(-(quotas - counts), kind='stable')
    counts[order[:n_nonhealthy - counts.sum()]] += 1
    return dict(zip(classes, counts.tolist()))


def skewed_phase(theta, inhale_ratio):
    """Warp a linear phase so inhalation spans ``inhale_ratio`` of the cycle."""
    u = np.mod(theta, 2 * np.pi) / (2 * np.pi)
    return np.where(
        u < inhale_ratio,
        np.pi * u / inhale_ratio,
        np.pi + np.pi * (u - inhale_ratio) / (1 - inhale_ratio),
    )


def respiratory_waveform(theta, inhale_ratio, harmonic):
    """
    Unit-amplitude breathing waveform: minimum at inhalation onset, maximum
    at the end of inhalation. The third harmonic is half the second, which
    keeps the waveform monotone on each half-cycle for ``harmonic < 0.11``.
    """
    psi = skewed_phase(theta, inhale_ratio)
    return -np.cos(psi) + harmonic * np.cos(2 * psi) + 0.5 * harmonic * np.cos(3 * psi)


def cycle_boundaries(rate_hz, phase0, inhale_ratio, n_samples, sample_rate_hz):
    """Sample indices of the gyro-y maxima of the noiseless respiratory component."""
    duration = n_samples / sample_rate_hz
    first = int(np.floor((phase0 / (2 * np.pi)) - inhale_ratio)) - 1
    last = int(np.ceil(rate_hz * duration + phase0 / (2 * np.pi))) + 1
    times = [(k + inhale_ratio - phase0 / (2 * np.pi)) / rate_hz for k in range(first, last + 1)]
    indices = sorted({int(round(t * sample_rate_hz)) for t in times if 0 <= t < duration})
    return tuple(i for i in indices if i < n_samples)


def transient_burst(rng, n_samples, spec, scale):
    n_transient = int(round(spec.transient_duration_s * spec.sample_rate_hz))
    if n_transient == 0:
        return np.zeros((n_samples, 6))
    high = min(5.0, 0.45 * spec.sample_rate_hz)
    b, a = sps.butter(2, [1.0, high], btype='bandpass', fs=spec.sample_rate_hz)
    noise = rng.normal(size=(n_samples + 100, 6))
    burst = sps.filtfilt(b, a, noise, axis=0)[50:50 + n_samples]
    burst /= np.std(burst[:n_transient], axis=0, keepdims=True) + 1e-12
    envelope = np.zeros(n_samples)
    ramp = np.cos(np.linspace(0, np.pi / 2, min(n_transient, n_samples))) ** 2
    envelope[:len(ramp)] = ramp
    return burst * envelope[:, None] * scale


def _scene_recording(rng, spec, scene, scene_index, label, rate_hz):
    separation = spec.class_separation if label == Label.NON_HEALTHY else 0.0
    inhale_ratio = BASE_INHALE_RATIO + SEPARATION_INHALE_GAIN * separation
    harmonic = BASE_HARMONIC + SEPARATION_HARMONIC_GAIN * separation
    lag = SEPARATION_LAG * (scene_index + 1) * separation

    n = spec.n_samples
    t = np.arange(n) / spec.sample_rate_hz
    low, high = spec.amplitude[label][scene]
    amplitude = rng.uniform(low, high)
    phase0 = rng.uniform(0, 2 * np.pi)
    theta = 2 * np.pi * rate_hz * t + phase0

    gyro_y = amplitude * respiratory_waveform(theta, inhale_ratio, harmonic)
    drift_rate = rng.uniform(0.02, 0.05)
    gyro_y += 0.05 * amplitude * np.sin(2 * np.pi * drift_rate * t + rng.uniform(0, 2 * np.pi))

    secondary = np.stack([
        coupling * amplitude * respiratory_waveform(theta - offset - lag, inhale_ratio, harmonic)
        for coupling, offset in zip(SECONDARY_COUPLING, SECONDARY_OFFSET)
    ], axis=1)

    tilt_x, tilt_y = SCENE_TILT[scene]
    gravity = GRAVITY * np.array([tilt_x, tilt_y, np.sqrt(1 - tilt_x ** 2 - tilt_y ** 2)])

    signals = np.empty((n, 6))
    signals[:, 0] = secondary[:, 0]
    signals[:, 1] = gyro_y
    signals[:, 2] = secondary[:, 1]
    signals[:, 3:] = secondary[:, 2:] + gravity
    signals += rng.normal(scale=spec.noise_std, size=signals.shape) if spec.noise_std else 0.0
    scale = np.array([5 * amplitude] * 3 + [0.5] * 3)
    signals += transient_burst(rng, n, spec, scale)

    boundaries = cycle_boundaries(rate_hz, phase0, inhale_ratio, n, spec.sample_rate_hz)
    recording = RawRecording.from_signals(scene, spec.sample_rate_hz, signals)
    return recording, boundaries


def generate_cohort(spec):
    """
    Build a deterministic synthetic :class:`Dataset` from ``spec``.

    Each patient gets the five scenes; the dataset's ``ground_truth`` maps
    patient id to scene to the sample indices of true cycle boundaries.
    """
    n_total = spec.n_healthy + spec.n_nonhealthy
    if n_total == 0:
        return Dataset()

    root = np.random.SeedSequence(spec.seed)
    layout_rng = np.random.default_rng(root.spawn(1)[0])
    diseases = [DiseaseClass.NONE] * spec.n_healthy
    for disease, count in disease_counts(spec.n_nonhealthy, spec.disease_mix).items():
        diseases.extend([DiseaseClass(disease)] * count)
    diseases = [diseases[i] for i in layout_rng.permutation(n_total)]

    patients, truth = [], {}
    for index, (disease, seed) in enumerate(zip(diseases, root.spawn(n_total + 1)[1:])):
        rng = np.random.default_rng(seed)
        label = Label.HEALTHY if disease == DiseaseClass.NONE else Label.NON_HEALTHY
        patient_id = f'P{index + 1:04d}'
        rate_hz = rng.uniform(*spec.breath_rate_hz[label])
        recordings, bounds = {}, {}
        for scene_index, scene in enumerate(SCENE_ORDER):
            recordings[scene], bounds[scene.value] = _scene_recording(
                rng, spec, scene, scene_index, label, rate_hz)
        patients.append(PatientRecord(
            patient_id=patient_id,
            label=label,
            disease_class=disease,
            age=int(rng.integers(spec.age_range[0], spec.age_range[1] + 1)),
            sex=Sex.MALE if rng.random() < 0.5 else Sex.FEMALE,
            height_cm=round(float(rng.uniform(*spec.height_range_cm)), 1),
            weight_kg=round(float(rng.uniform(*spec.weight_range_kg)), 1),
            recordings=recordings,
        ))
        truth[patient_id] = bounds

    logger.info('synth.cohort healthy=%d nonhealthy=%d separation=%.2f seed=%d',
                spec.n_healthy, spec.n_nonhealthy, spec.class_separation, spec.seed)
    return Dataset(patients=tuple(patients), ground_truth=truth)
