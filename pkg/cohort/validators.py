import math

import numpy as np
from django.core.exceptions import ValidationError


def validate_positive(value):
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"Expected a positive finite number, got {value}",
                              code='not_positive')


def validate_finite(values, name):
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{name} contains non-finite samples", code='non_finite')


def validate_imu_channels(gyro, accel):
    if gyro.ndim != 2 or gyro.shape[1] != 3:
        raise ValidationError(f"gyro must be n x 3, got shape {gyro.shape}", code='bad_shape')
    if accel.ndim != 2 or accel.shape[1] != 3:
        raise ValidationError(f"accel must be n x 3, got shape {accel.shape}", code='bad_shape')
    if len(gyro) != len(accel):
        raise ValidationError(
            f"gyro and accel lengths differ ({len(gyro)} != {len(accel)})", code='length_mismatch')
    if len(gyro) < 1:
        raise ValidationError("recording has no samples", code='empty')


def validate_label_disease(label, disease_class):
    healthy = label == 'H'
    if healthy != (disease_class == 'None'):
        raise ValidationError(
            f"label {label} is inconsistent with disease class {disease_class}",
            code='label_disease_mismatch')


def validate_timestamps(t, sample_rate_hz, rtol=0.01):
    validate_finite(t, 'timestamps')
    if len(t) < 2:
        return
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise ValidationError("timestamps are not strictly increasing", code='non_monotonic')
    nominal = 1.0 / sample_rate_hz
    if abs(np.median(steps) - nominal) > rtol * nominal:
        raise ValidationError(
            f"median sample spacing {np.median(steps):.6f}s does not match "
            f"{sample_rate_hz} Hz", code='sample_rate_mismatch')
