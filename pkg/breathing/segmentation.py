"""
Recording -> breathing cycles.

Each scene is trimmed of its placement transient, its gyro-y is low-pass
filtered and scanned for extrema, and the *unfiltered* six channels are cut
from one maximum to the next and resampled to a fixed length. Cycles of the
five scenes are then aligned by ordinal into patient examples.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import iqr

from breathing.exceptions import IncompleteSession, RecordingTooShort
from breathing.filters import lowpass_fft, lowpass_fft_reflect, resample_fft
from breathing.peaks import detect_peaks
from cohort.models import GYRO_Y, SCENE_ORDER, BreathingCycle, PatientExample

logger = logging.getLogger(__name__)

# Absolute prominence floor; keeps FFT round-off on flat traces from
# registering as peaks.
PROMINENCE_FLOOR = 1e-9


def trim_transient(recording, trim_s):
    """Drop the first ``floor(trim_s * sample_rate)`` samples of every channel."""
    if recording.duration <= trim_s:
        raise RecordingTooShort(recording.duration, trim_s)
    n_trim = math.floor(trim_s * recording.sample_rate_hz)
    if n_trim == 0:
        return recording
    return recording.with_signals(recording.signals[n_trim:])


def scene_peaks(recording, cfg):
    """Filtered gyro-y and its extrema for an already trimmed recording."""
    lowpass = lowpass_fft_reflect if cfg.reflect_edges else lowpass_fft
    filtered = lowpass(recording.signals[:, GYRO_Y], cfg.filter_spec(recording.sample_rate_hz))
    threshold = max(cfg.min_prominence * iqr(filtered), PROMINENCE_FLOOR)
    min_distance = max(1, int(round(cfg.min_distance_s * recording.sample_rate_hz)))
    return filtered, detect_peaks(filtered, min_distance=min_distance, min_prominence=threshold)


def window_cycles(recording, peaks, target_len=300, offset=0):
    """
    One :class:`BreathingCycle` per pair of consecutive maxima.

    Windows are ``[max_k, max_k+1)`` on the raw channels, resampled to
    ``target_len``. ``phase_bounds`` is the enclosed minimum in resampled
    coordinates; ``source_window`` is shifted by ``offset`` so it indexes the
    untrimmed recording.
    """
    maxima = peaks.maxima
    if len(maxima) < 2:
        return ()
    signals = recording.signals
    minima = np.asarray(peaks.minima, dtype=int)
    cycles = []
    for start, end in zip(maxima[:-1], maxima[1:]):
        resampled = resample_fft(signals[start:end], target_len, axis=0)
        enclosed = minima[(minima > start) & (minima < end)]
        phase = None
        if len(enclosed):
            phase = int(round((enclosed[0] - start) * target_len / (end - start)))
        cycles.append(BreathingCycle(
            scene=recording.scene,
            channels=resampled.T,
            source_window=(int(start) + offset, int(end) + offset),
            phase_bounds=phase,
        ))
    return tuple(cycles)


@dataclass(frozen=True)
class PatientSegmentation:
    patient_id: str
    examples: tuple = ()
    cycles_per_scene: dict = field(default_factory=dict)
    flagged: bool = False
    reason: str = ''


def segment_patient(record, cfg, standardizer=None):
    """Segment all five scenes of ``record`` and align them by cycle ordinal."""
    if not record.trainable:
        raise IncompleteSession(record.patient_id, [s.value for s in record.missing_scenes])

    per_scene = {}
    for scene in SCENE_ORDER:
        raw = record.recordings[scene]
        try:
            trimmed = trim_transient(raw, cfg.trim_s)
        except RecordingTooShort as exc:
            logger.warning('segment.flag patient=%s scene=%s code=%s', record.patient_id, scene, exc.code)
            per_scene[scene] = ()
            continue
        _, peaks = scene_peaks(trimmed, cfg)
        offset = raw.n_samples - trimmed.n_samples
        per_scene[scene] = window_cycles(trimmed, peaks, cfg.target_len, offset=offset)

    counts = {scene.value: len(cycles) for scene, cycles in per_scene.items()}
    n_examples = min(counts.values())
    if n_examples < 1:
        empty = [scene for scene, count in counts.items() if count == 0]
        logger.warning('segment.flag patient=%s empty_scenes=%s', record.patient_id, ','.join(empty))
        return PatientSegmentation(record.patient_id, (), counts, True,
                                   f'no breathing cycle found in scenes {",".join(empty)}')

    examples = []
    for k in range(n_examples):
        example = PatientExample(
            patient_id=record.patient_id,
            label=record.label,
            cycle_index=k,
            scenes={scene: per_scene[scene][k] for scene in SCENE_ORDER},
            demographics=record.demographics,
        )
        examples.append(standardizer.apply(example) if standardizer is not None else example)
    logger.debug('segment.done patient=%s cycles=%s examples=%d', record.patient_id, counts, n_examples)
    return PatientSegmentation(record.patient_id, tuple(examples), counts)


def preprocess_patient(record, cfg, standardizer=None):
    """Aligned :class:`PatientExample` tuple for ``record`` (empty when flagged)."""
    return segment_patient(record, cfg, standardizer).examples


def window_iou(a, b):
    overlap = max(0, min(a[1], b[1]) - max(a[0], b[0]))
    union = max(a[1], b[1]) - min(a[0], b[0])
    return overlap / union if union > 0 else 0.0


def segmentation_iou(windows, boundaries):
    """Best IoU of each detected window against the true cycles ``[b_k, b_k+1)``."""
    truth = list(zip(boundaries[:-1], boundaries[1:]))
    return [max((window_iou(w, t) for t in truth), default=0.0) for w in windows]
