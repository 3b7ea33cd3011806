"""
On-disk dataset format.

A dataset directory holds ``manifest.json`` (one record per patient with
demographics and the relative path of each scene's signal file), one
columnar signal file per patient and scene with the header
``t,gx,gy,gz,ax,ay,az``, and optionally ``ground_truth.json`` with the
generator's cycle boundaries.
"""
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.exceptions import ValidationError

from cohort.exceptions import ManifestInvalid, ManifestNotFound, SignalFileError
from cohort.models import CHANNELS, Dataset, LoadDiagnostic, PatientRecord, RawRecording, ScenePosition
from cohort.serializers import ManifestEntrySerializer
from cohort.validators import validate_timestamps

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
GROUND_TRUTH_NAME = 'ground_truth.json'
FORMAT_VERSION = 1
SIGNAL_COLUMNS = ['t', *CHANNELS]


def read_signal_file(path, scene, sample_rate_hz):
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except FileNotFoundError as exc:
        raise SignalFileError(path, detail=f'signal file "{path}" does not exist.',
                              code='signal_file_missing') from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError, ValueError) as exc:
        raise SignalFileError(path, detail=f'signal file "{path}" is unreadable: {exc}') from exc
    except OSError as exc:
        raise SignalFileError(path, detail=f'signal file "{path}" cannot be read: {exc.strerror or exc}',
                              code='signal_file_unreadable') from exc

    if list(frame.columns) != SIGNAL_COLUMNS:
        raise SignalFileError(
            path, detail=f'signal file "{path}" has header {list(frame.columns)}, '
                         f'expected {SIGNAL_COLUMNS}.', code='bad_header')
    try:
        values = frame.to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SignalFileError(path, detail=f'signal file "{path}" has non-numeric cells.') from exc
    try:
        validate_timestamps(values[:, 0], sample_rate_hz)
        return RawRecording.from_signals(scene, sample_rate_hz, values[:, 1:])
    except ValidationError as exc:
        raise SignalFileError(path, detail=f'signal file "{path}": {" ".join(exc.messages)}',
                              code=exc.code or 'signal_file_invalid') from exc


def write_signal_file(recording, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(recording.signals, columns=list(CHANNELS))
    frame.insert(0, 't', recording.timestamps)
    frame.to_csv(path, index=False, lineterminator='\n')


def read_ground_truth(path, patient_ids):
    """
    Cycle boundaries of the loaded patients from ``path``, and a dataset-level
    :class:`LoadDiagnostic` when the file exists but cannot be used.
    """
    if not path.is_file():
        return {}, None
    try:
        truth = json.loads(path.read_text())
        if not isinstance(truth, dict) or not all(isinstance(v, dict) for v in truth.values()):
            raise ValueError('expected {patient_id: {scene: [boundaries]}}')
        bounds = {pid: {scene: tuple(int(b) for b in values) for scene, values in per_scene.items()}
                  for pid, per_scene in truth.items() if pid in patient_ids}
    except (OSError, UnicodeDecodeError, ValueError, TypeError) as exc:
        logger.warning('load.ground_truth_ignored path=%s error=%s', path, exc)
        return {}, LoadDiagnostic('', str(path), 'ground_truth_invalid', f'ground truth ignored: {exc}')
    return bounds, None


def load_dataset(root):
    """
    Load every patient listed in ``root/manifest.json``.

    A missing or unparsable manifest is fatal. Per-patient problems never
    abort the load: invalid manifest entries and malformed signal files drop
    the patient, missing scenes keep it but flag it non-trainable, and each
    case leaves a :class:`LoadDiagnostic` on the returned dataset.
    """
    root = Path(root)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise ManifestNotFound(root)
    try:
        manifest = json.loads(manifest_path.read_text())
        entries = manifest['patients']
    except (OSError, json.JSONDecodeError, KeyError, TypeError, UnicodeDecodeError) as exc:
        raise ManifestInvalid(manifest_path) from exc
    if not isinstance(entries, list):
        raise ManifestInvalid(manifest_path, detail=f'"patients" in {manifest_path} must be a list.')

    patients, diagnostics, seen = [], [], set()
    for position, entry in enumerate(entries):
        patient_id = entry.get('patient_id', f'#{position}') if isinstance(entry, dict) else f'#{position}'
        serializer = ManifestEntrySerializer(data=entry)
        if not serializer.is_valid():
            diagnostics.append(LoadDiagnostic(str(patient_id), str(manifest_path),
                                              'invalid_manifest_entry', json.dumps(serializer.errors)))
            continue
        data = serializer.validated_data
        if data['patient_id'] in seen:
            diagnostics.append(LoadDiagnostic(data['patient_id'], str(manifest_path),
                                              'duplicate_patient', 'patient listed twice; later entry ignored'))
            continue
        seen.add(data['patient_id'])

        recordings, failure = {}, None
        for tag, relative in data['scenes'].items():
            scene = ScenePosition(tag)
            try:
                recordings[scene] = read_signal_file(root / relative, scene, data['sample_rate_hz'])
            except SignalFileError as exc:
                failure = LoadDiagnostic(data['patient_id'], str(root / relative), exc.code, exc.detail)
                break
        if failure is not None:
            diagnostics.append(failure)
            logger.warning('load.skip patient=%s code=%s', failure.patient_id, failure.code)
            continue

        patient = PatientRecord(
            patient_id=data['patient_id'], label=data['label'], disease_class=data['disease_class'],
            age=data['age'], sex=data['sex'], height_cm=data['height_cm'],
            weight_kg=data['weight_kg'], recordings=recordings,
        )
        if not patient.trainable:
            missing = ','.join(scene.value for scene in patient.missing_scenes)
            diagnostics.append(LoadDiagnostic(patient.patient_id, str(manifest_path), 'missing_scenes',
                                              f'scenes {missing} absent; patient is not trainable'))
            logger.warning('load.flag patient=%s missing=%s', patient.patient_id, missing)
        patients.append(patient)

    ground_truth, failure = read_ground_truth(root / GROUND_TRUTH_NAME, {p.patient_id for p in patients})
    if failure is not None:
        diagnostics.append(failure)

    logger.info('load.done root=%s patients=%d diagnostics=%d', root, len(patients), len(diagnostics))
    return Dataset(patients=tuple(patients), diagnostics=tuple(diagnostics), ground_truth=ground_truth)


def scene_path(patient_id, scene):
    return f'{patient_id}/{ScenePosition(scene).value}.csv'


def save_dataset(dataset, root):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for patient in dataset.patients:
        scenes = {}
        sample_rate = 50.0
        for scene, recording in patient.recordings.items():
            relative = scene_path(patient.patient_id, scene)
            write_signal_file(recording, root / relative)
            scenes[scene.value] = relative
            sample_rate = recording.sample_rate_hz
        entries.append({**patient.metadata(), 'sample_rate_hz': sample_rate, 'scenes': scenes})

    manifest = {'version': FORMAT_VERSION, 'patients': entries}
    (root / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + '\n')
    if dataset.ground_truth:
        truth = {pid: {scene: list(bounds) for scene, bounds in per_scene.items()}
                 for pid, per_scene in dataset.ground_truth.items()}
        (root / GROUND_TRUTH_NAME).write_text(json.dumps(truth, indent=2, sort_keys=True) + '\n')
    logger.info('save.done root=%s patients=%d', root, len(dataset))
    return root
