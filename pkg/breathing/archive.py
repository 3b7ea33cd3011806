"""
Cycle archive: one columnar file per patient example plus ``cycles.json``.

Example files have one row per resampled time step and one column per scene
and channel (``Lx1_gx`` ... ``L1_az``). The index lists each example with its
patient metadata, source windows and inhale/exhale boundaries.
"""
import json
from pathlib import Path

import numpy as np
import pandas as pd

from breathing.segmentation import segment_patient
from cohort.models import CHANNELS, SCENE_ORDER, BreathingCycle, PatientExample
from cohort.storage import load_dataset

INDEX_NAME = 'cycles.json'
COLUMNS = [f'{scene.value}_{channel}' for scene in SCENE_ORDER for channel in CHANNELS]


def write_cycle_archive(segmentations, records, root, settings_used=None):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    index = []
    for segmentation in segmentations:
        record = records[segmentation.patient_id]
        for example in segmentation.examples:
            relative = f'{example.patient_id}/cycle_{example.cycle_index:03d}.csv'
            values = np.concatenate([example.scenes[scene].channels.T for scene in SCENE_ORDER], axis=1)
            path = root / relative
            path.parent.mkdir(parents=True, exist_ok=True)
            pd.DataFrame(values, columns=COLUMNS).to_csv(path, index=False, lineterminator='\n')
            index.append({
                **record.metadata(),
                'cycle_index': example.cycle_index,
                'file': relative,
                'source_windows': {s.value: list(example.scenes[s].source_window) for s in SCENE_ORDER},
                'phase_bounds': {s.value: example.scenes[s].phase_bounds for s in SCENE_ORDER},
            })
    flagged = [s.patient_id for s in segmentations if s.flagged]
    payload = {'dsp': settings_used or {}, 'examples': index, 'flagged': flagged}
    (root / INDEX_NAME).write_text(json.dumps(payload, indent=2) + '\n')
    return root


def read_cycle_archive(root):
    root = Path(root)
    payload = json.loads((root / INDEX_NAME).read_text())
    examples = []
    for entry in payload['examples']:
        frame = pd.read_csv(root / entry['file'], float_precision='round_trip')
        values = frame[COLUMNS].to_numpy(dtype=np.float64)
        scenes = {}
        for j, scene in enumerate(SCENE_ORDER):
            block = values[:, j * len(CHANNELS):(j + 1) * len(CHANNELS)]
            scenes[scene] = BreathingCycle(scene=scene, channels=block.T,
                                           source_window=tuple(entry['source_windows'][scene.value]),
                                           phase_bounds=entry['phase_bounds'][scene.value])
        examples.append(PatientExample(
            patient_id=entry['patient_id'], label=entry['label'], cycle_index=entry['cycle_index'],
            scenes=scenes,
            demographics=(float(entry['age']), float(entry['height_cm']), float(entry['weight_kg'])),
        ))
    return tuple(examples)


def load_examples(path, cfg):
    """
    Patient examples from either a cycle archive or a dataset directory; a
    dataset is segmented with ``cfg`` (trainable patients only).
    """
    path = Path(path)
    if (path / INDEX_NAME).is_file():
        return read_cycle_archive(path)
    dataset = load_dataset(path).trainable()
    return tuple(e for patient in dataset for e in segment_patient(patient, cfg).examples)
