import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from cohort.exceptions import EmptyDataset
from cohort.models import SCENE_ORDER, DiseaseClass, Label, Sex

DEMOGRAPHICS_NAME = 'demographics.csv'
SUMMARY_NAME = 'dataset_summary.json'


@dataclass(frozen=True)
class Moments:
    mean: float
    sd: float

    @classmethod
    def of(cls, values):
        if len(values) == 0:
            return None
        values = np.asarray(values, dtype=float)
        return cls(mean=float(values.mean()), sd=float(values.std(ddof=0)))

    def __str__(self):
        return f'{self.mean:.1f} ± {self.sd:.1f}'


@dataclass(frozen=True)
class GroupSummary:
    count: int
    sex: dict
    age: Optional[Moments]
    height_cm: Optional[Moments]
    weight_kg: Optional[Moments]

    @classmethod
    def of(cls, patients):
        sexes = Counter(p.sex.value for p in patients)
        return cls(
            count=len(patients),
            sex={sex.value: sexes.get(sex.value, 0) for sex in Sex},
            age=Moments.of([p.age for p in patients]),
            height_cm=Moments.of([p.height_cm for p in patients]),
            weight_kg=Moments.of([p.weight_kg for p in patients]),
        )


@dataclass(frozen=True)
class DemographicSummary:
    by_label: dict
    by_disease: dict
    recordings_per_scene: dict
    cycles_per_scene: Optional[dict] = None
    examples_per_label: Optional[dict] = None

    def rows(self):
        """Flat rows for tabular output: one per label and disease group."""
        groups = [('label', key, group) for key, group in self.by_label.items()]
        groups += [('disease_class', key, group) for key, group in self.by_disease.items()]
        rows = []
        for kind, key, group in groups:
            row = {'group': kind, 'value': key, 'count': group.count, **group.sex}
            for name in ('age', 'height_cm', 'weight_kg'):
                moments = getattr(group, name)
                row[f'{name}_mean'] = moments.mean if moments else None
                row[f'{name}_sd'] = moments.sd if moments else None
            if kind == 'label' and self.examples_per_label is not None:
                row.update(self.examples_per_label[key])
            rows.append(row)
        return rows

    def to_dict(self):
        return {
            'groups': self.rows(),
            'recordings_per_scene': dict(self.recordings_per_scene),
            'cycles_per_scene': self.cycles_per_scene,
            'examples_per_label': self.examples_per_label,
        }


def dataset_summary(dataset, segmentations=None):
    """
    Per-label and per-disease counts with mean ± sd of age, height and weight
    (population standard deviation). Empty groups report ``count == 0`` and no
    moments.

    ``segmentations``, when given, adds the segmented cycles of each scene and,
    per label, both the aligned example count and the number of patients that
    contributed at least one example.
    """
    if len(dataset) == 0:
        raise EmptyDataset()
    patients = list(dataset.patients)
    by_label = {label.value: GroupSummary.of([p for p in patients if p.label == label])
                for label in Label}
    by_disease = {disease.value: GroupSummary.of([p for p in patients if p.disease_class == disease])
                  for disease in DiseaseClass}
    recordings = {scene.value: sum(1 for p in patients if scene in p.recordings)
                  for scene in SCENE_ORDER}
    cycles = per_label = None
    if segmentations is not None:
        segmentations = list(segmentations)
        cycles = {scene.value: sum(s.cycles_per_scene.get(scene.value, 0) for s in segmentations)
                  for scene in SCENE_ORDER}
        labels = {p.patient_id: Label(p.label).value for p in patients}
        per_label = {label.value: {'patients_with_examples': 0, 'examples': 0} for label in Label}
        for segmentation in segmentations:
            if segmentation.examples:
                counts = per_label[labels[segmentation.patient_id]]
                counts['patients_with_examples'] += 1
                counts['examples'] += len(segmentation.examples)
    return DemographicSummary(by_label=by_label, by_disease=by_disease, recordings_per_scene=recordings,
                              cycles_per_scene=cycles, examples_per_label=per_label)


def write_summary(summary, out_dir):
    """``demographics.csv`` (one row per group) and ``dataset_summary.json`` under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(summary.rows()).to_csv(out_dir / DEMOGRAPHICS_NAME, index=False, lineterminator='\n')
    (out_dir / SUMMARY_NAME).write_text(json.dumps(summary.to_dict(), indent=2, sort_keys=True) + '\n')
    return out_dir
