import math
from collections import Counter

from sklearn.model_selection import train_test_split


def stratified_split(patient_ids, labels, validation_fraction=0.25, seed=0):
    """
    Split patients into ``(train_ids, val_ids)`` stratified by label.

    ``ceil(validation_fraction * n)`` patients go to validation, allocated
    across classes by largest remainder, so on a cohort whose classes differ
    by at most one patient both parts stay within one patient of 50/50.
    Classes with a single member cannot be stratified; the split is then a
    plain seeded shuffle.
    """
    pairs = sorted(zip(patient_ids, (str(label) for label in labels)))
    ids = [pid for pid, _ in pairs]
    y = [label for _, label in pairs]
    if len(ids) < 2 or validation_fraction <= 0:
        return tuple(ids), ()

    counts = Counter(y)
    n_val = max(1, math.ceil(validation_fraction * len(ids)))
    stratify = y if min(counts.values()) >= 2 else None
    if stratify is not None:
        n_val = min(max(n_val, len(counts)), len(ids) - len(counts))
    n_val = min(n_val, len(ids) - 1)
    train, val = train_test_split(ids, test_size=n_val, stratify=stratify, random_state=seed, shuffle=True)
    return tuple(sorted(train)), tuple(sorted(val))
