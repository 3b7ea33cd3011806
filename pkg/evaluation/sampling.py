import logging
from itertools import combinations

import numpy as np

from cohort.models import Dataset, Label

logger = logging.getLogger(__name__)


def undersample(dataset, seed):
    """
    Balance the classes by removing uniformly chosen patients of the
    majority class. Returns ``(balanced, holdout)``; the removed patients
    form the holdout. Deterministic per seed.
    """
    healthy = sorted(p.patient_id for p in dataset if p.label == Label.HEALTHY)
    nonhealthy = sorted(p.patient_id for p in dataset if p.label == Label.NON_HEALTHY)
    if len(healthy) == len(nonhealthy):
        return dataset, Dataset()
    majority, minority = (healthy, nonhealthy) if len(healthy) > len(nonhealthy) else (nonhealthy, healthy)
    rng = np.random.default_rng(seed)
    removed = sorted(rng.choice(majority, size=len(majority) - len(minority), replace=False).tolist())
    kept = sorted(set(dataset.patient_ids) - set(removed))
    logger.info('undersample seed=%s kept=%d holdout=%d', seed, len(kept), len(removed))
    return dataset.subset(kept), dataset.subset(removed)


def duplicate_holdouts(holdouts):
    """Pairs of seeds whose holdout sets are identical."""
    return [(a, b) for (a, ids_a), (b, ids_b) in combinations(sorted(holdouts.items()), 2)
            if set(ids_a) == set(ids_b)]
