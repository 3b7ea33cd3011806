import numpy as np
from scipy.signal import find_peaks

from breathing.models import PeakSet


def _local_extrema(x, min_distance, min_prominence):
    # plateau_size=1 exposes the plateau edges; a flat top is reported at its
    # first sample.
    _, properties = find_peaks(
        x,
        distance=max(1, int(min_distance)),
        prominence=min_prominence if min_prominence > 0 else None,
        plateau_size=1,
    )
    return properties['left_edges'].tolist()


def enforce_alternation(x, maxima, minima):
    """Drop the lesser of two consecutive same-kind extrema until kinds alternate."""
    events = sorted([(i, 1) for i in maxima] + [(i, -1) for i in minima])
    kept = []
    for index, kind in events:
        if kept and kept[-1][1] == kind:
            previous = kept[-1][0]
            if kind * x[index] > kind * x[previous]:
                kept[-1] = (index, kind)
            continue
        kept.append((index, kind))
    return ([i for i, kind in kept if kind == 1],
            [i for i, kind in kept if kind == -1])


def detect_peaks(filtered_gy, min_distance=1, min_prominence=0.0):
    """
    Local maxima and minima of a smoothed gyro-y trace.

    A maximum is a sample strictly above both neighbours; consecutive maxima
    are at least ``min_distance`` samples apart and each has prominence of at
    least ``min_prominence``. Minima are found the same way on the negated
    signal, then merged so the two kinds strictly alternate.
    """
    x = np.asarray(filtered_gy, dtype=np.float64)
    if x.ndim != 1 or len(x) < 3:
        return PeakSet()
    maxima = _local_extrema(x, min_distance, min_prominence)
    minima = _local_extrema(-x, min_distance, min_prominence)
    maxima, minima = enforce_alternation(x, maxima, minima)
    return PeakSet(maxima=maxima, minima=minima)
