import numpy as np

EPSILON = 1e-7


def _weights(weights, size):
    return np.ones(size) if weights is None else np.asarray(weights, dtype=np.float64).reshape(size)


def bce_loss(p, y, weights=None):
    """
    Binary cross-entropy ``-[y ln p + (1 - y) ln(1 - p)]`` with ``p`` clamped
    to ``[EPSILON, 1 - EPSILON]``; the mean over a batch when given arrays,
    each term scaled by ``weights`` when given.
    """
    p = np.clip(np.asarray(p, dtype=np.float64), EPSILON, 1.0 - EPSILON)
    y = np.asarray(y, dtype=np.float64)
    losses = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return float(np.mean(_weights(weights, losses.size) * losses.reshape(-1)))


def bce_logit_gradient(p, y, weights=None):
    """Gradient of the batch-mean :func:`bce_loss` with respect to the logits."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    inside = (p > EPSILON) & (p < 1.0 - EPSILON)
    return _weights(weights, p.size).reshape(p.shape) * (p - y) * inside / p.size
