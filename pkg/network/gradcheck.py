import logging
from dataclasses import dataclass, field

import numpy as np

from network.classifier import ScreeningNetwork, parameter_group
from network.losses import bce_logit_gradient, bce_loss
from network.models import EncoderConfig, HeadConfig, ModelConfig

logger = logging.getLogger(__name__)

TOLERANCE = 1e-4


@dataclass
class GradientCheckResult:
    max_relative_error: float
    per_group: dict = field(default_factory=dict)
    n_parameters: int = 0

    @property
    def passed(self):
        return self.max_relative_error < TOLERANCE


def small_config(family='BiLSTM', hidden=3, layers=2, head_sizes=(4,), shared_across_scenes=True,
                 use_demographics=False):
    return ModelConfig(
        encoder=EncoderConfig(family=family, hidden=hidden, layers=layers,
                              shared_across_scenes=shared_across_scenes),
        head=HeadConfig(hidden_sizes=head_sizes),
        use_demographics=use_demographics,
    )


def relative_error(analytic, numeric):
    return np.abs(analytic - numeric) / np.maximum(np.abs(analytic) + np.abs(numeric), 1e-6)


def gradient_check(config=None, seed=0, n_examples=3, length=12, step=1e-5):
    """
    Compare :meth:`ScreeningNetwork.backward` against central finite
    differences of the batch BCE loss for every parameter entry of a random
    network and random inputs drawn from ``seed``.
    """
    config = config or small_config()
    rng = np.random.default_rng(seed)
    network = ScreeningNetwork.initialize(config, rng)
    batch = rng.normal(size=(n_examples, 5, length, config.encoder.input_size))
    demographics = rng.normal(size=(n_examples, 3)) if config.use_demographics else None
    targets = rng.integers(0, 2, size=n_examples).astype(float)

    probabilities, cache = network.forward(batch, demographics)
    analytic = network.backward(cache, bce_logit_gradient(probabilities, targets))

    def loss():
        return bce_loss(network.forward(batch, demographics)[0], targets)

    result = GradientCheckResult(max_relative_error=0.0, n_parameters=network.n_parameters)
    for name, value in network.params.items():
        numeric = np.empty_like(value)
        flat, grad = value.reshape(-1), numeric.reshape(-1)
        for index in range(flat.size):
            original = flat[index]
            flat[index] = original + step
            upper = loss()
            flat[index] = original - step
            lower = loss()
            flat[index] = original
            grad[index] = (upper - lower) / (2 * step)
        error = float(relative_error(analytic[name], numeric).max())
        group = parameter_group(name)
        result.per_group[group] = max(result.per_group.get(group, 0.0), error)
        result.max_relative_error = max(result.max_relative_error, error)
    logger.debug('gradcheck.done seed=%d params=%d max_rel_error=%.3e',
                 seed, result.n_parameters, result.max_relative_error)
    return result
