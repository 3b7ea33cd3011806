"""
Five-scene recurrent classifier.

Every scene's cycle goes through a stacked (Bi-)LSTM encoder; the scene
embedding is the last forward output, concatenated for Bi-LSTM with the
first output of the backward direction. Embeddings are concatenated in
``SCENE_ORDER``, optionally extended with the demographics, and mapped by a
dense head to one sigmoid unit.

Parameters live in one ordered ``name -> array`` mapping. Names encode the
parameter group: ``encoder.<shared|scene>.layer<k>.<direction>.<W|U|b>``,
``head.dense<k>.<W|b>`` and ``head.output.<W|b>``.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.special import expit

from cohort.models import SCENE_ORDER
from network.exceptions import MissingScene, ShapeMismatch
from network.lstm import lstm_sequence, lstm_sequence_backward
from network.models import N_DEMOGRAPHICS, Direction, HeadActivation, LstmCellParams

logger = logging.getLogger(__name__)

SHARED = 'shared'
PROBABILITY_EPSILON = 1e-7


def _encoder_names(encoder_cfg):
    return (SHARED,) if encoder_cfg.shared_across_scenes else tuple(s.value for s in SCENE_ORDER)


def parameter_shapes(config):
    """Ordered ``name -> shape`` of every trainable tensor of ``config``."""
    encoder = config.encoder
    shapes = OrderedDict()
    for name in _encoder_names(encoder):
        d_in = encoder.input_size
        for k in range(encoder.layers):
            for direction in encoder.directions:
                prefix = f'encoder.{name}.layer{k}.{direction.value}'
                shapes[f'{prefix}.W'] = (4 * encoder.hidden, d_in)
                shapes[f'{prefix}.U'] = (4 * encoder.hidden, encoder.hidden)
                shapes[f'{prefix}.b'] = (4 * encoder.hidden,)
            d_in = encoder.output_size
    width = config.head_input_size
    for k, size in enumerate(config.head.hidden_sizes):
        shapes[f'head.dense{k}.W'] = (size, width)
        shapes[f'head.dense{k}.b'] = (size,)
        width = size
    shapes['head.output.W'] = (1, width)
    shapes['head.output.b'] = (1,)
    return shapes


def count_parameters(encoder_cfg, head_cfg=None, use_demographics=False):
    """
    Trainable parameter count by formula: ``4h(d_in + h + 1)`` per layer and
    direction (times five without sharing), plus the dense head when
    ``head_cfg`` is given.
    """
    h = encoder_cfg.hidden
    per_encoder = 0
    d_in = encoder_cfg.input_size
    for _ in range(encoder_cfg.layers):
        per_encoder += len(encoder_cfg.directions) * 4 * h * (d_in + h + 1)
        d_in = encoder_cfg.output_size
    total = per_encoder * (1 if encoder_cfg.shared_across_scenes else len(SCENE_ORDER))
    if head_cfg is None:
        return total
    width = encoder_cfg.embedding_size + (N_DEMOGRAPHICS if use_demographics else 0)
    for size in (*head_cfg.hidden_sizes, 1):
        total += width * size + size
        width = size
    return total


def log_parameter_count(config):
    count = count_parameters(config.encoder, config.head, config.use_demographics)
    logger.info('params.count model=%s count=%d reference=%d', config.label, count,
                settings.SCREENING['REFERENCE_PARAMETER_COUNT'])
    return count


def parameter_group(name):
    return name.rsplit('.', 1)[0]


def _activate(z, activation):
    if activation == HeadActivation.RELU:
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _activation_grad(a, activation):
    if activation == HeadActivation.RELU:
        return (a > 0).astype(a.dtype)
    return 1.0 - a ** 2


@dataclass(eq=False)
class ForwardCache:
    encoder: dict
    sequence_shape: tuple
    embeddings: np.ndarray
    activations: list
    probabilities: np.ndarray


class ScreeningNetwork:
    """The classifier's parameters plus its forward and backward passes."""

    def __init__(self, config, params):
        self.config = config
        expected = parameter_shapes(config)
        if list(params) != list(expected):
            raise ValueError('parameter names do not match the model configuration')
        for name, shape in expected.items():
            if params[name].shape != shape:
                raise ShapeMismatch(shape, params[name].shape)
        self.params = OrderedDict((name, np.asarray(params[name], dtype=np.float64)) for name in expected)

    @classmethod
    def initialize(cls, config, rng):
        """Uniform ``+-1/sqrt(fan_in)`` weights, zero biases, forget-gate bias 1."""
        params = OrderedDict()
        for name, shape in parameter_shapes(config).items():
            if name.endswith('.b'):
                value = np.zeros(shape)
                if name.startswith('encoder.'):
                    h = shape[0] // 4
                    value[h:2 * h] = 1.0
            else:
                limit = 1.0 / np.sqrt(shape[1])
                value = rng.uniform(-limit, limit, size=shape)
            params[name] = value
        return cls(config, params)

    @classmethod
    def zeros(cls, config):
        return cls(config, OrderedDict((n, np.zeros(s)) for n, s in parameter_shapes(config).items()))

    def copy(self):
        return ScreeningNetwork(self.config, OrderedDict((n, v.copy()) for n, v in self.params.items()))

    @property
    def n_parameters(self):
        return sum(v.size for v in self.params.values())

    def cell(self, encoder_name, layer, direction):
        prefix = f'encoder.{encoder_name}.layer{layer}.{Direction(direction).value}'
        return LstmCellParams(W=self.params[f'{prefix}.W'], U=self.params[f'{prefix}.U'],
                              b=self.params[f'{prefix}.b'])

    # forward

    def _encode(self, encoder_name, x):
        encoder = self.config.encoder
        caches = []
        sequence = x
        for k in range(encoder.layers):
            outputs, layer_caches = [], {}
            for direction in encoder.directions:
                y, cache = lstm_sequence(sequence, self.cell(encoder_name, k, direction),
                                         reverse=direction == Direction.BACKWARD)
                outputs.append(y)
                layer_caches[direction] = cache
            sequence = np.concatenate(outputs, axis=2)
            caches.append(layer_caches)
        h = encoder.hidden
        embedding = sequence[:, -1, :h]
        if len(encoder.directions) == 2:
            embedding = np.concatenate([embedding, sequence[:, 0, h:]], axis=1)
        return embedding, caches

    def forward(self, batch, demographics=None):
        """
        Probabilities for ``batch`` (``B x 5 x m x d``, scenes in
        ``SCENE_ORDER``) and the cache needed by :meth:`backward`.
        """
        batch = np.asarray(batch, dtype=np.float64)
        encoder = self.config.encoder
        if batch.ndim != 4 or batch.shape[1] != len(SCENE_ORDER) or batch.shape[3] != encoder.input_size:
            raise ShapeMismatch(f'B x {len(SCENE_ORDER)} x m x {encoder.input_size}', batch.shape)
        n, n_scenes, steps, _ = batch.shape

        encoder_caches = {}
        if encoder.shared_across_scenes:
            stacked = batch.reshape(n * n_scenes, steps, -1)
            embedding, encoder_caches[SHARED] = self._encode(SHARED, stacked)
            embeddings = embedding.reshape(n, n_scenes * encoder.output_size)
        else:
            parts = []
            for j, scene in enumerate(SCENE_ORDER):
                embedding, encoder_caches[scene.value] = self._encode(scene.value, batch[:, j])
                parts.append(embedding)
            embeddings = np.concatenate(parts, axis=1)

        a = embeddings
        if self.config.use_demographics:
            if demographics is None:
                raise ShapeMismatch('B x 3 demographics', None)
            a = np.concatenate([a, np.asarray(demographics, dtype=np.float64).reshape(n, -1)], axis=1)
        activations = [a]
        activation = self.config.head.activation
        for k in range(len(self.config.head.hidden_sizes)):
            a = _activate(a @ self.params[f'head.dense{k}.W'].T + self.params[f'head.dense{k}.b'], activation)
            activations.append(a)
        logits = (a @ self.params['head.output.W'].T + self.params['head.output.b'])[:, 0]
        probabilities = expit(logits)
        cache = ForwardCache(encoder=encoder_caches, sequence_shape=(n, n_scenes, steps),
                             embeddings=embeddings, activations=activations, probabilities=probabilities)
        return probabilities, cache

    def predict_proba(self, batch, demographics=None):
        probabilities, _ = self.forward(batch, demographics)
        return np.clip(probabilities, PROBABILITY_EPSILON, 1.0 - PROBABILITY_EPSILON)

    # backward

    def _encode_backward(self, encoder_name, caches, d_embedding, steps):
        encoder = self.config.encoder
        h = encoder.hidden
        n = d_embedding.shape[0]
        grads = {}
        d_sequence = np.zeros((n, steps, encoder.output_size))
        d_sequence[:, -1, :h] = d_embedding[:, :h]
        if len(encoder.directions) == 2:
            d_sequence[:, 0, h:] = d_embedding[:, h:]
        for k in reversed(range(encoder.layers)):
            d_input = None
            for offset, direction in enumerate(encoder.directions):
                cell = self.cell(encoder_name, k, direction)
                dx, cell_grads = lstm_sequence_backward(
                    d_sequence[:, :, offset * h:(offset + 1) * h], cell, caches[k][direction])
                d_input = dx if d_input is None else d_input + dx
                prefix = f'encoder.{encoder_name}.layer{k}.{direction.value}'
                for key, value in cell_grads.items():
                    grads[f'{prefix}.{key}'] = value
            d_sequence = d_input
        return grads

    def backward(self, cache, d_logits, frozen=()):
        """
        Gradients of a scalar loss with respect to every parameter, given its
        gradient with respect to the output logits. Parameters whose name or
        group starts with an entry of ``frozen`` get exact zeros.
        """
        activation = self.config.head.activation
        grads = {}
        d_logits = np.asarray(d_logits, dtype=np.float64).reshape(-1, 1)
        a = cache.activations[-1]
        grads['head.output.W'] = d_logits.T @ a
        grads['head.output.b'] = d_logits.sum(axis=0)
        d_a = d_logits @ self.params['head.output.W']
        for k in reversed(range(len(self.config.head.hidden_sizes))):
            a = cache.activations[k + 1]
            d_z = d_a * _activation_grad(a, activation)
            grads[f'head.dense{k}.W'] = d_z.T @ cache.activations[k]
            grads[f'head.dense{k}.b'] = d_z.sum(axis=0)
            d_a = d_z @ self.params[f'head.dense{k}.W']
        d_embeddings = d_a[:, :self.config.encoder.embedding_size]

        n, n_scenes, steps = cache.sequence_shape
        width = self.config.encoder.output_size
        if self.config.encoder.shared_across_scenes:
            grads.update(self._encode_backward(
                SHARED, cache.encoder[SHARED], d_embeddings.reshape(n * n_scenes, width), steps))
        else:
            for j, scene in enumerate(SCENE_ORDER):
                grads.update(self._encode_backward(
                    scene.value, cache.encoder[scene.value], d_embeddings[:, j * width:(j + 1) * width], steps))

        ordered = OrderedDict()
        for name, value in self.params.items():
            if any(name.startswith(prefix) for prefix in frozen):
                ordered[name] = np.zeros_like(value)
            else:
                ordered[name] = grads[name].reshape(value.shape)
        return ordered


def _as_batch(example):
    scenes = example.scenes if hasattr(example, 'scenes') else example
    missing = [scene.value for scene in SCENE_ORDER if scene not in scenes]
    if missing:
        raise MissingScene(missing)
    lengths = {scenes[scene].channels.shape for scene in SCENE_ORDER}
    if len(lengths) != 1:
        raise ShapeMismatch('equal 6 x m cycles', sorted(lengths))
    return np.stack([scenes[scene].channels.T for scene in SCENE_ORDER])[None]


def encode_scenes(example, network):
    """P(non-healthy | example) for one standardized :class:`PatientExample`."""
    demographics = None
    if network.config.use_demographics:
        demographics = np.asarray([example.demographics], dtype=np.float64)
    return float(network.predict_proba(_as_batch(example), demographics)[0])

