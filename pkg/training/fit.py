import logging

import numpy as np
from sklearn.utils.class_weight import compute_sample_weight

from breathing.standardization import Standardizer
from network.classifier import ScreeningNetwork
from network.losses import bce_logit_gradient, bce_loss
from training.exceptions import EmptyTrainingSet
from training.models import EpochRecord, TrainedModel, TrainingHistory
from training.optimizers import clip_global_norm, make_optimizer
from training.permissions import EARLY_STOPPING, GRADIENT, STANDARDIZE, SplitGuard

logger = logging.getLogger(__name__)


def _accuracy(probabilities, targets):
    return float(np.mean((probabilities >= 0.5) == (targets >= 0.5)))


def _evaluate(model, batch, demographics, targets, weights=None):
    probabilities = np.empty(len(batch))
    for start in range(0, len(batch), 64):
        stop = start + 64
        d = None if demographics is None else demographics[start:stop]
        probabilities[start:stop] = model.network.forward(batch[start:stop], d)[0]
    return bce_loss(probabilities, targets, weights), _accuracy(probabilities, targets)


def sample_weights(targets, balanced=True):
    """Per-example loss weights; ``balanced`` gives each class the same total weight."""
    targets = np.asarray(targets)
    if not balanced or len(np.unique(targets)) < 2:
        return np.ones(len(targets))
    return compute_sample_weight('balanced', targets)


def seed_streams(train_cfg):
    """Independent generators for weight init and epoch shuffling."""
    init_seq, shuffle_seq = np.random.SeedSequence(train_cfg.seed).spawn(2)
    if train_cfg.shuffle_seed is not None:
        shuffle_seq = np.random.SeedSequence(train_cfg.shuffle_seed)
    return np.random.default_rng(init_seq), np.random.default_rng(shuffle_seq)


def fit(train_examples, val_examples, model_cfg, train_cfg, guard=None, frozen=()):
    """
    Train a fresh network on ``train_examples`` with mini-batch gradient
    descent, monitoring ``val_examples`` for early stopping.

    With ``class_balanced`` every loss term is weighted so the two classes
    carry equal total weight in both the training and the validation loss.
    Standardization is fitted on the training examples alone. After each epoch
    the full training and validation losses are recorded; the parameters of
    the epoch with the lowest validation loss are restored at the end. With no
    validation examples early stopping is off and all ``max_epochs`` run.

    Returns ``(TrainedModel, TrainingHistory)``.
    """
    train_examples, val_examples = list(train_examples), list(val_examples)
    if not train_examples:
        raise EmptyTrainingSet()
    guard = guard or SplitGuard.for_fit(train_examples, val_examples)

    standardizer = Standardizer.fit(guard.access(train_examples, STANDARDIZE))
    init_rng, shuffle_rng = seed_streams(train_cfg)
    model = TrainedModel(network=ScreeningNetwork.initialize(model_cfg, init_rng), standardizer=standardizer)
    learning_rate = model_cfg.learning_rate or train_cfg.learning_rate
    optimizer = make_optimizer(train_cfg.optimizer, learning_rate)

    x_train, d_train = model.arrays(guard.access(train_examples, GRADIENT))
    y_train = np.array([e.target for e in train_examples])
    w_train = sample_weights(y_train, train_cfg.class_balanced)
    validating = bool(val_examples)
    if validating:
        x_val, d_val = model.arrays(guard.access(val_examples, EARLY_STOPPING))
        y_val = np.array([e.target for e in val_examples])
        w_val = sample_weights(y_val, train_cfg.class_balanced)
    else:
        logger.warning('fit.no_validation examples=%d early_stopping=off', len(train_examples))

    history = TrainingHistory()
    best_loss, best_params, waited = np.inf, None, 0
    n = len(train_examples)
    logger.debug('fit.start model=%s lr=%g train=%d val=%d', model_cfg.label, learning_rate, n, len(val_examples))
    for epoch in range(1, train_cfg.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, train_cfg.batch_size):
            index = order[start:start + train_cfg.batch_size]
            demographics = None if d_train is None else d_train[index]
            probabilities, cache = model.network.forward(x_train[index], demographics)
            d_logits = bce_logit_gradient(probabilities, y_train[index], w_train[index])
            grads = model.network.backward(cache, d_logits, frozen)
            clip_global_norm(grads, train_cfg.gradient_clip_norm)
            optimizer.update(model.network.params, grads)

        train_loss, train_accuracy = _evaluate(model, x_train, d_train, y_train, w_train)
        record = EpochRecord(epoch, train_loss, train_accuracy)
        if validating:
            val_loss, val_accuracy = _evaluate(model, x_val, d_val, y_val, w_val)
            record = EpochRecord(epoch, train_loss, train_accuracy, val_loss, val_accuracy)
        history.records.append(record)
        logger.debug('fit.epoch epoch=%d train_loss=%.5f val_loss=%s', epoch, train_loss, record.val_loss)

        if not validating:
            continue
        if val_loss < best_loss:
            best_loss, best_params, waited = val_loss, model.network.copy().params, 0
            history.best_epoch = epoch
        else:
            waited += 1
            if waited >= train_cfg.patience:
                history.stopped_early = True
                break

    if best_params is not None:
        model.network.params = best_params
    else:
        history.best_epoch = history.records[-1].epoch
    logger.info('fit.done model=%s epochs=%d best_epoch=%s best_val_loss=%s',
                model_cfg.label, len(history.records), history.best_epoch, history.best_val_loss)
    return model, history
