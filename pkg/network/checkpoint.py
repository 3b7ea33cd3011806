"""
Checkpoint files: one ``.npz`` archive with every parameter tensor (64-bit)
under its parameter name, plus a JSON document under ``__meta__`` holding the
model configuration, the training-split standardizer and free-form extras.
"""
import json
import logging
import zipfile
from collections import OrderedDict
from pathlib import Path

import numpy as np

from breathing.standardization import Standardizer
from network.classifier import ScreeningNetwork
from network.exceptions import CheckpointError
from network.models import ModelConfig

logger = logging.getLogger(__name__)

META_KEY = '__meta__'
FORMAT_VERSION = 1


def checkpoint_path(path):
    path = Path(path)
    return path if path.suffix == '.npz' else path.with_name(path.name + '.npz')


def save_checkpoint(path, network, standardizer=None, extra=None):
    path = checkpoint_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        'version': FORMAT_VERSION,
        'model': network.config.to_dict(),
        'parameters': list(network.params),
        'standardizer': standardizer.to_dict() if standardizer is not None else None,
        'extra': extra or {},
    }
    np.savez(path, **{META_KEY: np.array(json.dumps(meta, sort_keys=True))}, **network.params)
    logger.info('checkpoint.save path=%s params=%d', path, network.n_parameters)
    return path


def load_checkpoint(path):
    """Returns ``(network, standardizer or None, extra)``."""
    path = checkpoint_path(path)
    try:
        with np.load(path, allow_pickle=False) as archive:
            meta = json.loads(str(archive[META_KEY]))
            params = OrderedDict((name, archive[name].astype(np.float64)) for name in meta['parameters'])
    except (KeyError, ValueError, zipfile.BadZipFile, json.JSONDecodeError) as exc:
        raise CheckpointError(path) from exc
    network = ScreeningNetwork(ModelConfig.from_dict(meta['model']), params)
    standardizer = Standardizer.from_dict(meta['standardizer']) if meta['standardizer'] else None
    return network, standardizer, meta['extra']
