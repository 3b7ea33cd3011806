"""
Django settings for the screening project.

The project has no database and no HTTP surface: it is driven through
management commands (``python manage.py <subcommand>``). Numerical defaults
for every stage of the pipeline live in the ``SCREENING`` dict below and can
be overridden per run by command flags or config files.
"""

import os
from pathlib import Path


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'cohort',
    'breathing',
    'network',
    'training',
    'tuning',
    'evaluation',
]


# No persistence layer: datasets, checkpoints and reports are plain files.
DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


LOG_LEVEL = os.environ.get("SCREENING_LOG_LEVEL", "INFO")

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'keyvalue': {
            'format': 'ts=%(asctime)s level=%(levelname)s logger=%(name)s event=%(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'keyvalue',
        },
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in ('screening', 'cohort', 'breathing', 'network',
                    'training', 'tuning', 'evaluation')
    },
}


SCREENING = {
    'SEED': int(os.environ.get("SCREENING_SEED", 0)),
    'THREADS': int(os.environ.get("SCREENING_THREADS", os.cpu_count() or 1)),
    # Parent of the run directories of commands whose --out is optional.
    'RUN_ROOT': os.environ.get("SCREENING_RUN_ROOT", "runs"),
    'ACQUISITION': {
        'SAMPLE_RATE_HZ': 50.0,
        'SCENE_DURATION_S': 20.0,
    },
    'DSP': {
        'CUTOFF_HZ': 0.7,
        'TRIM_S': 5.0,
        'TARGET_LEN': 300,
        'MIN_DISTANCE_S': 1.5,
        'MIN_PROMINENCE': 0.1,
        'REFLECT_EDGES': False,
    },
    'MODEL': {
        'FAMILY': 'BiLSTM',
        'HIDDEN': 128,
        'LAYERS': 2,
        'SHARED_ACROSS_SCENES': True,
        'HEAD_SIZES': [64, 16],
        'HEAD_ACTIVATION': 'tanh',
        'USE_DEMOGRAPHICS': False,
    },
    'TRAINING': {
        'MAX_EPOCHS': 300,
        'PATIENCE': 15,
        'BATCH_SIZE': 16,
        'LEARNING_RATE': 1e-3,
        'OPTIMIZER': 'adam',
        'GRADIENT_CLIP_NORM': 5.0,
        'AGGREGATION': 'mean',
        'CLASS_BALANCED': True,
    },
    'SEARCH': {
        'TRIALS': 5,
        'INITIAL_TRIALS': 2,
        'LENGTH_SCALE': 0.5,
        'NOISE': 1e-3,
        'HIDDEN': [32, 64, 128],
        'LAYERS': [2, 4, 6],
        'FAMILIES': ['LSTM', 'BiLSTM'],
        'LEARNING_RATE_RANGE': [1e-4, 1e-2],
        'HEAD_PRESETS': {'small': [32], 'medium': [64, 16]},
    },
    'EVALUATION': {
        'SEEDS': 4,
        'VALIDATION_FRACTION': 0.25,
        'HEATMAP_CYCLES': 4,
        'HOLDOUT_MODE': 'final-retrain',
    },
    # Reference count reported for the best Bi-LSTM(128, 2) model; logged next
    # to our own count, never asserted.
    'REFERENCE_PARAMETER_COUNT': 2683041,
}
