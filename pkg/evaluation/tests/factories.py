import numpy as np

from cohort.models import Dataset, Label
from cohort.tests.factories import make_patient
from network.models import EncoderFamily
from training.models import TrainConfig
from training.tests.factories import toy_examples
from tuning.models import SearchConfig, SearchSpace

TINY_SPACE = SearchSpace(hidden=(2,), layers=(1,), families=(EncoderFamily.LSTM,), learning_rates=(0.05,),
                         head_presets={'small': (2,)})
SHORT_TRAINING = TrainConfig(max_epochs=2, patience=1, batch_size=8)
ONE_TRIAL = SearchConfig(trials=1, initial_trials=1)


def label_cohort(n_healthy, n_nonhealthy, n_samples=400):
    """Dataset of sine patients ``H01..`` and ``N01..``; only the labels matter."""
    patients = [make_patient(f'H{i + 1:02d}', Label.HEALTHY, n_samples=n_samples) for i in range(n_healthy)]
    patients += [make_patient(f'N{i + 1:02d}', Label.NON_HEALTHY, n_samples=n_samples)
                 for i in range(n_nonhealthy)]
    return Dataset(patients)


def toy_cohort(dataset, n_cycles=3, length=8):
    return {p.patient_id: tuple(toy_examples(p.patient_id, p.label, n_cycles, length, seed=i))
            for i, p in enumerate(dataset)}


class ConstantModel:
    def __init__(self, probability):
        self.probability = probability

    def predict_examples(self, examples):
        return np.full(len(list(examples)), self.probability)


class LevelModel:
    """Reads the channel level of toy examples: high for positive levels."""

    def predict_examples(self, examples):
        return np.array([0.9 if np.mean([c.channels for c in e.scenes.values()]) > 0 else 0.1 for e in examples])


def level_objective(config, train, val, train_cfg, guard=None):
    return 1.0, LevelModel()
