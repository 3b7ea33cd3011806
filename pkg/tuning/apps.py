from django.apps import AppConfig


class TuningConfig(AppConfig):
    name = 'tuning'
    verbose_name = 'Hyperparameter search'
