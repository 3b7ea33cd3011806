from django.apps import AppConfig


class BreathingConfig(AppConfig):
    name = 'breathing'
    verbose_name = 'Breathing-cycle segmentation'
