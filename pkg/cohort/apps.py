from django.apps import AppConfig


class CohortConfig(AppConfig):
    name = 'cohort'
    verbose_name = 'Patient cohorts and synthetic sessions'
