from screening.exceptions import ScreeningError


class CohortTooSmall(ScreeningError):
    default_detail = 'leave-one-out needs at least {minimum} patients, got {n_patients}.'
    default_code = 'cohort_too_small'

    def __init__(self, n_patients, minimum=4, detail=None, code=None):
        super().__init__(detail, code, n_patients=n_patients, minimum=minimum)


class HoldoutNotHealthy(ScreeningError):
    default_detail = 'holdout patient "{patient_id}" is not healthy; TNR is defined on healthy patients only.'
    default_code = 'holdout_not_healthy'

    def __init__(self, patient_id, detail=None, code=None):
        super().__init__(detail, code, patient_id=patient_id)


class ReportNotFound(ScreeningError):
    default_detail = 'no evaluation report in "{path}".'
    default_code = 'report_not_found'

    def __init__(self, path, detail=None, code=None):
        super().__init__(detail, code, path=path)


class PatientWithoutExamples(ScreeningError):
    default_detail = 'patient "{patient_id}" has no segmented breathing cycles.'
    default_code = 'patient_without_examples'

    def __init__(self, patient_id, detail=None, code=None):
        super().__init__(detail, code, patient_id=patient_id)
