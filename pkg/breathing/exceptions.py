from screening.exceptions import ScreeningError


class RecordingTooShort(ScreeningError):
    default_detail = 'recording shorter than transient window ({duration:.2f}s <= {trim_s:.2f}s).'
    default_code = 'recording_too_short'

    def __init__(self, duration, trim_s, detail=None, code=None):
        super().__init__(detail, code, duration=duration, trim_s=trim_s)


class SignalTooShort(ScreeningError):
    default_detail = 'signal needs at least {minimum} samples, got {length}.'
    default_code = 'signal_too_short'

    def __init__(self, length, minimum=2, detail=None, code=None):
        super().__init__(detail, code, length=length, minimum=minimum)


class NonFiniteSignal(ScreeningError):
    default_detail = 'signal contains NaN or infinite samples.'
    default_code = 'non_finite_signal'


class IncompleteSession(ScreeningError):
    default_detail = 'patient "{patient_id}" lacks scenes {missing}.'
    default_code = 'incomplete_session'

    def __init__(self, patient_id, missing, detail=None, code=None):
        super().__init__(detail, code, patient_id=patient_id, missing=missing)
