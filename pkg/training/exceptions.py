from screening.exceptions import ScreeningError


class EmptyTrainingSet(ScreeningError):
    default_detail = 'cannot train on an empty training set.'
    default_code = 'empty_training_set'


class LeakageError(ScreeningError):
    default_detail = 'patient "{patient_id}" from the {split} split was read during {stage}.'
    default_code = 'split_leakage'

    def __init__(self, patient_id, split, stage, detail=None, code=None):
        super().__init__(detail, code, patient_id=patient_id, split=split, stage=stage)


class NoCyclePredictions(ScreeningError):
    default_detail = 'no cycle probabilities to aggregate.'
    default_code = 'no_cycles'
