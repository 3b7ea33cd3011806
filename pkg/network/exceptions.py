from screening.exceptions import ScreeningError


class ShapeMismatch(ScreeningError):
    default_detail = 'expected input of shape {expected}, got {got}.'
    default_code = 'shape_mismatch'

    def __init__(self, expected, got, detail=None, code=None):
        super().__init__(detail, code, expected=expected, got=got)


class MissingScene(ScreeningError):
    default_detail = 'example lacks scenes {missing}.'
    default_code = 'missing_scene'

    def __init__(self, missing, detail=None, code=None):
        super().__init__(detail, code, missing=missing)


class CheckpointError(ScreeningError):
    default_detail = 'checkpoint "{path}" is unreadable.'
    default_code = 'checkpoint_invalid'

    def __init__(self, path, detail=None, code=None):
        super().__init__(detail, code, path=path)


class GradientCheckFailed(ScreeningError):
    default_detail = 'max relative gradient error {error:.3e} exceeds {tolerance:.0e}.'
    default_code = 'gradient_check_failed'

    def __init__(self, error, tolerance, detail=None, code=None):
        super().__init__(detail, code, error=error, tolerance=tolerance)
