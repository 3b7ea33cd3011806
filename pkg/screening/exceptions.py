class ScreeningError(Exception):
    """Base error of the toolkit: a formatted ``detail`` plus a stable ``code``."""
    default_detail = 'A screening error occurred.'
    default_code = 'error'

    def __init__(self, detail=None, code=None, **context):
        if detail is None:
            detail = str(self.default_detail).format(**context)
        self.detail = detail
        self.code = code or self.default_code
        super().__init__(detail)

    def __str__(self):
        return str(self.detail)


class ConfigurationError(ScreeningError):
    default_detail = 'Invalid {section} configuration: {errors}'
    default_code = 'invalid_config'
