from screening.exceptions import ScreeningError


class ManifestNotFound(ScreeningError):
    default_detail = 'manifest not found in "{root}".'
    default_code = 'manifest_not_found'

    def __init__(self, root, detail=None, code=None):
        super().__init__(detail, code, root=root)


class ManifestInvalid(ScreeningError):
    default_detail = 'manifest "{path}" could not be parsed.'
    default_code = 'manifest_invalid'

    def __init__(self, path, detail=None, code=None):
        super().__init__(detail, code, path=path)


class SignalFileError(ScreeningError):
    default_detail = 'signal file "{path}" is malformed.'
    default_code = 'signal_file_invalid'

    def __init__(self, path, detail=None, code=None):
        super().__init__(detail, code, path=path)


class EmptyDataset(ScreeningError):
    default_detail = 'dataset has no patients.'
    default_code = 'empty_dataset'
