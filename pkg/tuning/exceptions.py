from screening.exceptions import ScreeningError


class SearchFailed(ScreeningError):
    default_detail = 'all {n_trials} trials failed: {diagnostics}'
    default_code = 'search_failed'

    def __init__(self, trials, detail=None, code=None):
        self.trials = list(trials)
        diagnostics = '; '.join(f'#{t.index} {t.point.label}: {t.diagnostic}' for t in self.trials)
        super().__init__(detail, code, n_trials=len(self.trials), diagnostics=diagnostics)


class EmptyValidationSet(ScreeningError):
    default_detail = 'model selection needs at least one validation patient.'
    default_code = 'empty_validation_set'
