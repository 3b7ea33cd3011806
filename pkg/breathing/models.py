from dataclasses import asdict, dataclass

from django.conf import settings

from screening.exceptions import ConfigurationError


@dataclass(frozen=True)
class FilterSpec:
    cutoff_hz: float = 0.7
    sample_rate_hz: float = 50.0

    def __post_init__(self):
        if not 0 < self.cutoff_hz < self.sample_rate_hz / 2:
            raise ConfigurationError(
                section='filter',
                errors=f'cutoff {self.cutoff_hz} Hz must lie in (0, {self.sample_rate_hz / 2}) Hz')


@dataclass(frozen=True)
class PeakSet:
    """Sample indices of local maxima and minima of the filtered gyro-y."""
    maxima: tuple = ()
    minima: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'maxima', tuple(int(i) for i in self.maxima))
        object.__setattr__(self, 'minima', tuple(int(i) for i in self.minima))
        for name in ('maxima', 'minima'):
            indices = getattr(self, name)
            if any(b <= a for a, b in zip(indices, indices[1:])):
                raise ValueError(f'{name} must be strictly increasing')
        kinds = [kind for _, kind in self.merged()]
        if any(a == b for a, b in zip(kinds, kinds[1:])):
            raise ValueError('maxima and minima must alternate')

    def merged(self):
        return sorted([(i, 'max') for i in self.maxima] + [(i, 'min') for i in self.minima])


@dataclass(frozen=True)
class DspConfig:
    cutoff_hz: float = 0.7
    trim_s: float = 5.0
    target_len: int = 300
    min_distance_s: float = 1.5
    # Fraction of the filtered signal's interquartile range.
    min_prominence: float = 0.1
    # Filter a mirror-extended trace instead of the plain circular one.
    reflect_edges: bool = False

    def __post_init__(self):
        errors = []
        if self.cutoff_hz <= 0:
            errors.append('cutoff_hz must be positive')
        if self.trim_s < 0:
            errors.append('trim_s must be non-negative')
        if self.target_len < 2:
            errors.append('target_len must be at least 2')
        if self.min_distance_s < 0 or self.min_prominence < 0:
            errors.append('min_distance_s and min_prominence must be non-negative')
        if errors:
            raise ConfigurationError(section='dsp', errors='; '.join(errors))

    @classmethod
    def from_settings(cls, **overrides):
        dsp = settings.SCREENING['DSP']
        values = {
            'cutoff_hz': dsp['CUTOFF_HZ'],
            'trim_s': dsp['TRIM_S'],
            'target_len': dsp['TARGET_LEN'],
            'min_distance_s': dsp['MIN_DISTANCE_S'],
            'min_prominence': dsp['MIN_PROMINENCE'],
            'reflect_edges': dsp['REFLECT_EDGES'],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def filter_spec(self, sample_rate_hz):
        return FilterSpec(cutoff_hz=self.cutoff_hz, sample_rate_hz=sample_rate_hz)

    def to_dict(self):
        return asdict(self)
