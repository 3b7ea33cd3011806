import numpy as np
from scipy import fft, signal

from breathing.exceptions import NonFiniteSignal, SignalTooShort


def _as_signal(values, minimum=2):
    x = np.asarray(values, dtype=np.float64)
    if x.shape[0] < minimum:
        raise SignalTooShort(x.shape[0], minimum)
    if not np.all(np.isfinite(x)):
        raise NonFiniteSignal()
    return x


def lowpass_fft(values, spec):
    """
    Brick-wall low-pass: zero every rFFT bin strictly above ``spec.cutoff_hz``.

    The filter is a projection in the discrete spectrum, so it is linear,
    idempotent and never increases signal energy.
    """
    x = _as_signal(values)
    if x.ndim != 1:
        raise ValueError(f'lowpass_fft expects a 1-D signal, got shape {x.shape}')
    spectrum = fft.rfft(x)
    freqs = fft.rfftfreq(len(x), d=1.0 / spec.sample_rate_hz)
    spectrum[freqs > spec.cutoff_hz] = 0.0
    return fft.irfft(spectrum, n=len(x))


def lowpass_fft_reflect(values, spec):
    """
    :func:`lowpass_fft` on the signal extended by its mirror image.

    The circular FFT otherwise sees the jump from the last sample back to the
    first and rings near both edges; the symmetric extension is continuous,
    and mirrored edges stay edge samples, so no spurious interior peak appears.
    """
    x = _as_signal(values)
    extended = np.concatenate([x, x[::-1]])
    return lowpass_fft(extended, spec)[:len(x)]


def resample_fft(window, target_len=300, axis=0):
    """
    Fourier resampling of ``window`` to ``target_len`` samples along ``axis``:
    forward FFT, symmetric truncation or zero padding of the spectrum,
    inverse FFT, amplitude rescaled by ``target_len / n``.
    """
    x = np.asarray(window, dtype=np.float64)
    n = x.shape[axis] if x.ndim else 0
    if n < 2:
        raise SignalTooShort(n, 2)
    if not np.all(np.isfinite(x)):
        raise NonFiniteSignal()
    if n == target_len:
        return x.copy()
    return signal.resample(x, target_len, axis=axis)


def magnitude_spectrum(values, sample_rate_hz):
    x = _as_signal(values)
    freqs = fft.rfftfreq(len(x), d=1.0 / sample_rate_hz)
    return freqs, np.abs(fft.rfft(x)) / len(x)


def filter_response(spec, n_samples):
    """Measured gain of :func:`lowpass_fft` per rFFT bin, from a unit impulse."""
    impulse = np.zeros(n_samples)
    impulse[0] = 1.0
    freqs = fft.rfftfreq(n_samples, d=1.0 / spec.sample_rate_hz)
    return freqs, np.abs(fft.rfft(lowpass_fft(impulse, spec)))
