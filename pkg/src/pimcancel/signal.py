"""Complex baseband sequences, component-carrier generation and power helpers.

All powers are in dB relative to digital full scale (dBFS): a sequence of
unit-modulus samples sits at 0 dBFS.
"""
from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64

DEFAULT_SAMPLE_RATE_HZ = 30.72e6
MAX_OCCUPANCY = 0.8


class SignalError(ValueError):
    pass


@dataclass(frozen=True)
class IqSequence:
    """Uniformly sampled complex baseband waveform.

    ``samples`` is stored as a read-only complex128 array.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.complex128, copy=True).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise SignalError("samples must be finite")
        if not self.sample_rate_hz > 0:
            raise SignalError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.samples.shape[0]

    def replace(self, samples):
        return IqSequence(samples, self.sample_rate_hz)

    def __add__(self, other):
        check_aligned(self, other)
        return self.replace(self.samples + other.samples)

    def __sub__(self, other):
        check_aligned(self, other)
        return self.replace(self.samples - other.samples)


def check_aligned(a, b):
    if len(a) != len(b):
        raise SignalError(f"length mismatch: {len(a)} vs {len(b)}")
    if a.sample_rate_hz != b.sample_rate_hz:
        raise SignalError(f"sample rate mismatch: {a.sample_rate_hz} vs {b.sample_rate_hz}")


@dataclass(frozen=True)
class CarrierConfig:
    bandwidth_hz: float = 5e6
    num_subcarriers: int = 300
    power_dbfs: float = -15.0
    seed: int = 1

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise SignalError("bandwidth_hz must be positive")
        if int(self.num_subcarriers) < 1:
            raise SignalError("num_subcarriers must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise SignalError("seed must be an unsigned 64-bit integer")


def _power(x):
    return float(np.mean(np.abs(x) ** 2))


def mean_power_db(seq):
    """``10*log10(mean |x[n]|^2)``; ``-inf`` for an all-zero sequence."""
    x = seq.samples if isinstance(seq, IqSequence) else np.asarray(seq)
    if x.size == 0:
        raise SignalError("empty sequence")
    p = _power(x)
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(p))


def scale_to_power(seq, target_dbfs):
    p = _power(seq.samples) if len(seq) else 0.0
    if len(seq) == 0 or p == 0.0:
        raise SignalError("cannot scale a zero-power sequence")
    gain = np.sqrt(10.0 ** (target_dbfs / 10.0) / p)
    return seq.replace(seq.samples * gain)


def _subcarrier_bins(bandwidth_hz, num_subcarriers, nfft, sample_rate_hz):
    """Signed FFT bins of ``num_subcarriers`` tones spread evenly over +-bw/2."""
    half = int(np.floor(bandwidth_hz / 2.0 * nfft / sample_rate_hz))
    if num_subcarriers == 1:
        return np.array([0])
    bins = np.round(np.linspace(-half, half, num_subcarriers)).astype(np.int64)
    return np.unique(bins)


def generate_cc(config, num_samples, sample_rate_hz=DEFAULT_SAMPLE_RATE_HZ):
    """Random-phase multicarrier component carrier.

    Equal-amplitude tones sit on FFT bins evenly spread across
    ``+-bandwidth/2``. The IFFT length is the smallest multiple of
    ``num_samples`` that resolves every tone on its own bin; when it equals
    ``num_samples`` the returned block is exactly periodic.
    """
    num_samples = int(num_samples)
    k = int(config.num_subcarriers)
    if not sample_rate_hz > 0:
        raise SignalError("sample_rate_hz must be positive")
    if config.bandwidth_hz > MAX_OCCUPANCY * sample_rate_hz:
        raise SignalError(
            f"invalid bandwidth: {config.bandwidth_hz:g} Hz exceeds "
            f"{MAX_OCCUPANCY} x {sample_rate_hz:g} Hz"
        )
    if num_samples < max(k, 1):
        raise SignalError(f"invalid length: num_samples={num_samples} < num_subcarriers={k}")

    nfft = num_samples
    while True:
        bins = _subcarrier_bins(config.bandwidth_hz, k, nfft, sample_rate_hz)
        if bins.size == k:
            break
        nfft += num_samples

    rng = SplitMix64(config.seed)
    spectrum = np.zeros(nfft, dtype=np.complex128)
    spectrum[bins % nfft] = rng.phases(k)
    x = np.fft.ifft(spectrum)[:num_samples]
    return scale_to_power(IqSequence(x, sample_rate_hz), config.power_dbfs)
