"""Welch PSD, band power and cancellation reports.

PSD normalisation: the density is scaled so that summing it over all bins
times the bin width returns the mean power of the sequence. Bins run over
``(-fs/2, fs/2]``; the Nyquist bin is reported at ``+fs/2``.
"""
import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import signal as sps

from .signal import IqSequence, SignalError, mean_power_db

DEFAULT_NFFT = 4096
DEFAULT_OVERLAP = 0.5
# stand-in for log10(0) in reported densities and band powers
DB_FLOOR = -400.0


class MetricsError(ValueError):
    pass


def _db(p):
    with np.errstate(divide="ignore"):
        return np.maximum(10.0 * np.log10(p), DB_FLOOR)


@dataclass(frozen=True)
class PsdEstimate:
    freq_bins_hz: np.ndarray
    density: np.ndarray
    nfft: int
    overlap_fraction: float
    sample_rate_hz: float

    @property
    def density_db_per_hz(self):
        return _db(self.density)

    @property
    def bin_width_hz(self):
        return self.sample_rate_hz / self.nfft

    def integrated_power(self):
        return float(np.sum(self.density) * self.bin_width_hz)

    def to_csv(self, rf_offset_hz=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["freq_hz", "psd_db_per_hz"]
        if rf_offset_hz is not None:
            header.append("rf_freq_hz")
        w.writerow(header)
        for f, d in zip(self.freq_bins_hz, self.density_db_per_hz):
            row = [f"{f:.6f}", f"{d:.6f}"]
            if rf_offset_hz is not None:
                row.append(f"{f + rf_offset_hz:.6f}")
            w.writerow(row)
        return buf.getvalue()


def welch_psd(seq, nfft=DEFAULT_NFFT, overlap=DEFAULT_OVERLAP):
    """Hann-windowed averaged periodogram of a complex sequence."""
    nfft = int(nfft)
    if nfft < 1:
        raise MetricsError("nfft must be positive")
    if not 0 <= overlap < 1:
        raise MetricsError("overlap must be in [0, 1)")
    if len(seq) < nfft:
        raise MetricsError(f"sequence of {len(seq)} samples is shorter than nfft={nfft}")
    fs = seq.sample_rate_hz
    noverlap = int(round(overlap * nfft))
    f, p = sps.welch(seq.samples, fs=fs, window="hann", nperseg=nfft, noverlap=noverlap,
                     detrend=False, return_onesided=False, scaling="density")
    f = np.fft.fftshift(f)
    p = np.fft.fftshift(p)
    if nfft % 2 == 0:
        # move the -fs/2 bin to +fs/2
        f = np.roll(f, -1)
        f[-1] = fs / 2
        p = np.roll(p, -1)
    return PsdEstimate(f, p, nfft, float(overlap), fs)


def _auto_nfft(n, nfft):
    if n >= nfft:
        return nfft
    return 1 << int(np.floor(np.log2(n)))


def band_power_db(seq, f_lo, f_hi, nfft=DEFAULT_NFFT, overlap=DEFAULT_OVERLAP, psd=None):
    """Power inside ``[f_lo, f_hi]`` by integrating the Welch PSD.

    A bin counts when its centre lies in the band. ``nfft`` shrinks to the
    largest power of two that fits short sequences.
    """
    fs = seq.sample_rate_hz
    if not -fs / 2 <= f_lo < f_hi <= fs / 2:
        raise MetricsError(f"invalid band [{f_lo}, {f_hi}] for fs={fs}")
    if psd is None:
        psd = welch_psd(seq, _auto_nfft(len(seq), nfft), overlap)
    f = psd.freq_bins_hz
    mask = (f >= f_lo) & (f <= f_hi)
    return float(_db(np.sum(psd.density[mask]) * psd.bin_width_hz))


@dataclass(frozen=True)
class CancellationReport:
    pre_power_db: float
    post_power_db: float
    suppression_db: float
    noise_floor_db: float
    residual_margin_db: float
    band_hz: tuple = None
    diagnostics: dict = field(default_factory=dict)
    dbm_offset_db: float = None

    def to_dict(self):
        d = asdict(self)
        d["band_hz"] = list(self.band_hz) if self.band_hz is not None else None
        if self.dbm_offset_db is not None:
            d["pre_power_dbm"] = self.pre_power_db + self.dbm_offset_db
            d["post_power_dbm"] = self.post_power_db + self.dbm_offset_db
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def make_report(y_pre, y_post, noise_floor_db, band=None, diagnostics=None, nfft=DEFAULT_NFFT,
                overlap=DEFAULT_OVERLAP, dbm_offset_db=None):
    """Cancellation report over ``band = (f_lo, f_hi)`` (whole Nyquist band if None).

    ``noise_floor_db`` is the noise power inside the same band.
    """
    if len(y_pre) != len(y_post):
        raise MetricsError(f"length mismatch: {len(y_pre)} vs {len(y_post)}")
    if len(y_pre) == 0:
        raise SignalError("empty sequence")
    if band is None:
        pre = max(mean_power_db(y_pre), DB_FLOOR)
        post = max(mean_power_db(y_post), DB_FLOOR)
    else:
        pre = band_power_db(y_pre, band[0], band[1], nfft, overlap)
        post = band_power_db(y_post, band[0], band[1], nfft, overlap)
    return CancellationReport(
        pre_power_db=pre,
        post_power_db=post,
        suppression_db=pre - post,
        noise_floor_db=float(noise_floor_db),
        residual_margin_db=post - float(noise_floor_db),
        band_hz=None if band is None else (float(band[0]), float(band[1])),
        diagnostics=dict(diagnostics or {}),
        dbm_offset_db=dbm_offset_db,
    )


def in_band_noise_db(noise_floor_dbfs, band, sample_rate_hz):
    """Share of a white noise floor falling inside ``band``."""
    if band is None:
        return float(noise_floor_dbfs)
    return float(noise_floor_dbfs + 10 * np.log10((band[1] - band[0]) / sample_rate_hz))


__all__ = [
    "MetricsError", "PsdEstimate", "CancellationReport", "welch_psd", "band_power_db",
    "make_report", "in_band_noise_db", "IqSequence",
]
