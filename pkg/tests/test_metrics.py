import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pimcancel.metrics import (
    DB_FLOOR,
    MetricsError,
    band_power_db,
    in_band_noise_db,
    make_report,
    welch_psd,
)
from pimcancel.signal import IqSequence, mean_power_db

from conftest import FS, random_seq
from oracles import periodogram_power


def tone(freq, n, amp=1.0):
    return IqSequence(amp * np.exp(2j * np.pi * freq / FS * np.arange(n)), FS)


class TestPsd:
    def test_tone_peak_bin(self):
        psd = welch_psd(tone(FS / 8, 16384), nfft=1024)
        assert psd.freq_bins_hz[np.argmax(psd.density)] == pytest.approx(FS / 8)

    def test_bins_cover_nyquist(self):
        psd = welch_psd(random_seq(1, 4096), nfft=256)
        f = psd.freq_bins_hz
        assert f.shape == (256,) and np.all(np.diff(f) > 0)
        assert f[0] == pytest.approx(-FS / 2 + FS / 256) and f[-1] == FS / 2

    def test_parseval_white_noise(self):
        x = random_seq(2, 131072, power=10 ** -9)
        psd = welch_psd(x)
        err = 10 * np.log10(psd.integrated_power()) - 10 * np.log10(periodogram_power(x.samples))
        assert abs(err) <= 0.3

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**32), st.floats(-60, 20))
    def test_band_power_scales_with_gain(self, seed, gain_db):
        x = random_seq(seed, 8192)
        y = x.replace(x.samples * 10 ** (gain_db / 20))
        assert band_power_db(y, -5e6, 5e6) - band_power_db(x, -5e6, 5e6) == pytest.approx(gain_db, abs=1e-9)

    def test_zero_sequence_floor(self):
        z = IqSequence(np.zeros(4096), FS)
        assert band_power_db(z, -1e6, 1e6) == DB_FLOOR
        assert np.all(welch_psd(z, 256).density_db_per_hz == DB_FLOOR)

    def test_full_band_is_mean_power(self):
        x = random_seq(3, 65536)
        assert band_power_db(x, -FS / 2, FS / 2) == pytest.approx(mean_power_db(x), abs=0.1)

    def test_tone_leakage(self):
        x = tone(FS / 8, 65536)
        assert band_power_db(x, -FS / 4, -FS / 8) <= -60

    def test_short_sequence_shrinks_nfft(self):
        x = random_seq(4, 1000)
        assert np.isfinite(band_power_db(x, -FS / 2, FS / 2))

    def test_errors(self):
        x = random_seq(5, 4096)
        with pytest.raises(MetricsError):
            band_power_db(x, 1e6, 1e6)
        with pytest.raises(MetricsError):
            band_power_db(x, -FS, 0)
        with pytest.raises(MetricsError):
            welch_psd(x, 8192)
        with pytest.raises(MetricsError):
            welch_psd(x, 256, overlap=1.0)

    def test_csv(self):
        psd = welch_psd(random_seq(6, 1024), 64)
        lines = psd.to_csv().splitlines()
        assert lines[0] == "freq_hz,psd_db_per_hz" and len(lines) == 65
        rf = psd.to_csv(rf_offset_hz=2.14e9).splitlines()
        assert rf[0].endswith(",rf_freq_hz")
        f, _, frf = (float(v) for v in rf[1].split(","))
        assert frf - f == pytest.approx(2.14e9)


class TestReport:
    def test_identities(self):
        pre, post = random_seq(1, 8192, power=1e-4), random_seq(2, 8192, power=1e-6)
        r = make_report(pre, post, -65.0, band=(-7.5e6, 7.5e6))
        assert r.suppression_db == pytest.approx(r.pre_power_db - r.post_power_db)
        assert r.residual_margin_db == pytest.approx(r.post_power_db + 65.0)
        assert r.suppression_db == pytest.approx(20.0, abs=0.5)

    def test_whole_band_21db(self):
        pre = random_seq(3, 4096)
        post = pre.replace(pre.samples * 10 ** (-21 / 20))
        r = make_report(pre, post, -100.0)
        assert r.suppression_db == pytest.approx(21.0, abs=1e-9)

    def test_frequency_shift_invariance(self):
        pre, post = random_seq(4, 16384), random_seq(5, 16384, power=0.01)
        shift = np.exp(2j * np.pi * 0.1 * np.arange(16384))
        a = make_report(pre, post, -50.0)
        b = make_report(pre.replace(pre.samples * shift), post.replace(post.samples * shift), -50.0)
        assert a.suppression_db == pytest.approx(b.suppression_db, abs=1e-9)

    def test_zero_residual(self):
        pre = random_seq(6, 256)
        r = make_report(pre, pre.replace(np.zeros(256)), -65.0)
        assert r.post_power_db == DB_FLOOR and np.isfinite(r.suppression_db)

    def test_json_and_dbm(self):
        r = make_report(random_seq(7, 256), random_seq(8, 256), -65.0, diagnostics={"rank": np.int64(8)},
                        dbm_offset_db=-20.0)
        d = json.loads(r.to_json())
        assert d["diagnostics"]["rank"] == 8
        assert d["pre_power_dbm"] == pytest.approx(d["pre_power_db"] - 20.0)

    def test_length_mismatch(self):
        with pytest.raises(MetricsError):
            make_report(random_seq(1, 10), random_seq(2, 11), -65.0)

    def test_in_band_noise(self):
        assert in_band_noise_db(-65.0, None, FS) == -65.0
        assert in_band_noise_db(-65.0, (-FS / 4, FS / 4), FS) == pytest.approx(-65.0 - 10 * np.log10(2))
