"""Simulate, train, cancel and sweep, writing run artifacts to a directory.

Output layout (every file is optional except where a verb produces it)::

    <out>/config.json       resolved configuration snapshot
    <out>/report.json       CancellationReport of the evaluation set
    <out>/coefficients.json estimated coefficients with their basis terms
    <out>/terms.txt         basis term list, one "d_a d_b d_c" per line
    <out>/psd_pre.csv       PSD before cancellation  (freq_hz, psd_db_per_hz)
    <out>/psd_post.csv      PSD after cancellation
    <out>/psd_noise.csv     PSD of the noise component alone
    <out>/sweep.csv         tx_power_db, pim_power_db, residual_db, suppression_db
"""
import csv
import io
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .basis import build_data_matrix, enumerate_basis, terms_to_text
from .canceller import cancel_block
from .estimator import fit
from .frontend import simulate_components
from .metrics import DB_FLOOR, band_power_db, in_band_noise_db, make_report, welch_psd
from .signal import generate_cc

SWEEP_COLUMNS = ("tx_power_db", "pim_power_db", "residual_db", "suppression_db")


@dataclass
class Capture:
    s1: object
    s2: object
    pim: object
    noise: object
    y: object


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def simulate(cfg, split, power_dbfs=None, diversity=None):
    """Carriers plus received signal for the ``train`` or ``eval`` split.

    The two splits use different carrier and noise seeds.
    """
    n = cfg.samples(split)
    fs = cfg.sample_rate_hz
    s1 = generate_cc(cfg.carrier(1, split, power_dbfs), n, fs)
    s2 = generate_cc(cfg.carrier(2, split, power_dbfs), n, fs)
    div = cfg.diversity if diversity is None else diversity
    pim, noise = simulate_components(cfg.frontend_model(split), s1, s2, div)
    y = pim + noise
    return Capture(s1, s2, pim, noise, y)


def train(cfg, power_dbfs=None, diversity=None):
    """Fit the configured canceller on the training split."""
    cap = simulate(cfg, "train", power_dbfs, diversity)
    terms = enumerate_basis(cfg.model_spec())
    a = build_data_matrix(cap.s1, cap.s2, terms)
    return fit(a, cap.y, cfg.estimator_config())


def evaluate(cfg, theta, diagnostics=None, power_dbfs=None, diversity=None):
    """Cancel the evaluation split; returns ``(report, capture, cancelled)``."""
    cap = simulate(cfg, "eval", power_dbfs, diversity)
    a = build_data_matrix(cap.s1, cap.s2, theta.terms)
    post = cancel_block(cap.y, a, theta)
    band = cfg.band()
    m = cfg.data["metrics"]
    if cfg.noise_enabled:
        noise_db = in_band_noise_db(float(cfg.data["frontend"]["noise_floor_dbfs"]), band, cfg.sample_rate_hz)
    else:
        noise_db = DB_FLOOR
    diag = diagnostics.to_dict() if diagnostics is not None else {}
    diag["num_terms"] = len(theta)
    report = make_report(cap.y, post, noise_db, band, diag, int(m["nfft"]), float(m["overlap"]),
                         cfg.data["report"].get("dbm_offset_db"))
    return report, cap, post


def _psd_csv(cfg, seq):
    m = cfg.data["metrics"]
    rf = cfg.data["report"].get("rf_center_hz")
    return welch_psd(seq, int(m["nfft"]), float(m["overlap"])).to_csv(rf)


def run_experiment(cfg, out_dir=None, theta=None):
    """Train (unless ``theta`` is given), cancel the evaluation split, export."""
    diagnostics = None
    if theta is None:
        theta, diagnostics = train(cfg)
    report, cap, post = evaluate(cfg, theta, diagnostics)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_atomic(os.path.join(out_dir, "config.json"), cfg.to_json())
        write_atomic(os.path.join(out_dir, "coefficients.json"), theta.to_json())
        write_atomic(os.path.join(out_dir, "terms.txt"), terms_to_text(theta.terms))
        write_atomic(os.path.join(out_dir, "psd_pre.csv"), _psd_csv(cfg, cap.y))
        write_atomic(os.path.join(out_dir, "psd_post.csv"), _psd_csv(cfg, post))
        write_atomic(os.path.join(out_dir, "psd_noise.csv"), _psd_csv(cfg, cap.noise))
        write_atomic(os.path.join(out_dir, "report.json"), report.to_json())
    return report


def sweep_point(cfg, power_dbfs, diversity=None):
    """One sweep row: re-train at ``power_dbfs`` (both carriers) and evaluate."""
    theta, diagnostics = train(cfg, power_dbfs, diversity)
    report, cap, _ = evaluate(cfg, theta, diagnostics, power_dbfs, diversity)
    lo, hi = cfg.band()
    m = cfg.data["metrics"]
    pim_db = band_power_db(cap.pim, lo, hi, int(m["nfft"]), float(m["overlap"]))
    return {
        "tx_power_db": float(power_dbfs),
        "pim_power_db": pim_db,
        "residual_db": report.post_power_db,
        "suppression_db": report.suppression_db,
    }


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([f"{r[c]:.9f}" for c in SWEEP_COLUMNS])
    return buf.getvalue()


def run_sweep(cfg, out_dir=None, jobs=None, diversity=None):
    """Power sweep; points run on ``jobs`` threads but rows keep sweep order."""
    values = [float(v) for v in cfg.data["sweep"]["values"]]
    jobs = int(cfg.data["sweep"].get("jobs", 1) if jobs is None else jobs)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            rows = list(ex.map(lambda p: sweep_point(cfg, p, diversity), values))
    else:
        rows = [sweep_point(cfg, p, diversity) for p in values]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_atomic(os.path.join(out_dir, "config.json"), cfg.to_json())
        write_atomic(os.path.join(out_dir, "sweep.csv"), sweep_csv(rows))
    return rows


def power_law_slope(rows):
    """Least-squares slope of pim_power_db against tx_power_db."""
    x = np.array([r["tx_power_db"] for r in rows])
    y = np.array([r["pim_power_db"] for r in rows])
    return float(np.polyfit(x, y, 1)[0])


__all__ = [
    "Capture", "simulate", "train", "evaluate", "run_experiment", "run_sweep",
    "sweep_point", "sweep_csv", "power_law_slope", "write_atomic", "SWEEP_COLUMNS",
]
