"""Command-line entry point: ``pimcancel <verb> [options]``."""
import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .estimator import CoefficientVector, EstimatorError
from .experiment import run_experiment, run_sweep, simulate, train, write_atomic
from .freqplan import PlanError, load_band_table, plan
from .basis import terms_to_text
from .metrics import band_power_db, welch_psd


def _common(p):
    p.add_argument("--config", help="TOML experiment config (defaults when omitted)")
    p.add_argument("--out", default="run", help="output directory (default: ./run)")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--diversity", action="store_true", help="simulate the diversity receiver")
    p.add_argument("--model", choices=["memoryless", "txmemory"], help="canceller structure")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="patch a config value, e.g. frontend.noise_floor_dbfs=-70")
    p.add_argument("--dbm-offset", type=float, help="dBFS to dBm offset, annotation only")


def _load(args):
    overrides = list(args.override)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.diversity:
        overrides.append("diversity=true")
    if args.model:
        overrides.append(f'canceller.model="{args.model}"')
    if args.dbm_offset is not None:
        overrides.append(f"report.dbm_offset_db={args.dbm_offset!r}")
    return ExperimentConfig.load(args.config, overrides)


def cmd_simulate(args):
    cfg = _load(args)
    cap = simulate(cfg, "eval")
    os.makedirs(args.out, exist_ok=True)
    m = cfg.data["metrics"]
    nfft, ov = int(m["nfft"]), float(m["overlap"])
    lo, hi = cfg.band()
    summary = {
        "samples": len(cap.y),
        "pim_power_db": band_power_db(cap.pim, lo, hi, nfft, ov),
        "noise_power_db": band_power_db(cap.noise, lo, hi, nfft, ov),
        "rx_power_db": band_power_db(cap.y, lo, hi, nfft, ov),
        "band_hz": [lo, hi],
    }
    write_atomic(os.path.join(args.out, "config.json"), cfg.to_json())
    np.savez(os.path.join(args.out, "capture.npz"), s1=cap.s1.samples, s2=cap.s2.samples,
             y=cap.y.samples, pim=cap.pim.samples, noise=cap.noise.samples,
             sample_rate_hz=cfg.sample_rate_hz)
    write_atomic(os.path.join(args.out, "psd_rx.csv"), welch_psd(cap.y, nfft, ov).to_csv())
    write_atomic(os.path.join(args.out, "psd_noise.csv"), welch_psd(cap.noise, nfft, ov).to_csv())
    write_atomic(os.path.join(args.out, "summary.json"), json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_train(args):
    cfg = _load(args)
    theta, diag = train(cfg)
    os.makedirs(args.out, exist_ok=True)
    write_atomic(os.path.join(args.out, "config.json"), cfg.to_json())
    write_atomic(os.path.join(args.out, "coefficients.json"), theta.to_json())
    write_atomic(os.path.join(args.out, "terms.txt"), terms_to_text(theta.terms))
    write_atomic(os.path.join(args.out, "diagnostics.json"),
                 json.dumps(diag.to_dict(), indent=2, sort_keys=True) + "\n")
    print(f"trained {len(theta)} coefficients, condition number {diag.condition_number:.3g}, "
          f"residual {diag.residual_power_db:.2f} dB")
    return 0


def _print_report(report):
    print(f"pre {report.pre_power_db:.2f} dB  post {report.post_power_db:.2f} dB  "
          f"suppression {report.suppression_db:.2f} dB  margin over noise {report.residual_margin_db:.2f} dB")


def cmd_cancel(args):
    cfg = _load(args)
    theta = None
    if args.coefficients:
        with open(args.coefficients, encoding="utf-8") as fh:
            theta = CoefficientVector.from_json(fh.read())
    report = run_experiment(cfg, args.out, theta=theta)
    _print_report(report)
    return 0


def cmd_sweep(args):
    cfg = _load(args)
    rows = run_sweep(cfg, args.out, jobs=args.jobs)
    for r in rows:
        print(f"{r['tx_power_db']:8.2f} {r['pim_power_db']:9.2f} {r['residual_db']:9.2f} {r['suppression_db']:7.2f}")
    return 0


def cmd_plan(args):
    table = load_band_table(args.band_table)
    bands = args.band or ["B1"]
    result = plan(args.f1, args.bw1, args.f2, args.bw2, bands, table)
    print(json.dumps(result, indent=2))
    return 0


def cmd_selftest(args):
    from .selftest import run_selftest

    return 0 if run_selftest(verbose=True) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="pimcancel", description="PIM self-interference simulator and canceller")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("simulate", help="simulate an evaluation capture")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit canceller coefficients on the training split")
    _common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cancel", help="cancel the evaluation split (trains first unless --coefficients)")
    _common(p)
    p.add_argument("--coefficients", help="coefficients.json from a previous train run")
    p.set_defaults(func=cmd_cancel)

    p = sub.add_parser("run", help="train and cancel in one go")
    _common(p)
    p.set_defaults(func=cmd_cancel, coefficients=None)

    p = sub.add_parser("sweep", help="TX power sweep with re-training per point")
    _common(p)
    p.add_argument("--jobs", type=int, help="parallel sweep points")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plan", help="check IM3 products against receiver bands")
    p.add_argument("--f1", type=float, required=True, help="carrier 1 centre, MHz")
    p.add_argument("--bw1", type=float, required=True, help="carrier 1 bandwidth, MHz")
    p.add_argument("--f2", type=float, required=True, help="carrier 2 centre, MHz")
    p.add_argument("--bw2", type=float, required=True, help="carrier 2 bandwidth, MHz")
    p.add_argument("--band", action="append", help="receiver band name (repeatable, default B1)")
    p.add_argument("--band-table", help="band table CSV (name,ul_lo,ul_hi,dl_lo,dl_hi in MHz)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("selftest", help="run the invariant checks on small instances")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PlanError, EstimatorError, OSError) as exc:
        print(f"pimcancel: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
