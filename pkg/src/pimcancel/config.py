"""Experiment configuration.

A run is described by a TOML file whose sections mirror ``DEFAULTS`` below;
any key left out takes its default. Unknown keys are rejected. Values can be
patched from the command line with dotted ``section.key=value`` overrides,
where ``value`` is parsed as a TOML literal (bare words fall back to strings).

The defaults reproduce the measured setup's baseline parameters: two 5 MHz
carriers, PIM taps L1=3 / L2=4, TX-chain taps M1=M2=1 and 90000 learning
samples.
"""
import copy
import json
import math
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .basis import ModelKind, ModelSpec
from .estimator import EstimatorConfig
from .frontend import FrontEndModel, PimKernel, TxChainModel, random_pim_kernel, random_tx_chain
from .rng import derive_seed
from .signal import CarrierConfig

DEFAULTS = {
    "seed": 2018,
    "sample_rate_hz": 30.72e6,
    "train_samples": 90000,
    "eval_samples": 90000,
    "diversity": False,
    "cc1": {"bandwidth_hz": 5e6, "num_subcarriers": 300, "power_dbfs": -15.0},
    "cc2": {"bandwidth_hz": 5e6, "num_subcarriers": 300, "power_dbfs": -15.0},
    "frontend": {
        "noise_floor_dbfs": -65.0,
        "ota_isolation_db": 10.0,
        # lumped post-PA, duplexer and switch losses ahead of the PIM source
        "tx_gain_db": 0.0,
        "tx_M1": 1,
        "tx_M2": 1,
        "tx_decay": 0.1,
        "pim_L1": 3,
        "pim_L2": 4,
        "pim_decay": 0.5,
    },
    "canceller": {"model": "memoryless", "L1": 3, "L2": 4, "M1": 1, "M2": 1},
    "estimator": {"method": "block_ls", "ridge_lambda": 0.0, "forgetting_factor": 0.999},
    "metrics": {"nfft": 4096, "overlap": 0.5, "band_lo_hz": -7.5e6, "band_hi_hz": 7.5e6},
    "sweep": {"parameter": "power_dbfs", "values": [-24.0, -21.0, -18.0, -15.0, -12.0, -9.0, -6.0], "jobs": 1},
    "report": {},
}

# keys that may appear although they have no default
OPTIONAL = {
    "frontend": {"tx1_taps", "tx2_taps", "pim_terms"},
    "estimator": {"step_size"},
    "report": {"dbm_offset_db", "rf_center_hz"},
}

# seed-derivation labels
SEED_CC1 = {"train": 1, "eval": 3}
SEED_CC2 = {"train": 2, "eval": 4}
SEED_NOISE = {"train": 8, "eval": 9}
SEED_KERNEL = 5
SEED_TX1 = 6
SEED_TX2 = 7


class ConfigError(ValueError):
    pass


def _merge(base, patch, path=""):
    for key, val in patch.items():
        where = f"{path}{key}"
        if key not in base:
            section = path.rstrip(".")
            if key in OPTIONAL.get(section, ()):
                base[key] = val
                continue
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where!r} must be a section")
            _merge(base[key], val, where + ".")
        else:
            base[key] = val
    return base


def parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(data, item):
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value")
    key, text = item.split("=", 1)
    parts = key.strip().split(".")
    patch = cur = {}
    for p in parts[:-1]:
        cur[p] = {}
        cur = cur[p]
    cur[parts[-1]] = parse_value(text.strip())
    return _merge(data, patch)


@dataclass(frozen=True)
class ExperimentConfig:
    data: dict

    @classmethod
    def from_dict(cls, patch=None, overrides=()):
        data = _merge(copy.deepcopy(DEFAULTS), copy.deepcopy(patch or {}))
        for item in overrides:
            apply_override(data, item)
        cfg = cls(data)
        cfg.validate()
        return cfg

    @classmethod
    def from_toml(cls, text, overrides=()):
        try:
            patch = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        return cls.from_dict(patch, overrides)

    @classmethod
    def load(cls, path=None, overrides=()):
        if path is None:
            return cls.from_dict(None, overrides)
        with open(path, encoding="utf-8") as fh:
            return cls.from_toml(fh.read(), overrides)

    def with_overrides(self, *items):
        return ExperimentConfig.from_dict(self.data, items)

    def validate(self):
        """Build every derived object once so bad values fail before any output."""
        try:
            seed = int(self.data["seed"])
            if not 0 <= seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            if int(self.data["train_samples"]) < 1 or int(self.data["eval_samples"]) < 1:
                raise ConfigError("train_samples and eval_samples must be positive")
            if not float(self.data["sample_rate_hz"]) > 0:
                raise ConfigError("sample_rate_hz must be positive")
            self.carrier(1, "train")
            self.carrier(2, "train")
            self.frontend_model("train")
            self.model_spec()
            self.estimator_config()
            m = self.data["metrics"]
            if int(m["nfft"]) < 1 or not 0 <= float(m["overlap"]) < 1:
                raise ConfigError("metrics.nfft must be positive and overlap in [0, 1)")
            self.band()
            vals = [float(v) for v in self.data["sweep"]["values"]]
            if self.data["sweep"]["parameter"] != "power_dbfs":
                raise ConfigError("only the 'power_dbfs' sweep parameter is supported")
            diffs = [b - a for a, b in zip(vals, vals[1:])]
            if not vals or not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
                raise ConfigError("sweep.values must be non-empty and strictly monotone")
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @property
    def seed(self):
        return int(self.data["seed"])

    @property
    def sample_rate_hz(self):
        return float(self.data["sample_rate_hz"])

    @property
    def diversity(self):
        return bool(self.data["diversity"])

    def samples(self, split):
        return int(self.data["train_samples" if split == "train" else "eval_samples"])

    def carrier(self, index, split, power_dbfs=None):
        sec = self.data[f"cc{index}"]
        labels = SEED_CC1 if index == 1 else SEED_CC2
        return CarrierConfig(
            bandwidth_hz=float(sec["bandwidth_hz"]),
            num_subcarriers=int(sec["num_subcarriers"]),
            power_dbfs=float(sec["power_dbfs"] if power_dbfs is None else power_dbfs),
            seed=derive_seed(self.seed, labels[split]),
        )

    def frontend_model(self, split):
        fe = self.data["frontend"]
        m1, m2 = int(fe["tx_M1"]), int(fe["tx_M2"])
        if "tx1_taps" in fe:
            tx1 = TxChainModel.from_dict({"taps": fe["tx1_taps"], "M1": m1, "M2": m2})
        else:
            tx1 = random_tx_chain(derive_seed(self.seed, SEED_TX1), m1, m2, float(fe["tx_decay"]))
        if "tx2_taps" in fe:
            tx2 = TxChainModel.from_dict({"taps": fe["tx2_taps"], "M1": m1, "M2": m2})
        else:
            tx2 = random_tx_chain(derive_seed(self.seed, SEED_TX2), m1, m2, float(fe["tx_decay"]))
        l1, l2 = int(fe["pim_L1"]), int(fe["pim_L2"])
        if "pim_terms" in fe:
            pim = PimKernel.from_dict({"L1": l1, "L2": l2, "terms": fe["pim_terms"]})
        else:
            pim = random_pim_kernel(derive_seed(self.seed, SEED_KERNEL), l1, l2, float(fe["pim_decay"]))
        noise = fe["noise_floor_dbfs"]
        return FrontEndModel(
            tx1=tx1, tx2=tx2, pim=pim,
            noise_floor_dbfs=float(noise),
            ota_isolation_db=float(fe["ota_isolation_db"]),
            rng_seed=derive_seed(self.seed, SEED_NOISE[split]),
            tx_gain_db=float(fe["tx_gain_db"]),
        )

    def model_spec(self):
        c = self.data["canceller"]
        kind = ModelKind(c["model"])
        if kind is ModelKind.MEMORYLESS:
            return ModelSpec(kind, int(c["L1"]), int(c["L2"]), 0, 0)
        return ModelSpec(kind, int(c["L1"]), int(c["L2"]), int(c["M1"]), int(c["M2"]))

    def estimator_config(self):
        e = self.data["estimator"]
        return EstimatorConfig(
            method=e["method"],
            ridge_lambda=float(e["ridge_lambda"]),
            forgetting_factor=float(e["forgetting_factor"]),
            step_size=None if "step_size" not in e else float(e["step_size"]),
        )

    def band(self):
        m = self.data["metrics"]
        lo, hi = float(m["band_lo_hz"]), float(m["band_hi_hz"])
        fs = self.sample_rate_hz
        if not -fs / 2 <= lo < hi <= fs / 2:
            raise ConfigError(f"metrics band [{lo}, {hi}] outside the sample rate")
        return lo, hi

    @property
    def noise_enabled(self):
        return math.isfinite(float(self.data["frontend"]["noise_floor_dbfs"]))

    def to_json(self):
        return json.dumps(self.data, indent=2, sort_keys=True, default=str) + "\n"


__all__ = ["ConfigError", "ExperimentConfig", "DEFAULTS", "parse_value", "apply_override"]
