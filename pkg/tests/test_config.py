import json

import pytest

from pimcancel.basis import ModelKind
from pimcancel.config import DEFAULTS, ConfigError, ExperimentConfig, parse_value


def test_defaults_validate():
    cfg = ExperimentConfig.load()
    assert cfg.seed == DEFAULTS["seed"]
    assert cfg.model_spec().kind is ModelKind.MEMORYLESS
    assert cfg.band() == (-7.5e6, 7.5e6)
    assert len(cfg.data["sweep"]["values"]) == 7


def test_defaults_not_mutated():
    ExperimentConfig.load(overrides=["frontend.noise_floor_dbfs=-70"])
    assert DEFAULTS["frontend"]["noise_floor_dbfs"] == -65.0


def test_toml_and_overrides():
    text = '[canceller]\nmodel = "txmemory"\n[frontend]\nnoise_floor_dbfs = -80.0\n'
    cfg = ExperimentConfig.from_toml(text, ["frontend.noise_floor_dbfs=-90", "seed=7"])
    assert cfg.model_spec().kind is ModelKind.TX_MEMORY and cfg.model_spec().M1 == 1
    assert cfg.data["frontend"]["noise_floor_dbfs"] == -90
    assert cfg.seed == 7


def test_parse_value():
    assert parse_value("3") == 3
    assert parse_value("true") is True
    assert parse_value("[1, 2]") == [1, 2]
    assert parse_value("-inf") == float("-inf")
    assert parse_value("txmemory") == "txmemory"


@pytest.mark.parametrize("bad", [
    "nosuchkey = 1\n",
    "[frontend]\nnoise = 3\n",
    "seed = -1\n",
    "[canceller]\nmodel = \"cubic\"\n",
    "[metrics]\nband_lo_hz = 1e9\n",
    "[sweep]\nvalues = [1.0, 1.0]\n",
    "[sweep]\nparameter = \"bandwidth\"\n",
    "[estimator]\nforgetting_factor = 2.0\n",
    "cc1 = 5\n",
    "this is not toml",
])
def test_rejects_bad_config(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_toml(bad)


def test_override_needs_equals():
    with pytest.raises(ConfigError):
        ExperimentConfig.load(overrides=["seed"])


def test_optional_keys_accepted():
    cfg = ExperimentConfig.load(overrides=["frontend.tx1_taps=[[0.1,0.0],[1.0,0.0],[0.05,0.0]]",
                                           "estimator.step_size=0.01", "report.rf_center_hz=2.14e9"])
    assert cfg.frontend_model("train").tx1.taps[1] == 1.0
    assert cfg.estimator_config().step_size == 0.01


def test_snapshot_round_trip():
    cfg = ExperimentConfig.load(overrides=["seed=11"])
    again = ExperimentConfig.from_dict(json.loads(cfg.to_json()))
    assert again.data == cfg.data


def test_splits_use_distinct_seeds():
    cfg = ExperimentConfig.load()
    assert cfg.carrier(1, "train").seed != cfg.carrier(1, "eval").seed
    assert cfg.carrier(1, "train").seed != cfg.carrier(2, "train").seed
    assert cfg.frontend_model("train").rng_seed != cfg.frontend_model("eval").rng_seed
    assert cfg.frontend_model("train").pim == cfg.frontend_model("eval").pim
