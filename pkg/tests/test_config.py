"""Unit tests for experiment config validation, seeding and file utilities."""
import json
import logging

import pytest

from src.config import (
    WEIGHT_PRESETS,
    ExperimentConfig,
    LossWeights,
    NoiseConfig,
    load_experiment_config,
    parse_experiment_config,
    resolve_weights,
    weights_label,
)
from src.errors import ConfigError
from src.utils.fuzzy import suggest_key
from src.utils.io import atomic_write_bytes, read_json, write_json
from src.utils.seeding import derive_seed, keyed_rng


class TestExperimentConfig:
    """Schema validation and defaults."""

    def test_defaults(self):
        config = parse_experiment_config({})
        assert config.forget_pct == 3
        assert config.method == "forget-mi"
        assert resolve_weights(config.weights) == WEIGHT_PRESETS["equal"]
        assert config.unlearn.epochs == 30 and config.unlearn.lr == 1e-4

    def test_unknown_key_suggests_fix(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_experiment_config({"forget_pc": 3})
        assert "forget_pct" in str(excinfo.value)

    def test_nested_error_names_field_path(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_experiment_config({"noise": {"sigma": -1}})
        assert excinfo.value.field_path == "noise.sigma"
        assert str(excinfo.value).startswith("noise.sigma")

    def test_explicit_weights_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            parse_experiment_config({"weights": {"w_uu": 0.5, "w_ur": 0.5, "w_mu": 0.5, "w_mr": 0.0}})

    def test_explicit_weights_accepted(self):
        raw = {"weights": {"w_uu": 0.4, "w_ur": 0.2, "w_mu": 0.2, "w_mr": 0.2}}
        config = parse_experiment_config(raw)
        assert resolve_weights(config.weights).as_tuple() == (0.4, 0.2, 0.2, 0.2)
        assert weights_label(config.weights) == "w0.4-0.2-0.2-0.2"

    def test_unknown_method(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_experiment_config({"method": "scrub"})
        assert excinfo.value.field_path == "method"

    @pytest.mark.parametrize("pct", [0, 100])
    def test_pct_range(self, pct):
        with pytest.raises(ConfigError):
            parse_experiment_config({"forget_pct": pct})

    def test_no_noise_preset(self):
        config = parse_experiment_config({"weights": "no_noise"})
        assert config.resolved_noise().is_identity
        assert config.unlearn_config().weights == WEIGHT_PRESETS["equal"]

    def test_presets_sum_to_one(self):
        for weights in WEIGHT_PRESETS.values():
            assert sum(weights.as_tuple()) == pytest.approx(1.0)

    def test_loss_weights_reject_negative(self):
        with pytest.raises(ValueError):
            LossWeights(w_uu=-0.1, w_ur=0.5, w_mu=0.3, w_mr=0.3)

    def test_noise_identity(self):
        assert NoiseConfig.none().is_identity
        assert not NoiseConfig().is_identity


class TestSeeds:
    """Stage seed fan-out."""

    def test_stage_seeds_are_stable_and_distinct(self):
        assert derive_seed(0, "data") == derive_seed(0, "data")
        assert derive_seed(0, "data") != derive_seed(0, "split")
        assert derive_seed(0, "data") != derive_seed(1, "data")
        assert 0 <= derive_seed(123, "unlearn") < 2 ** 32

    def test_config_fans_out_unset_seeds(self):
        config = parse_experiment_config({"seed": 5})
        assert config.data.seed == derive_seed(5, "data")
        assert config.noise.seed == derive_seed(5, "noise")
        assert config.unlearn_config().seed == derive_seed(5, "unlearn")

    def test_explicit_stage_seed_kept(self):
        config = parse_experiment_config({"seed": 5, "data": {"seed": 42}})
        assert config.data.seed == 42

    def test_keyed_rng(self):
        assert keyed_rng(1, 2, 3).random() == keyed_rng(1, 2, 3).random()
        assert keyed_rng(1, 2, 3).random() != keyed_rng(1, 2, 4).random()

    def test_config_hash(self):
        a = parse_experiment_config({"seed": 1})
        assert a.config_hash() == parse_experiment_config({"seed": 1}).config_hash()
        assert a.config_hash() != parse_experiment_config({"seed": 2}).config_hash()


class TestLoadConfig:
    """Config files on disk."""

    def test_load(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"forget_pct": 6, "method": "retrain"}))
        config = load_experiment_config(path)
        assert isinstance(config, ExperimentConfig)
        assert config.forget_pct == 6 and config.method == "retrain"

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"forget_pct": 3,')
        with pytest.raises(ConfigError, match="malformed JSON"):
            load_experiment_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_experiment_config(tmp_path / "absent.json")

    def test_nonstandard_pct_warns(self, tmp_path, caplog):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"forget_pct": 5}))
        with caplog.at_level(logging.WARNING):
            load_experiment_config(path)
        assert "forget_pct=5" in caplog.text


class TestUtilities:
    """Fuzzy key suggestions and atomic file writes."""

    def test_suggest_key(self):
        assert suggest_key("lerning_rate", ["lr", "learning_rate", "epochs"]) == "learning_rate"
        assert suggest_key("zzz", ["lr", "epochs"]) is None

    def test_json_round_trip(self, tmp_path):
        path = write_json(tmp_path / "nested" / "out.json", {"a": [1, 2]})
        assert read_json(path) == {"a": [1, 2]}

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        atomic_write_bytes(tmp_path / "blob.bin", b"abc")
        assert [p.name for p in tmp_path.iterdir()] == ["blob.bin"]
