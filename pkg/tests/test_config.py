"""Tests for the merged run configuration."""

import pytest

from lung_attr_seg.config import CONFIG_NAME, RunConfig, RunSettings
from lung_attr_seg.errors import ConfigError


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.run == RunSettings()
        assert cfg.train.lr == 1e-4 and cfg.train.batch_size == 12
        assert cfg.weights.lambda_a == 0.9 and cfg.weights.delta == 0.7
        assert (cfg.model.height, cfg.model.width) == (224, 224)

    def test_bare_key_sets_every_section(self):
        cfg = RunConfig().with_values({"seed": "3", "height": "64", "width": "64", "tau": "0.4"})
        assert cfg.generator.seed == 3 and cfg.train.seed == 3
        assert cfg.generator.height == 64 and cfg.model.height == 64
        assert cfg.generator.tau == 0.4 and cfg.weights.tau == 0.4

    def test_dotted_key_sets_one_section(self):
        cfg = RunConfig().with_values({"train.seed": "5", "weights.attribute_heads": "1,2"})
        assert cfg.train.seed == 5 and cfg.generator.seed == 0
        assert cfg.weights.attribute_heads == (1, 2)

    def test_size_mismatch(self):
        with pytest.raises(ConfigError):
            RunConfig().with_values({"model.height": "64", "model.width": "64"})

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            RunConfig().with_values({"learning_rate": "1"})
        with pytest.raises(ConfigError):
            RunConfig().with_values({"model.lr": "1"})

    def test_invalid_value(self):
        with pytest.raises(ConfigError):
            RunConfig().with_values({"mode": "semi"})
        with pytest.raises(ConfigError):
            RunConfig().with_values({"lambda_c": "-1"})

    def test_flat_keys(self):
        flat = RunConfig().flat()
        assert flat["train.lr"] == 1e-4
        assert flat["weights.delta"] == 0.7
        assert "train.weights" not in flat
        assert all(key.split(".")[0] in ("run", "generator", "model", "train", "weights") for key in flat)

    def test_save_and_reload(self, tmp_path):
        cfg = RunConfig().with_values(
            {"height": "64", "width": "64", "mode": "inductive", "use_aica": "false", "data_dir": "d", "betas": "0.8,0.99"}
        )
        path = cfg.save(tmp_path)
        assert path.name == CONFIG_NAME
        assert RunConfig.from_file(path) == cfg

    def test_hyperparameters_are_plain(self):
        hp = RunConfig().hyperparameters()
        assert hp["train.betas"] == [0.9, 0.999]
        assert hp["model.classifier_hidden"] is None
