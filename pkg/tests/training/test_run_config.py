# pymgcma/tests/training/test_run_config.py

"""
Run configuration tests: defaults, presets, files and overrides.
"""

import json

import pytest

from pymgcma.core import ConfigError
from pymgcma.enumerations import Stage
from pymgcma.training import PRESETS, RunConfig, TrainConfig, load_run_config
from pymgcma.training.config import THREADS_ENV


def test_desk_defaults():
    config = load_run_config()
    assert config.train == TrainConfig()
    assert config.pipeline.model_dim == 64
    assert config.data_dir is None


def test_full_scale_preset():
    config = load_run_config(preset="full")
    print(config.to_dict())
    assert (config.pipeline.model_dim, config.pipeline.num_heads, config.pipeline.n_blocks) == (
        768,
        12,
        6,
    )
    assert config.train.learning_rate == PRESETS["full"]["learning_rate"]
    assert config.train.batch_size == 4


def test_file_values_override_the_preset(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(
        json.dumps({"model_dim": 16, "num_heads": 2, "stage_order": ["IAM", "DAM"], "seed": 4}),
        encoding="utf-8",
    )
    config = load_run_config(path)
    assert config.pipeline.model_dim == 16
    assert config.pipeline.stage_order == (Stage.IAM, Stage.DAM)
    assert config.train.seed == 4


@pytest.mark.parametrize(
    "values",
    [{"epochs": 3}, {"model_dim": 6, "num_heads": 4}, {"learning_rate": -1.0}, {"threads": 0}],
)
def test_invalid_configs(values):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(values)


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.json")
    path = tmp_path / "broken.json"
    path.write_text("[1, 2", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(path)
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(path)
    with pytest.raises(ConfigError):
        load_run_config(preset="huge")


def test_overrides_skip_none():
    config = load_run_config().with_overrides(seed=9, max_epochs=None, data_dir="data")
    assert config.train.seed == 9
    assert config.train.max_epochs == 100
    assert config.data_dir == "data"


def test_worker_count(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert RunConfig().worker_count == 1
    monkeypatch.setenv(THREADS_ENV, "3")
    assert RunConfig().worker_count == 3
    assert RunConfig(threads=2).worker_count == 2
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError):
        RunConfig().worker_count
