import json

import numpy as np
import pytest

from freeconv.config import CONFIG_ENV, DEFAULT_SEED, DEFAULT_TOLERANCES, RunConfig, load_config
from freeconv.errors import ParameterError


def test_defaults():
    cfg = RunConfig()
    assert cfg.seed == DEFAULT_SEED and cfg.output_format == "json" and cfg.parallelism == 1
    assert cfg.tol("im_phi") == 1e-9 and cfg.tolerances == DEFAULT_TOLERANCES
    g = cfg.upper_grid()
    assert g.shape == (20, 21)
    assert np.allclose(g[:, 0].imag, np.logspace(-2, 2, 20))
    assert np.all(g.imag > 0)


def test_partial_tolerance_override_keeps_others():
    cfg = RunConfig(tolerances={"density": 1e-6})
    assert cfg.tol("density") == 1e-6 and cfg.tol("mass") == 1e-6 and cfg.tol("jump") == 1e-3


@pytest.mark.parametrize("kw", [
    {"tolerances": {"mass": 0.0}}, {"output_format": "xml"}, {"parallelism": 0},
    {"grid": {"counts": [1, 5]}}, {"grid": {"y_range": [0.0, 1.0]}},
    {"grid": {"x_range": [1.0, -1.0]}},
])
def test_validation(kw):
    with pytest.raises(ParameterError):
        RunConfig(**kw)


def test_dict_roundtrip_and_schema():
    cfg = RunConfig(output_format="csv", parallelism=2, seed=5)
    d = cfg.to_dict()
    assert d["schema"] == 1
    assert RunConfig.from_dict(json.loads(json.dumps(d))) == cfg
    with pytest.raises(ParameterError):
        RunConfig.from_dict({"colour": "red"})


def test_load_from_path_and_env(tmp_path, monkeypatch):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"seed": 11, "output_format": "csv"}))
    assert load_config(str(p)).seed == 11
    monkeypatch.setenv(CONFIG_ENV, str(p))
    assert load_config().output_format == "csv"
    monkeypatch.delenv(CONFIG_ENV)
    assert load_config() == RunConfig()


def test_bad_config_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParameterError):
        load_config(str(p))
