import logging

import pytest

from TVAR_Rate_Distortion.rate_distortion.quadrature import QuadConfig
from TVAR_Rate_Distortion.utils import PACKAGE_DIR, canonical_json, config_root, configure_logging, content_hash, load_area_config, load_json_obj


def test_canonical_json_sorts_keys_and_fixes_numbers():
    assert canonical_json({"b": 1, "a": [0.5, True, None, "x"]}) == '{"a":["0.5",true,null,"x"],"b":"1"}'
    assert canonical_json({"x": 1}) == canonical_json({"x": 1.0})


def test_content_hash_is_stable():
    assert content_hash({"a": 1, "b": [2, 3]}) == content_hash({"b": (2.0, 3.0), "a": 1.0})
    assert content_hash({"a": 1}) != content_hash({"a": 2})


def test_unsupported_values_are_rejected():
    with pytest.raises(TypeError):
        canonical_json({"a": object()})


def test_packaged_configs_are_default(monkeypatch):
    monkeypatch.delenv("TVAR_RD_CONFIG_DIR", raising=False)
    assert config_root() == PACKAGE_DIR / "config"
    assert load_area_config("verify")["k_list"] == [0, 1, 2]


def test_config_dir_override(monkeypatch, tmp_path):
    area = tmp_path / "quadrature_config"
    area.mkdir()
    (area / "config.yaml").write_text("r_panels: 2\nomega_panels: 4\nnodes_per_panel: 3\nrefine_tol: 1.0e-4\nmax_refinements: 2\nworkers: 1\n", encoding="utf-8")
    monkeypatch.setenv("TVAR_RD_CONFIG_DIR", str(tmp_path))
    assert QuadConfig.from_config() == QuadConfig(r_panels=2, omega_panels=4, nodes_per_panel=3, refine_tol=1e-4, max_refinements=2, workers=1)


def test_load_json_obj(tmp_path):
    path = tmp_path / "obj.json"
    path.write_text('{"k": [1, 2]}', encoding="utf-8")
    assert load_json_obj(path) == {"k": [1, 2]}


def test_log_file_handler(monkeypatch, tmp_path):
    log_file = tmp_path / "run.log"
    monkeypatch.setenv("TVAR_RD_LOG_FILE", str(log_file))
    configure_logging(logging.INFO)
    logging.getLogger("TVAR_Rate_Distortion.test").info("hello")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "INFO - hello" in log_file.read_text(encoding="utf-8")
    logging.basicConfig(force=True, handlers=[logging.NullHandler()])
