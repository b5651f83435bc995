"""
Tests for settings and experiment presets
"""
import pytest
from pydantic import ValidationError

from tests.conftest import REPO_ROOT
from tilelat.config import ExperimentConfig, Settings


class TestSettings:
    """TILELAT_* environment settings"""

    def test_defaults(self, monkeypatch):
        for name in ("TILELAT_THREADS", "TILELAT_LOG_FORMAT", "TILELAT_LOG_LEVEL"):
            monkeypatch.delenv(name, raising=False)
        settings = Settings(_env_file=None)
        assert settings.threads == 1
        assert settings.log_format == "json"
        assert settings.format_version == "1"

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("TILELAT_THREADS", "4")
        monkeypatch.setenv("TILELAT_LOG_FORMAT", "CONSOLE")
        settings = Settings(_env_file=None)
        assert settings.threads == 4
        assert settings.log_format == "console", "format is case-insensitive"

    def test_invalid_values(self, monkeypatch):
        monkeypatch.setenv("TILELAT_THREADS", "0")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)
        monkeypatch.setenv("TILELAT_THREADS", "1")
        monkeypatch.setenv("TILELAT_LOG_FORMAT", "xml")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)


class TestExperimentConfig:
    """YAML defaults and presets"""

    @pytest.fixture
    def experiments(self) -> ExperimentConfig:
        return ExperimentConfig(str(REPO_ROOT / "config" / "experiments.yaml"))

    def test_shipped_presets(self, experiments):
        presets = experiments.get_all_presets()
        for name in ("square-lattice", "lp2-200", "lp1-200", "lp1-growth", "riesz-dyadic"):
            assert name in presets, f"missing preset {name}"
        assert experiments.get_preset("lp1-growth")["stages"] == [50, 100, 200, 400]
        assert experiments.get_preset("riesz-dyadic")["eps_schedule"] == "dyadic"

    def test_unknown_preset_is_empty(self, experiments):
        assert experiments.get_preset("nope") == {}

    def test_defaults_are_copies(self, experiments):
        defaults = experiments.get_defaults("build")
        assert defaults["steps"] == 200 and defaults["scheme"] == "grid"
        defaults["steps"] = 1
        assert experiments.get_defaults("build")["steps"] == 200

    def test_missing_file_uses_builtins(self, tmp_path):
        experiments = ExperimentConfig(str(tmp_path / "absent.yaml"))
        assert experiments.get_defaults("voronoi")["directions"] == 100
        assert experiments.get_all_presets() == {}

    def test_reload(self, tmp_path):
        path = tmp_path / "experiments.yaml"
        path.write_text("presets:\n  tiny:\n    steps: 3\n", encoding="utf-8")
        experiments = ExperimentConfig(str(path))
        assert experiments.get_preset("tiny") == {"steps": 3}
        assert experiments.get_defaults("build")["steps"] == 200, "missing defaults fall back to builtins"

        path.write_text("presets:\n  tiny:\n    steps: 5\n", encoding="utf-8")
        experiments.reload()
        assert experiments.get_preset("tiny") == {"steps": 5}
