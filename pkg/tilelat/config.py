from pydantic_settings import BaseSettings
from pydantic import Field, field_validator
from functools import lru_cache
import yaml
from pathlib import Path
from typing import Dict, Any, Optional

class Settings(BaseSettings):
    """Application configuration settings"""

    log_level: str = "INFO"
    log_format: str = "json"  # json or console

    # TILELAT_THREADS caps every thread pool
    threads: int = Field(default=1, ge=1)

    experiments_config_path: str = "./config/experiments.yaml"
    metrics_path: Optional[str] = None

    # Artifact metadata
    format_version: str = "1"

    @field_validator("log_format")
    @classmethod
    def _check_log_format(cls, value: str) -> str:
        value = value.lower()
        if value not in ("json", "console"):
            raise ValueError("log_format must be 'json' or 'console'")
        return value

    class Config:
        env_prefix = "TILELAT_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False
        extra = "ignore"

@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()


_BUILTIN_DEFAULTS: Dict[str, Any] = {
    "defaults": {
        "build": {"p": 2, "steps": 200, "scheme": "grid", "seed": 0, "mode": "lp"},
        "verify": {"samples": 500, "seed": 0, "radius": "1", "max_tiles": 2},
        "voronoi": {"r_dense": "1", "r_sep": "2", "directions": 100, "direction_source": "coordinates", "seed": 0},
        "report": {"radii": ["1", "2", "4"], "tile_radius": "1", "delta": "1/16", "samples": 50, "seed": 0},
    },
    "presets": {},
}


class ExperimentConfig:
    """Experiment preset loader"""

    def __init__(self, config_path: str):
        self.config_path = Path(config_path)
        self._config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load experiment presets from YAML file"""
        if not self.config_path.exists():
            return dict(_BUILTIN_DEFAULTS)
        with open(self.config_path, "r", encoding="utf-8") as file:
            return yaml.safe_load(file) or {}

    def get_defaults(self, command: str) -> Dict[str, Any]:
        """Get default flag values for a command"""
        defaults = self._config.get("defaults") or _BUILTIN_DEFAULTS["defaults"]
        return dict(defaults.get(command, {}))

    def get_preset(self, name: str) -> Dict[str, Any]:
        """Get a named preset; unknown names return an empty mapping"""
        return dict(self._config.get("presets", {}).get(name, {}))

    def get_all_presets(self) -> Dict[str, Any]:
        return self._config.get("presets", {})

    def reload(self):
        """Reload configuration from file"""
        self._config = self._load_config()

@lru_cache()
def get_experiment_config() -> ExperimentConfig:
    """Get cached ExperimentConfig instance"""
    settings = get_settings()
    return ExperimentConfig(settings.experiments_config_path)
