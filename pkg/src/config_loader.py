"""
Configuration Loader Module
===========================

Handles loading and merging of YAML configuration files.

Project files may also be written as JSON (a YAML subset). Paths inside a
project file are resolved relative to the file's own directory.
"""

import os
import yaml
from pathlib import Path
from typing import Any, Dict, Optional
from copy import deepcopy

from .exceptions import ConfigurationError

SCHEMA_VERSION = 1
SEED_ENV_VAR = "EXPOSURE_ABM_SEED"


class Config:
    """Configuration manager for exposure simulations."""

    def __init__(self, config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None):
        """
        Initialize configuration.

        Args:
            config_path: Path to project-specific YAML config file.
                        If None, only default config is loaded.
            overrides: Nested dictionary merged on top of everything else.
        """
        self._config: Dict[str, Any] = {}
        self._project_root = self._find_project_root()
        self._base_dir = self._project_root
        self._source: Optional[Path] = None

        # Load default config first
        self._load_default_config()

        # Merge with project config if provided
        if config_path:
            self._load_project_config(config_path)

        if overrides:
            self._config = self._deep_merge(self._config, overrides)

        self._check_schema()

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> "Config":
        """
        Build a configuration in memory on top of the defaults.

        Args:
            data: Nested dictionary in project-file layout
            base_dir: Directory relative paths are resolved against

        Returns:
            Config object
        """
        config = cls(overrides=data)
        if base_dir is not None:
            config._base_dir = Path(base_dir).resolve()
        return config

    def _find_project_root(self) -> Path:
        """Find the project root directory."""
        current = Path(__file__).resolve().parent
        while current != current.parent:
            if (current / "config").exists() or (current / "requirements.txt").exists():
                return current
            current = current.parent
        return Path.cwd()

    def _load_default_config(self) -> None:
        """Load the default configuration file."""
        default_path = self._project_root / "config" / "default.yaml"
        if default_path.exists():
            with open(default_path, "r", encoding="utf-8") as f:
                self._config = yaml.safe_load(f) or {}

    def _load_project_config(self, config_path: str) -> None:
        """
        Load and merge project-specific configuration.

        Args:
            config_path: Path to project config file.
        """
        path = Path(config_path)
        if not path.is_absolute():
            path = (Path.cwd() / path) if (Path.cwd() / path).exists() else self._project_root / path

        if not path.exists():
            raise ConfigurationError(f"Config file not found: {path}")

        try:
            with open(path, "r", encoding="utf-8") as f:
                project_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Config file {path} is not valid YAML/JSON: {e}") from e

        if not isinstance(project_config, dict):
            raise ConfigurationError(f"Config file {path} must hold a mapping at top level")

        # Deep merge project config into default
        self._config = self._deep_merge(self._config, project_config)
        self._source = path.resolve()
        self._base_dir = self._source.parent

    def _deep_merge(self, base: Dict, override: Dict) -> Dict:
        """
        Deep merge two dictionaries.

        Args:
            base: Base dictionary (default config)
            override: Override dictionary (project config)

        Returns:
            Merged dictionary
        """
        result = deepcopy(base)

        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = deepcopy(value)

        return result

    def _check_schema(self) -> None:
        version = self._config.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigurationError(
                f"Unsupported schema_version {version!r} (expected {SCHEMA_VERSION})"
            )

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value.

        Args:
            key: Dot-notation key (e.g., "health.alpha" or "simulation.max_ticks")
            default: Default value if key not found

        Returns:
            Configuration value
        """
        keys = key.split(".")
        value = self._config

        try:
            for k in keys:
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def require(self, key: str) -> Any:
        """Like get(), but a missing or empty value is a configuration error."""
        value = self.get(key)
        if value is None or value == "":
            raise ConfigurationError(f"Missing required configuration value: {key}")
        return value

    def with_overrides(self, overrides: Dict[str, Any]) -> "Config":
        """
        Copy of this configuration with some dot-notation keys replaced.

        Args:
            overrides: Mapping of dot-key -> value, e.g. {"health.alpha": 0.005}

        Returns:
            New Config object
        """
        clone = deepcopy(self)
        for key, value in overrides.items():
            node = clone._config
            parts = key.split(".")
            for part in parts[:-1]:
                node = node.setdefault(part, {})
            node[parts[-1]] = deepcopy(value)
        return clone

    def get_path(self, key: str) -> Path:
        """
        Get a path configuration value as Path object.

        Args:
            key: Configuration key for a path value

        Returns:
            Path object resolved relative to the project config directory
        """
        return self.resolve_path(self.require(key))

    def resolve_path(self, value: str) -> Path:
        """Resolve a path string relative to the project config directory."""
        path = Path(value)
        if path.is_absolute():
            return path
        return self._base_dir / path

    @property
    def project_root(self) -> Path:
        """Get the project root directory."""
        return self._project_root

    @property
    def base_dir(self) -> Path:
        """Directory relative input paths are resolved against."""
        return self._base_dir

    @property
    def source(self) -> Optional[Path]:
        """Project config file this configuration was loaded from."""
        return self._source

    @property
    def project_name(self) -> str:
        """Get the project name."""
        return self.get("project.name", "unnamed")

    @property
    def districts(self) -> Dict[str, Dict[str, str]]:
        """District input table, keyed by district id."""
        return self.get("data.districts", {}) or {}

    @property
    def seed(self) -> int:
        """Run seed; the EXPOSURE_ABM_SEED environment variable wins over the file."""
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed not in (None, ""):
            try:
                return int(env_seed)
            except ValueError as e:
                raise ConfigurationError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from e
        return int(self.get("simulation.seed", 0))

    @property
    def max_ticks(self) -> int:
        """Simulation horizon in ticks."""
        return int(self.get("simulation.max_ticks", 8764))

    @property
    def jobs(self) -> int:
        """Worker processes for replicates and sweeps."""
        return max(1, int(self.get("experiments.jobs", 1)))

    @property
    def output_dir(self) -> Path:
        """Get the output directory path."""
        return self.resolve_path(self.get("output.dir", "outputs"))

    def to_dict(self) -> Dict[str, Any]:
        """Get the full configuration as dictionary."""
        return deepcopy(self._config)

    def __repr__(self) -> str:
        project = self.get("project.name", "unnamed")
        return f"Config(project='{project}')"


def load_config(config_path: Optional[str] = None) -> Config:
    """
    Convenience function to load configuration.

    Args:
        config_path: Path to project config file

    Returns:
        Config object
    """
    return Config(config_path)
