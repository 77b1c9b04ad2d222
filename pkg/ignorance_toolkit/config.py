"""
Configuration settings for the ignorance toolkit.
"""

from __future__ import annotations

import os
from collections.abc import Callable, Mapping
from threading import Lock
from typing import Any, ClassVar, Literal, TypedDict, TypeGuard

from .logger import Logger, LogLevel, get_logger

logger = get_logger(__name__)

type ConfigKey = Literal[
    "frame_budget",
    "valuation_bits",
    "taut_atoms",
    "exhaustive_states",
    "sample_size",
    "definability_samples",
    "seed",
    "jobs",
    "debug",
    "log_level",
]
type Validator = Callable[[Any], None]

_CONFIG_KEYS: frozenset[str] = frozenset(
    {
        "frame_budget",
        "valuation_bits",
        "taut_atoms",
        "exhaustive_states",
        "sample_size",
        "definability_samples",
        "seed",
        "jobs",
        "debug",
        "log_level",
    }
)

MAX_SEED = 2**64 - 1


def is_config_key(key: str) -> TypeGuard[ConfigKey]:
    return key in _CONFIG_KEYS


class ConfigDict(TypedDict):
    frame_budget: int
    valuation_bits: int
    taut_atoms: int
    exhaustive_states: int
    sample_size: int
    definability_samples: int
    seed: int
    jobs: int
    debug: bool
    log_level: LogLevel


class PartialConfigDict(TypedDict, total=False):
    frame_budget: int
    valuation_bits: int
    taut_atoms: int
    exhaustive_states: int
    sample_size: int
    definability_samples: int
    seed: int
    jobs: int
    debug: bool
    log_level: LogLevel


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate_frame_budget(budget: Any) -> None:
    if not (_is_int(budget) and budget >= 1):
        raise ValueError("'frame_budget' must be a positive int")


def validate_valuation_bits(bits: Any) -> None:
    if not (_is_int(bits) and 1 <= bits <= 30):  # noqa: PLR2004
        raise ValueError("'valuation_bits' must be an int between 1 and 30")


def validate_taut_atoms(atoms: Any) -> None:
    if not (_is_int(atoms) and 1 <= atoms <= 24):  # noqa: PLR2004
        raise ValueError("'taut_atoms' must be an int between 1 and 24")


def validate_exhaustive_states(states: Any) -> None:
    if not (_is_int(states) and 1 <= states <= 3):  # noqa: PLR2004
        raise ValueError("'exhaustive_states' must be 1, 2 or 3")


def validate_sample_size(size: Any) -> None:
    if not (_is_int(size) and size >= 1):
        raise ValueError("'sample_size' must be a positive int")


def validate_definability_samples(size: Any) -> None:
    if not (_is_int(size) and size >= 1):
        raise ValueError("'definability_samples' must be a positive int")


def validate_seed(seed: Any) -> None:
    if not (_is_int(seed) and 0 <= seed <= MAX_SEED):
        raise ValueError("'seed' must be an unsigned 64-bit int")


def validate_jobs(jobs: Any) -> None:
    if not (_is_int(jobs) and 1 <= jobs <= 256):  # noqa: PLR2004
        raise ValueError("'jobs' must be an int between 1 and 256")


def validate_debug(debug: Any) -> None:
    if not isinstance(debug, bool):
        raise ValueError("'debug' must be boolean")


def validate_log_level(log_level: Any) -> None:
    if not isinstance(log_level, LogLevel):
        raise ValueError("'log_level' must be a LogLevel")


class Config:
    """Toolkit-wide settings: search budgets, sampling, workers and logging."""

    DEFAULT_CONFIG: ClassVar[ConfigDict] = {
        "frame_budget": 1_000_000,
        "valuation_bits": 24,
        "taut_atoms": 16,
        "exhaustive_states": 3,
        "sample_size": 10_000,
        "definability_samples": 1_000_000,
        "seed": 1729,
        "jobs": 1,
        "debug": False,
        "log_level": LogLevel.INFO,
    }

    ENV_PREFIX: ClassVar[str] = "IGNORANCE_TOOLKIT_"

    _instance: ClassVar[Config | None] = None
    _initialized: ClassVar[bool] = False
    _init_lock: ClassVar[Lock] = Lock()

    converts: Mapping[type, Callable[[str], Any]] = {
        bool: lambda v: v.lower() in ("true", "1", "yes"),
        int: lambda v: int(v.replace("_", "")),
        LogLevel: lambda v: LogLevel(v.upper()),
    }

    validators: Mapping[ConfigKey, Validator] = {
        "frame_budget": validate_frame_budget,
        "valuation_bits": validate_valuation_bits,
        "taut_atoms": validate_taut_atoms,
        "exhaustive_states": validate_exhaustive_states,
        "sample_size": validate_sample_size,
        "definability_samples": validate_definability_samples,
        "seed": validate_seed,
        "jobs": validate_jobs,
        "debug": validate_debug,
        "log_level": validate_log_level,
    }

    def __new__(cls, config_dict: PartialConfigDict | None = None) -> Config:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self, config_dict: PartialConfigDict | None) -> None:
        """
        Initialize configuration: defaults, then environment, then ``config_dict``.

        Args:
            config_dict: values overriding defaults and environment
        """
        with self._init_lock:
            if self.__class__._initialized:
                return

            self._config = self.DEFAULT_CONFIG.copy()
            self._load_from_env()
            if config_dict:
                self._config.update(config_dict)
            self._validate_config()
            self._setup_logging()

            logger.debug("Configuration initialized: %r", self._config)
            self.__class__._initialized = True

    def _validate_config(self) -> None:
        """Run all key validators, raising ValueError on the first failure."""
        for key, validator in self.validators.items():
            try:
                validator(self._config[key])
            except Exception as e:
                error_msg = f"Configuration validation failed for '{key}'"
                logger.exception(error_msg)
                raise ValueError(f"{error_msg}: {e}") from e

    def _load_from_env(self) -> None:
        for raw_key, default in self.DEFAULT_CONFIG.items():
            env_key = f"{self.ENV_PREFIX}{raw_key.upper()}"
            raw = os.getenv(env_key)
            if raw is None:
                continue

            parser = self.converts.get(type(default))
            if parser is None:
                logger.warning("No converter for %r; skipping %s", type(default), env_key)
                continue
            if not is_config_key(raw_key):
                continue

            try:
                self._config[raw_key] = parser(raw)
                logger.debug("Loaded %r from %r: %r", raw_key, env_key, self._config[raw_key])
            except Exception as e:
                logger.error("Failed to parse %r=%r for %r: %s", env_key, raw, raw_key, e)

    def _setup_logging(self) -> None:
        log_level = self._config.get("log_level", LogLevel.INFO)
        if debug_mode := self._config.get("debug", False):
            log_level = LogLevel.DEBUG

        Logger.setup(console_level=log_level)
        Logger.set_debug_mode(debug=debug_mode)

        if debug_mode:
            logger.debug("Debug mode enabled.")

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value.

        Args:
            key: Configuration key
            default: Default value if key is not found

        Returns:
            The configuration value or default
        """
        return self._config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """
        Set one configuration value after validating it.

        Args:
            key: Configuration key
            value: Configuration value

        Raises:
            ValueError: if the value fails its validator
        """
        old_value = self.get(key)
        if is_config_key(key):
            self.validators[key](value)
            self._config[key] = value
        else:
            logger.warning("Ignoring unknown config key %r (value %r).", key, value)
            return

        if key == "debug" and old_value != value:
            Logger.set_debug_mode(value)
        elif key == "log_level" and old_value != value:
            Logger.set_console_level(value)

        logger.debug("Config %r set to: %r", key, value)

    def update(self, config_dict: PartialConfigDict) -> None:
        """
        Validate and apply several values at once.

        Args:
            config_dict: Dictionary of configuration values

        Raises:
            ValueError: if any value fails its validator; nothing is applied then
        """
        validated: PartialConfigDict = {}
        for k, v in config_dict.items():
            if is_config_key(k):
                self.validators[k](v)
                validated[k] = v  # type: ignore[literal-required]

        self._config.update(validated)

        if "log_level" in validated:
            Logger.set_console_level(validated["log_level"])
        if "debug" in validated:
            Logger.set_debug_mode(validated["debug"])

        logger.debug("Config updated with: %r", validated)

    @property
    def all(self) -> ConfigDict:
        """Get all the configuration values."""
        return self._config.copy()

    @property
    def seed(self) -> int:
        """Seed shared by every sampled mode."""
        return self._config["seed"]

    @property
    def jobs(self) -> int:
        """Number of worker processes."""
        return self._config["jobs"]


def setting(key: ConfigKey, override: Any = None) -> Any:
    """Return ``override`` when given, else the configured value for ``key``."""
    if override is not None:
        return override
    return Config(None).get(key)
