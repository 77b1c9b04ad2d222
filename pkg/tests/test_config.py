from collections.abc import Generator
from typing import Any

import pytest
from pytest import LogCaptureFixture, MonkeyPatch

from ignorance_toolkit.config import (
    MAX_SEED,
    Config,
    PartialConfigDict,
    is_config_key,
    setting,
)
from ignorance_toolkit.logger import LogLevel


@pytest.fixture(autouse=True)
def reset_config_singleton() -> Generator[None, None, None]:
    # Ensure each test sees a fresh singleton
    Config._instance = None
    Config._initialized = False
    yield
    Config._instance = None
    Config._initialized = False


def test_is_config_key() -> None:
    valid = [
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
    for key in valid:
        assert is_config_key(key)
    assert not is_config_key("download_path")
    assert not is_config_key("")


def test_default_config_all_keys_and_types() -> None:
    cfg = Config(None)
    all_conf = cfg.all
    assert set(all_conf) == set(Config.DEFAULT_CONFIG)
    for k, v in all_conf.items():
        assert is_config_key(k)
        assert isinstance(v, type(Config.DEFAULT_CONFIG[k]))
    assert isinstance(all_conf["log_level"], LogLevel)
    assert cfg.seed == 1729  # noqa: PLR2004
    assert cfg.jobs == 1


def test_singleton_behavior() -> None:
    c1 = Config(None)
    c2 = Config(None)
    assert c1 is c2
    c1.set("jobs", 4)
    assert c2.jobs == 4  # noqa: PLR2004


def test_set_and_get_and_update() -> None:
    cfg = Config(None)
    assert cfg.get("frame_budget") == Config.DEFAULT_CONFIG["frame_budget"]
    cfg.set("frame_budget", 500)
    assert cfg.get("frame_budget") == 500  # noqa: PLR2004
    # unknown keys are ignored
    cfg.set("nope", "value")
    assert cfg.get("nope", None) is None
    cfg.update({"sample_size": 64, "debug": False})
    assert cfg.get("sample_size") == 64  # noqa: PLR2004
    assert cfg.get("debug") is False


@pytest.mark.parametrize(
    ("key", "value"),
    [
        ("frame_budget", 0),
        ("valuation_bits", 31),
        ("taut_atoms", 0),
        ("exhaustive_states", 4),
        ("sample_size", -1),
        ("definability_samples", 0),
        ("seed", -1),
        ("seed", MAX_SEED + 1),
        ("jobs", 0),
        ("jobs", True),
        ("debug", "yes"),
        ("log_level", "DEBUG"),
    ],
)
def test_set_rejects_invalid_values(key: str, value: Any) -> None:
    cfg = Config(None)
    before = cfg.get(key)
    with pytest.raises(ValueError, match=key):
        cfg.set(key, value)
    assert cfg.get(key) == before


def test_update_is_all_or_nothing() -> None:
    cfg = Config(None)
    with pytest.raises(ValueError, match="jobs"):
        cfg.update({"sample_size": 5, "jobs": 0})
    assert cfg.get("sample_size") == Config.DEFAULT_CONFIG["sample_size"]


def test_invalid_init_dict_raises() -> None:
    with pytest.raises(ValueError, match="Configuration validation failed for 'seed'"):
        Config({"seed": -5})


def test_env_override_valid(monkeypatch: MonkeyPatch) -> None:
    monkeypatch.setenv("IGNORANCE_TOOLKIT_FRAME_BUDGET", "2_000_000")
    monkeypatch.setenv("IGNORANCE_TOOLKIT_DEBUG", "false")
    monkeypatch.setenv("IGNORANCE_TOOLKIT_LOG_LEVEL", "debug")
    monkeypatch.setenv("IGNORANCE_TOOLKIT_SEED", "7")
    cfg = Config(None)
    assert cfg.get("frame_budget") == 2_000_000  # noqa: PLR2004
    assert cfg.get("debug") is False
    assert cfg.get("log_level") is LogLevel.DEBUG
    assert cfg.seed == 7  # noqa: PLR2004


def test_env_override_invalid(monkeypatch: MonkeyPatch, caplog: LogCaptureFixture) -> None:
    monkeypatch.setenv("IGNORANCE_TOOLKIT_JOBS", "many")
    caplog.set_level("ERROR")
    cfg = Config(None)
    assert cfg.jobs == Config.DEFAULT_CONFIG["jobs"]
    assert "Failed to parse" in caplog.text


def test_partial_config_init_dict(monkeypatch: MonkeyPatch) -> None:
    # explicit values win over the environment
    monkeypatch.setenv("IGNORANCE_TOOLKIT_SAMPLE_SIZE", "99")
    init_overrides: PartialConfigDict = {"sample_size": 10, "valuation_bits": 12}
    cfg = Config(init_overrides)
    assert cfg.get("sample_size") == 10  # noqa: PLR2004
    assert cfg.get("valuation_bits") == 12  # noqa: PLR2004
    assert cfg.get("taut_atoms") == Config.DEFAULT_CONFIG["taut_atoms"]


def test_setting_prefers_override() -> None:
    Config({"frame_budget": 42})
    assert setting("frame_budget") == 42  # noqa: PLR2004
    assert setting("frame_budget", 7) == 7  # noqa: PLR2004
    assert setting("seed", 0) == 0
