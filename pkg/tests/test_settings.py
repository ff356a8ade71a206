"""Test the settings layer."""
import pytest
from pydantic import ValidationError

from mutual_independence.common.settings import Settings, _environment_settings, get_settings, reset_settings, use_settings


@pytest.fixture(autouse=True)
def clean_settings():
    """Start and end every test on the environment defaults."""
    reset_settings()
    _environment_settings.cache_clear()
    yield
    reset_settings()
    _environment_settings.cache_clear()


def test_defaults():
    """Defaults match the documented tolerances."""
    settings = get_settings()
    assert settings.herm_tol == 1e-10
    assert settings.exact_mi_tol == 1e-8
    assert settings.violation_tol == 1e-7
    assert settings.seed == 0
    assert settings.jobs == 1


def test_use_settings_overrides_and_reset():
    """Overrides are visible through get_settings until reset."""
    installed = use_settings(split_restarts=2, seed=7)
    assert get_settings() is installed
    assert get_settings().split_restarts == 2
    assert get_settings().seed == 7
    reset_settings()
    assert get_settings().split_restarts == Settings().split_restarts


def test_overrides_accept_strings():
    """Values given on the command line as strings are coerced."""
    settings = use_settings(ppt_rel_tol="1e-6", ext_dim="3")
    assert settings.ppt_rel_tol == 1e-6
    assert settings.ext_dim == 3


def test_environment_prefix(monkeypatch):
    """MUTIND_* variables feed the defaults."""
    monkeypatch.setenv("MUTIND_OPERATOR_RESTARTS", "3")
    _environment_settings.cache_clear()
    assert get_settings().operator_restarts == 3


@pytest.mark.parametrize("overrides", [
    {"herm_tol": 0},
    {"jobs": 0},
    {"log_level": "LOUD"},
    {"no_such_setting": 1},
])
def test_invalid_overrides(overrides):
    """Out-of-range values and unknown names are rejected."""
    with pytest.raises(ValidationError):
        use_settings(**overrides)


def test_settings_are_frozen():
    """Installed settings cannot be mutated in place."""
    with pytest.raises(ValidationError):
        get_settings().seed = 3
