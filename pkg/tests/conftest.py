import pytest

pytest.register_assert_rewrite("tests.helpers")

from logconn.cli.grammar import parse_ratfun  # noqa: E402
from logconn.core.field import field_make  # noqa: E402


@pytest.fixture(autouse=True)
def logconn_env(monkeypatch, tmp_path):
    """Every test sees the Ohtsuki post-hook switched on and logs under tmp_path"""
    monkeypatch.setenv("LOGCONN_CHECK_FUCHS", "1")
    monkeypatch.setenv("LOGCONN_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("LOGCONN_SWEEP_WORKERS", "2")
    monkeypatch.setenv("LOGCONN_SEARCH_BOUND", "2")


@pytest.fixture
def q():
    return field_make(1)


@pytest.fixture
def q4():
    return field_make(4)


@pytest.fixture
def q6():
    return field_make(6)


@pytest.fixture
def q12():
    return field_make(12)


@pytest.fixture
def rf():
    """rf(ctx, "1/(z-1)") shorthand for building rational functions from text"""
    return lambda ctx, text: parse_ratfun(text, ctx)
