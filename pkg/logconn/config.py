import os
from dataclasses import dataclass

from dotenv import load_dotenv


@dataclass(frozen=True)
class Settings:
    """Runtime settings read from the environment (and a .env file if present)"""
    field_order: int = 12
    log_level: str = "INFO"
    log_dir: str = "logs"
    check_fuchs: bool = True
    sweep_workers: int = 0
    search_bound: int = 2


def _env_flag(name, default):
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    return value.strip().lower() not in ("0", "false", "no", "off")


def _env_int(name, default):
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {value!r}")


def get_settings():
    """Build Settings from environment variables, loading .env first"""
    load_dotenv()

    return Settings(
        field_order=_env_int("LOGCONN_FIELD_ORDER", 12),
        log_level=os.getenv("LOGCONN_LOG_LEVEL", "INFO").upper(),
        log_dir=os.getenv("LOGCONN_LOG_DIR", "logs"),
        check_fuchs=_env_flag("LOGCONN_CHECK_FUCHS", True),
        sweep_workers=_env_int("LOGCONN_SWEEP_WORKERS", os.cpu_count() or 1),
        search_bound=_env_int("LOGCONN_SEARCH_BOUND", 2),
    )
