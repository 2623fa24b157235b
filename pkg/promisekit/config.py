# promisekit/config.py
import os
from dotenv import load_dotenv

from promisekit.errors import ConfigError

load_dotenv()  # loads .env in project root if present

LOG_LEVEL = os.getenv("PROMISEKIT_LOG_LEVEL", "WARNING").upper()
DEFAULT_FORMAT = os.getenv("PROMISEKIT_FORMAT", "text")


def _env_number(name: str, default: str, kind=float):
    raw = os.getenv(name, default)
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a {kind.__name__}, got {raw!r}")


STATE_CAP = _env_number("PROMISEKIT_STATE_CAP", "4096", int)
DEFAULT_LAMBDA = _env_number("PROMISEKIT_LAMBDA", "0.5")
WORKERS = _env_number("PROMISEKIT_WORKERS", "4", int)

if STATE_CAP < 1:
    raise ConfigError("PROMISEKIT_STATE_CAP must be at least 1")
if not 0 < DEFAULT_LAMBDA <= 1:
    raise ConfigError("PROMISEKIT_LAMBDA must lie in (0, 1]")
if WORKERS < 1:
    raise ConfigError("PROMISEKIT_WORKERS must be at least 1")
if DEFAULT_FORMAT not in ("text", "json"):
    raise ConfigError("PROMISEKIT_FORMAT must be 'text' or 'json'")
