"""Application configuration from one JSON file plus CLI overrides.

The file has up to four sections: ``provider``, ``server``, ``session``,
and a ``prompts_dir`` string. Every key is optional; command-line flags
win over the file, and the file wins over built-in defaults. Secrets never
appear here: the provider only names an environment variable to read the
API key from.

Relative paths are resolved against the working directory, not the config
file. That keeps `meetingflow serve --config deploy/app.json` from a repo
root behaving the same as an inline flag.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigInvalid
from .gateway import ProviderConfig
from .session import SessionConfig, merge_session_config

DEFAULT_PROMPTS_DIR = "prompts"
DEFAULT_FIXTURES_DIR = "fixtures"
DEFAULT_DATA_DIR = "data/sessions"


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    data_dir: str = DEFAULT_DATA_DIR
    static_dir: str | None = None

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ConfigInvalid(f"port must be 1..65535, got {self.port}")


@dataclass(frozen=True)
class AppConfig:
    provider: ProviderConfig = field(
        default_factory=lambda: ProviderConfig(mode="replay", fixture_dir=DEFAULT_FIXTURES_DIR)
    )
    server: ServerConfig = field(default_factory=ServerConfig)
    session: SessionConfig = field(default_factory=SessionConfig)
    prompts_dir: str = DEFAULT_PROMPTS_DIR

    def require_api_key(self) -> None:
        """For live/record modes, fail fast if the key env var is unset."""
        if self.provider.mode in ("live", "record"):
            var = self.provider.api_key_env_var
            if not os.environ.get(var):
                raise ConfigInvalid(
                    f"provider mode {self.provider.mode!r} needs the API key "
                    f"environment variable {var} to be set"
                )


_PROVIDER_KEYS = (
    "mode", "fixture_dir", "endpoint_url", "model_name", "api_key_env_var", "temperature",
)
_SERVER_KEYS = ("host", "port", "data_dir", "static_dir")
_TOP_KEYS = ("provider", "server", "session", "prompts_dir")


def _section(data: Mapping[str, Any], name: str) -> dict[str, Any]:
    section = data.get(name, {})
    if not isinstance(section, Mapping):
        raise ConfigInvalid(f'config section "{name}" must be an object')
    return dict(section)


def load_app_config(
    path: str | Path | None = None,
    provider_mode: str | None = None,
    fixtures_dir: str | None = None,
    prompts_dir: str | None = None,
    data_dir: str | None = None,
    host: str | None = None,
    port: int | None = None,
    static_dir: str | None = None,
) -> AppConfig:
    """Read the config file (if given) and fold in CLI overrides."""
    data: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigInvalid(f"config file not found: {p}")
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise ConfigInvalid(f"config file {p} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigInvalid(f"config file {p} must hold a JSON object")

    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigInvalid(f"unknown config section {key!r}")

    provider_data = _section(data, "provider")
    for key in provider_data:
        if key not in _PROVIDER_KEYS:
            raise ConfigInvalid(f"unknown provider key {key!r}")
    provider_data.setdefault("mode", "replay")
    provider_data.setdefault("fixture_dir", DEFAULT_FIXTURES_DIR)
    if provider_mode is not None:
        provider_data["mode"] = provider_mode
    if fixtures_dir is not None:
        provider_data["fixture_dir"] = fixtures_dir
    provider = ProviderConfig(**provider_data)

    server_data = _section(data, "server")
    for key in server_data:
        if key not in _SERVER_KEYS:
            raise ConfigInvalid(f"unknown server key {key!r}")
    if host is not None:
        server_data["host"] = host
    if port is not None:
        server_data["port"] = port
    if data_dir is not None:
        server_data["data_dir"] = data_dir
    if static_dir is not None:
        server_data["static_dir"] = static_dir
    server = ServerConfig(**server_data)

    session = merge_session_config(SessionConfig(), _section(data, "session"))

    prompts = data.get("prompts_dir", DEFAULT_PROMPTS_DIR)
    if prompts_dir is not None:
        prompts = prompts_dir
    if not isinstance(prompts, str):
        raise ConfigInvalid('"prompts_dir" must be a string')

    return AppConfig(provider=provider, server=server, session=session, prompts_dir=prompts)
