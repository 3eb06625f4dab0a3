"""Settings from the environment and optional key=value config files."""

import os
from pathlib import Path

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from .const import DEFAULT_MAX_ROUNDS, DEFAULT_ORACLE_CAP, ENV_THREADS, logger

load_dotenv()


class ConfigFileError(ValueError):
    """Error raised when a config file cannot be used."""


class Settings(BaseModel):
    """Run settings shared by every command."""

    model_config = ConfigDict(frozen=True)

    threads: int = Field(default=1, ge=1)
    max_rounds: int = Field(default=DEFAULT_MAX_ROUNDS, ge=1)
    oracle_cap: int = Field(default=DEFAULT_ORACLE_CAP, ge=0)

    @classmethod
    def load(cls, config: dict[str, str] | None = None) -> "Settings":
        """
        Return settings from the config file values and the environment.

        ``RNAPARS_THREADS`` takes precedence over a ``threads`` key in the
        config file.
        """
        values = {
            key: value
            for key, value in (config or {}).items()
            if key in cls.model_fields
        }
        threads = os.getenv(ENV_THREADS)

        if threads:
            values["threads"] = threads

        return cls.model_validate(values)


def read_config_file(path: Path) -> dict[str, str]:
    """
    Return the key=value pairs of a config file.

    Keys mirror long option names, with dashes written as underscores.
    Keys without a value are rejected.
    """
    if not path.is_file():
        raise ConfigFileError(f"config file {path} does not exist")

    values = dotenv_values(path)
    empty = sorted(key for key, value in values.items() if value is None)

    if empty:
        raise ConfigFileError(f"{path}: keys without a value: {empty}")

    logger.debug("Loaded %s settings from %s", len(values), path)

    return {key.replace("-", "_"): str(value) for key, value in values.items()}
