# Run configuration: key=value files merged under explicit command-line flags

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from mashumaro import DataClassDictMixin

from .notation import NotationParseError, parse_ordinal


class ConfigError(ValueError):
    """Exception raised when a configuration file or value is invalid."""


@dataclass
class RunConfig(DataClassDictMixin):
    """The merged configuration of one command, written first in every trace."""

    command: str
    ambient: str = "w^2"
    budget: int = 10_000
    seed: int = 0
    out: str | None = None
    catalog: str | None = None
    options: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ConfigError(f"Budget must be positive, got {self.budget}")
        try:
            parse_ordinal(self.ambient)
        except NotationParseError as e:
            raise ConfigError(f"Invalid ambient ordinal {self.ambient!r}: {e}") from e


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment, blank lines are skipped."""
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Line {number}: expected key=value, got {line!r}")
        values[normalize_key(key)] = value.strip()
    return values


def load_config_file(path: Path) -> dict[str, str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    return parse_config_text(text)


def check_known_keys(values: dict[str, str], known: Iterable[str]) -> None:
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
