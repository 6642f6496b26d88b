from __future__ import annotations

import dataclasses
import os
import sys

from collections.abc import Mapping
from typing import Any

from ._ctx import DEFAULT_BUDGET
from ._exceptions import ConfigError
from ._spec import find_typo
from ._types import StrPath


if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


__all__ = [
    'BUDGET_ENVIRONMENT_VARIABLE',
    'Settings',
    'load_settings',
]

BUDGET_ENVIRONMENT_VARIABLE = 'TORSION_BUDGET'


@dataclasses.dataclass(frozen=True)
class Settings:
    """
    Tunables shared by the command line and the verification checks.

    Loaded from the ``[torsion]`` table of a ``torsion.toml`` file, or the
    ``[tool.torsion]`` table of a ``pyproject.toml``.
    """

    budget: int = DEFAULT_BUDGET
    tolerance: float = 0.05
    t_max: int = 12
    enumeration_level: int = 3
    formula_level: int = 24
    grid_bound: int = 6
    exhaustive_subset_limit: int = 20

    def replace(self, **overrides: Any) -> Settings:
        """Return a copy with every override that is not ``None`` applied."""
        return dataclasses.replace(self, **{key: value for key, value in overrides.items() if value is not None})


_FIELDS = {field.name: field for field in dataclasses.fields(Settings)}


def _coerce(key: str, value: object) -> int | float:
    if isinstance(value, bool):
        msg = f"'{key}' must be a number, got {value!r}"
        raise ConfigError(msg)
    if key == 'tolerance':
        if not isinstance(value, (int, float)) or value <= 0:
            msg = f"'tolerance' must be a positive number, got {value!r}"
            raise ConfigError(msg)
        return float(value)
    if not isinstance(value, int) or value < 1:
        msg = f"'{key}' must be a positive integer, got {value!r}"
        raise ConfigError(msg)
    return value


def _table(data: Mapping[str, Any], path: StrPath) -> Mapping[str, Any]:
    if 'torsion' in data:
        table = data['torsion']
    else:
        table = data.get('tool', {}).get('torsion', {})
        if not table:
            find_typo(data, 'torsion', os.fspath(path))
            find_typo(data.get('tool', {}), 'torsion', os.fspath(path))
    if not isinstance(table, Mapping):
        msg = f"the 'torsion' table in '{path}' must be a table"
        raise ConfigError(msg)
    return table


def _read(path: StrPath) -> dict[str, int | float]:
    try:
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        msg = f"configuration file '{path}' does not exist"
        raise ConfigError(msg) from None
    except OSError as e:
        msg = f"{e.strerror}: '{path}'"
        raise ConfigError(msg) from None
    except tomllib.TOMLDecodeError as e:
        msg = f"failed to parse '{path}': {e}"
        raise ConfigError(msg) from None
    except UnicodeDecodeError as e:
        msg = f"failed to parse '{path}': not valid UTF-8 ({e.reason} at position {e.start})"
        raise ConfigError(msg) from None

    values: dict[str, int | float] = {}
    for raw_key, value in _table(data, path).items():
        key = raw_key.replace('-', '_')
        if key not in _FIELDS:
            if not any(find_typo([key], known, os.fspath(path)) for known in _FIELDS):
                msg = f"unknown key '{raw_key}' in '{path}'"
                raise ConfigError(msg)
            continue
        values[key] = _coerce(key, value)
    return values


def load_settings(path: StrPath | None = None, environ: Mapping[str, str] | None = None) -> Settings:
    """
    Build the settings from defaults, an optional TOML file and the environment.

    ``TORSION_BUDGET`` overrides the file's budget.

    :param path: Configuration file to read
    :param environ: Environment to read, defaults to :data:`os.environ`
    """
    environ = os.environ if environ is None else environ
    values = _read(path) if path is not None else {}

    raw_budget = environ.get(BUDGET_ENVIRONMENT_VARIABLE)
    if raw_budget is not None:
        try:
            budget = int(raw_budget)
        except ValueError:
            msg = f'{BUDGET_ENVIRONMENT_VARIABLE} must be an integer, got {raw_budget!r}'
            raise ConfigError(msg) from None
        values['budget'] = _coerce('budget', budget)

    return Settings(**values)  # type: ignore[arg-type]
