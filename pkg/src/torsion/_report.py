from __future__ import annotations

import dataclasses
import enum
import json
import os
import sys
import tempfile

from collections.abc import Mapping
from typing import Any

from ._types import Rational, ReportFormat, StrPath


__all__ = [
    'Report',
    'render',
    'to_jsonable',
    'write_output',
]

_DECIMAL_PLACES = 10


def _decimal(value: Rational) -> str:
    return f'{float(value):.{_DECIMAL_PLACES}f}'


def to_jsonable(value: Any) -> Any:
    """
    Convert results into JSON-ready data.

    Rationals become ``"p/q"`` strings. Inside a mapping each rational key also
    gets a ``<key>_decimal`` sibling with its decimal rendering.
    """
    if isinstance(value, Rational):
        return str(value)
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable({field.name: getattr(value, field.name) for field in dataclasses.fields(value)})
    if isinstance(value, Mapping):
        data: dict[str, Any] = {}
        for key, item in value.items():
            data[str(key)] = to_jsonable(item)
            if isinstance(item, Rational):
                data[f'{key}_decimal'] = _decimal(item)
        return data
    if isinstance(value, (list, tuple, set, frozenset)):
        return [to_jsonable(item) for item in value]
    return str(value)


@dataclasses.dataclass
class Report:
    """
    Everything one command produced, rendered as JSON or as a table.
    """

    command: str
    inputs: Mapping[str, Any]
    results: Mapping[str, Any]
    version: str
    witnesses: Mapping[str, Any] = dataclasses.field(default_factory=dict)
    constants: Mapping[str, Any] = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            'command': self.command,
            'inputs': to_jsonable(self.inputs),
            'results': to_jsonable(self.results),
            'witnesses': to_jsonable(self.witnesses),
            'constants': to_jsonable(self.constants),
            'version': self.version,
        }


def _flatten(prefix: str, value: Any) -> list[tuple[str, str]]:
    if isinstance(value, dict):
        if not value:
            return [(prefix, '{}')]
        rows = []
        for key in sorted(value):
            rows.extend(_flatten(f'{prefix}.{key}' if prefix else key, value[key]))
        return rows
    if isinstance(value, list) and any(isinstance(item, (dict, list)) for item in value):
        rows = []
        for index, item in enumerate(value):
            rows.extend(_flatten(f'{prefix}[{index}]', item))
        return rows
    return [(prefix, json.dumps(value) if not isinstance(value, str) else value)]


def _render_table(data: dict[str, Any]) -> str:
    lines = [f'torsion {data["version"]}: {data["command"]}']
    for section in ('inputs', 'results', 'witnesses', 'constants'):
        if not data[section]:
            continue
        rows = _flatten('', data[section])
        lines.append('')
        lines.append(f'{section}:')
        width = max(len(key) for key, _ in rows)
        lines.extend(f'  {key:<{width}}  {value}' for key, value in rows)
    return '\n'.join(lines) + '\n'


def render(report: Report, format: ReportFormat) -> str:
    data = report.to_dict()
    if format == 'json':
        return json.dumps(data, indent=2, sort_keys=True) + '\n'
    return _render_table(data)


def write_output(text: str, path: StrPath | None = None) -> None:
    """
    Write ``text`` to ``path`` atomically, or to stdout when no path is given.
    """
    if path is None:
        sys.stdout.write(text)
        return

    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix='.torsion-', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
