from __future__ import annotations

import fractions
import os
import sys
import typing


__all__ = ['CheckStatus', 'Point', 'Rational', 'ReportFormat', 'Residue', 'StrPath']

Rational = fractions.Fraction
Residue = int
Point = typing.Tuple[int, int]

CheckStatus = typing.Literal['pass', 'fail']
ReportFormat = typing.Literal['json', 'table']

if typing.TYPE_CHECKING or sys.version_info > (3, 9):
    StrPath = typing.Union[str, os.PathLike[str]]
else:
    StrPath = typing.Union[str, os.PathLike]
