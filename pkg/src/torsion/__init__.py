"""
torsion - Torsion bounds for products of elliptic curves
"""

from __future__ import annotations

from ._config import Settings, load_settings
from ._exceptions import (
    ConfigError,
    InfeasibleComputationError,
    ReductionNotApplicableError,
    ShapeError,
    SpecTypoWarning,
    SpecValidationError,
    TorsionException,
)
from ._spec import SpecDocument, load_spec, parse_spec
from .galois import DegreeReport, FactorKind, ProductModel, product_degree
from .invariants import ExponentProfile, VarietyClass, VarietySpec, alpha, m_invariant, worst_case_profile
from .modular import Modulus, SubgroupShape


__version__ = '0.1.0'

__all__ = [
    '__version__',
    'alpha',
    'ConfigError',
    'DegreeReport',
    'ExponentProfile',
    'FactorKind',
    'InfeasibleComputationError',
    'load_settings',
    'load_spec',
    'm_invariant',
    'Modulus',
    'parse_spec',
    'product_degree',
    'ProductModel',
    'ReductionNotApplicableError',
    'Settings',
    'ShapeError',
    'SpecDocument',
    'SpecTypoWarning',
    'SpecValidationError',
    'SubgroupShape',
    'TorsionException',
    'VarietyClass',
    'VarietySpec',
    'worst_case_profile',
]


def __dir__() -> list[str]:
    return __all__
