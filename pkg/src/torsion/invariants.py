"""
Exact ``alpha(A)`` and ``m(A)`` for a product of pairwise non-isogenous elliptic
curves, and the ratios the Galois model achieves along worst-case profiles.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import math
import typing

from collections.abc import Iterable, Iterator, Sequence

import numpy as np

from . import _ctx
from ._exceptions import InfeasibleComputationError, ShapeError
from ._simplex import Constraint, maximize
from ._types import Rational
from .galois import DegreeReport, FactorKind, ProductModel, log_torsion_size, product_degree
from .modular import Modulus, SubgroupShape


__all__ = [
    'AchievedRatio',
    'ExponentProfile',
    'RatioWitness',
    'SubsetWitness',
    'VarietyClass',
    'VarietySpec',
    'achieved_ratio',
    'alpha',
    'closed_form_alpha',
    'evaluate_ratio',
    'm_invariant',
    'm_invariant_grid',
    'mt_dimension',
    'spec_universe',
    'worst_case_profile',
]

AlphaMethod = typing.Literal['auto', 'exhaustive', 'greedy']
ActiveCase = typing.Literal['beta=c_n', 'beta=b_m', 'beta=0']

EXHAUSTIVE_SUBSET_LIMIT = 20
MAX_GRID_EXPONENTS = 12
_GRID_BLOCK = 4


@dataclasses.dataclass(frozen=True)
class VarietyClass:
    label: str
    cm: bool
    multiplicity: int = 1


@dataclasses.dataclass(frozen=True)
class VarietySpec:
    """
    Isogeny decomposition ``A ~ prod A_i^(n_i)`` into pairwise non-isogenous elliptic curves.
    """

    classes: tuple[VarietyClass, ...]

    def __post_init__(self) -> None:
        if not self.classes:
            msg = 'a variety needs at least one isogeny class'
            raise ValueError(msg)
        labels = [cls.label for cls in self.classes]
        if len(set(labels)) != len(labels):
            msg = f'isogeny class labels must be distinct, got {labels}'
            raise ValueError(msg)
        for cls in self.classes:
            if cls.multiplicity < 1:
                msg = f'multiplicity of {cls.label} must be at least 1, got {cls.multiplicity}'
                raise ValueError(msg)

    @classmethod
    def of(cls, cm: Iterable[bool], multiplicities: Iterable[int] | None = None) -> VarietySpec:
        flags = list(cm)
        mults = [1] * len(flags) if multiplicities is None else list(multiplicities)
        return cls(tuple(VarietyClass(f'E{i + 1}', flag, mult) for i, (flag, mult) in enumerate(zip(flags, mults))))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(cls.label for cls in self.classes)

    @property
    def noncm_classes(self) -> tuple[VarietyClass, ...]:
        return tuple(cls for cls in self.classes if not cls.cm)

    @property
    def cm_classes(self) -> tuple[VarietyClass, ...]:
        return tuple(cls for cls in self.classes if cls.cm)

    @property
    def dimension(self) -> int:
        """``dim A``, the total multiplicity."""
        return sum(cls.multiplicity for cls in self.classes)


@dataclasses.dataclass(frozen=True)
class SubsetWitness:
    subset: tuple[str, ...]
    value: Rational


@dataclasses.dataclass(frozen=True)
class ExponentProfile:
    """
    Exponents of ``H = prod (Z/ell^lower x Z/ell^upper)`` per isogeny class.

    ``c`` holds the non-CM lower exponents followed by their upper exponents,
    ``b`` the same for the CM classes, both in spec order.

    The exponents are not sorted. The ratio functional only depends on which
    pair belongs to which class, so reordering the classes leaves it unchanged
    and witnesses keep the order of the spec.
    """

    c: tuple[Rational, ...] = ()
    b: tuple[Rational, ...] = ()

    def __post_init__(self) -> None:
        for name, values in (('c', self.c), ('b', self.b)):
            if len(values) % 2:
                msg = f'{name} needs as many upper as lower exponents, got {len(values)} values'
                raise ShapeError(msg)
            if any(v < 0 for v in values):
                msg = f'exponents must be nonnegative, got {name}={_render(values)}'
                raise ShapeError(msg)
            half = len(values) // 2
            if any(lo > up for lo, up in zip(values[:half], values[half:])):
                msg = f'every lower exponent must be at most its upper exponent, got {name}={_render(values)}'
                raise ShapeError(msg)

    @classmethod
    def from_pairs(cls, spec: VarietySpec, pairs: Sequence[tuple[Rational, Rational]]) -> ExponentProfile:
        """Build a profile from one ``(lower, upper)`` pair per class, in spec order."""
        if len(pairs) != len(spec.classes):
            msg = f'got {len(pairs)} exponent pairs for {len(spec.classes)} classes'
            raise ShapeError(msg)
        noncm = [pair for cls, pair in zip(spec.classes, pairs) if not cls.cm]
        cm = [pair for cls, pair in zip(spec.classes, pairs) if cls.cm]
        return cls(
            tuple(Rational(lo) for lo, _ in noncm) + tuple(Rational(up) for _, up in noncm),
            tuple(Rational(lo) for lo, _ in cm) + tuple(Rational(up) for _, up in cm),
        )

    def pairs(self, spec: VarietySpec) -> list[tuple[Rational, Rational]]:
        """``(lower, upper)`` per class, in spec order."""
        if len(self.c) != 2 * len(spec.noncm_classes) or len(self.b) != 2 * len(spec.cm_classes):
            msg = f'profile c={_render(self.c)} b={_render(self.b)} does not match the spec'
            raise ShapeError(msg)
        noncm = iter(zip(self.c[: len(self.c) // 2], self.c[len(self.c) // 2 :]))
        cm = iter(zip(self.b[: len(self.b) // 2], self.b[len(self.b) // 2 :]))
        return [next(cm) if cls.cm else next(noncm) for cls in spec.classes]

    @property
    def beta(self) -> Rational:
        """``min(c_n, b_m)`` with ``c_n``, ``b_m`` the largest lower exponents; ``0`` if a kind is absent."""
        if not self.c or not self.b:
            return Rational(0)
        return min(max(self.c[: len(self.c) // 2]), max(self.b[: len(self.b) // 2]))

    @property
    def max_exponent(self) -> Rational:
        return max((*self.c, *self.b), default=Rational(0))

    def is_zero(self) -> bool:
        return not any(self.c) and not any(self.b)

    def scaled(self, factor: Rational) -> ExponentProfile:
        return ExponentProfile(tuple(v * factor for v in self.c), tuple(v * factor for v in self.b))

    def __str__(self) -> str:
        return f'c={_render(self.c)} b={_render(self.b)}'


def _render(values: Iterable[Rational]) -> str:
    return '(' + ','.join(str(v) for v in values) + ')'


@dataclasses.dataclass(frozen=True)
class RatioWitness:
    value: Rational
    profile: ExponentProfile
    active_case: ActiveCase


def mt_dimension(spec: VarietySpec, subset: Iterable[str]) -> int:
    """
    Dimension of the Mumford-Tate group of ``prod_{i in subset} A_i``.

    Each non-CM class contributes 3, each CM class 1, plus 1 for the scalars;
    multiplicities do not change the group.
    """
    chosen = set(subset)
    if not chosen:
        msg = 'the subset must be nonempty'
        raise ValueError(msg)
    unknown = chosen - set(spec.labels)
    if unknown:
        msg = f'unknown class labels: {", ".join(sorted(unknown))}'
        raise ValueError(msg)
    return 1 + sum(1 if cls.cm else 3 for cls in spec.classes if cls.label in chosen)


def _subset_value(spec: VarietySpec, indices: Sequence[int]) -> Rational:
    weight = sum(spec.classes[i].multiplicity for i in indices)
    return Rational(2 * weight, mt_dimension(spec, (spec.classes[i].label for i in indices)))


def _subset_key(value: Rational, indices: Sequence[int]) -> tuple[Rational, int, tuple[int, ...]]:
    # larger value, then larger subset, then earliest classes
    return value, len(indices), tuple(-i for i in indices)


def _exhaustive_candidates(spec: VarietySpec) -> Iterator[tuple[int, ...]]:
    k = len(spec.classes)
    for size in range(1, k + 1):
        yield from itertools.combinations(range(k), size)


def _greedy_candidates(spec: VarietySpec) -> Iterator[tuple[int, ...]]:
    def ranked(cm: bool) -> list[int]:
        indices = [i for i, cls in enumerate(spec.classes) if cls.cm == cm]
        return sorted(indices, key=lambda i: (-spec.classes[i].multiplicity, i))

    noncm, cm = ranked(False), ranked(True)
    for i in range(len(noncm) + 1):
        for j in range(len(cm) + 1):
            if i or j:
                yield tuple(sorted(noncm[:i] + cm[:j]))


def alpha(
    spec: VarietySpec, *, method: AlphaMethod = 'auto', exhaustive_limit: int = EXHAUSTIVE_SUBSET_LIMIT
) -> SubsetWitness:
    """
    ``alpha(A) = max over nonempty I of 2 sum_{i in I} n_i / dim MT(prod_{i in I} A_i)``.

    :param spec: The variety
    :param method: ``exhaustive`` scans every subset, ``greedy`` only the
        top-multiplicity classes of each kind, ``auto`` scans exhaustively up
        to ``exhaustive_limit`` classes
    :returns: The value with an achieving subset; ties prefer larger subsets,
        then classes listed earlier
    """
    if method == 'auto':
        method = 'exhaustive' if len(spec.classes) <= exhaustive_limit else 'greedy'
    candidates = _exhaustive_candidates(spec) if method == 'exhaustive' else _greedy_candidates(spec)

    best_key = None
    best: tuple[int, ...] = ()
    for indices in candidates:
        key = _subset_key(_subset_value(spec, indices), indices)
        if best_key is None or key > best_key:
            best_key, best = key, indices
    assert best_key is not None
    return SubsetWitness(tuple(spec.classes[i].label for i in best), best_key[0])


def closed_form_alpha(noncm_count: int, cm_count: int) -> Rational:
    """
    ``alpha`` of a product of distinct classes with multiplicity one.

    ``2r / (1 + r)`` as soon as there are ``r >= 1`` CM classes, ``2m / (1 + 3m)`` otherwise.
    """
    if noncm_count < 0 or cm_count < 0 or noncm_count + cm_count == 0:
        msg = f'need at least one class, got {noncm_count} non-CM and {cm_count} CM'
        raise ValueError(msg)
    if cm_count:
        return Rational(2 * cm_count, 1 + cm_count)
    return Rational(2 * noncm_count, 1 + 3 * noncm_count)


def _functional(spec: VarietySpec, profile: ExponentProfile) -> tuple[Rational, Rational]:
    """
    Numerator ``log_ell |H|`` and denominator ``log_ell [K(H):K]`` of the ratio, up to bounded terms.

    The denominator is ``c_n + sum c_i + 2 sum c_(i+n) + sum b_(i+m) + b_m - beta``,
    which is ``sum over non-CM (lower + 2 upper) + sum over CM upper + the largest lower exponent``.
    """
    pairs = profile.pairs(spec)
    numerator = Rational(0)
    denominator = max(lo for lo, _ in pairs)
    for cls, (lo, up) in zip(spec.classes, pairs):
        numerator += (lo + up) * cls.multiplicity
        denominator += up if cls.cm else lo + 2 * up
    return numerator, denominator


def evaluate_ratio(spec: VarietySpec, profile: ExponentProfile) -> Rational:
    """
    Value of the ``m(A)`` functional at ``profile``.

    :raises ShapeError: for the all-zero profile
    """
    numerator, denominator = _functional(spec, profile)
    if denominator == 0:
        msg = 'the all-zero profile is excluded'
        raise ShapeError(msg)
    return numerator / denominator


def _active_case(spec: VarietySpec, profile: ExponentProfile) -> ActiveCase:
    if not spec.cm_classes or not spec.noncm_classes:
        return 'beta=0'
    c_n = max(profile.c[: len(profile.c) // 2])
    b_m = max(profile.b[: len(profile.b) // 2])
    return 'beta=c_n' if c_n <= b_m else 'beta=b_m'


def _lp_rows(spec: VarietySpec, top: int) -> tuple[list[Rational], list[Rational], list[Constraint]]:
    """
    Numerator, denominator and cone constraints over ``x = (lower_1, upper_1, ..., lower_K, upper_K)``.

    The class ``top`` carries the largest lower exponent, which makes the
    denominator linear: choosing a CM top is the ``c_n <= b_m`` regime, a non-CM
    top the ``b_m <= c_n`` one.
    """
    size = 2 * len(spec.classes)
    numerator = [Rational(0)] * size
    denominator = [Rational(0)] * size
    cone: list[Constraint] = []
    for i, cls in enumerate(spec.classes):
        lo, up = 2 * i, 2 * i + 1
        numerator[lo] = numerator[up] = Rational(cls.multiplicity)
        if cls.cm:
            denominator[up] = Rational(1)
        else:
            denominator[lo], denominator[up] = Rational(1), Rational(2)
        row = [Rational(0)] * size
        row[lo], row[up] = Rational(1), Rational(-1)
        cone.append((row, Rational(0)))
        if i != top:
            row = [Rational(0)] * size
            row[lo], row[2 * top] = Rational(1), Rational(-1)
            cone.append((row, Rational(0)))
    denominator[2 * top] += 1
    return numerator, denominator, cone


@functools.lru_cache(maxsize=1024)
def m_invariant(spec: VarietySpec) -> RatioWitness:
    """
    Exact supremum of the ``m(A)`` functional over nonzero exponent profiles.

    The functional is ``0``-homogeneous, so each regime is normalized to a unit
    denominator and solved as an exact linear program. Among optimal rays the
    one with the largest total of lower exponents is returned, found by a
    second program pinned to the optimal value.
    """
    candidates: list[tuple[Rational, int, tuple[Rational, ...]]] = []
    for top in range(len(spec.classes)):
        numerator, denominator, cone = _lp_rows(spec, top)
        result = maximize(numerator, equalities=[(denominator, Rational(1))], inequalities=cone)
        if result.status == 'optimal':
            assert result.value is not None
            candidates.append((result.value, top, result.solution))
    value = max(candidate[0] for candidate in candidates)

    best: tuple[Rational, int, tuple[Rational, ...]] | None = None
    for candidate_value, top, _ in candidates:
        if candidate_value != value:
            continue
        numerator, denominator, cone = _lp_rows(spec, top)
        lowers = [Rational(1 - j % 2) for j in range(2 * len(spec.classes))]
        result = maximize(
            lowers,
            equalities=[(denominator, Rational(1)), (numerator, value)],
            inequalities=cone,
        )
        assert result.value is not None
        if best is None or result.value > best[0]:
            best = (result.value, top, result.solution)
    assert best is not None

    x = best[2]
    profile = ExponentProfile.from_pairs(spec, [(x[2 * i], x[2 * i + 1]) for i in range(len(spec.classes))])
    _ctx.log(f'm(A) = {value} for {len(spec.classes)} classes')
    return RatioWitness(value, profile, _active_case(spec, profile))


def _grid_pairs(bound: int) -> list[tuple[int, int]]:
    return [(lo, up) for lo in range(bound + 1) for up in range(lo, bound + 1)]


def _grid_dtype(spec: VarietySpec, bound: int) -> type:
    """``int64`` when every Dinkelbach score fits, Python integers otherwise."""
    top_numerator = 2 * bound * spec.dimension
    top_denominator = bound * (3 * len(spec.classes) + 1)
    if 2 * top_numerator * top_denominator > np.iinfo(np.int64).max:
        return object
    return np.int64


def _class_columns(
    cls: VarietyClass, pairs: Sequence[tuple[int, int]], dtype: type
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lo = np.array([p[0] for p in pairs], dtype=dtype)
    up = np.array([p[1] for p in pairs], dtype=dtype)
    denominator = up if cls.cm else lo + 2 * up
    return (lo + up) * cls.multiplicity, denominator, lo


def _grid_block(
    columns: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]], dtype: type
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    numerator = np.zeros(1, dtype=dtype)
    denominator = np.zeros(1, dtype=dtype)
    lowest = np.zeros(1, dtype=dtype)
    for num, den, lo in columns:
        numerator = (numerator[:, None] + num[None, :]).ravel()
        denominator = (denominator[:, None] + den[None, :]).ravel()
        lowest = np.maximum(lowest[:, None], lo[None, :]).ravel()
    return numerator, denominator, lowest


def m_invariant_grid(spec: VarietySpec, bound: int, *, budget: int | None = None) -> RatioWitness:
    """
    Maximum of the ``m(A)`` functional over integer profiles with exponents in ``[0, bound]``.

    The last classes are scanned as one numpy block and the others in a Python
    loop; each block is searched with integer Dinkelbach iterations, so the
    maximum is exact. Scores are ``int64`` unless they could overflow, Python
    integers then.

    :raises InfeasibleComputationError: for more than twelve exponents, or if
        the grid is larger than the budget
    """
    if bound < 1:
        msg = f'the grid bound must be at least 1, got {bound}'
        raise ValueError(msg)
    k = len(spec.classes)
    if 2 * k > MAX_GRID_EXPONENTS:
        raise InfeasibleComputationError('an exhaustive profile grid', 2 * k, MAX_GRID_EXPONENTS, unit='exponents')
    pairs = _grid_pairs(bound)
    limit = _ctx.resolve_budget(budget)
    if len(pairs) ** k > limit:
        raise InfeasibleComputationError(f'the exponent grid with bound {bound}', len(pairs) ** k, limit)

    split = max(0, k - _GRID_BLOCK)
    dtype = _grid_dtype(spec, bound)
    columns = [_class_columns(cls, pairs, dtype) for cls in spec.classes]
    inner_num, inner_den, inner_low = _grid_block(columns[split:], dtype)

    best_num, best_den = 0, 1
    best_at: tuple[tuple[int, ...], int] | None = None
    with _ctx.timed('m(A) grid'):
        for outer in itertools.product(range(len(pairs)), repeat=split):
            numerator = inner_num + sum(int(columns[i][0][j]) for i, j in enumerate(outer))
            denominator = inner_den + sum(int(columns[i][1][j]) for i, j in enumerate(outer))
            denominator = denominator + np.maximum(inner_low, max((pairs[j][0] for j in outer), default=0))
            valid = denominator > 0
            while True:
                score = np.where(valid, numerator * best_den - denominator * best_num, -1)
                idx = int(np.argmax(score))
                if score[idx] <= 0:
                    break
                best_num, best_den = int(numerator[idx]), int(denominator[idx])
                best_at = (outer, idx)

    assert best_at is not None
    outer, idx = best_at
    inner = np.unravel_index(idx, (len(pairs),) * (k - split))
    chosen = [pairs[j] for j in (*outer, *(int(i) for i in inner))]
    profile = ExponentProfile.from_pairs(spec, [(Rational(lo), Rational(up)) for lo, up in chosen])
    return RatioWitness(Rational(best_num, best_den), profile, _active_case(spec, profile))


def worst_case_profile(spec: VarietySpec, scale: int) -> ExponentProfile:
    """
    ``scale`` times the primitive integer ray through the optimal profile of :func:`m_invariant`.
    """
    if scale < 1:
        msg = f'scale must be at least 1, got {scale}'
        raise ValueError(msg)
    ray = m_invariant(spec).profile
    values = (*ray.c, *ray.b)
    denominator = math.lcm(*(v.denominator for v in values))
    integers = [int(v * denominator) for v in values]
    divisor = math.gcd(*integers) or 1
    return ray.scaled(Rational(denominator * scale, divisor))


@dataclasses.dataclass(frozen=True)
class AchievedRatio:
    """
    ``log_ell |H| / log_ell [K(H):K]`` in the Galois model.

    ``value`` is exact in the ``ell``-part of the degree (``None`` when the
    degree is prime to ``ell``); ``corrected`` also counts the prime-to-``ell``
    part through ``unit_correction = log_ell(prime_to_ell_part)``.
    """

    torsion_log: Rational
    degree: DegreeReport
    value: Rational | None
    unit_correction: float
    corrected: float


def achieved_ratio(
    spec: VarietySpec,
    profile: ExponentProfile,
    ell: int,
    *,
    cm_kind: FactorKind = FactorKind.CMSPLIT,
) -> AchievedRatio:
    """
    Ratio achieved by the standard subgroup of ``profile``, at level ``N`` = the largest exponent.

    :param cm_kind: Model used for every CM class
    :raises ShapeError: for the all-zero or a non-integral profile
    """
    if profile.is_zero():
        msg = 'the all-zero profile is excluded'
        raise ShapeError(msg)
    pairs = profile.pairs(spec)
    if any(v.denominator != 1 for pair in pairs for v in pair):
        msg = f'achieved ratios need an integral profile, got {profile}'
        raise ShapeError(msg)

    mod = Modulus(ell, int(profile.max_exponent))
    kinds = [cm_kind if cls.cm else FactorKind.NONCM for cls in spec.classes]
    shapes = [SubgroupShape(int(lo), int(up)) for lo, up in pairs]
    report = product_degree(ProductModel.of(kinds, mod), shapes)
    torsion = log_torsion_size(shapes, [cls.multiplicity for cls in spec.classes])
    correction = math.log(report.prime_to_ell_part, ell)
    return AchievedRatio(
        torsion_log=torsion,
        degree=report,
        value=torsion / report.ell_valuation if report.ell_valuation else None,
        unit_correction=correction,
        corrected=float(torsion) / (report.ell_valuation + correction),
    )


def spec_universe(max_classes: int, max_multiplicity: int) -> Iterator[VarietySpec]:
    """
    Every spec with at most ``max_classes`` classes and multiplicities up to ``max_multiplicity``, up to relabeling.
    """
    types = [(cm, mult) for cm in (False, True) for mult in range(1, max_multiplicity + 1)]
    for count in range(1, max_classes + 1):
        for combo in itertools.combinations_with_replacement(types, count):
            yield VarietySpec.of((cm for cm, _ in combo), (mult for _, mult in combo))
