"""
Idealized mod ``ell^N`` Galois image of a product of elliptic curves.

Each isogeny class is modelled by a matrix group acting on ``(Z/ell^N)^2``:

- ``NonCM``: all of ``GL2(Z/ell^N)``
- ``CMSplit``: the diagonal torus
- ``CMNonsplit``: the units of the unramified quadratic ring in the basis ``{1, T}``

The multiplier of an element is its determinant in every model. A product of
factors is glued by the fiber product over equal multipliers, so every count
over the glued group is a sum over multiplier classes of products of per-factor
counts.
"""

from __future__ import annotations

import collections
import dataclasses
import enum
import functools
import itertools
import math

from collections.abc import Iterable, Iterator, Mapping, Sequence

import sympy

from . import _ctx
from ._exceptions import InfeasibleComputationError, ReductionNotApplicableError, ShapeError
from ._types import Point, Rational, Residue
from .modular import (
    Mat2,
    Modulus,
    SubgroupShape,
    build_quad_ring,
    gl2_order,
    iter_gl2,
    iter_sl2,
    mat2_apply,
    mat2_det_invertible,
    quad_unit_to_mat,
)


__all__ = [
    'DegreeReport',
    'FactorKind',
    'FactorModel',
    'MultiplierFibers',
    'ProductModel',
    'coset_exponent',
    'congruence_target',
    'enumerate_degree_oracle',
    'enumerate_multiplier_fibers',
    'factor_group_order',
    'fixer_multiplier_fibers',
    'fixer_order',
    'group_multiplier_fibers',
    'intersection_degree',
    'is_parallelogram',
    'iter_factor_group',
    'iter_fixer',
    'log_torsion_size',
    'multiplier_kernel',
    'parallelogram_ratio',
    'product_degree',
    'stabilize_subgroup',
    'standard_generators',
]


class FactorKind(str, enum.Enum):
    NONCM = 'noncm'
    CMSPLIT = 'cmsplit'
    CMNONSPLIT = 'cmnonsplit'

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> FactorKind:
        try:
            return cls(text.strip().lower().replace('-', '').replace('_', ''))
        except ValueError:
            choices = ', '.join(kind.value for kind in cls)
            msg = f"unknown factor kind '{text}', expected one of: {choices}"
            raise ValueError(msg) from None


@dataclasses.dataclass(frozen=True)
class FactorModel:
    kind: FactorKind
    multiplicity: int = 1
    label: str = ''

    def __post_init__(self) -> None:
        if self.multiplicity < 1:
            msg = f'multiplicity must be at least 1, got {self.multiplicity}'
            raise ValueError(msg)


@dataclasses.dataclass(frozen=True)
class ProductModel:
    """
    Factor models at a common level, glued along equal multipliers.
    """

    factors: tuple[FactorModel, ...]
    modulus: Modulus

    def __post_init__(self) -> None:
        if not self.factors:
            msg = 'a product model needs at least one factor'
            raise ShapeError(msg)

    @classmethod
    def of(cls, kinds: Iterable[FactorKind], mod: Modulus) -> ProductModel:
        return cls(tuple(FactorModel(kind, label=f'E{i + 1}') for i, kind in enumerate(kinds)), mod)

    @property
    def kinds(self) -> tuple[FactorKind, ...]:
        return tuple(factor.kind for factor in self.factors)

    def select(self, indices: Iterable[int]) -> ProductModel:
        return ProductModel(tuple(self.factors[i] for i in indices), self.modulus)


class _CosetCounts(Mapping[Residue, int]):
    """
    Constant count on every class of ``1 + ell^k (Z/ell^N)``, without materializing the classes.
    """

    def __init__(self, mod: Modulus, exponent: int, fiber: int) -> None:
        self._mod = mod
        self._exponent = exponent
        self._fiber = fiber

    def __getitem__(self, key: Residue) -> int:
        if 0 <= key < self._mod.order and self._mod.in_principal_units(key, self._exponent):
            return self._fiber
        raise KeyError(key)

    def __iter__(self) -> Iterator[Residue]:
        return self._mod.principal_units(self._exponent)

    def __len__(self) -> int:
        return self._mod.principal_unit_count(self._exponent)


@dataclasses.dataclass(frozen=True)
class MultiplierFibers:
    """
    Distribution of multipliers over a subgroup of a factor group.

    ``coset_exponent`` is the ``k`` for which the multiplier image is exactly
    ``1 + ell^k (Z/ell^N)``, ``None`` when the image is not such a coset. For
    ``ell = 2`` the exponents ``0`` and ``1`` name the same coset, see
    :meth:`matches_coset`.
    """

    coset_exponent: int | None
    total: int
    per_class_counts: Mapping[Residue, int]
    uniform: bool

    def matches_coset(self, mod: Modulus, exponent: int) -> bool:
        """Whether the multiplier image is exactly the set ``1 + ell^exponent (Z/ell^N)``."""
        if len(self.per_class_counts) != mod.principal_unit_count(exponent):
            return False
        return all(count > 0 and mod.in_principal_units(key, exponent) for key, count in self.per_class_counts.items())


@dataclasses.dataclass(frozen=True)
class DegreeReport:
    """
    Model value of ``[K(H) : K]`` for a product model and one shape per factor.
    """

    degree: int
    per_factor_degrees: tuple[int, ...]
    cyclotomic_exponent: int
    ell_valuation: int
    prime_to_ell_part: int
    glued_order: int
    fixer_order: int

    def __post_init__(self) -> None:
        if self.degree < 1:  # pragma: no cover
            msg = f'degree must be positive, got {self.degree}'
            raise AssertionError(msg)

    @property
    def log_ell_degree(self) -> Rational:
        """Exact ``log_ell`` of the ``ell``-part of the degree; the unit part is :attr:`prime_to_ell_part`."""
        return Rational(self.ell_valuation)


def factor_group_order(kind: FactorKind, mod: Modulus) -> int:
    if kind is FactorKind.NONCM:
        return gl2_order(mod)
    if kind is FactorKind.CMSPLIT:
        return mod.unit_count() ** 2
    return mod.ell ** (2 * mod.level - 2) * (mod.ell**2 - 1)


def _check_budget(what: str, required: int, budget: int | None) -> None:
    limit = _ctx.resolve_budget(budget)
    if required > limit:
        raise InfeasibleComputationError(what, required, limit)


def iter_factor_group(kind: FactorKind, mod: Modulus, *, budget: int | None = None) -> Iterator[Mat2]:
    """
    Enumerate the factor group as matrices.

    :raises InfeasibleComputationError: if the group is larger than the budget
    """
    _check_budget(f'the {kind} group modulo {mod.order}', factor_group_order(kind, mod), budget)
    if kind is FactorKind.NONCM:
        yield from iter_gl2(mod)
    elif kind is FactorKind.CMSPLIT:
        units = list(mod.units())
        for a in units:
            for d in units:
                yield Mat2(a, 0, 0, d)
    else:
        ring = build_quad_ring(mod)
        for w in ring.units():
            yield quad_unit_to_mat(w, ring)


def multiplier(g: Mat2, mod: Modulus) -> Residue:
    det, _ = mat2_det_invertible(g, mod)
    return det


def standard_generators(shape: SubgroupShape, mod: Modulus) -> list[Point]:
    """The points ``ell^(N - m) e1`` and ``ell^(N - n) e2`` spanning the standard subgroup."""
    shape.check_level(mod)
    return [
        (mod.reduce(mod.ell ** (mod.level - shape.lower)), 0),
        (0, mod.reduce(mod.ell ** (mod.level - shape.upper))),
    ]


def fixes(g: Mat2, points: Iterable[Point], mod: Modulus) -> bool:
    return all(mat2_apply(g, point, mod) == point for point in points)


def _fixer_entries(mod: Modulus, shape: SubgroupShape) -> tuple[list[Residue], list[Residue], list[Residue], list[Residue]]:
    """Residues allowed in each entry of a non-CM fixer: ``a = 1, c = 0 mod ell^m`` and ``b = 0, d = 1 mod ell^n``."""
    shape.check_level(mod)

    def congruent(target: int, exponent: int) -> list[Residue]:
        step = mod.ell**exponent
        return sorted((target + step * i) % mod.order for i in range(mod.order // step))

    m, n = shape.lower, shape.upper
    return congruent(1, m), congruent(0, n), congruent(0, m), congruent(1, n)


def iter_fixer(kind: FactorKind, mod: Modulus, shape: SubgroupShape, *, budget: int | None = None) -> Iterator[Mat2]:
    """
    Enumerate the pointwise stabilizer of the standard shape-``(m, n)`` subgroup.

    Non-CM fixers are enumerated straight from their congruence conditions,
    CM fixers by filtering the factor group.
    """
    if kind is FactorKind.NONCM:
        entries = _fixer_entries(mod, shape)
        _check_budget(f'the non-CM fixer of {shape} modulo {mod.order}', math.prod(map(len, entries)), budget)
        matrices = (Mat2(*abcd) for abcd in itertools.product(*entries))
        return (g for g in matrices if mat2_det_invertible(g, mod)[1])
    generators = standard_generators(shape, mod)
    return (g for g in iter_factor_group(kind, mod, budget=budget) if fixes(g, generators, mod))


def stabilize_subgroup(kind: FactorKind, shape: SubgroupShape) -> SubgroupShape:
    """
    Smallest shape whose standard subgroup is stable under the factor group and contains ``shape``.

    :raises ReductionNotApplicableError: for a non-CM factor
    """
    if kind is FactorKind.NONCM:
        msg = 'the Galois-stable reduction only applies to CM factors'
        raise ReductionNotApplicableError(msg)
    if kind is FactorKind.CMSPLIT:
        return shape
    return SubgroupShape(shape.upper, shape.upper)


def coset_exponent(kind: FactorKind, shape: SubgroupShape) -> int:
    if kind is FactorKind.CMNONSPLIT:
        return shape.upper
    return shape.lower


def fixer_order(kind: FactorKind, mod: Modulus, shape: SubgroupShape) -> int:
    """
    Order of the pointwise stabilizer of the standard shape-``(m, n)`` subgroup.

    The stabilizer is cut out by ``a = 1, c = 0 mod ell^m`` and ``b = 0, d = 1 mod ell^n``.
    """
    shape.check_level(mod)
    ell, n, m, k = mod.ell, mod.level, shape.lower, shape.upper
    if kind is FactorKind.NONCM:
        if m >= 1:
            return ell ** (4 * n - 2 * m - 2 * k)
        if k >= 1:
            # a only needs to be a unit, c is free
            return mod.unit_count() * mod.order * ell ** (2 * (n - k))
        return gl2_order(mod)
    if kind is FactorKind.CMSPLIT:
        return mod.principal_unit_count(m) * mod.principal_unit_count(k)
    # 1 + ell^n W, the annihilator of the generated W-module
    if k == 0:
        return factor_group_order(kind, mod)
    return ell ** (2 * (n - k))


def group_multiplier_fibers(kind: FactorKind, mod: Modulus) -> MultiplierFibers:
    order = factor_group_order(kind, mod)
    return MultiplierFibers(0, order, _CosetCounts(mod, 0, order // mod.unit_count()), uniform=True)


def fixer_multiplier_fibers(kind: FactorKind, mod: Modulus, shape: SubgroupShape) -> MultiplierFibers:
    """
    Multiplier distribution over the fixer of a standard subgroup, from closed forms.

    The multiplier restricted to the fixer is a homomorphism onto ``1 + ell^k (Z/ell^N)``,
    so every class in the image has the same count.
    """
    order = fixer_order(kind, mod, shape)
    k = coset_exponent(kind, shape)
    return MultiplierFibers(k, order, _CosetCounts(mod, k, order // mod.principal_unit_count(k)), uniform=True)


def _fibers_from_counts(counter: Mapping[Residue, int], mod: Modulus) -> MultiplierFibers:
    counts = {key: count for key, count in sorted(counter.items()) if count}
    fibers = MultiplierFibers(None, sum(counts.values()), counts, uniform=len(set(counts.values())) <= 1)
    exponent = next((k for k in range(mod.level + 1) if fibers.matches_coset(mod, k)), None)
    return dataclasses.replace(fibers, coset_exponent=exponent)


def _count_fibers(elements: Iterable[Mat2], mod: Modulus) -> MultiplierFibers:
    return _fibers_from_counts(collections.Counter(multiplier(g, mod) for g in elements), mod)


def _noncm_fixer_fibers(mod: Modulus, shape: SubgroupShape, budget: int | None) -> MultiplierFibers:
    a_values, b_values, c_values, d_values = _fixer_entries(mod, shape)
    pairs = len(a_values) * len(d_values) + len(b_values) * len(c_values)
    _check_budget(f'the entry products of the non-CM fixer of {shape} modulo {mod.order}', pairs, budget)
    q = mod.order
    diagonal = collections.Counter(a * d % q for a in a_values for d in d_values)
    antidiagonal = collections.Counter(b * c % q for b in b_values for c in c_values)
    # det = ad - bc, so the count of det = u pairs ad = x with bc = x - u
    counts = {u: sum(n * antidiagonal[(x - u) % q] for x, n in diagonal.items()) for u in mod.units()}
    return _fibers_from_counts(counts, mod)


def enumerate_multiplier_fibers(
    kind: FactorKind, mod: Modulus, shape: SubgroupShape, *, budget: int | None = None
) -> MultiplierFibers:
    """
    Multiplier distribution over the fixer of a standard subgroup, counted without closed forms.

    A non-CM fixer is a box of independent congruence conditions on the four
    entries, so its determinant distribution is counted from the distributions
    of ``ad`` and ``bc``; the budget bounds the number of entry pairs. CM
    fixers are enumerated element by element. Nothing about the image or the
    uniformity of the counts is assumed. When several exponents describe the
    image (``ell = 2``), the smallest is reported.
    """
    if kind is FactorKind.NONCM:
        return _noncm_fixer_fibers(mod, shape, budget)
    return _count_fibers(iter_fixer(kind, mod, shape, budget=budget), mod)


def multiplier_kernel(kind: FactorKind, mod: Modulus, *, budget: int | None = None) -> Iterator[Mat2]:
    """Enumerate the multiplier-one subgroup: ``SL2``, ``diag(a, 1/a)`` or the norm-one units."""
    if kind is FactorKind.NONCM:
        _check_budget(f'SL2 modulo {mod.order}', gl2_order(mod) // mod.unit_count(), budget)
        yield from iter_sl2(mod)
    elif kind is FactorKind.CMSPLIT:
        for a in mod.units():
            yield Mat2(a, 0, 0, mod.inverse(a))
    else:
        yield from (g for g in iter_factor_group(kind, mod, budget=budget) if multiplier(g, mod) == 1 % mod.order)


def congruence_target(kind: FactorKind, mod: Modulus, exponent: int, *, budget: int | None = None) -> Iterator[Mat2]:
    """Enumerate ``{g : multiplier(g) = 1 mod ell^k}`` inside the factor group."""
    return (g for g in iter_factor_group(kind, mod, budget=budget) if mod.in_principal_units(multiplier(g, mod), exponent))


def _glued_count(fibers: Sequence[MultiplierFibers], mod: Modulus, *, explicit: bool = False) -> int:
    """
    Number of tuples with equal multipliers, ``sum over classes of the product of counts``.
    """
    exponents = [f.coset_exponent for f in fibers if f.coset_exponent is not None and f.uniform]
    if not explicit and len(exponents) == len(fibers):
        total = mod.principal_unit_count(max(exponents))
        for f, k in zip(fibers, exponents):
            total *= f.total // mod.principal_unit_count(k)
        return total

    smallest = min(fibers, key=lambda f: len(f.per_class_counts))
    return sum(math.prod(f.per_class_counts.get(key, 0) for f in fibers) for key in smallest.per_class_counts)


def _check_alignment(model: ProductModel, shapes: Sequence[SubgroupShape]) -> None:
    if len(shapes) != len(model.factors):
        msg = f'got {len(shapes)} shapes for {len(model.factors)} factors'
        raise ShapeError(msg)
    for shape in shapes:
        shape.check_level(model.modulus)


def _report(
    mod: Modulus, group: Sequence[MultiplierFibers], fixer: Sequence[MultiplierFibers], glued: int, fixed: int
) -> DegreeReport:
    ell = mod.ell
    degree, remainder = divmod(glued, fixed)
    if remainder:  # pragma: no cover
        msg = f'fixer order {fixed} does not divide glued order {glued}'
        raise AssertionError(msg)
    valuation = int(sympy.multiplicity(ell, degree))
    return DegreeReport(
        degree=degree,
        per_factor_degrees=tuple(g.total // f.total for g, f in zip(group, fixer)),
        cyclotomic_exponent=max((f.coset_exponent or 0) for f in fixer),
        ell_valuation=valuation,
        prime_to_ell_part=degree // ell**valuation,
        glued_order=glued,
        fixer_order=fixed,
    )


def product_degree(model: ProductModel, shapes: Sequence[SubgroupShape]) -> DegreeReport:
    """
    Exact index of the fixer of ``H = prod H_i`` in the glued group, from closed forms.

    :param model: The product model
    :param shapes: One standard shape per factor class
    :raises ShapeError: on misaligned shapes or shapes above the level
    """
    _check_alignment(model, shapes)
    mod = model.modulus
    group = [group_multiplier_fibers(kind, mod) for kind in model.kinds]
    fixer = [fixer_multiplier_fibers(kind, mod, shape) for kind, shape in zip(model.kinds, shapes)]
    return _report(mod, group, fixer, _glued_count(group, mod), _glued_count(fixer, mod))


@functools.lru_cache(maxsize=16)
def _factor_elements(kind: FactorKind, mod: Modulus) -> tuple[Mat2, ...]:
    return tuple(iter_factor_group(kind, mod, budget=factor_group_order(kind, mod)))


def enumerate_degree_oracle(
    model: ProductModel, generators: Sequence[Sequence[Point]], *, budget: int | None = None
) -> int:
    """
    Index of the fixer of the given points in the glued group, by exhaustive enumeration.

    Every factor group is enumerated element by element; the glued group is
    not. An element of the glued group fixes the points if and only if each
    coordinate fixes the points of its factor, so both the glued group and the
    fixer are counted exactly by pairing the per-factor multiplier counts over
    equal multipliers. This is the fiber-product count :func:`product_degree`
    uses, fed with enumerated counts instead of closed forms.

    :param model: The product model
    :param generators: Arbitrary points of ``(Z/ell^N)^2``, one sequence per factor
    :param budget: Maximum glued group order, defaults to the context budget
    :raises InfeasibleComputationError: if the glued group is larger than the budget
    """
    if len(generators) != len(model.factors):
        msg = f'got {len(generators)} generator lists for {len(model.factors)} factors'
        raise ShapeError(msg)
    mod = model.modulus
    glued_order = mod.unit_count()
    for kind in model.kinds:
        glued_order *= factor_group_order(kind, mod) // mod.unit_count()
    _check_budget(f'the glued group of {len(model.factors)} factors modulo {mod.order}', glued_order, budget)

    _ctx.log(f'Enumerating {"x".join(map(str, model.kinds))} modulo {mod.order}...')
    group, fixer = [], []
    with _ctx.timed('degree oracle'):
        for kind, points in zip(model.kinds, generators):
            elements = _factor_elements(kind, mod)
            group.append(_count_fibers(elements, mod))
            fixer.append(_count_fibers((g for g in elements if fixes(g, points, mod)), mod))
        glued = _glued_count(group, mod, explicit=True)
        fixed = _glued_count(fixer, mod, explicit=True)
    return glued // fixed


def log_torsion_size(shapes: Sequence[SubgroupShape], multiplicities: Sequence[int]) -> Rational:
    """``log_ell |H|`` for ``H = prod H_i^(u_i)``."""
    if len(shapes) != len(multiplicities):
        msg = f'got {len(shapes)} shapes for {len(multiplicities)} multiplicities'
        raise ShapeError(msg)
    return Rational(sum(shape.log_size * mult for shape, mult in zip(shapes, multiplicities)))


def is_parallelogram(top: int, left: int, right: int, bottom: int = 1) -> bool:
    """
    Whether ``bottom <= left, right <= top`` is a parallelogram, given degrees over a common base.
    """
    return top * bottom == left * right


@functools.lru_cache(maxsize=None)
def _single_degree(kind: FactorKind, mod: Modulus, shape: SubgroupShape) -> int:
    return product_degree(ProductModel.of([kind], mod), [shape]).degree


def intersection_degree(model: ProductModel, shapes: Sequence[SubgroupShape]) -> Rational:
    """
    Model value of ``[K(H1) cap K(H2) : K] = [K(H1):K] [K(H2):K] / [K(H):K]`` for a two-factor model.
    """
    if len(model.factors) != 2:
        msg = f'the intersection degree needs two factors, got {len(model.factors)}'
        raise ShapeError(msg)
    together = product_degree(model, shapes).degree
    first, second = (_single_degree(kind, model.modulus, shape) for kind, shape in zip(model.kinds, shapes))
    return Rational(first * second, together)


def _stabilized(kind: FactorKind, shape: SubgroupShape) -> SubgroupShape:
    return shape if kind is FactorKind.NONCM else stabilize_subgroup(kind, shape)


def parallelogram_ratio(model: ProductModel, shapes: Sequence[SubgroupShape]) -> Rational:
    """
    ``R = [K(H):K] ell^(sum m_i - max m_i) / prod [K(H_i):K]``, CM shapes stabilized first.
    """
    _check_alignment(model, shapes)
    shapes = [_stabilized(kind, shape) for kind, shape in zip(model.kinds, shapes)]
    lowers = [shape.lower for shape in shapes]
    together = product_degree(model, shapes).degree
    separate = math.prod(_single_degree(kind, model.modulus, shape) for kind, shape in zip(model.kinds, shapes))
    return Rational(together * model.modulus.ell ** (sum(lowers) - max(lowers)), separate)
