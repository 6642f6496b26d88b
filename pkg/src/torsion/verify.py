"""
Checks binding the invariants to the Galois model.

Every check returns a :class:`CheckReport` whose cells are listed in grid
order; failing cells carry the parameters and values needed to reproduce them.
"""

from __future__ import annotations

import dataclasses
import itertools

from collections.abc import Iterable, Mapping, Sequence

from . import _ctx
from ._types import CheckStatus, Point, Rational
from .galois import (
    FactorKind,
    ProductModel,
    congruence_target,
    coset_exponent,
    enumerate_degree_oracle,
    enumerate_multiplier_fibers,
    fixer_multiplier_fibers,
    fixes,
    intersection_degree,
    is_parallelogram,
    iter_factor_group,
    multiplier,
    multiplier_kernel,
    parallelogram_ratio,
    product_degree,
    stabilize_subgroup,
    standard_generators,
)
from .invariants import (
    VarietySpec,
    achieved_ratio,
    alpha,
    closed_form_alpha,
    m_invariant,
    m_invariant_grid,
    spec_universe,
    worst_case_profile,
)
from .modular import Mat2, Modulus, SubgroupShape, mat2_apply, mat2_mul, subgroup_shape


__all__ = [
    'CheckCell',
    'CheckReport',
    'all_shapes',
    'check_alpha_convergence',
    'check_alpha_eq_m',
    'check_closed_forms',
    'check_degree_oracle',
    'check_full_level',
    'check_gammamn',
    'check_parallelogram',
    'check_property_mu',
    'describe_spec',
]


@dataclasses.dataclass(frozen=True)
class CheckCell:
    params: Mapping[str, object]
    status: CheckStatus
    values: Mapping[str, object] = dataclasses.field(default_factory=dict)
    counterexample: Mapping[str, object] | None = None


@dataclasses.dataclass
class CheckReport:
    check_name: str
    cells: list[CheckCell] = dataclasses.field(default_factory=list)
    measured_constants: dict[str, object] = dataclasses.field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(cell.status == 'pass' for cell in self.cells)

    @property
    def failures(self) -> list[CheckCell]:
        return [cell for cell in self.cells if cell.status == 'fail']

    def add(
        self,
        params: Mapping[str, object],
        ok: bool,
        values: Mapping[str, object] | None = None,
        counterexample: Mapping[str, object] | None = None,
    ) -> CheckCell:
        status: CheckStatus = 'pass' if ok else 'fail'
        values = dict(values or {})
        cell = CheckCell(dict(params), status, values, None if ok else {**params, **values, **(counterexample or {})})
        self.cells.append(cell)
        _ctx.log_cell(self.check_name, params, status)
        return cell

    def to_dict(self) -> dict[str, object]:
        return {
            'check_name': self.check_name,
            'passed': self.passed,
            'cells': [dataclasses.asdict(cell) for cell in self.cells],
            'measured_constants': dict(self.measured_constants),
        }


def all_shapes(level: int) -> list[SubgroupShape]:
    return [SubgroupShape(m, n) for n in range(level + 1) for m in range(n + 1)]


def _spot_shapes(level: int) -> list[SubgroupShape]:
    exponents = sorted({e for e in (0, 1, 2, level // 2, level - 1, level) if 0 <= e <= level})
    return [SubgroupShape(m, n) for m, n in itertools.combinations_with_replacement(exponents, 2)]


def describe_spec(spec: VarietySpec) -> str:
    return ','.join(f'{"C" if cls.cm else "N"}{cls.multiplicity}' for cls in spec.classes)


def _render_mat(g: Mat2) -> list[int]:
    return list(g)


def _times_kernel(elements: Iterable[Mat2], kernel: Sequence[Mat2], mod: Modulus) -> set[Mat2]:
    """
    The set product ``elements . kernel``.

    ``g . kernel`` only depends on the multiplier of ``g``, so one element per
    multiplier class is multiplied out.
    """
    representatives: dict[int, Mat2] = {}
    for g in elements:
        representatives.setdefault(multiplier(g, mod), g)
    return {mat2_mul(g, s, mod) for g in representatives.values() for s in kernel}


def _compare(report: CheckReport, params: Mapping[str, object], product: set[Mat2], target: set[Mat2]) -> None:
    difference = sorted(product ^ target)
    report.add(
        params,
        not difference,
        {'product_size': len(product), 'target_size': len(target)},
        {'element': _render_mat(difference[0]), 'in_product': difference[0] in product} if difference else None,
    )


class _Targets:
    def __init__(self, kind: FactorKind, mod: Modulus, budget: int | None) -> None:
        self._kind = kind
        self._mod = mod
        self._budget = budget
        self._cache: dict[int, set[Mat2]] = {}

    def __getitem__(self, exponent: int) -> set[Mat2]:
        if exponent not in self._cache:
            self._cache[exponent] = set(congruence_target(self._kind, self._mod, exponent, budget=self._budget))
        return self._cache[exponent]


def check_gammamn(ell: int, level: int, *, kind: FactorKind = FactorKind.NONCM, budget: int | None = None) -> CheckReport:
    """
    ``G_{m,n} . ker = Gamma_k`` for every shape, by exhaustive set computation.

    ``G_{m,n}`` is the fixer of the standard shape-``(m, n)`` subgroup, ``ker``
    the multiplier-one subgroup and ``Gamma_k`` the elements whose multiplier
    is ``1 mod ell^k``, ``k`` being the coset exponent of the shape. For
    non-CM factors this is ``G_{m,n} . SL2 = {det = 1 mod ell^m}``.
    """
    mod = Modulus(ell, level)
    report = CheckReport('gammamn')
    with _ctx.timed(f'gammamn {kind} {mod}'):
        group = list(iter_factor_group(kind, mod, budget=budget))
        kernel = list(multiplier_kernel(kind, mod, budget=budget))
        targets = _Targets(kind, mod, budget)
        for shape in all_shapes(level):
            generators = standard_generators(shape, mod)
            product = _times_kernel((g for g in group if fixes(g, generators, mod)), kernel, mod)
            params = {'kind': str(kind), 'ell': ell, 'level': level, 'm': shape.lower, 'n': shape.upper}
            _compare(report, params, product, targets[coset_exponent(kind, shape)])
    report.measured_constants['group_order'] = len(group)
    return report


def check_full_level(kind: FactorKind, ell: int, level: int, *, budget: int | None = None) -> CheckReport:
    """
    The level-``ell^m`` congruence subgroup times the multiplier-one subgroup is ``Gamma_m``, for every ``m``.
    """
    mod = Modulus(ell, level)
    report = CheckReport('full_level')
    group = list(iter_factor_group(kind, mod, budget=budget))
    kernel = list(multiplier_kernel(kind, mod, budget=budget))
    targets = _Targets(kind, mod, budget)
    for m in range(level + 1):
        generators = standard_generators(SubgroupShape(m, m), mod)
        product = _times_kernel((g for g in group if fixes(g, generators, mod)), kernel, mod)
        _compare(report, {'kind': str(kind), 'ell': ell, 'level': level, 'm': m}, product, targets[m])
    return report


def check_property_mu(kind: FactorKind, ell: int, level: int, *, budget: int | None = None) -> CheckReport:
    """
    The multiplier image of every fixer is exactly ``1 + ell^m (Z/ell^N)``, ``m`` the lower exponent.

    CM shapes are stabilized first. The index defect is the index of the
    image in that coset, ``1`` when the image is the full coset.
    """
    mod = Modulus(ell, level)
    report = CheckReport('property_mu')
    worst_defect = Rational(1)
    for shape in all_shapes(level):
        stable = shape if kind is FactorKind.NONCM else stabilize_subgroup(kind, shape)
        expected = stable.lower
        fibers = enumerate_multiplier_fibers(kind, mod, shape, budget=budget)
        stable_fibers = fibers if stable == shape else enumerate_multiplier_fibers(kind, mod, stable, budget=budget)
        formula = fixer_multiplier_fibers(kind, mod, shape)
        defect = Rational(mod.principal_unit_count(expected), len(fibers.per_class_counts))
        worst_defect = max(worst_defect, defect)
        ok = (
            fibers.matches_coset(mod, expected)
            and fibers.uniform
            and fibers.total == formula.total
            and dict(stable_fibers.per_class_counts) == dict(fibers.per_class_counts)
        )
        report.add(
            {'kind': str(kind), 'ell': ell, 'level': level, 'm': shape.lower, 'n': shape.upper},
            ok,
            {
                'expected_exponent': expected,
                'coset_exponent': fibers.coset_exponent,
                'index_defect': defect,
                'fixer_order': fibers.total,
            },
        )
    report.measured_constants['index_defect'] = worst_defect
    return report


def _power_bound_holds(degree: int, ell: int, exponent: int) -> bool:
    return exponent <= 0 or degree >= ell**exponent


def _lower_bound_exponent(kind: FactorKind, shape: SubgroupShape) -> int | None:
    if kind is FactorKind.NONCM:
        return 2 * shape.log_size - 3
    if kind is FactorKind.CMSPLIT:
        return shape.log_size - 2
    return None


def _oracle_generators(kind: FactorKind, shape: SubgroupShape, mod: Modulus) -> list[Point]:
    """Standard generators, moved off the axes by a shear for non-CM factors."""
    points = standard_generators(shape, mod)
    if kind is FactorKind.NONCM:
        shear = Mat2(1, 1, 0, 1)
        points = [mat2_apply(shear, point, mod) for point in points]
    return points


def check_degree_oracle(ell: int, level: int, factor_count: int = 2, *, budget: int | None = None) -> CheckReport:
    """
    Closed-form degrees against the enumeration oracle, for every kind tuple and aligned shape.

    Non-CM points are sheared off the axes and the closed form is evaluated on
    the shapes read back from them. Each cell also checks the per-factor lower
    bounds ``log_ell(degree) >= 2(m + n) - 3`` for non-CM factors and
    ``>= (m + n) - 2`` for split CM factors.
    """
    mod = Modulus(ell, level)
    report = CheckReport('degree_oracle')
    shapes = all_shapes(level)
    for count in range(1, factor_count + 1):
        for kinds in itertools.product(FactorKind, repeat=count):
            model = ProductModel.of(kinds, mod)
            for assignment in itertools.product(shapes, repeat=count):
                generators = [_oracle_generators(kind, shape, mod) for kind, shape in zip(kinds, assignment)]
                recovered = [subgroup_shape(points, mod) for points in generators]
                formula = product_degree(model, recovered)
                oracle = enumerate_degree_oracle(model, generators, budget=budget)
                bounds = [
                    _power_bound_holds(degree, ell, bound)
                    for kind, shape, degree in zip(kinds, assignment, formula.per_factor_degrees)
                    if (bound := _lower_bound_exponent(kind, shape)) is not None
                ]
                report.add(
                    {'kinds': [str(k) for k in kinds], 'ell': ell, 'level': level, 'shapes': [str(s) for s in assignment]},
                    formula.degree == oracle and all(bounds) and recovered == list(assignment),
                    {'formula': formula.degree, 'oracle': oracle, 'lower_bounds_hold': all(bounds)},
                )
    return report


def check_parallelogram(
    ell: int,
    kinds: Sequence[FactorKind],
    levels: Iterable[int],
    *,
    oracle: bool = False,
    budget: int | None = None,
) -> CheckReport:
    """
    Measure ``R = [K(H):K] ell^(sum m_i - max m_i) / prod [K(H_i):K]`` over a shape grid.

    Every shape assignment is used up to level 3, a spot grid of exponents
    above. For two factors each cell also checks that the intersection degree
    is the degree of ``K(mu_(ell^min m))`` and that the fields form a
    parallelogram over it. The reported ``C`` bounds ``R`` and ``1/R``; the
    check fails if ``min R`` or ``max R`` changes with the level.
    """
    report = CheckReport('parallelogram')
    extremes: dict[int, tuple[Rational, Rational]] = {}
    for level in levels:
        mod = Modulus(ell, level)
        model = ProductModel.of(kinds, mod)
        grid = all_shapes(level) if level <= 3 else _spot_shapes(level)
        ratios = []
        for assignment in itertools.product(grid, repeat=len(kinds)):
            ratio = parallelogram_ratio(model, assignment)
            ratios.append(ratio)
            values: dict[str, object] = {'R': ratio}
            ok = True
            if len(kinds) == 2:
                stable = [s if k is FactorKind.NONCM else stabilize_subgroup(k, s) for k, s in zip(kinds, assignment)]
                base = Rational(mod.unit_count(), mod.principal_unit_count(min(s.lower for s in stable)))
                meet = intersection_degree(model, stable)
                degrees = product_degree(model, stable)
                square = is_parallelogram(degrees.degree, *degrees.per_factor_degrees, bottom=int(base))
                values.update(intersection_degree=meet, cyclotomic_degree=base, parallelogram=square)
                ok = meet == base and square
            if oracle:
                values['R_oracle'] = _oracle_ratio(model, assignment, budget)
                ok = ok and values['R_oracle'] == ratio
            params = {'ell': ell, 'kinds': [str(k) for k in kinds], 'level': level, 'shapes': [str(s) for s in assignment]}
            report.add(params, ok, values)
        extremes[level] = (min(ratios), max(ratios))

    bound = max(max(high, 1 / low) for low, high in extremes.values())
    report.measured_constants.update(
        C=bound,
        extremes={level: {'min': low, 'max': high} for level, (low, high) in extremes.items()},
    )
    params = {'ell': ell, 'kinds': [str(k) for k in kinds], 'stable_in_level': list(extremes)}
    report.add(params, len(set(extremes.values())) <= 1, {'C': bound})
    return report


def _oracle_ratio(model: ProductModel, shapes: Sequence[SubgroupShape], budget: int | None) -> Rational:
    mod = model.modulus
    stable = [s if k is FactorKind.NONCM else stabilize_subgroup(k, s) for k, s in zip(model.kinds, shapes)]
    generators = [standard_generators(s, mod) for s in stable]
    together = enumerate_degree_oracle(model, generators, budget=budget)
    separate = 1
    for i, points in enumerate(generators):
        separate *= enumerate_degree_oracle(model.select([i]), [points], budget=budget)
    lowers = [s.lower for s in stable]
    return Rational(together * mod.ell ** (sum(lowers) - max(lowers)), separate)


def check_alpha_convergence(
    spec: VarietySpec,
    ell: int,
    t_max: int,
    *,
    tolerance: float = 0.05,
    cm_kind: FactorKind = FactorKind.CMSPLIT,
    max_level: int = 24,
) -> CheckReport:
    """
    Achieved ratios along the worst-case profiles ``t . ray`` for ``t = 1 .. t_max``.

    Gaps are measured on the ratio corrected for the prime-to-``ell`` part of
    the degree; they must shrink with ``t`` and end within ``tolerance``.
    """
    report = CheckReport('alpha_convergence')
    target = alpha(spec).value
    gaps: list[float] = []
    for t in range(1, t_max + 1):
        profile = worst_case_profile(spec, t)
        if profile.max_exponent > max_level:
            msg = f'level {profile.max_exponent} exceeds the formula-path limit {max_level}'
            raise ValueError(msg)
        ratio = achieved_ratio(spec, profile, ell, cm_kind=cm_kind)
        gap = abs(ratio.corrected - float(target))
        ok = not gaps or gap <= gaps[-1]
        gaps.append(gap)
        report.add(
            {'spec': describe_spec(spec), 'ell': ell, 't': t},
            ok,
            {'profile': str(profile), 'ratio': ratio.value, 'corrected': ratio.corrected, 'gap': gap},
        )
    report.add(
        {'spec': describe_spec(spec), 'ell': ell, 't': t_max, 'tolerance': tolerance},
        gaps[-1] < tolerance,
        {'alpha': target, 'final_gap': gaps[-1]},
    )
    report.measured_constants.update(alpha=target, gaps=gaps)
    return report


def check_alpha_eq_m(
    specs: Iterable[VarietySpec] | None = None,
    *,
    grid_bound: int | None = None,
    budget: int | None = None,
) -> CheckReport:
    """
    ``m(A) = alpha(A)`` exactly over a universe of specs, defaulting to three classes of multiplicity up to two.

    With ``grid_bound``, the grid maximum is also checked to satisfy
    ``grid <= m(A) <= alpha(A)``, with equality when the primitive optimal ray
    fits in the box.
    """
    report = CheckReport('alpha_eq_m')
    for spec in spec_universe(3, 2) if specs is None else specs:
        a = alpha(spec)
        m = m_invariant(spec)
        values: dict[str, object] = {'alpha': a.value, 'm': m.value, 'subset': list(a.subset), 'ray': str(m.profile)}
        ok = a.value == m.value
        if grid_bound is not None:
            grid = m_invariant_grid(spec, grid_bound, budget=budget)
            fits = worst_case_profile(spec, 1).max_exponent <= grid_bound
            values.update(grid=grid.value, ray_fits=fits)
            ok = ok and grid.value <= m.value <= a.value and (not fits or grid.value == m.value)
        report.add({'spec': describe_spec(spec)}, ok, values)
    report.measured_constants['specs'] = len(report.cells)
    return report


def check_closed_forms(max_count: int = 6) -> CheckReport:
    """
    ``alpha`` against ``2m / (1 + 3m)`` and ``2r / (1 + r)``, and the strict mixed inequality
    ``2r / (1 + r) > 2n / (1 + r + 3(n - r))`` for ``1 <= r < n``.
    """
    report = CheckReport('closed_forms')
    for count in range(1, max_count + 1):
        for cm in (False, True):
            value = alpha(VarietySpec.of([cm] * count)).value
            expected = closed_form_alpha(0, count) if cm else closed_form_alpha(count, 0)
            params = {'noncm': 0 if cm else count, 'cm': count if cm else 0}
            report.add(params, value == expected, {'alpha': value, 'expected': expected})
    for n in range(2, max_count + 1):
        for r in range(1, n):
            value = alpha(VarietySpec.of([True] * r + [False] * (n - r))).value
            cm_only = Rational(2 * r, 1 + r)
            everything = Rational(2 * n, 1 + r + 3 * (n - r))
            report.add(
                {'noncm': n - r, 'cm': r},
                value == cm_only == closed_form_alpha(n - r, r) and cm_only > everything,
                {'alpha': value, 'cm_subset': cm_only, 'full_set': everything},
            )
    return report
