# SPDX-License-Identifier: MIT

import collections

from fractions import Fraction

import hypothesis
import hypothesis.strategies as st
import pytest

from torsion import (
    FactorKind,
    InfeasibleComputationError,
    Modulus,
    ProductModel,
    ReductionNotApplicableError,
    ShapeError,
    SubgroupShape,
    product_degree,
)
from torsion.galois import (
    congruence_target,
    coset_exponent,
    enumerate_degree_oracle,
    enumerate_multiplier_fibers,
    factor_group_order,
    fixer_multiplier_fibers,
    fixer_order,
    fixes,
    intersection_degree,
    is_parallelogram,
    iter_factor_group,
    iter_fixer,
    log_torsion_size,
    multiplier,
    multiplier_kernel,
    parallelogram_ratio,
    stabilize_subgroup,
    standard_generators,
)
from torsion.modular import gl2_order, iter_gl2, subgroup_shape


NONCM, CMSPLIT, CMNONSPLIT = FactorKind.NONCM, FactorKind.CMSPLIT, FactorKind.CMNONSPLIT
SMALL = [(2, 1), (2, 2), (3, 1), (3, 2)]


def shapes(level):
    return [SubgroupShape(m, n) for n in range(level + 1) for m in range(n + 1)]


@pytest.mark.parametrize(
    ('text', 'kind'),
    [
        ('noncm', NONCM),
        ('CM-Split', CMSPLIT),
        ('cm_nonsplit', CMNONSPLIT),
    ],
)
def test_factor_kind_parse(text, kind):
    assert FactorKind.parse(text) is kind


def test_factor_kind_parse_unknown():
    with pytest.raises(ValueError, match='expected one of: noncm, cmsplit, cmnonsplit'):
        FactorKind.parse('ordinary')


def test_product_model_needs_factors():
    with pytest.raises(ShapeError):
        ProductModel((), Modulus(3, 1))


def test_product_model_labels():
    model = ProductModel.of([NONCM, CMSPLIT], Modulus(3, 1))

    assert [factor.label for factor in model.factors] == ['E1', 'E2']
    assert model.select([1]).kinds == (CMSPLIT,)


@pytest.mark.parametrize(
    ('kind', 'ell', 'level', 'order'),
    [
        (NONCM, 2, 1, 6),
        (CMSPLIT, 3, 1, 4),
        (CMNONSPLIT, 2, 1, 3),
        (NONCM, 3, 2, 3888),
        (CMSPLIT, 3, 2, 36),
        (CMNONSPLIT, 3, 2, 72),
    ],
)
def test_factor_group_order(kind, ell, level, order):
    assert factor_group_order(kind, Modulus(ell, level)) == order


@pytest.mark.parametrize('kind', list(FactorKind))
@pytest.mark.parametrize(('ell', 'level'), SMALL)
def test_factor_group_order_matches_enumeration(kind, ell, level):
    mod = Modulus(ell, level)

    assert factor_group_order(kind, mod) == sum(1 for _ in iter_factor_group(kind, mod))


def test_iter_factor_group_over_budget():
    with pytest.raises(InfeasibleComputationError) as excinfo:
        next(iter_factor_group(NONCM, Modulus(3, 3), budget=10))

    assert excinfo.value.required == factor_group_order(NONCM, Modulus(3, 3))
    assert excinfo.value.budget == 10
    assert 'over the budget of 10' in str(excinfo.value)


@pytest.mark.parametrize(
    ('kind', 'ell', 'level', 'shape', 'order'),
    [
        (NONCM, 2, 1, SubgroupShape(1, 1), 1),
        (CMSPLIT, 3, 2, SubgroupShape(1, 2), 3),
        (NONCM, 3, 2, SubgroupShape(0, 0), 3888),
        (CMNONSPLIT, 3, 2, SubgroupShape(0, 0), 72),
    ],
)
def test_fixer_order(kind, ell, level, shape, order):
    assert fixer_order(kind, Modulus(ell, level), shape) == order


@pytest.mark.parametrize('kind', list(FactorKind))
@pytest.mark.parametrize(('ell', 'level'), SMALL)
def test_fixer_order_matches_enumeration(kind, ell, level):
    mod = Modulus(ell, level)

    for shape in shapes(level):
        assert fixer_order(kind, mod, shape) == sum(1 for _ in iter_fixer(kind, mod, shape)), shape


@pytest.mark.parametrize(('ell', 'level'), SMALL)
def test_noncm_fixer_matches_filtered_group(ell, level):
    mod = Modulus(ell, level)

    for shape in shapes(level):
        generators = standard_generators(shape, mod)
        expected = {g for g in iter_gl2(mod) if fixes(g, generators, mod)}
        assert set(iter_fixer(NONCM, mod, shape)) == expected, shape


@pytest.mark.parametrize(('ell', 'level'), SMALL)
def test_noncm_fibers_match_element_count(ell, level):
    mod = Modulus(ell, level)

    for shape in shapes(level):
        counted = collections.Counter(multiplier(g, mod) for g in iter_fixer(NONCM, mod, shape))
        assert dict(enumerate_multiplier_fibers(NONCM, mod, shape).per_class_counts) == dict(counted), shape


def test_noncm_fibers_beyond_group_budget():
    mod = Modulus(5, 3)

    # GL2(Z/125) has 187500000 elements, only the entry products are counted
    fibers = enumerate_multiplier_fibers(NONCM, mod, SubgroupShape(0, 0), budget=10**5)

    assert fibers.total == gl2_order(mod) == 187500000
    assert fibers.uniform
    assert fibers.coset_exponent == 0

    with pytest.raises(InfeasibleComputationError) as excinfo:
        enumerate_multiplier_fibers(NONCM, mod, SubgroupShape(0, 0), budget=1000)
    assert excinfo.value.required == 2 * 125**2


@pytest.mark.parametrize(
    ('kind', 'shape', 'exponent'),
    [
        (NONCM, SubgroupShape(1, 2), 1),
        (NONCM, SubgroupShape(0, 0), 0),
        (CMSPLIT, SubgroupShape(1, 3), 1),
        (CMNONSPLIT, SubgroupShape(1, 2), 2),
    ],
)
def test_coset_exponent(kind, shape, exponent):
    assert coset_exponent(kind, shape) == exponent


@pytest.mark.parametrize(('ell', 'level'), [(3, 1), (3, 2)])
def test_noncm_fibers_are_uniform_cosets(ell, level):
    mod = Modulus(ell, level)

    for shape in shapes(level):
        fibers = enumerate_multiplier_fibers(NONCM, mod, shape)
        assert fibers.uniform
        assert fibers.coset_exponent == shape.lower
        assert fibers.total == fixer_multiplier_fibers(NONCM, mod, shape).total


def test_cmnonsplit_fibers():
    mod = Modulus(3, 2)

    fibers = enumerate_multiplier_fibers(CMNONSPLIT, mod, SubgroupShape(1, 2))

    assert fibers.coset_exponent == 2
    assert dict(fibers.per_class_counts) == {1: 1}


def test_ell_two_reports_smallest_exponent():
    mod = Modulus(2, 1)

    fibers = enumerate_multiplier_fibers(NONCM, mod, SubgroupShape(0, 0))

    assert fibers.coset_exponent == 0
    assert fibers.matches_coset(mod, 1)


def test_formula_fibers_mapping():
    mod = Modulus(3, 2)

    fibers = fixer_multiplier_fibers(NONCM, mod, SubgroupShape(1, 1))

    assert sorted(fibers.per_class_counts) == [1, 4, 7]
    assert fibers.per_class_counts[4] * 3 == fibers.total
    with pytest.raises(KeyError):
        fibers.per_class_counts[2]


@pytest.mark.parametrize(
    ('kind', 'shape', 'expected'),
    [
        (CMSPLIT, SubgroupShape(1, 3), SubgroupShape(1, 3)),
        (CMNONSPLIT, SubgroupShape(0, 2), SubgroupShape(2, 2)),
        (CMNONSPLIT, SubgroupShape(2, 2), SubgroupShape(2, 2)),
    ],
)
def test_stabilize_subgroup(kind, shape, expected):
    assert stabilize_subgroup(kind, shape) == expected


def test_stabilize_subgroup_noncm():
    with pytest.raises(ReductionNotApplicableError):
        stabilize_subgroup(NONCM, SubgroupShape(1, 2))


@pytest.mark.parametrize('kind', list(FactorKind))
def test_multiplier_kernel_size(kind):
    mod = Modulus(3, 1)

    kernel = list(multiplier_kernel(kind, mod))

    assert len(kernel) == factor_group_order(kind, mod) // mod.unit_count()


@pytest.mark.parametrize('kind', list(FactorKind))
@pytest.mark.parametrize('exponent', [0, 1, 2])
def test_congruence_target_size(kind, exponent):
    mod = Modulus(3, 2)

    target = list(congruence_target(kind, mod, exponent))

    # the multiplier is onto the units in every model
    assert len(target) == factor_group_order(kind, mod) // mod.unit_count() * mod.principal_unit_count(exponent)


def test_product_degree_single_factor():
    report = product_degree(ProductModel.of([NONCM], Modulus(2, 1)), [SubgroupShape(1, 1)])

    assert report.degree == 6
    assert report.per_factor_degrees == (6,)


def test_product_degree_two_factors_over_f2():
    mod = Modulus(2, 1)

    report = product_degree(ProductModel.of([NONCM, NONCM], mod), [SubgroupShape(1, 1)] * 2)

    assert report.degree == 36
    assert report.glued_order == 36
    assert report.fixer_order == 1


def test_product_degree_report_fields():
    report = product_degree(ProductModel.of([NONCM, NONCM], Modulus(3, 1)), [SubgroupShape(1, 1)] * 2)

    assert report.degree == 1152
    assert report.per_factor_degrees == (48, 48)
    assert report.cyclotomic_exponent == 1
    assert report.ell_valuation == 2
    assert report.prime_to_ell_part == 128
    assert report.log_ell_degree == 2


@pytest.mark.parametrize('kinds', [[NONCM], [CMSPLIT, CMNONSPLIT], [NONCM, CMSPLIT, CMNONSPLIT]])
def test_product_degree_trivial_subgroup(kinds):
    mod = Modulus(3, 2)

    report = product_degree(ProductModel.of(kinds, mod), [SubgroupShape(0, 0)] * len(kinds))

    assert report.degree == 1
    assert report.cyclotomic_exponent == 0


def test_product_degree_misaligned():
    model = ProductModel.of([NONCM, NONCM], Modulus(3, 1))

    with pytest.raises(ShapeError, match='got 1 shapes for 2 factors'):
        product_degree(model, [SubgroupShape(1, 1)])
    with pytest.raises(ShapeError, match='exceeds level'):
        product_degree(model, [SubgroupShape(1, 1), SubgroupShape(0, 2)])


@pytest.mark.parametrize(('ell', 'level'), [(2, 1), (2, 2), (3, 1)])
@pytest.mark.parametrize('kinds', [[NONCM], [CMSPLIT], [CMNONSPLIT], [NONCM, CMSPLIT], [CMNONSPLIT, NONCM]])
def test_product_degree_matches_oracle(ell, level, kinds):
    mod = Modulus(ell, level)
    model = ProductModel.of(kinds, mod)

    for first in shapes(level):
        assignment = [first, *[SubgroupShape(level, level)] * (len(kinds) - 1)]
        generators = [standard_generators(s, mod) for s in assignment]
        assert product_degree(model, assignment).degree == enumerate_degree_oracle(model, generators), assignment


def test_oracle_examples():
    mod = Modulus(2, 1)
    full = standard_generators(SubgroupShape(1, 1), mod)

    assert enumerate_degree_oracle(ProductModel.of([NONCM], mod), [full]) == factor_group_order(NONCM, mod)
    assert enumerate_degree_oracle(ProductModel.of([NONCM], mod), [[]]) == 1

    mod = Modulus(3, 1)
    full = standard_generators(SubgroupShape(1, 1), mod)
    assert enumerate_degree_oracle(ProductModel.of([CMSPLIT], mod), [full]) == 4


def test_oracle_over_budget():
    model = ProductModel.of([NONCM, NONCM], Modulus(3, 1))

    with pytest.raises(InfeasibleComputationError):
        enumerate_degree_oracle(model, [[], []], budget=100)


def test_oracle_misaligned():
    with pytest.raises(ShapeError):
        enumerate_degree_oracle(ProductModel.of([NONCM], Modulus(2, 1)), [[], []])


def test_oracle_non_standard_points():
    mod = Modulus(3, 1)
    model = ProductModel.of([NONCM], mod)

    # GL2 acts transitively on nonzero points, so any nonzero point behaves like e1
    assert enumerate_degree_oracle(model, [[(1, 1)]]) == enumerate_degree_oracle(model, [[(1, 0)]]) == 8


@pytest.mark.parametrize(
    ('shapes_', 'multiplicities', 'expected'),
    [
        ([SubgroupShape(1, 2)], [1], 3),
        ([SubgroupShape(1, 1), SubgroupShape(0, 3)], [2, 1], 7),
        ([SubgroupShape(0, 0), SubgroupShape(0, 0)], [1, 3], 0),
    ],
)
def test_log_torsion_size(shapes_, multiplicities, expected):
    assert log_torsion_size(shapes_, multiplicities) == expected


def test_is_parallelogram():
    assert is_parallelogram(36, 6, 6)
    assert is_parallelogram(1152, 48, 48, bottom=2)
    assert not is_parallelogram(18, 6, 6)


def test_intersection_degree():
    model = ProductModel.of([NONCM, NONCM], Modulus(3, 1))

    assert intersection_degree(model, [SubgroupShape(1, 1)] * 2) == 2
    assert intersection_degree(model, [SubgroupShape(0, 1)] * 2) == 1


def test_intersection_degree_needs_two_factors():
    with pytest.raises(ShapeError):
        intersection_degree(ProductModel.of([NONCM], Modulus(3, 1)), [SubgroupShape(1, 1)])


def test_parallelogram_ratio():
    model = ProductModel.of([NONCM, NONCM], Modulus(3, 1))

    assert parallelogram_ratio(model, [SubgroupShape(1, 1)] * 2) == Fraction(3, 2)
    assert parallelogram_ratio(model, [SubgroupShape(0, 1)] * 2) == 1


@hypothesis.given(
    ell=st.sampled_from([2, 3, 5]),
    level=st.integers(1, 4),
    data=st.data(),
)
def test_standard_generators_have_their_shape(ell, level, data):
    mod = Modulus(ell, level)
    upper = data.draw(st.integers(0, level))
    shape = SubgroupShape(data.draw(st.integers(0, upper)), upper)

    assert subgroup_shape(standard_generators(shape, mod), mod) == shape


@st.composite
def shape_pairs(draw, level):
    upper = draw(st.integers(0, level))
    small = SubgroupShape(draw(st.integers(0, upper)), upper)
    big_upper = draw(st.integers(upper, level))
    big = SubgroupShape(draw(st.integers(small.lower, big_upper)), big_upper)
    return small, big


@hypothesis.settings(deadline=None)
@hypothesis.given(
    ell=st.sampled_from([2, 3, 5]),
    level=st.integers(1, 8),
    kinds=st.lists(st.sampled_from(list(FactorKind)), min_size=1, max_size=3),
    data=st.data(),
)
def test_degree_grows_with_the_shape(ell, level, kinds, data):
    model = ProductModel.of(kinds, Modulus(ell, level))
    pairs = [data.draw(shape_pairs(level)) for _ in kinds]

    small = product_degree(model, [s for s, _ in pairs])
    big = product_degree(model, [b for _, b in pairs])

    assert small.degree <= big.degree
