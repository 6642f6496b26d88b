# SPDX-License-Identifier: MIT

from fractions import Fraction

import pytest

from torsion._simplex import maximize


def test_maximize_vertex():
    result = maximize([1, 1], inequalities=[([1, 2], 4), ([3, 1], 6)])

    assert result.status == 'optimal'
    assert result.value == Fraction(14, 5)
    assert result.solution == (Fraction(8, 5), Fraction(6, 5))


def test_maximize_equality():
    result = maximize([1, 0], equalities=[([1, 1], 1)])

    assert result.status == 'optimal'
    assert result.value == 1
    assert result.solution == (1, 0)


def test_maximize_redundant_equalities():
    result = maximize([0, 1], equalities=[([1, 1], 1), ([2, 2], 2)])

    assert result.status == 'optimal'
    assert result.value == 1


def test_maximize_negative_rhs():
    # x >= 2 written as -x <= -2
    result = maximize([-1, 0], inequalities=[([-1, 0], -2), ([1, 1], 5)])

    assert result.status == 'optimal'
    assert result.value == -2


@pytest.mark.parametrize(
    ('objective', 'inequalities', 'status'),
    [
        ([1, 0], [([1, 0], 1), ([-1, 0], -2)], 'infeasible'),
        ([1, 0], [([1, -1], 1)], 'unbounded'),
    ],
)
def test_maximize_degenerate(objective, inequalities, status):
    result = maximize(objective, inequalities=inequalities)

    assert result.status == status
    assert result.value is None


def test_maximize_exact_rationals():
    result = maximize([Fraction(1, 3), Fraction(1, 7)], inequalities=[([1, 1], 1)])

    assert result.value == Fraction(1, 3)
    assert isinstance(result.value, Fraction)
