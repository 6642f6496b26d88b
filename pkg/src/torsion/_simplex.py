"""
Two-phase dense tableau simplex over exact rationals, with Bland's rule.

Only meant for the small programs built by :mod:`torsion.invariants`.
"""

from __future__ import annotations

import dataclasses
import typing

from collections.abc import Sequence

from ._types import Rational


LinearProgramStatus = typing.Literal['optimal', 'infeasible', 'unbounded']
Constraint = typing.Tuple[Sequence[Rational], Rational]


@dataclasses.dataclass(frozen=True)
class LinearProgramResult:
    status: LinearProgramStatus
    value: Rational | None = None
    solution: tuple[Rational, ...] = ()


class _Tableau:
    def __init__(self, rows: list[list[Rational]], rhs: list[Rational], basis: list[int]) -> None:
        self.rows = rows
        self.rhs = rhs
        self.basis = basis

    @property
    def width(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        piv = row[c]
        self.rows[r] = row = [v / piv for v in row]
        self.rhs[r] /= piv
        for k, other in enumerate(self.rows):
            f = other[c]
            if k != r and f:
                self.rows[k] = [v - f * p for v, p in zip(other, row)]
                self.rhs[k] -= f * self.rhs[r]
        self.basis[r] = c

    def value(self, cost: Sequence[Rational]) -> Rational:
        return sum((cost[b] * x for b, x in zip(self.basis, self.rhs)), Rational(0))

    def optimize(self, cost: Sequence[Rational], columns: int) -> LinearProgramStatus:
        """Maximize ``cost`` over the first ``columns`` columns, starting from the current feasible basis."""
        while True:
            entering = None
            for j in range(columns):
                if j in self.basis:
                    continue
                reduced = cost[j] - sum((cost[b] * row[j] for b, row in zip(self.basis, self.rows)), Rational(0))
                if reduced > 0:
                    entering = j
                    break
            if entering is None:
                return 'optimal'

            candidates = [
                (self.rhs[i] / row[entering], self.basis[i], i) for i, row in enumerate(self.rows) if row[entering] > 0
            ]
            if not candidates:
                return 'unbounded'
            _, _, leaving = min(candidates)
            self.pivot(leaving, entering)

    def drop_row(self, r: int) -> None:
        del self.rows[r]
        del self.rhs[r]
        del self.basis[r]


def maximize(
    objective: Sequence[Rational],
    *,
    equalities: Sequence[Constraint] = (),
    inequalities: Sequence[Constraint] = (),
) -> LinearProgramResult:
    """
    Maximize ``objective . x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub`` and ``x >= 0``.

    :param objective: Objective coefficients, one per variable
    :param equalities: ``(coefficients, rhs)`` pairs
    :param inequalities: ``(coefficients, rhs)`` pairs read as ``<=``
    """
    n = len(objective)
    slacks = len(inequalities)
    rows: list[list[Rational]] = []
    rhs: list[Rational] = []
    natural: list[int | None] = []

    for k, (coefficients, bound) in enumerate(inequalities):
        row = [Rational(v) for v in coefficients] + [Rational(int(j == k)) for j in range(slacks)]
        if bound < 0:
            rows.append([-v for v in row])
            rhs.append(-Rational(bound))
            natural.append(None)
        else:
            rows.append(row)
            rhs.append(Rational(bound))
            natural.append(n + k)
    for coefficients, bound in equalities:
        row = [Rational(v) for v in coefficients] + [Rational(0)] * slacks
        sign = -1 if bound < 0 else 1
        rows.append([sign * v for v in row])
        rhs.append(sign * Rational(bound))
        natural.append(None)

    # one artificial column per row without a natural basic variable
    width = n + slacks
    basis: list[int] = []
    for row, column in zip(rows, natural):
        row.extend(Rational(0) for _ in range(natural.count(None)))
        if column is None:
            column = width
            width += 1
            row[column] = Rational(1)
        basis.append(column)
    for row, column in zip(rows, basis):
        row[column] = Rational(1)

    tableau = _Tableau(rows, rhs, basis)
    real = n + slacks
    phase_one = [Rational(0)] * real + [Rational(-1)] * (width - real)
    tableau.optimize(phase_one, width)
    if tableau.value(phase_one) < 0:
        return LinearProgramResult('infeasible')

    r = 0
    while r < len(tableau.rows):
        if tableau.basis[r] >= real:
            column = next((j for j in range(real) if tableau.rows[r][j]), None)
            if column is None:
                tableau.drop_row(r)
                continue
            tableau.pivot(r, column)
        r += 1
    tableau.rows = [row[:real] for row in tableau.rows]

    cost = [Rational(v) for v in objective] + [Rational(0)] * slacks
    if tableau.optimize(cost, real) == 'unbounded':
        return LinearProgramResult('unbounded')

    solution = [Rational(0)] * n
    for b, x in zip(tableau.basis, tableau.rhs):
        if b < n:
            solution[b] = x
    return LinearProgramResult('optimal', tableau.value(cost), tuple(solution))
