"""
Exact arithmetic over ``Z/ell^N``: residues, 2x2 matrices and the unramified
quadratic ring used by the nonsplit Cartan model.

Residues are always stored as their least nonnegative representative, so that
equality of values is structural equality.
"""

from __future__ import annotations

import dataclasses
import itertools
import typing

from collections.abc import Iterable, Iterator

import sympy

from ._exceptions import ShapeError
from ._types import Point, Residue


__all__ = [
    'Modulus',
    'Mat2',
    'QuadElement',
    'QuadRing',
    'SubgroupShape',
    'build_quad_ring',
    'gl2_order',
    'iter_gl2',
    'iter_sl2',
    'mat2_apply',
    'mat2_det_invertible',
    'mat2_identity',
    'mat2_mul',
    'quad_unit_to_mat',
    'sl2_order',
    'subgroup_shape',
]


@dataclasses.dataclass(frozen=True)
class Modulus:
    """
    The prime power ``ell ** level``, working level of every group model.
    """

    ell: int
    level: int

    def __post_init__(self) -> None:
        if not sympy.isprime(self.ell):
            msg = f'ell must be prime, got {self.ell}'
            raise ValueError(msg)
        if self.level < 1:
            msg = f'level must be at least 1, got {self.level}'
            raise ValueError(msg)

    def __str__(self) -> str:
        return f'{self.ell}^{self.level}'

    @property
    def order(self) -> int:
        """The size ``ell ** level`` of the ambient ring."""
        return self.ell**self.level

    def reduce(self, value: int) -> Residue:
        return value % self.order

    def is_unit(self, value: int) -> bool:
        return value % self.ell != 0

    def valuation(self, value: int) -> int:
        """ell-adic valuation of a residue, capped at the level (so ``0`` has valuation ``level``)."""
        value = self.reduce(value)
        if value == 0:
            return self.level
        return int(sympy.multiplicity(self.ell, value))

    def inverse(self, value: int) -> Residue:
        if not self.is_unit(value):
            msg = f'{value} is not a unit modulo {self}'
            raise ValueError(msg)
        return pow(value, -1, self.order)

    def unit_count(self) -> int:
        return self.ell ** (self.level - 1) * (self.ell - 1)

    def principal_unit_count(self, exponent: int) -> int:
        """
        Size of ``1 + ell^k (Z/ell^N)``; exponent ``0`` stands for the whole unit group.
        """
        if not 0 <= exponent <= self.level:
            msg = f'exponent {exponent} outside [0, {self.level}]'
            raise ShapeError(msg)
        if exponent == 0:
            return self.unit_count()
        return self.ell ** (self.level - exponent)

    def units(self) -> Iterator[Residue]:
        return (x for x in range(self.order) if x % self.ell)

    def principal_units(self, exponent: int) -> Iterator[Residue]:
        if exponent == 0:
            return self.units()
        step = self.ell**exponent
        return (self.reduce(1 + step * j) for j in range(self.ell ** (self.level - exponent)))

    def in_principal_units(self, value: int, exponent: int) -> bool:
        if exponent == 0:
            return self.is_unit(value)
        return (value - 1) % self.ell**exponent == 0


@dataclasses.dataclass(frozen=True, order=True)
class SubgroupShape:
    """
    Exponent pair ``(lower, upper)`` of ``H = Z/ell^lower x Z/ell^upper`` in a standard basis.
    """

    lower: int
    upper: int

    def __post_init__(self) -> None:
        if not 0 <= self.lower <= self.upper:
            msg = f'shape needs 0 <= lower <= upper, got ({self.lower}, {self.upper})'
            raise ShapeError(msg)

    def __str__(self) -> str:
        return f'({self.lower},{self.upper})'

    @classmethod
    def parse(cls, text: str) -> SubgroupShape:
        lower, _, upper = text.partition(',')
        try:
            return cls(int(lower), int(upper))
        except ValueError:
            msg = f"cannot read a shape from '{text}', expected 'M,N'"
            raise ShapeError(msg) from None

    def check_level(self, mod: Modulus) -> None:
        if self.upper > mod.level:
            msg = f'shape {self} exceeds level {mod.level}'
            raise ShapeError(msg)

    def contains(self, other: SubgroupShape) -> bool:
        return self.lower >= other.lower and self.upper >= other.upper

    @property
    def log_size(self) -> int:
        return self.lower + self.upper


class Mat2(typing.NamedTuple):
    """A 2x2 matrix ``[[a, b], [c, d]]`` with entries reduced modulo ``ell^N``."""

    a: Residue
    b: Residue
    c: Residue
    d: Residue

    @classmethod
    def of(cls, a: int, b: int, c: int, d: int, mod: Modulus) -> Mat2:
        q = mod.order
        return cls(a % q, b % q, c % q, d % q)

    @classmethod
    def diagonal(cls, a: int, d: int, mod: Modulus) -> Mat2:
        return cls.of(a, 0, 0, d, mod)


def mat2_identity() -> Mat2:
    return Mat2(1, 0, 0, 1)


def mat2_mul(x: Mat2, y: Mat2, mod: Modulus) -> Mat2:
    q = mod.order
    return Mat2(
        (x.a * y.a + x.b * y.c) % q,
        (x.a * y.b + x.b * y.d) % q,
        (x.c * y.a + x.d * y.c) % q,
        (x.c * y.b + x.d * y.d) % q,
    )


def mat2_det_invertible(x: Mat2, mod: Modulus) -> tuple[Residue, bool]:
    det = (x.a * x.d - x.b * x.c) % mod.order
    return det, det % mod.ell != 0


def mat2_apply(x: Mat2, point: Point, mod: Modulus) -> Point:
    q = mod.order
    u, v = point
    return (x.a * u + x.b * v) % q, (x.c * u + x.d * v) % q


def gl2_order(mod: Modulus) -> int:
    ell, n = mod.ell, mod.level
    return ell ** (4 * n - 4) * (ell**2 - 1) * (ell**2 - ell)


def sl2_order(mod: Modulus) -> int:
    return gl2_order(mod) // mod.unit_count()


def iter_gl2(mod: Modulus) -> Iterator[Mat2]:
    q, ell = mod.order, mod.ell
    for a, b, c, d in itertools.product(range(q), repeat=4):
        if (a * d - b * c) % ell:
            yield Mat2(a, b, c, d)


def iter_sl2(mod: Modulus) -> Iterator[Mat2]:
    q = mod.order
    for a, b, c, d in itertools.product(range(q), repeat=4):
        if (a * d - b * c) % q == 1 % q:
            yield Mat2(a, b, c, d)


def subgroup_shape(points: Iterable[Point], mod: Modulus) -> SubgroupShape:
    """
    Isomorphism type of the subgroup of ``(Z/ell^N)^2`` generated by ``points``.

    The generator matrix is augmented with ``ell^N * I`` and read through its
    determinantal divisors: the gcd of the entries is ``ell^v1`` and the gcd of
    the 2x2 minors is ``ell^(v1 + v2)``, so the subgroup is
    ``Z/ell^(N - v2) x Z/ell^(N - v1)``.
    """
    q, n = mod.order, mod.level
    columns = [(u % q, v % q) for u, v in points] + [(q, 0), (0, q)]

    def val(x: int) -> int:
        return n * 2 if x == 0 else int(sympy.multiplicity(mod.ell, abs(x)))

    v1 = min(min(val(u), val(v)) for u, v in columns)
    minors = (x[0] * y[1] - x[1] * y[0] for x, y in itertools.combinations(columns, 2))
    v12 = min(val(m) for m in minors)
    return SubgroupShape(n - (v12 - v1), n - v1)


@dataclasses.dataclass(frozen=True)
class QuadRing:
    """
    ``W = (Z/ell^N)[T] / (T^2 - s T - t)`` with the polynomial irreducible modulo ``ell``.

    Elements are :class:`QuadElement` pairs ``x + y T`` written in the basis ``{1, T}``.
    """

    modulus: Modulus
    s: Residue
    t: Residue

    def __post_init__(self) -> None:
        if _has_root_mod_ell(self.s, self.t, self.modulus.ell):
            msg = f'T^2 - {self.s}T - {self.t} is reducible modulo {self.modulus.ell}'
            raise ValueError(msg)

    def __str__(self) -> str:
        return f'(Z/{self.modulus.order})[T]/(T^2 - {self.s}T - {self.t})'

    def one(self) -> QuadElement:
        return QuadElement(1, 0)

    def element(self, x: int, y: int) -> QuadElement:
        return QuadElement(self.modulus.reduce(x), self.modulus.reduce(y))

    def mul(self, u: QuadElement, w: QuadElement) -> QuadElement:
        # T^2 = s T + t
        q = self.modulus.order
        yy = u.y * w.y
        return QuadElement(
            (u.x * w.x + self.t * yy) % q,
            (u.x * w.y + u.y * w.x + self.s * yy) % q,
        )

    def norm(self, w: QuadElement) -> Residue:
        return (w.x * w.x + self.s * w.x * w.y - self.t * w.y * w.y) % self.modulus.order

    def trace(self, w: QuadElement) -> Residue:
        return (2 * w.x + self.s * w.y) % self.modulus.order

    def is_unit(self, w: QuadElement) -> bool:
        return self.norm(w) % self.modulus.ell != 0

    def units(self) -> Iterator[QuadElement]:
        q = self.modulus.order
        for x, y in itertools.product(range(q), repeat=2):
            w = QuadElement(x, y)
            if self.is_unit(w):
                yield w

    def unit_count(self) -> int:
        ell, n = self.modulus.ell, self.modulus.level
        return ell ** (2 * n - 2) * (ell**2 - 1)


class QuadElement(typing.NamedTuple):
    x: Residue
    y: Residue


def _has_root_mod_ell(s: int, t: int, ell: int) -> bool:
    return any((r * r - s * r - t) % ell == 0 for r in range(ell))


def _centered(value: int, ell: int) -> int:
    return value - ell if value > ell // 2 else value


def build_quad_ring(mod: Modulus) -> QuadRing:
    """
    Return the quadratic ring over ``Z/ell^N`` given by the lexicographically
    smallest ``(s, t)`` such that ``T^2 - s T - t`` has no root modulo ``ell``.

    The coefficients are lifted to ``Z/ell^N`` through their representatives in
    ``(-ell/2, ell/2]``, so ``ell = 3`` gives ``T^2 + 1`` at every level.
    """
    for s, t in itertools.product(range(mod.ell), repeat=2):
        if not _has_root_mod_ell(s, t, mod.ell):
            return QuadRing(mod, mod.reduce(_centered(s, mod.ell)), mod.reduce(_centered(t, mod.ell)))
    msg = f'no irreducible monic quadratic modulo {mod.ell}'  # pragma: no cover
    raise AssertionError(msg)  # pragma: no cover


def quad_unit_to_mat(w: QuadElement, ring: QuadRing) -> Mat2:
    """
    Matrix of multiplication by the unit ``w`` in the basis ``{1, T}``.

    Its determinant is the norm of ``w``.
    """
    if not ring.is_unit(w):
        msg = f'{tuple(w)} is not a unit of {ring}'
        raise ShapeError(msg)
    # w * 1 = x + yT ; w * T = yt + (x + ys)T
    return Mat2.of(w.x, ring.t * w.y, w.y, w.x + ring.s * w.y, ring.modulus)
