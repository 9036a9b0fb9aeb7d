"""Fraction fields of polynomial rings (rational function fields).

A Frac is a normalized pair num/den of MPoly over the same pure polynomial
ring (no inverse pairs):

  * num and den have no common polynomial factor (divided out by poly_gcd);
  * the leading coefficient of den under graded lex order is 1.

With both rules applied, two fractions are equal as field elements exactly
when their stored representations coincide, so equality is a dict check.
"""

from __future__ import annotations

from typing import Iterable

from .poly import MPoly, PolyRing, poly_gcd


class FracField:
    """Field of fractions of field[vars]; elements are Frac."""

    def __init__(self, field, variables: Iterable[str]):
        self.scalars = field
        self.poly_ring = PolyRing(field, variables)
        self.vars = self.poly_ring.vars

    @property
    def char(self) -> int:
        return self.scalars.char

    def frac(self, num: MPoly, den: MPoly) -> "Frac":
        return Frac(self, num, den)

    def from_poly(self, p: MPoly) -> "Frac":
        return Frac(self, p, self.poly_ring.one())

    def var(self, name: str) -> "Frac":
        return self.from_poly(self.poly_ring.var(name))

    def gens(self) -> list["Frac"]:
        return [self.var(v) for v in self.vars]

    def zero(self) -> "Frac":
        return self.from_poly(self.poly_ring.zero())

    def one(self) -> "Frac":
        return self.from_poly(self.poly_ring.one())

    def const(self, c) -> "Frac":
        return self.from_poly(self.poly_ring.const(c))

    def from_int(self, n: int) -> "Frac":
        return self.const(self.scalars.from_int(n))

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        return a / b

    def inv(self, a):
        return a.inverse()

    def is_zero(self, a) -> bool:
        return a.num.is_zero()

    def is_unit(self, a) -> bool:
        return not a.num.is_zero()

    def eq(self, a, b) -> bool:
        return a == b

    def to_str(self, a) -> str:
        return str(a)

    def sort_key(self, a):
        return (str(a),)

    def scalar_coordinates(self, elems: list) -> tuple[list, list[list]]:
        """Expand field elements into coordinates over the scalar field.

        Returns (labels, rows): a common finite monomial basis after clearing
        denominators, and one coordinate row per element.  A scalar-linear
        combination of elems vanishes iff the combination of rows does."""
        common = self.poly_ring.one()
        for e in elems:
            g = poly_gcd(common, e.den)
            common = common * e.den.exact_div(g)
        nums = [e.num * common.exact_div(e.den) for e in elems]
        monomials = sorted({exp for p in nums for exp in p.terms})
        zero = self.scalars.zero()
        rows = [[p.terms.get(m, zero) for m in monomials] for p in nums]
        return monomials, rows

    def __repr__(self):
        return f"FracField({self.scalars!r}, {self.vars})"

    def __eq__(self, other):
        return isinstance(other, FracField) and self.scalars == other.scalars and self.vars == other.vars

    def __hash__(self):
        return hash(("FracField", self.scalars, self.vars))


class Frac:
    """Normalized fraction of polynomials; arithmetic requires equal fields."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field: FracField, num: MPoly, den: MPoly):
        if den.is_zero():
            raise ZeroDivisionError("fraction with zero denominator")
        self.field = field
        if num.is_zero():
            self.num = field.poly_ring.zero()
            self.den = field.poly_ring.one()
            return
        g = poly_gcd(num, den)
        if not (g.is_const() and field.scalars.eq(g.const_coeff(), field.scalars.one())):
            num = num.exact_div(g)
            den = den.exact_div(g)
        _, lc = den.leading()
        if not field.scalars.eq(lc, field.scalars.one()):
            c = field.scalars.inv(lc)
            num = num.scale(c)
            den = den.scale(c)
        self.num = num
        self.den = den

    def _check(self, other: "Frac"):
        if self.field != other.field:
            raise ValueError("fraction field mismatch")

    def __add__(self, other):
        self._check(other)
        return Frac(self.field, self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other):
        self._check(other)
        return Frac(self.field, self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self):
        return Frac(self.field, -self.num, self.den)

    def __mul__(self, other):
        self._check(other)
        return Frac(self.field, self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        self._check(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero fraction")
        return Frac(self.field, self.num * other.den, self.den * other.num)

    def inverse(self) -> "Frac":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero fraction")
        return Frac(self.field, self.den, self.num)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        r = self.field.one()
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.is_const()

    def __eq__(self, other):
        if not isinstance(other, Frac) or self.field != other.field:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def key(self):
        return (self.num.key(), self.den.key())

    def __str__(self):
        if self.den.is_const():
            if self.num.is_const() or len(self.num.terms) == 1:
                return str(self.num)
            return f"({self.num})"
        n = str(self.num) if len(self.num.terms) == 1 else f"({self.num})"
        d = str(self.den) if len(self.den.terms) == 1 else f"({self.den})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"Frac({self})"
