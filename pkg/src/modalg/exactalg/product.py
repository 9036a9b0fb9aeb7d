"""Finite products of a field with componentwise arithmetic.

Elements are tuples of factor elements.  A product of fields is not a field:
an element is a unit iff every component is nonzero, and zero divisors are
exactly the tuples with some (but not all) zero components.
"""

from __future__ import annotations


class ProductField:
    """The ring F x F x ... x F (count copies of the factor field)."""

    def __init__(self, factor, count: int):
        if count < 1:
            raise ValueError("product needs at least one factor")
        self.factor = factor
        self.count = count

    @property
    def char(self) -> int:
        return self.factor.char

    def element(self, comps) -> tuple:
        comps = tuple(comps)
        if len(comps) != self.count:
            raise ValueError("wrong number of components")
        return comps

    def diagonal(self, c) -> tuple:
        return (c,) * self.count

    def zero(self):
        return self.diagonal(self.factor.zero())

    def one(self):
        return self.diagonal(self.factor.one())

    def from_int(self, n: int):
        return self.diagonal(self.factor.from_int(n))

    def add(self, a, b):
        return tuple(self.factor.add(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(self.factor.sub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        return tuple(self.factor.neg(x) for x in a)

    def mul(self, a, b):
        return tuple(self.factor.mul(x, y) for x, y in zip(a, b))

    def is_zero(self, a) -> bool:
        return all(self.factor.is_zero(x) for x in a)

    def is_unit(self, a) -> bool:
        return all(self.factor.is_unit(x) for x in a)

    def inv(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError("non-unit in product ring")
        return tuple(self.factor.inv(x) for x in a)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def eq(self, a, b) -> bool:
        return all(self.factor.eq(x, y) for x, y in zip(a, b))

    def to_str(self, a) -> str:
        return "(" + ", ".join(self.factor.to_str(x) for x in a) + ")"

    def scalar_coordinates(self, elems: list) -> tuple[list, list[list]]:
        """Componentwise scalar coordinates, concatenated over the factors."""
        labels: list = []
        cols: list[list] = [[] for _ in elems]
        for i in range(self.count):
            comp = [e[i] for e in elems]
            if hasattr(self.factor, "scalar_coordinates"):
                sub_labels, rows = self.factor.scalar_coordinates(comp)
            else:
                sub_labels, rows = [()], [[c] for c in comp]
            labels.extend((i, lab) for lab in sub_labels)
            for j, row in enumerate(rows):
                cols[j].extend(row)
        return labels, cols

    def __repr__(self):
        return f"ProductField({self.factor!r}, {self.count})"

    def __eq__(self, other):
        return isinstance(other, ProductField) and self.factor == other.factor and self.count == other.count

    def __hash__(self):
        return hash(("ProductField", self.factor, self.count))
