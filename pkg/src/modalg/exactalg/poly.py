"""Sparse multivariate polynomials with exact coefficients.

A polynomial is a dict mapping exponent tuples (one nonnegative int per
variable) to nonzero coefficients of the ring's scalar field:

    y^2 - 2  over QQ, vars ("y",)   ->   {(2,): Fraction(1), (0,): Fraction(-2)}

Terms are kept canonical: no zero coefficients, every exponent tuple has
length == number of variables.  Iteration and printing order is graded
lexicographic (total degree first), descending, which makes all output
deterministic.

A PolyRing may declare *inverse pairs* of variables: (i, j) means
vars[i] * vars[j] = 1.  The relation is reduced eagerly on every monomial
(min of the two exponents is cancelled), which models Laurent-type rings
such as K[x, x^-1] without a separate representation.
"""

from __future__ import annotations

from typing import Iterable

from .fields import QQ, scalar_field


def grlex_key(exp: tuple[int, ...]):
    """Sort key for graded lexicographic order (ascending)."""
    return (sum(exp), exp)


class PolyRing:
    """Context for MPoly values: scalar field, named variables, inverse pairs."""

    def __init__(self, field, variables: Iterable[str], inverse_pairs: Iterable[tuple[int, int]] = ()):
        self.field = field
        self.vars = tuple(variables)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate variable names")
        self.inverse_pairs = tuple(tuple(p) for p in inverse_pairs)
        for i, j in self.inverse_pairs:
            if not (0 <= i < len(self.vars) and 0 <= j < len(self.vars)) or i == j:
                raise ValueError(f"bad inverse pair ({i}, {j})")

    @property
    def char(self) -> int:
        return self.field.char

    def nvars(self) -> int:
        return len(self.vars)

    def _reduce_exp(self, exp: tuple[int, ...]) -> tuple[int, ...]:
        if not self.inverse_pairs:
            return exp
        e = list(exp)
        for i, j in self.inverse_pairs:
            m = min(e[i], e[j])
            if m:
                e[i] -= m
                e[j] -= m
        return tuple(e)

    def poly(self, terms: dict) -> "MPoly":
        """Build a polynomial from raw terms, canonicalizing."""
        out: dict = {}
        f = self.field
        for exp, c in terms.items():
            if f.is_zero(c):
                continue
            exp = self._reduce_exp(tuple(exp))
            if exp in out:
                s = f.add(out[exp], c)
                if f.is_zero(s):
                    del out[exp]
                else:
                    out[exp] = s
            else:
                out[exp] = c
        return MPoly(self, out)

    def zero(self) -> "MPoly":
        return MPoly(self, {})

    def one(self) -> "MPoly":
        return MPoly(self, {(0,) * self.nvars(): self.field.one()})

    def const(self, c) -> "MPoly":
        return self.poly({(0,) * self.nvars(): c})

    def from_int(self, n: int) -> "MPoly":
        return self.const(self.field.from_int(n))

    def var(self, name: str) -> "MPoly":
        i = self.vars.index(name)
        exp = [0] * self.nvars()
        exp[i] = 1
        return MPoly(self, {tuple(exp): self.field.one()})

    def gens(self) -> list["MPoly"]:
        return [self.var(v) for v in self.vars]

    # ring protocol (elements are MPoly) -------------------------------
    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def is_zero(self, a) -> bool:
        return not a.terms

    def eq(self, a, b) -> bool:
        return a == b

    def is_unit(self, a) -> bool:
        return a.unit_inverse_or_none() is not None

    def inv(self, a):
        r = a.unit_inverse_or_none()
        if r is None:
            raise ZeroDivisionError(f"{a} is not a unit in {self}")
        return r

    def to_str(self, a) -> str:
        return str(a)

    def scalar_coordinates(self, elems: list) -> tuple[list, list[list]]:
        """Monomial coordinates over the scalar field, on a common basis."""
        monomials = sorted({exp for p in elems for exp in p.terms})
        zero = self.field.zero()
        rows = [[p.terms.get(m, zero) for m in monomials] for p in elems]
        return monomials, rows

    def __repr__(self):
        inv = f", inverse_pairs={self.inverse_pairs}" if self.inverse_pairs else ""
        return f"PolyRing({self.field!r}, {self.vars}{inv})"

    def __eq__(self, other):
        return (
            isinstance(other, PolyRing)
            and self.field == other.field
            and self.vars == other.vars
            and self.inverse_pairs == other.inverse_pairs
        )

    def __hash__(self):
        return hash((self.field, self.vars, self.inverse_pairs))


class MPoly:
    """A canonical sparse polynomial; arithmetic requires equal rings."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms

    # -- basic queries --------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(all(e == 0 for e in exp) for exp in self.terms)

    def const_coeff(self):
        return self.terms.get((0,) * self.ring.nvars(), self.ring.field.zero())

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=0)

    def leading(self) -> tuple[tuple[int, ...], object]:
        """Leading (exponent, coefficient) under graded lex order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        exp = max(self.terms, key=grlex_key)
        return exp, self.terms[exp]

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def key(self):
        """Canonical hashable snapshot (for caches and sorting)."""
        return tuple((exp, self.ring.field.to_str(c)) for exp, c in self.sorted_terms())

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "MPoly"):
        if self.ring != other.ring:
            raise ValueError("polynomial ring mismatch")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        f = self.ring.field
        for exp, c in other.terms.items():
            if exp in out:
                s = f.add(out[exp], c)
                if f.is_zero(s):
                    del out[exp]
                else:
                    out[exp] = s
            else:
                out[exp] = c
        return MPoly(self.ring, out)

    def __neg__(self):
        f = self.ring.field
        return MPoly(self.ring, {exp: f.neg(c) for exp, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        f = self.ring.field
        out: dict = {}
        reduce_exp = self.ring._reduce_exp
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = reduce_exp(tuple(a + b for a, b in zip(e1, e2)))
                c = f.mul(c1, c2)
                if e in out:
                    s = f.add(out[e], c)
                    if f.is_zero(s):
                        del out[e]
                    else:
                        out[e] = s
                elif not f.is_zero(c):
                    out[e] = c
        return MPoly(self.ring, out)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        r = self.ring.one()
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def scale(self, c) -> "MPoly":
        f = self.ring.field
        if f.is_zero(c):
            return self.ring.zero()
        return MPoly(self.ring, {e: f.mul(cc, c) for e, cc in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, MPoly) or self.ring != other.ring:
            return NotImplemented
        if self.terms.keys() != other.terms.keys():
            return False
        f = self.ring.field
        return all(f.eq(c, other.terms[e]) for e, c in self.terms.items())

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def unit_inverse_or_none(self):
        """Inverse when this is a unit: a nonzero constant, or a unit monomial
        in a ring with inverse pairs."""
        ring = self.ring
        f = ring.field
        if len(self.terms) != 1:
            return None
        (exp, c), = self.terms.items()
        if not f.is_unit(c):
            return None
        if all(e == 0 for e in exp):
            return ring.const(f.inv(c))
        if not ring.inverse_pairs:
            return None
        inv_of = {}
        for i, j in ring.inverse_pairs:
            inv_of[i] = j
            inv_of[j] = i
        e = [0] * ring.nvars()
        for i, v in enumerate(exp):
            if v == 0:
                continue
            if i not in inv_of:
                return None
            e[inv_of[i]] = v
        return MPoly(ring, {tuple(e): f.inv(c)})

    def exact_div(self, d: "MPoly") -> "MPoly":
        """Exact polynomial division; raises ValueError when not divisible.

        Only for rings without inverse pairs (divide units out instead)."""
        self._check(d)
        if self.ring.inverse_pairs:
            raise ValueError("exact_div is not defined on rings with inverse pairs")
        if d.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        f = self.ring.field
        r = self
        q: dict = {}
        dexp, dc = d.leading()
        while not r.is_zero():
            rexp, rc = r.leading()
            qexp = tuple(a - b for a, b in zip(rexp, dexp))
            if any(e < 0 for e in qexp):
                raise ValueError("non-exact polynomial division")
            qc = f.div(rc, dc)
            q[qexp] = f.add(q.get(qexp, f.zero()), qc)
            r = r - MPoly(self.ring, {qexp: qc}) * d
        return self.ring.poly(q)

    def partial(self, i: int) -> "MPoly":
        """Formal partial derivative in variable i (ordinary, not divided)."""
        f = self.ring.field
        out: dict = {}
        for exp, c in self.terms.items():
            if exp[i] == 0:
                continue
            e = list(exp)
            n = e[i]
            e[i] -= 1
            out[tuple(e)] = f.mul(c, f.from_int(n))
        return self.ring.poly(out)

    def subs(self, images: dict[str, "MPoly"]) -> "MPoly":
        """Substitute ring elements for variables (same ring)."""
        ring = self.ring
        gens = {v: ring.var(v) for v in ring.vars}
        gens.update(images)
        out = ring.zero()
        for exp, c in self.sorted_terms():
            t = ring.const(c)
            for i, e in enumerate(exp):
                if e:
                    t = t * gens[ring.vars[i]] ** e
            out = out + t
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        f = self.ring.field
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(
                f"{self.ring.vars[i]}^{e}" if e > 1 else self.ring.vars[i]
                for i, e in enumerate(exp)
                if e
            )
            cs = f.to_str(c)
            if mono:
                if cs == "1":
                    s = mono
                elif cs == "-1":
                    s = f"-{mono}"
                else:
                    s = f"{cs}*{mono}"
            else:
                s = cs
            parts.append(s)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return f"MPoly({self})"


def _coeffs_in_var(p: MPoly, i: int) -> dict[int, MPoly]:
    """View p as univariate in variable i with MPoly coefficients."""
    out: dict[int, dict] = {}
    for exp, c in p.terms.items():
        e = list(exp)
        d = e[i]
        e[i] = 0
        out.setdefault(d, {})[tuple(e)] = c
    return {d: MPoly(p.ring, t) for d, t in out.items()}


def _from_coeffs(ring: PolyRing, i: int, coeffs: dict[int, MPoly]) -> MPoly:
    terms: dict = {}
    for d, c in coeffs.items():
        for exp, cc in c.terms.items():
            e = list(exp)
            e[i] += d
            terms[tuple(e)] = cc
    return MPoly(ring, terms)


def _pseudo_rem(a: MPoly, b: MPoly, i: int) -> MPoly:
    """Pseudo-remainder of a by b, both viewed as univariate in variable i."""
    ring = a.ring
    ca = _coeffs_in_var(a, i)
    cb = _coeffs_in_var(b, i)
    db = max(cb)
    lb = cb[db]
    r = dict(ca)
    dr = max(r, default=-1)
    while r and dr >= db:
        lr = r[dr]
        # lb * r  -  lr * x^(dr-db) * b
        new: dict[int, MPoly] = {}
        for d, c in r.items():
            new[d] = c * lb
        for d, c in cb.items():
            t = c * lr
            k = d + dr - db
            new[k] = new.get(k, ring.zero()) - t
        r = {d: c for d, c in new.items() if not c.is_zero()}
        dr = max(r, default=-1)
    return _from_coeffs(ring, i, r)


def poly_gcd(a: MPoly, b: MPoly) -> MPoly:
    """GCD of two polynomials, normalized so the leading coefficient under
    graded lex order is 1.  Primitive pseudo-remainder sequence, recursing on
    the coefficient polynomials; exact over QQ and GF(p)."""
    if a.ring != b.ring:
        raise ValueError("polynomial ring mismatch")
    if a.ring.inverse_pairs:
        raise ValueError("gcd is not defined on rings with inverse pairs")
    g = _gcd_rec(a, b)
    if g.is_zero():
        return g
    _, lc = g.leading()
    return g.scale(g.ring.field.inv(lc))


def _content_and_primitive(p: MPoly, i: int) -> tuple[MPoly, MPoly]:
    coeffs = _coeffs_in_var(p, i)
    content = None
    for d in sorted(coeffs):
        content = coeffs[d] if content is None else _gcd_rec(content, coeffs[d])
    prim = {d: c.exact_div(content) for d, c in coeffs.items()}
    return content, _from_coeffs(p.ring, i, prim)


def _gcd_rec(a: MPoly, b: MPoly) -> MPoly:
    ring = a.ring
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    i = next(
        (k for k in range(ring.nvars()) if a.degree_in(k) > 0 or b.degree_in(k) > 0),
        None,
    )
    if i is None:
        return ring.one()
    if a.degree_in(i) < b.degree_in(i):
        a, b = b, a
    ca, pa = _content_and_primitive(a, i)
    cb, pb = _content_and_primitive(b, i)
    cont = _gcd_rec(ca, cb)
    while True:
        r = _pseudo_rem(pa, pb, i)
        if r.is_zero():
            break
        if r.degree_in(i) == 0:
            pb = ring.one()
            break
        _, r = _content_and_primitive(r, i)
        pa, pb = pb, r
    return cont * pb
