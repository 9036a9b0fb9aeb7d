"""Truncated multivariate formal power series over an exact coefficient ring.

A TruncSeries keeps every monomial of total degree <= horizon (optionally
also capped per variable) and drops the rest.  Coefficients live in any ring
following the exactalg protocol (QQ, GF(p), FracField, PolyRing, NilAlgebra,
ProductField), so the same series code serves power series over a function
field as well as infinitesimal transformations over a nilpotent test algebra.

Exactness contract: addition and multiplication of two series agree with the
untruncated result in every degree <= horizon.  Composition f(phi) is the
polynomial substitution of the stored terms of f; it agrees with untruncated
composition in every degree <= horizon whenever the constant terms of phi are
zero.  With merely nilpotent constant terms the agreement additionally needs
f's dropped tail to contribute nothing below the nilpotency order; callers
that rely on this (group composition over nilpotent algebras) must inflate
the working horizon accordingly.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .exactalg import Matrix


def _ring_is_nilpotent(ring, c) -> bool:
    probe = getattr(ring, "is_nilpotent", None)
    if probe is not None:
        return probe(c)
    return ring.is_zero(c)


class TruncSeries:
    """Series sum_e c_e * w^e with |e| <= horizon, canonical sparse terms."""

    __slots__ = ("ring", "vars", "horizon", "caps", "terms")

    def __init__(self, ring, variables: Sequence[str], horizon: int, terms: dict | None = None,
                 caps: Sequence[int] | None = None):
        self.ring = ring
        self.vars = tuple(variables)
        self.horizon = horizon
        self.caps = tuple(caps) if caps is not None else None
        self.terms: dict = {}
        if terms:
            for exp, c in terms.items():
                exp = tuple(exp)
                if self._admits(exp) and not ring.is_zero(c):
                    self.terms[exp] = c

    def _admits(self, exp: tuple[int, ...]) -> bool:
        if sum(exp) > self.horizon:
            return False
        if self.caps is not None and any(e > m for e, m in zip(exp, self.caps)):
            return False
        return True

    # ------------------------------------------------------------ builders
    @classmethod
    def zero(cls, ring, variables, horizon, caps=None) -> "TruncSeries":
        return cls(ring, variables, horizon, {}, caps)

    @classmethod
    def const(cls, ring, variables, horizon, c, caps=None) -> "TruncSeries":
        n = len(tuple(variables))
        return cls(ring, variables, horizon, {(0,) * n: c}, caps)

    @classmethod
    def one(cls, ring, variables, horizon, caps=None) -> "TruncSeries":
        return cls.const(ring, variables, horizon, ring.one(), caps)

    @classmethod
    def variable(cls, ring, variables, horizon, name: str, caps=None) -> "TruncSeries":
        variables = tuple(variables)
        exp = [0] * len(variables)
        exp[variables.index(name)] = 1
        return cls(ring, variables, horizon, {tuple(exp): ring.one()}, caps)

    def _make(self, terms: dict) -> "TruncSeries":
        return TruncSeries(self.ring, self.vars, self.horizon, terms, self.caps)

    def _check(self, other: "TruncSeries"):
        if self.ring != other.ring or self.vars != other.vars or self.horizon != other.horizon \
                or self.caps != other.caps:
            raise ValueError("series context mismatch")

    # ------------------------------------------------------------- queries
    def coeff(self, exp: Iterable[int]):
        return self.terms.get(tuple(exp), self.ring.zero())

    def constant_term(self):
        return self.coeff((0,) * len(self.vars))

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        """Least total degree of a nonzero term (horizon + 1 for zero)."""
        return min((sum(e) for e in self.terms), default=self.horizon + 1)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]))

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        self._check(other)
        if self.terms.keys() != other.terms.keys():
            return False
        return all(self.ring.eq(c, other.terms[e]) for e, c in self.terms.items())

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    # ---------------------------------------------------------- arithmetic
    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        R = self.ring
        out = dict(self.terms)
        for e, c in other.terms.items():
            if e in out:
                s = R.add(out[e], c)
                if R.is_zero(s):
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
        return self._make(out)

    def __neg__(self) -> "TruncSeries":
        R = self.ring
        return self._make({e: R.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        R = self.ring
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if not self._admits(e):
                    continue
                c = R.mul(c1, c2)
                if e in out:
                    s = R.add(out[e], c)
                    if R.is_zero(s):
                        del out[e]
                    else:
                        out[e] = s
                elif not R.is_zero(c):
                    out[e] = c
        return self._make(out)

    def __pow__(self, n: int) -> "TruncSeries":
        if n < 0:
            raise ValueError("negative power; use recip")
        r = TruncSeries.one(self.ring, self.vars, self.horizon, self.caps)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def scale(self, c) -> "TruncSeries":
        R = self.ring
        if R.is_zero(c):
            return self._make({})
        return self._make({e: R.mul(cc, c) for e, cc in self.terms.items()})

    # -------------------------------------------------------- derivations
    def hasse_deriv(self, k: Iterable[int]) -> "TruncSeries":
        """Divided-power derivative: w^e -> C(e, k) w^(e-k), componentwise.

        These satisfy the iteration rule deriv(i) o deriv(j) =
        C(i+j, i) deriv(i+j) in every characteristic."""
        k = tuple(k)
        R = self.ring
        out: dict = {}
        for e, c in self.terms.items():
            if any(a < b for a, b in zip(e, k)):
                continue
            b = 1
            for a, bb in zip(e, k):
                b *= math.comb(a, bb)
            coef = R.mul(c, R.from_int(b))
            if not R.is_zero(coef):
                out[tuple(a - bb for a, bb in zip(e, k))] = coef
        return self._make(out)

    # ------------------------------------------------- composition, recip
    def compose(self, phis: Sequence["TruncSeries"], strict: bool = True) -> "TruncSeries":
        """Substitute phis[i] for the i-th variable.

        strict requires every constant term of phis to be zero or nilpotent
        in the coefficient ring (the condition under which truncated
        composition is meaningful); pass strict=False for plain polynomial
        substitution of the stored terms."""
        if len(phis) != len(self.vars):
            raise ValueError("wrong number of series to substitute")
        if not phis:
            return self
        tgt = phis[0]
        for p in phis[1:]:
            tgt._check(p)
        if strict:
            for p in phis:
                c0 = p.constant_term()
                if not _ring_is_nilpotent(p.ring, c0):
                    raise ValueError("substitution needs zero or nilpotent constant term")
        R = tgt.ring
        out = TruncSeries.zero(R, tgt.vars, tgt.horizon, tgt.caps)
        pow_cache: dict[tuple[int, int], TruncSeries] = {}

        def power(i: int, n: int) -> TruncSeries:
            key = (i, n)
            if key not in pow_cache:
                pow_cache[key] = phis[i] ** n
            return pow_cache[key]

        for e, c in self.sorted_terms():
            t = TruncSeries.const(R, tgt.vars, tgt.horizon, c, tgt.caps)
            for i, n in enumerate(e):
                if n:
                    t = t * power(i, n)
            out = out + t
        return out

    def recip(self) -> "TruncSeries":
        """Multiplicative inverse; needs a unit constant term."""
        c0 = self.constant_term()
        R = self.ring
        if not R.is_unit(c0):
            raise ValueError("reciprocal needs a unit constant term")
        inv0 = R.inv(c0)
        one = TruncSeries.one(R, self.vars, self.horizon, self.caps)
        g = one - self.scale(inv0)
        # g has zero constant term up to nilpotents, so the geometric sum
        # terminates within horizon + nilpotency order steps
        acc = one
        p = one
        for _ in range(self.horizon + _nil_order(R) + 1):
            p = p * g
            if p.is_zero():
                break
            acc = acc + p
        if not p.is_zero():
            raise ArithmeticError("reciprocal did not converge")
        return acc.scale(inv0)

    # ------------------------------------------------------ reshaping maps
    def truncate(self, horizon: int) -> "TruncSeries":
        return TruncSeries(self.ring, self.vars, horizon, self.terms, self.caps)

    def with_horizon(self, horizon: int) -> "TruncSeries":
        """Reinterpret the stored terms at a different horizon (exact for
        polynomial data)."""
        return TruncSeries(self.ring, self.vars, horizon, self.terms, self.caps)

    def map_coeffs(self, fn, ring=None) -> "TruncSeries":
        return TruncSeries(ring or self.ring, self.vars, self.horizon,
                           {e: fn(c) for e, c in self.terms.items()}, self.caps)

    def embed(self, variables: Sequence[str], horizon: int | None = None) -> "TruncSeries":
        """View this series inside a larger variable tuple (by name)."""
        variables = tuple(variables)
        idx = [variables.index(v) for v in self.vars]
        n = len(variables)
        out: dict = {}
        for e, c in self.terms.items():
            ee = [0] * n
            for i, a in zip(idx, e):
                ee[i] = a
            out[tuple(ee)] = c
        return TruncSeries(self.ring, variables, self.horizon if horizon is None else horizon, out)

    def split_coefficients(self, keep: Sequence[str]) -> dict[tuple[int, ...], "TruncSeries"]:
        """Collect terms by the exponents of the dropped variables: view the
        series in vars as a family of series in `keep`, keyed by the
        complementary exponent."""
        keep = tuple(keep)
        keep_idx = [self.vars.index(v) for v in keep]
        drop_idx = [i for i in range(len(self.vars)) if self.vars[i] not in keep]
        fam: dict[tuple[int, ...], dict] = {}
        for e, c in self.terms.items():
            ke = tuple(e[i] for i in keep_idx)
            de = tuple(e[i] for i in drop_idx)
            fam.setdefault(de, {})[ke] = c
        return {
            de: TruncSeries(self.ring, keep, self.horizon, t) for de, t in fam.items()
        }

    def __str__(self):
        if not self.terms:
            return "0"
        R = self.ring
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"{self.vars[i]}^{a}" if a > 1 else self.vars[i] for i, a in enumerate(e) if a
            )
            cs = R.to_str(c)
            wrap = ("+" in cs or ("-" in cs[1:]) or " " in cs) and mono
            if wrap:
                cs = f"({cs})"
            if mono:
                s = mono if cs == "1" else (f"-{mono}" if cs == "-1" else f"{cs}*{mono}")
            else:
                s = cs
            parts.append(s)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return f"TruncSeries({self})"


def series_mul(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    return f * g


def series_compose(f: TruncSeries, phis: Sequence[TruncSeries]) -> TruncSeries:
    return f.compose(phis)


def series_recip(f: TruncSeries) -> TruncSeries:
    return f.recip()


def identity_tuple(ring, variables, horizon, caps=None) -> tuple[TruncSeries, ...]:
    return tuple(TruncSeries.variable(ring, variables, horizon, v, caps) for v in variables)


def formal_inverse(phis: Sequence[TruncSeries], max_extra_sweeps: int = 4) -> tuple[TruncSeries, ...]:
    """Compositional inverse of a tuple with zero (or nilpotent) constant
    terms and invertible Jacobian of linear parts.

    Solves degree by degree: with J the Jacobian, the update
    g <- g - J^{-1} (phi(g) - w) fixes one filtration layer per sweep; the
    result is verified two-sidedly and an ArithmeticError is raised when the
    iteration fails to close (singular data slipping past the Jacobian test).
    """
    if not phis:
        return ()
    base = phis[0]
    n = len(base.vars)
    if len(phis) != n:
        raise ValueError("need as many series as variables")
    R = base.ring
    for p in phis:
        base._check(p)
        if not _ring_is_nilpotent(R, p.constant_term()):
            raise ValueError("formal inverse needs zero or nilpotent constant terms")
    unit_exps = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        unit_exps.append(tuple(e))
    jac = Matrix(R, [[phis[i].coeff(unit_exps[j]) for j in range(n)] for i in range(n)])
    jinv = jac.inverse()  # raises ValueError when singular

    ident = identity_tuple(R, base.vars, base.horizon, base.caps)
    g = list(ident)
    sweeps = base.horizon + max_extra_sweeps + _nil_order(R)
    for _ in range(sweeps):
        resid = [phis[i].compose(g, strict=False) - ident[i] for i in range(n)]
        if all(r.is_zero() for r in resid):
            break
        g = [
            g[i] - _sum_series([resid[j].scale(jinv.entry(i, j)) for j in range(n)])
            for i in range(n)
        ]
    resid = [phis[i].compose(g, strict=False) - ident[i] for i in range(n)]
    back = [gg.compose(list(phis), strict=False) - ident[i] for i, gg in enumerate(g)]
    if any(not r.is_zero() for r in resid) or any(not b.is_zero() for b in back):
        raise ArithmeticError("formal inverse iteration did not converge")
    return tuple(g)


def _sum_series(items: list[TruncSeries]) -> TruncSeries:
    out = items[0]
    for s in items[1:]:
        out = out + s
    return out


def _nil_order(ring) -> int:
    return getattr(ring, "order", 0) or 0


def truncated_exp(s: TruncSeries) -> TruncSeries:
    """exp of a series with zero constant term, characteristic 0 only."""
    R = s.ring
    if getattr(R, "char", 0) != 0:
        raise ValueError("exp needs characteristic 0")
    if not R.is_zero(s.constant_term()):
        raise ValueError("exp needs zero constant term")
    out = TruncSeries.one(R, s.vars, s.horizon, s.caps)
    p = TruncSeries.one(R, s.vars, s.horizon, s.caps)
    for k in range(1, s.horizon + 1):
        p = p * s
        if p.is_zero():
            break
        out = out + p.scale(R.inv(R.from_int(math.factorial(k))))
    return out
