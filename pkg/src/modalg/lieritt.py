"""Infinitesimal coordinate transformations over nilpotent test algebras,
differential polynomials in the transformation coefficients, and zero sets.

The group studied here consists of n-tuples of truncated series congruent to
(w_1, ..., w_n) modulo nilpotent coefficients, multiplied by composition.
Zero sets of differential-polynomial ideals cut out subgroups; the shipped
solver parametrizes them exactly by layered linear algebra.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

from .exactalg import kernel_basis, solve_linear
from .series import TruncSeries, identity_tuple


# ----------------------------------------------------------------- algebra


class NilAlgebra:
    """L[e_1, ..., e_r] with every monomial of total degree >= order set to 0.

    Elements are dicts mapping exponent tuples (total degree < order) to
    nonzero base-ring coefficients.  The nilradical is spanned by the
    positive-degree monomials; unit_part is the degree-0 projection.
    """

    def __init__(self, base, gens: Sequence[str], order: int):
        if order < 1:
            raise ValueError("nilpotency order must be >= 1")
        self.base = base
        self.gens = tuple(gens)
        self.order = order

    @property
    def char(self) -> int:
        return self.base.char

    def monomials(self) -> list[tuple[int, ...]]:
        """All surviving exponent tuples, sorted by (degree, lex)."""
        r = len(self.gens)
        out = []
        for total in range(self.order):
            for exp in _compositions(total, r):
                out.append(exp)
        return out

    def element(self, terms: dict) -> dict:
        out = {}
        for exp, c in terms.items():
            exp = tuple(exp)
            if sum(exp) >= self.order or self.base.is_zero(c):
                continue
            if exp in out:
                s = self.base.add(out[exp], c)
                if self.base.is_zero(s):
                    del out[exp]
                else:
                    out[exp] = s
            else:
                out[exp] = c
        return out

    def zero(self):
        return {}

    def one(self):
        return {(0,) * len(self.gens): self.base.one()}

    def from_int(self, n: int):
        return self.scalar(self.base.from_int(n))

    def scalar(self, c):
        return self.element({(0,) * len(self.gens): c})

    def gen(self, name: str):
        e = [0] * len(self.gens)
        e[self.gens.index(name)] = 1
        return {tuple(e): self.base.one()}

    def add(self, a, b):
        out = dict(a)
        for exp, c in b.items():
            if exp in out:
                s = self.base.add(out[exp], c)
                if self.base.is_zero(s):
                    del out[exp]
                else:
                    out[exp] = s
            else:
                out[exp] = c
        return out

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def neg(self, a):
        return {exp: self.base.neg(c) for exp, c in a.items()}

    def mul(self, a, b):
        out: dict = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                if sum(e) >= self.order:
                    continue
                c = self.base.mul(c1, c2)
                if e in out:
                    s = self.base.add(out[e], c)
                    if self.base.is_zero(s):
                        del out[e]
                    else:
                        out[e] = s
                elif not self.base.is_zero(c):
                    out[e] = c
        return out

    def is_zero(self, a) -> bool:
        return not a

    def eq(self, a, b) -> bool:
        return self.is_zero(self.sub(a, b))

    def unit_part(self, a):
        """Image under the projection killing the nilradical."""
        return a.get((0,) * len(self.gens), self.base.zero())

    def nil_part(self, a):
        return {e: c for e, c in a.items() if sum(e) > 0}

    def is_nilpotent(self, a) -> bool:
        return self.base.is_zero(self.unit_part(a))

    def is_unit(self, a) -> bool:
        return self.base.is_unit(self.unit_part(a))

    def inv(self, a):
        u = self.unit_part(a)
        if not self.base.is_unit(u):
            raise ZeroDivisionError("non-unit in nilpotent algebra")
        uinv = self.scalar(self.base.inv(u))
        h = self.mul(uinv, self.nil_part(a))  # nilpotent
        out = self.one()
        p = self.one()
        for _ in range(self.order):
            p = self.neg(self.mul(p, h))
            if not p:
                break
            out = self.add(out, p)
        return self.mul(out, uinv)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def to_str(self, a) -> str:
        if not a:
            return "0"
        parts = []
        for exp in sorted(a, key=lambda e: (sum(e), tuple(-x for x in e))):
            c = a[exp]
            mono = "*".join(
                f"{g}^{e}" if e > 1 else g for g, e in zip(self.gens, exp) if e
            )
            cs = self.base.to_str(c)
            if mono and ("+" in cs or "-" in cs[1:] or " " in cs):
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

    def scalar_coordinates(self, elems: list) -> tuple[list, list[list]]:
        monos = self.monomials()
        base = self.base
        if hasattr(base, "scalar_coordinates"):
            labels: list = []
            rows: list[list] = [[] for _ in elems]
            for m in monos:
                comp = [e.get(m, base.zero()) for e in elems]
                sub_labels, sub_rows = base.scalar_coordinates(comp)
                labels.extend((m, lab) for lab in sub_labels)
                for j, r in enumerate(sub_rows):
                    rows[j].extend(r)
            return labels, rows
        zero = base.zero()
        return list(monos), [[e.get(m, zero) for m in monos] for e in elems]

    def __repr__(self):
        return f"NilAlgebra({self.base!r}, {self.gens}, order={self.order})"

    def __eq__(self, other):
        return (
            isinstance(other, NilAlgebra)
            and self.base == other.base
            and self.gens == other.gens
            and self.order == other.order
        )

    def __hash__(self):
        return hash(("NilAlgebra", self.base, self.gens, self.order))


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def multi_indices(n: int, max_total: int, min_total: int = 0) -> list[tuple[int, ...]]:
    """All n-dim multi-indices with min_total <= |k| <= max_total, sorted."""
    out = []
    for total in range(min_total, max_total + 1):
        out.extend(_compositions(total, n))
    return out


# ---------------------------------------------------- group of transforms


class InfTransform:
    """Tuple (phi_1, ..., phi_n) of series over a NilAlgebra with
    phi_i == w_i modulo nilpotent coefficients; a group under composition."""

    __slots__ = ("algebra", "comps")

    def __init__(self, algebra: NilAlgebra, comps: Sequence[TruncSeries], check: bool = True):
        self.algebra = algebra
        self.comps = tuple(comps)
        if check:
            self._validate()

    def _validate(self):
        A = self.algebra
        n = len(self.comps)
        if n == 0:
            raise ValueError("empty transformation")
        vars_ = self.comps[0].vars
        if len(vars_) != n:
            raise ValueError("component count must match variable count")
        for i, phi in enumerate(self.comps):
            if phi.ring != A:
                raise ValueError("component not over the declared algebra")
            for exp, c in phi.terms.items():
                is_wi = sum(exp) == 1 and exp[i] == 1
                dev = A.sub(c, A.one()) if is_wi else c
                if not A.is_zero(dev) and not A.is_nilpotent(dev):
                    raise ValueError("transformation is not congruent to the identity "
                                     "modulo nilpotents")

    @property
    def vars(self):
        return self.comps[0].vars

    @property
    def horizon(self):
        return self.comps[0].horizon

    @classmethod
    def identity(cls, algebra: NilAlgebra, variables: Sequence[str], horizon: int) -> "InfTransform":
        return cls(algebra, identity_tuple(algebra, variables, horizon), check=False)

    def _work_horizon(self) -> int:
        # composing truncated tuples with nilpotent constant terms is exact
        # at the target horizon once intermediates carry order-2 extra slack
        return self.horizon + max(self.algebra.order - 2, 0)

    def compose(self, other: "InfTransform") -> "InfTransform":
        """self . other, the transformation w -> self(other(w))."""
        if self.algebra != other.algebra or self.vars != other.vars or self.horizon != other.horizon:
            raise ValueError("transformation context mismatch")
        H = self._work_horizon()
        lifted_inner = [p.with_horizon(H) for p in other.comps]
        out = [
            p.with_horizon(H).compose(lifted_inner).truncate(self.horizon)
            for p in self.comps
        ]
        return InfTransform(self.algebra, out, check=False)

    def invert(self) -> "InfTransform":
        """Group inverse: fixed-point iteration psi <- w - dev(psi) climbing
        the nilpotent filtration one level per sweep."""
        A = self.algebra
        H = self._work_horizon()
        ident = identity_tuple(A, self.vars, H)
        dev = [p.with_horizon(H) - ident[i] for i, p in enumerate(self.comps)]
        psi = list(ident)
        for _ in range(A.order + 1):
            new_psi = [ident[i] - dev[i].compose(psi, strict=False) for i in range(len(psi))]
            if all(a == b for a, b in zip(new_psi, psi)):
                break
            psi = new_psi
        result = InfTransform(A, [p.truncate(self.horizon) for p in psi], check=False)
        comp = self.compose(result)
        if not comp.is_identity():
            raise ArithmeticError("inverse iteration did not converge")
        return result

    def is_identity(self) -> bool:
        ident = InfTransform.identity(self.algebra, self.vars, self.horizon)
        return self == ident

    def __eq__(self, other):
        if not isinstance(other, InfTransform):
            return NotImplemented
        return (
            self.algebra == other.algebra
            and all(a == b for a, b in zip(self.comps, other.comps))
        )

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.comps) + ")"

    def __repr__(self):
        return f"InfTransform{self}"


# ------------------------------------------------- differential polynomials

# A symbol (i, k) stands for the k-th divided derivative of the i-th unknown
# series; a DiffPoly term maps a sorted tuple of ((i, k), exponent) pairs to a
# coefficient series in w over the base ring.


class DiffPoly:
    """Polynomial in finitely many symbols Y_i^(k) with series coefficients.

    The derivation sends Y_i^(k) to C(k+l, k) Y_i^(k+l) and acts on the w's
    of the coefficients; evaluation substitutes the k-th divided derivative
    of a transformation component for Y_i^(k)."""

    __slots__ = ("nstreams", "coeff_ring", "wvars", "horizon", "terms")

    def __init__(self, nstreams: int, coeff_ring, wvars: Sequence[str], horizon: int, terms: dict):
        self.nstreams = nstreams
        self.coeff_ring = coeff_ring
        self.wvars = tuple(wvars)
        self.horizon = horizon
        self.terms = {}
        for key, c in terms.items():
            if c.is_zero():
                continue
            key = tuple(sorted(key))
            if key in self.terms:
                s = self.terms[key] + c
                if s.is_zero():
                    del self.terms[key]
                else:
                    self.terms[key] = s
            else:
                self.terms[key] = c

    # builders ---------------------------------------------------------
    @classmethod
    def coefficient(cls, nstreams: int, series: TruncSeries) -> "DiffPoly":
        return cls(nstreams, series.ring, series.vars, series.horizon, {(): series})

    @classmethod
    def symbol(cls, nstreams: int, coeff_ring, wvars, horizon: int, i: int, k: tuple[int, ...]) -> "DiffPoly":
        one = TruncSeries.one(coeff_ring, wvars, horizon)
        return cls(nstreams, coeff_ring, wvars, horizon, {(((i, tuple(k)), 1),): one})

    def _zero_series(self) -> TruncSeries:
        return TruncSeries.zero(self.coeff_ring, self.wvars, self.horizon)

    def _check(self, other: "DiffPoly"):
        if (self.nstreams, self.coeff_ring, self.wvars, self.horizon) != (
            other.nstreams,
            other.coeff_ring,
            other.wvars,
            other.horizon,
        ):
            raise ValueError("differential polynomial context mismatch")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            if key in out:
                s = out[key] + c
                if s.is_zero():
                    del out[key]
                else:
                    out[key] = s
            else:
                out[key] = c
        return DiffPoly(self.nstreams, self.coeff_ring, self.wvars, self.horizon, out)

    def __neg__(self):
        return DiffPoly(
            self.nstreams, self.coeff_ring, self.wvars, self.horizon,
            {k: -c for k, c in self.terms.items()},
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        out: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = _merge_keys(k1, k2)
                c = c1 * c2
                if key in out:
                    s = out[key] + c
                    if s.is_zero():
                        del out[key]
                        continue
                    out[key] = s
                elif not c.is_zero():
                    out[key] = c
        return DiffPoly(self.nstreams, self.coeff_ring, self.wvars, self.horizon, out)

    def scale_series(self, s: TruncSeries) -> "DiffPoly":
        return DiffPoly(
            self.nstreams, self.coeff_ring, self.wvars, self.horizon,
            {k: c * s for k, c in self.terms.items()},
        )

    def is_zero(self) -> bool:
        return not self.terms

    def symbols(self) -> set[tuple[int, tuple[int, ...]]]:
        return {sym for key in self.terms for sym, _ in key}

    def max_symbol_order(self) -> int:
        return max((sum(k) for _, k in self.symbols()), default=0)

    def y_degree(self) -> int:
        return max((sum(e for _, e in key) for key in self.terms), default=0)

    # derivation --------------------------------------------------------
    def hasse_deriv(self, l: tuple[int, ...]) -> "DiffPoly":
        """Divided derivative of order l, acting on coefficients and symbols
        through the splitting rule for products."""
        l = tuple(l)
        if all(a == 0 for a in l):
            return self
        zero = DiffPoly(self.nstreams, self.coeff_ring, self.wvars, self.horizon, {})
        out = zero
        for key, c in self.terms.items():
            factors = [("c", c)]
            for sym, e in key:
                factors.extend([("y", sym)] * e)
            out = out + _deriv_product(self, factors, l)
        return out

    def evaluate(self, phi: InfTransform, lift) -> TruncSeries:
        """Substitute the divided derivatives of phi for the symbols.

        lift: base-coefficient -> algebra element embedding for the
        coefficient series."""
        A = phi.algebra
        tgt_vars = phi.vars
        horizon = phi.horizon
        if tgt_vars != self.wvars:
            raise ValueError("variable mismatch in evaluation")
        deriv_cache: dict[tuple[int, tuple[int, ...]], TruncSeries] = {}

        def deriv(i: int, k: tuple[int, ...]) -> TruncSeries:
            if (i, k) not in deriv_cache:
                deriv_cache[(i, k)] = phi.comps[i].hasse_deriv(k)
            return deriv_cache[(i, k)]

        out = TruncSeries.zero(A, tgt_vars, horizon)
        for key, c in self.terms.items():
            t = c.map_coeffs(lift, A)
            for sym, e in key:
                i, k = sym
                if sum(k) > horizon:
                    raise ValueError("symbol order exceeds the horizon")
                t = t * deriv(i, k) ** e
            out = out + t
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms, key=_key_sort, reverse=True):
            c = self.terms[key]
            mono = "*".join(
                (f"Y{i + 1}" if self.nstreams > 1 else "Y")
                + (f"^({','.join(map(str, k))})" if any(k) else "")
                + (f"**{e}" if e > 1 else "")
                for (i, k), e in key
            )
            cs = str(c)
            if mono:
                if cs == "1":
                    parts.append(mono)
                elif cs == "-1":
                    parts.append(f"-{mono}")
                else:
                    if "+" in cs or "-" in cs[1:] or " " in cs:
                        cs = f"({cs})"
                    parts.append(f"{cs}*{mono}")
            else:
                parts.append(cs)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return f"DiffPoly({self})"


def _merge_keys(k1, k2):
    counts: dict = {}
    for sym, e in itertools.chain(k1, k2):
        counts[sym] = counts.get(sym, 0) + e
    return tuple(sorted(counts.items()))


def _key_sort(key):
    return (sum(e for _, e in key), tuple((i, k, e) for (i, k), e in key))


def _deriv_product(ctx: DiffPoly, factors: list, l: tuple[int, ...]) -> DiffPoly:
    """Derivative of a product of atomic factors by splitting l across them."""
    n = len(l)
    zero = DiffPoly(ctx.nstreams, ctx.coeff_ring, ctx.wvars, ctx.horizon, {})

    def atom_deriv(kind, payload, part: tuple[int, ...]) -> DiffPoly:
        if kind == "c":
            s = payload.hasse_deriv(part)
            if s.is_zero():
                return zero
            return DiffPoly.coefficient(ctx.nstreams, s)
        i, k = payload
        kk = tuple(a + b for a, b in zip(k, part))
        b = 1
        for a, bb in zip(kk, k):
            b *= math.comb(a, bb)
        coef = ctx.coeff_ring.from_int(b)
        if ctx.coeff_ring.is_zero(coef):
            return zero
        sym = DiffPoly.symbol(ctx.nstreams, ctx.coeff_ring, ctx.wvars, ctx.horizon, i, kk)
        return DiffPoly.coefficient(
            ctx.nstreams, TruncSeries.const(ctx.coeff_ring, ctx.wvars, ctx.horizon, coef)
        ) * sym

    out = zero
    for split in _splits(l, len(factors)):
        term = None
        dead = False
        for (kind, payload), part in zip(factors, split):
            d = atom_deriv(kind, payload, part)
            if d.is_zero():
                dead = True
                break
            term = d if term is None else term * d
        if not dead and term is not None:
            out = out + term
    return out


def _splits(l: tuple[int, ...], parts: int):
    """All ways to write l as an ordered sum of `parts` multi-indices."""
    if parts == 1:
        yield (l,)
        return
    n = len(l)
    for first in itertools.product(*(range(a + 1) for a in l)):
        rest = tuple(a - b for a, b in zip(l, first))
        for tail in _splits(rest, parts - 1):
            yield (first,) + tail


class LieRittIdeal:
    """Finitely many differential-polynomial generators plus optional tail
    schemes (i, k0) standing for the generators Y_i^(k) for all |k| >= k0."""

    def __init__(self, nstreams: int, coeff_ring, wvars, horizon: int,
                 generators: Sequence[DiffPoly], tails: Sequence[tuple[int, int]] = ()):
        self.nstreams = nstreams
        self.coeff_ring = coeff_ring
        self.wvars = tuple(wvars)
        self.horizon = horizon
        self.generators = list(generators)
        self.tails = tuple(tails)

    def materialized(self) -> list[DiffPoly]:
        gens = list(self.generators)
        for i, k0 in self.tails:
            for k in multi_indices(len(self.wvars), self.horizon, k0):
                gens.append(
                    DiffPoly.symbol(self.nstreams, self.coeff_ring, self.wvars, self.horizon, i, k)
                )
        return gens

    def __repr__(self):
        tail = f", tails={self.tails}" if self.tails else ""
        return f"LieRittIdeal({[str(g) for g in self.generators]}{tail})"


# ------------------------------------------------------------- zero sets


class SolutionFamily:
    """Parametrization of a zero set over a test algebra.

    components[i] is a series over NilAlgebra(base, params, order) whose
    parameter monomials encode the family; substituting nilpotent values for
    the parameters enumerates the actual points."""

    def __init__(self, algebra: NilAlgebra, variables, horizon: int,
                 params: list[str], components: list[TruncSeries],
                 empty: bool = False, constraints: list[str] | None = None):
        self.algebra = algebra
        self.vars = tuple(variables)
        self.horizon = horizon
        self.params = params
        self.components = components
        self.empty = empty
        self.constraints = constraints or []

    def transform(self) -> InfTransform:
        if self.empty:
            raise ValueError("empty solution family")
        return InfTransform(self.algebra, self.components)

    def instantiate(self, algebra: NilAlgebra, values: dict) -> InfTransform:
        """Substitute nilpotent algebra elements for the parameters.

        values maps parameter names to elements of `algebra` (each must lie
        in the nilradical); the base ring must agree."""
        if self.empty:
            raise ValueError("empty solution family")
        if algebra.base != self.algebra.base:
            raise ValueError("base ring mismatch")
        for name in self.params:
            v = values[name]
            if not algebra.is_nilpotent(v):
                raise ValueError(f"value for {name} is not nilpotent")

        def convert(c: dict):
            out = algebra.zero()
            for mono, coeff in c.items():
                t = algebra.scalar(coeff)
                for name, e in zip(self.algebra.gens, mono):
                    for _ in range(e):
                        t = algebra.mul(t, values[name])
                out = algebra.add(out, t)
            return out

        comps = [c.map_coeffs(convert, algebra) for c in self.components]
        return InfTransform(algebra, comps)

    def shape(self) -> str:
        if self.empty:
            return "<empty>"
        body = ", ".join(str(c) for c in self.components)
        if len(self.components) > 1:
            body = f"({body})"
        params = ", ".join(self.params) if self.params else "-"
        return f"{{ {body} : {params} in N(A) }}"

    def __repr__(self):
        return f"SolutionFamily({self.shape()})"


def solve_zero_set(ideal: LieRittIdeal, horizon: int | None = None,
                   param_order: int = 3) -> SolutionFamily:
    """Parametrize the transformations annihilating every generator.

    The unknown coefficient of w^k in component i ranges over the nilradical
    of the test algebra.  The system is linearized at the identity tuple and
    solved exactly; one symbolic nilpotent parameter is introduced per kernel
    direction.  For ideals of degree <= 1 in the Y-symbols the linear family
    is the complete answer over every test algebra.  Nonlinear generators
    leave residues of parameter degree >= 2, which are absorbed layer by
    layer with corrections solved against the same linear system; a residue
    no correction can absorb is reported as a parameter constraint cutting
    out the actual zero set.
    """
    if horizon is None:
        horizon = ideal.horizon
    base_ring = ideal.coeff_ring
    n = ideal.nstreams
    wvars = ideal.wvars
    gens = ideal.materialized()
    unknowns = [(i, k) for i in range(n) for k in multi_indices(len(wvars), horizon)]
    coords = [(gi, exp) for gi in range(len(gens)) for exp in multi_indices(len(wvars), horizon)]

    rows = _linear_rows(gens, base_ring, wvars, horizon, unknowns)
    matrix = [rows[c] for c in coords]

    # residue of the identity tuple: nothing nilpotent can cancel a nonzero
    # base-ring constant, so a nonzero residue means the zero set is empty
    probe_alg = NilAlgebra(base_ring, (), 1)
    ident = InfTransform.identity(probe_alg, wvars, horizon)
    for g in gens:
        r = g.evaluate(ident, probe_alg.scalar)
        if not r.is_zero():
            return SolutionFamily(probe_alg, wvars, horizon, [], [], empty=True)

    kernel = kernel_basis(matrix, base_ring, ncols=len(unknowns))
    params = [f"a{j}" for j in range(len(kernel))]
    algebra = NilAlgebra(base_ring, params, param_order)

    comps = []
    for i in range(n):
        terms: dict = {}
        e_i = [0] * len(wvars)
        e_i[i] = 1
        terms[tuple(e_i)] = algebra.one()
        for j, vec in enumerate(kernel):
            p = algebra.gen(params[j])
            for u, coefficient in zip(unknowns, vec):
                if u[0] != i or base_ring.is_zero(coefficient):
                    continue
                add = algebra.mul(p, algebra.scalar(coefficient))
                k = tuple(u[1])
                cur = algebra.add(terms.get(k, algebra.zero()), add)
                terms[k] = cur
        comps.append(TruncSeries(algebra, wvars, horizon, terms))

    family = SolutionFamily(algebra, wvars, horizon, params, comps)
    if all(g.y_degree() <= 1 for g in gens):
        return family
    return _correct_family(gens, family, base_ring, matrix, unknowns, coords)


def _correct_family(gens, family, base_ring, matrix, unknowns, coords):
    """Absorb parameter-degree >= 2 residues of Y-nonlinear generators."""
    algebra = family.algebra
    constraints: list[str] = []
    comps = list(family.components)
    for _degree in range(2, algebra.order):
        phi = InfTransform(algebra, comps, check=False)
        residues = [g.evaluate(phi, algebra.scalar) for g in gens]
        if all(r.is_zero() for r in residues):
            break
        monos = {m for r in residues for c in r.terms.values() for m in c}
        progressed = False
        for mono in sorted(monos, key=lambda e: (sum(e), e)):
            if sum(mono) < 2:
                continue
            rhs = [
                base_ring.neg(residues[gi].coeff(exp).get(mono, base_ring.zero()))
                for gi, exp in coords
            ]
            if all(base_ring.is_zero(b) for b in rhs):
                continue
            sol = solve_linear(matrix, rhs, base_ring)
            if sol is None:
                constraints.append(
                    "parameter monomial " + "*".join(
                        f"{g}^{e}" if e > 1 else g
                        for g, e in zip(algebra.gens, mono) if e
                    ) + ": residue not absorbable; the zero set satisfies an extra relation"
                )
                continue
            progressed = True
            for u, val in zip(unknowns, sol):
                if base_ring.is_zero(val):
                    continue
                i, k = u
                t = dict(comps[i].terms)
                t[tuple(k)] = algebra.add(t.get(tuple(k), algebra.zero()),
                                          algebra.element({mono: val}))
                comps[i] = TruncSeries(algebra, family.vars, family.horizon, t)
        if not progressed:
            break
    family.components = comps
    family.constraints = constraints
    return family


def _linear_rows(gens, base_ring, wvars, horizon, unknowns):
    """Linearization at the identity: rows indexed by (generator, w-exp)."""
    probe_alg = NilAlgebra(base_ring, ("_p",), 2)
    probe = probe_alg.gen("_p")
    ident = InfTransform.identity(probe_alg, wvars, horizon)
    unknown_pos = {u: j for j, u in enumerate(unknowns)}
    rows: dict[tuple, list] = {}
    for gi in range(len(gens)):
        for exp in multi_indices(len(wvars), horizon):
            rows[(gi, exp)] = [base_ring.zero()] * len(unknowns)
    for u in unknowns:
        comps = list(ident.comps)
        delta = TruncSeries(probe_alg, wvars, horizon, {tuple(u[1]): probe})
        comps[u[0]] = comps[u[0]] + delta
        perturbed = InfTransform(probe_alg, comps, check=False)
        for gi, g in enumerate(gens):
            val = g.evaluate(perturbed, probe_alg.scalar)
            for exp, c in val.terms.items():
                lin = c.get((1,), base_ring.zero())
                if not base_ring.is_zero(lin):
                    rows[(gi, exp)][unknown_pos[u]] = lin
    return rows


# ------------------------------------------------------- formal group law


def group_law_coeffs(n: int, horizon: int, max_l: int | None = None):
    """Composition law of the coefficient coordinates, as exact polynomials.

    Returns a dict mapping (i, l) to the polynomial f giving the w^l
    coefficient of psi_i(phi), where u_{j,k} are the coefficients of the
    inner tuple phi and v_{j,k} those of the outer tuple psi (full
    coefficients, both restricted to |k| <= horizon).  Polynomials live in a
    PolyRing over QQ with integer coefficients and no constant terms."""
    from .exactalg import QQ, PolyRing

    if max_l is None:
        max_l = horizon
    ks = multi_indices(n, horizon)
    uvars = [f"u{j + 1}_" + "_".join(map(str, k)) for j in range(n) for k in ks]
    vvars = [f"v{j + 1}_" + "_".join(map(str, k)) for j in range(n) for k in ks]
    ring = PolyRing(QQ, uvars + vvars)

    def u(j, k):
        return ring.var(f"u{j + 1}_" + "_".join(map(str, k)))

    def v(j, k):
        return ring.var(f"v{j + 1}_" + "_".join(map(str, k)))

    wvars = [f"w{i + 1}" for i in range(n)]
    phi = [
        TruncSeries(ring, wvars, horizon, {tuple(k): u(j, k) for k in ks})
        for j in range(n)
    ]
    out = {}
    for i in range(n):
        psi = TruncSeries(ring, wvars, horizon, {tuple(k): v(i, k) for k in ks})
        composed = psi.compose(phi, strict=False)
        for l in multi_indices(n, max_l):
            out[(i, tuple(l))] = composed.coeff(l)
    return ring, out
