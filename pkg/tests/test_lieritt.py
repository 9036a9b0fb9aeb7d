"""Infinitesimal transformation groups, differential polynomials and zero
sets: group axioms, the three worked zero-set families, and the composition
law polynomials checked against direct composition."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from modalg.exactalg import QQ, FracField
from modalg.lieritt import (
    DiffPoly,
    InfTransform,
    LieRittIdeal,
    NilAlgebra,
    group_law_coeffs,
    multi_indices,
    solve_zero_set,
)
from modalg.series import TruncSeries


def series(alg, horizon, terms, var="w"):
    return TruncSeries(alg, (var,), horizon, terms)


# -------------------------------------------------------------- nilalgebra


def test_nilalgebra_arithmetic():
    A = NilAlgebra(QQ, ("a", "b"), 3)
    a, b = A.gen("a"), A.gen("b")
    assert A.mul(a, b) == {(1, 1): Fraction(1)}
    assert A.mul(A.mul(a, b), a) == {}  # degree 3 vanishes
    u = A.add(A.one(), a)
    assert A.mul(u, A.inv(u)) == A.one()
    assert A.is_nilpotent(a) and not A.is_nilpotent(u)
    assert A.unit_part(A.add(u, b)) == Fraction(1)


# ------------------------------------------------------------- composition


def test_compose_additive_translations():
    # two first-order translations compose to the sum of the shifts
    A = NilAlgebra(QQ, ("a", "b"), 2)
    a, b = A.gen("a"), A.gen("b")
    w = TruncSeries.variable(A, ("w",), 4, "w")
    pa = InfTransform(A, [TruncSeries.const(A, ("w",), 4, a) + w])
    pb = InfTransform(A, [TruncSeries.const(A, ("w",), 4, b) + w])
    got = pa.compose(pb)
    assert got.comps[0] == TruncSeries.const(A, ("w",), 4, A.add(a, b)) + w


def test_compose_identity_right():
    A = NilAlgebra(QQ, ("a",), 3)
    a = A.gen("a")
    w = TruncSeries.variable(A, ("w",), 4, "w")
    phi = InfTransform(A, [TruncSeries.const(A, ("w",), 4, a) + w + w.scale(a)])
    ident = InfTransform.identity(A, ("w",), 4)
    assert phi.compose(ident) == phi
    assert ident.compose(phi) == phi


def test_compose_scaled_translations_product_formula():
    # the conjugated multiplicative family composes by
    # y(a+b+ab) + (1+a+b+ab) w
    L = FracField(QQ, ["y"])
    y = L.var("y")
    A = NilAlgebra(L, ("a1", "b1"), 3)
    a1, b1 = A.gen("a1"), A.gen("b1")
    w = TruncSeries.variable(A, ("w",), 4, "w")

    def member(t):
        return InfTransform(
            A,
            [TruncSeries.const(A, ("w",), 4, A.mul(A.scalar(y), t)) + w + w.scale(t)],
        )

    got = member(a1).compose(member(b1))
    s = A.add(A.add(a1, b1), A.mul(a1, b1))
    expected = InfTransform(
        A, [TruncSeries.const(A, ("w",), 4, A.mul(A.scalar(y), s)) + w + w.scale(s)]
    )
    assert got == expected


def test_invert_examples():
    A2 = NilAlgebra(QQ, ("a",), 2)
    a = A2.gen("a")
    w = TruncSeries.variable(A2, ("w",), 4, "w")
    shift = InfTransform(A2, [TruncSeries.const(A2, ("w",), 4, a) + w])
    inv = shift.invert()
    assert inv.comps[0] == TruncSeries.const(A2, ("w",), 4, A2.neg(a)) + w
    assert shift.compose(inv).is_identity() and inv.compose(shift).is_identity()

    ident = InfTransform.identity(A2, ("w",), 4)
    assert ident.invert() == ident

    scale = InfTransform(A2, [w + w.scale(a)])  # (1+a) w with a^2 = 0
    assert scale.invert().comps[0] == w - w.scale(a)


def rand_transform(rng, A, nvars, horizon):
    vars_ = tuple(f"w{i+1}" for i in range(nvars))
    nil_monos = [m for m in A.monomials() if sum(m) > 0]
    comps = []
    for i in range(nvars):
        terms = {}
        for e in multi_indices(nvars, horizon):
            if rng.random() < 0.4:
                terms[e] = A.element(
                    {m: Fraction(rng.randint(-3, 3)) for m in nil_monos if rng.random() < 0.6}
                )
        unit = [0] * nvars
        unit[i] = 1
        terms[tuple(unit)] = A.add(terms.get(tuple(unit), A.zero()), A.one())
        comps.append(TruncSeries(A, vars_, horizon, terms))
    return InfTransform(A, comps)


def test_group_axioms_random():
    rng = random.Random(2024)
    for nvars in (1, 2):
        for order in (2, 3):
            A = NilAlgebra(QQ, ("e1", "e2"), order)
            ident = InfTransform.identity(A, tuple(f"w{i+1}" for i in range(nvars)), 4)
            for _ in range(12):
                f = rand_transform(rng, A, nvars, 4)
                g = rand_transform(rng, A, nvars, 4)
                h = rand_transform(rng, A, nvars, 4)
                assert f.compose(g).compose(h) == f.compose(g.compose(h))
                assert f.compose(ident) == f and ident.compose(f) == f
                fi = f.invert()
                assert f.compose(fi) == ident and fi.compose(f) == ident


def test_validation_rejects_non_congruent():
    A = NilAlgebra(QQ, ("a",), 2)
    w = TruncSeries.variable(A, ("w",), 3, "w")
    bad = w + w  # leading coefficient 2 is not congruent to 1
    with pytest.raises(ValueError):
        InfTransform(A, [bad])


# -------------------------------------------------- differential polynomials


def ideal_additive(horizon):
    # Y^(1) - 1 together with the tail Y^(k) for k >= 2
    one = TruncSeries.one(QQ, ("w",), horizon)
    F = DiffPoly.symbol(1, QQ, ("w",), horizon, 0, (1,)) - DiffPoly.coefficient(1, one)
    return LieRittIdeal(1, QQ, ("w",), horizon, [F], tails=[(0, 2)])


def ideal_multiplicative(horizon):
    # w Y^(1) - Y with tail Y^(k) for k >= 2
    w = TruncSeries.variable(QQ, ("w",), horizon, "w")
    F = DiffPoly.symbol(1, QQ, ("w",), horizon, 0, (1,)).scale_series(w) - DiffPoly.symbol(
        1, QQ, ("w",), horizon, 0, (0,)
    )
    return LieRittIdeal(1, QQ, ("w",), horizon, [F], tails=[(0, 2)])


def ideal_conjugated(L, horizon):
    # (y+w) Y^(1) - Y - y with tail Y^(k) for k >= 2
    y = L.var("y")
    yw = TruncSeries(L, ("w",), horizon, {(0,): y, (1,): L.one()})
    F = (
        DiffPoly.symbol(1, L, ("w",), horizon, 0, (1,)).scale_series(yw)
        - DiffPoly.symbol(1, L, ("w",), horizon, 0, (0,))
        - DiffPoly.coefficient(1, TruncSeries.const(L, ("w",), horizon, y))
    )
    return LieRittIdeal(1, L, ("w",), horizon, [F], tails=[(0, 2)])


def test_diffpoly_eval_examples():
    A = NilAlgebra(QQ, ("a",), 2)
    a = A.gen("a")
    w = TruncSeries.variable(A, ("w",), 4, "w")

    F2 = DiffPoly.symbol(1, QQ, ("w",), 4, 0, (2,))
    phi = InfTransform(A, [w + (w * w).scale(a)])
    assert F2.evaluate(phi, A.scalar) == TruncSeries.const(A, ("w",), 4, a)

    ideal = ideal_additive(4)
    shift = InfTransform(A, [TruncSeries.const(A, ("w",), 4, a) + w])
    F = ideal.generators[0]
    assert F.evaluate(shift, A.scalar).is_zero()

    Fm = ideal_multiplicative(4).generators[0]
    scale = InfTransform(A, [w + w.scale(a)])
    assert Fm.evaluate(scale, A.scalar).is_zero()


def test_diffpoly_derivation_rule():
    # derivative of Y^(k) carries the binomial structure constants
    F = DiffPoly.symbol(1, QQ, ("w",), 6, 0, (1,))
    d = F.hasse_deriv((2,))
    ((key, coeff),) = d.terms.items()
    assert key == (((0, (3,)), 1),)
    assert coeff == TruncSeries.const(QQ, ("w",), 6, Fraction(3))  # C(3,1)


def test_diffpoly_leibniz_via_evaluation():
    # evaluation commutes with the derivation on a product of symbols
    A = NilAlgebra(QQ, ("a", "b"), 3)
    a, b = A.gen("a"), A.gen("b")
    w = TruncSeries.variable(A, ("w",), 5, "w")
    phi = InfTransform(A, [TruncSeries.const(A, ("w",), 5, a) + w + (w * w).scale(b)])
    Y = DiffPoly.symbol(1, QQ, ("w",), 5, 0, (0,))
    F = Y * Y
    for k in range(4):
        lhs = F.hasse_deriv((k,)).evaluate(phi, A.scalar)
        rhs = F.evaluate(phi, A.scalar).hasse_deriv((k,))
        assert lhs == rhs


# ----------------------------------------------------------------- zero sets


def test_zero_set_additive_family():
    fam = solve_zero_set(ideal_additive(5))
    assert not fam.empty
    assert fam.params == ["a0"]
    A = fam.algebra
    expected = TruncSeries(
        A, ("w",), 5, {(0,): A.gen("a0"), (1,): A.one()}
    )
    assert fam.components[0] == expected
    assert fam.shape() == "{ a0 + w : a0 in N(A) }"


def test_zero_set_multiplicative_family():
    fam = solve_zero_set(ideal_multiplicative(5))
    assert fam.params == ["a0"]
    A = fam.algebra
    expected = TruncSeries(A, ("w",), 5, {(1,): A.add(A.one(), A.gen("a0"))})
    assert fam.components[0] == expected


def test_zero_set_conjugated_family():
    L = FracField(QQ, ["y"])
    fam = solve_zero_set(ideal_conjugated(L, 5))
    assert fam.params == ["a0"]
    A = fam.algebra
    y = L.var("y")
    expected = TruncSeries(
        A,
        ("w",),
        5,
        {(0,): A.mul(A.scalar(y), A.gen("a0")), (1,): A.add(A.one(), A.gen("a0"))},
    )
    assert fam.components[0] == expected


def test_zero_set_empty_when_inconsistent():
    # Y - (1 + w): the identity leaves residue -1, unreachable by nilpotents
    one = TruncSeries.one(QQ, ("w",), 4)
    w = TruncSeries.variable(QQ, ("w",), 4, "w")
    F = DiffPoly.symbol(1, QQ, ("w",), 4, 0, (0,)) - DiffPoly.coefficient(1, one + w)
    fam = solve_zero_set(LieRittIdeal(1, QQ, ("w",), 4, [F]))
    assert fam.empty


def test_zero_set_families_are_subgroups():
    # closure of each shipped family under composition and inversion,
    # with independent symbolic parameters
    L = FracField(QQ, ["y"])
    cases = [
        (ideal_additive(4), QQ),
        (ideal_multiplicative(4), QQ),
        (ideal_conjugated(L, 4), L),
    ]
    for ideal, base in cases:
        fam = solve_zero_set(ideal)
        big = NilAlgebra(base, ("s", "t"), 3)
        lift = big.scalar
        f = fam.instantiate(big, {"a0": big.gen("s")})
        g = fam.instantiate(big, {"a0": big.gen("t")})
        for probe in (f.compose(g), f.invert()):
            for gen in ideal.materialized():
                assert gen.evaluate(probe, lift).is_zero()


def test_reduction_functoriality():
    # killing the nilpotents sends every transformation to the identity
    A = NilAlgebra(QQ, ("e1", "e2"), 3)
    rng = random.Random(3)
    for _ in range(10):
        phi = rand_transform(rng, A, 1, 4)
        reduced = [c.map_coeffs(lambda x: A.unit_part(x), QQ) for c in phi.comps]
        assert reduced[0] == TruncSeries.variable(QQ, ("w1",), 4, "w1")


def test_multiplicative_conjugated_isomorphism():
    # (1+a)w  ->  ya + (1+a)w  is a group homomorphism: both sides compose
    # to the parameter law a + b + ab
    L = FracField(QQ, ["y"])
    y = L.var("y")
    A = NilAlgebra(L, ("a", "b"), 3)
    a, b = A.gen("a"), A.gen("b")
    w = TruncSeries.variable(A, ("w",), 4, "w")

    def g_mult(t):
        return InfTransform(A, [w + w.scale(t)])

    def g_conj(t):
        return InfTransform(
            A, [TruncSeries.const(A, ("w",), 4, A.mul(A.scalar(y), t)) + w + w.scale(t)]
        )

    law = A.add(A.add(a, b), A.mul(a, b))
    assert g_mult(a).compose(g_mult(b)) == g_mult(law)
    assert g_conj(a).compose(g_conj(b)) == g_conj(law)


# ----------------------------------------------------------- formal group law


def test_group_law_l0_and_l2():
    ring, law = group_law_coeffs(1, 3)
    u = {k: ring.var(f"u1_{k}") for k in range(4)}
    v = {k: ring.var(f"v1_{k}") for k in range(4)}
    f0 = law[(0, (0,))]
    expected0 = v[0] + v[1] * u[0] + v[2] * u[0] ** 2 + v[3] * u[0] ** 3
    assert f0 == expected0
    # with u_0 = 0 the w^2 coefficient collapses to v1 u2 + v2 u1^2
    f2 = law[(0, (2,))].subs({"u1_0": ring.zero()})
    assert f2 == v[1] * u[2] + v[2] * u[1] ** 2


def test_group_law_identity():
    ring, law = group_law_coeffs(1, 3)
    # outer = identity (v_1 = 1, others 0) reduces f_(i,l) to u_(i,l)
    subs = {f"v1_{k}": ring.one() if k == 1 else ring.zero() for k in range(4)}
    for l in range(4):
        assert law[(0, (l,))].subs(subs) == ring.var(f"u1_{l}")


def test_group_law_matches_compose_samples():
    rng = random.Random(17)
    for nvars in (1, 2):
        ring, law = group_law_coeffs(nvars, 4)
        A = NilAlgebra(QQ, ("e1", "e2"), 3)
        for _ in range(8):
            phi = rand_transform(rng, A, nvars, 4)
            psi = rand_transform(rng, A, nvars, 4)
            composed = psi.compose(phi)  # psi(phi), inner coefficients are u
            subs = {}
            for j in range(nvars):
                for k in multi_indices(nvars, 4):
                    tag = "_".join(map(str, k))
                    subs[f"u{j+1}_{tag}"] = phi.comps[j].coeff(k)
                    subs[f"v{j+1}_{tag}"] = psi.comps[j].coeff(k)
            for i in range(nvars):
                for l in multi_indices(nvars, 4):
                    poly = law[(i, tuple(l))]
                    val = A.zero()
                    for exp, c in poly.terms.items():
                        t = A.scalar(c)
                        for vi, e in enumerate(exp):
                            for _ in range(e):
                                t = A.mul(t, subs[ring.vars[vi]])
                        val = A.add(val, t)
                    assert A.eq(val, composed.comps[i].coeff(l))
