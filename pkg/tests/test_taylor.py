"""Universal expansion tests: Taylor/iterate realizations, the factorization
property, equivariance with translation, and the tensor multiplication map."""

from __future__ import annotations

import random
from fractions import Fraction

from modalg.actions import ActionSpec, HomElement, MonoidDesc, convolution, translate
from modalg.exactalg import QQ, FracField
from modalg.series import TruncSeries
from modalg.taylor import (
    ExpansionAlgebra,
    TaylorMap,
    check_expansion_universal,
    taylor_expand,
)


def shift_action():
    L = FracField(QQ, ["y"])
    y = L.var("y")
    img = TruncSeries(L, ("w",), 8, {(0,): y, (1,): L.one()})
    return L, ActionSpec(L, "iterder", n=1, theta_images={"y": img})


def step_endo_action():
    L = FracField(QQ, ["y"])
    y = L.var("y")
    return L, ActionSpec(
        L, "end", monoid=MonoidDesc("endo"), endo_maps=[{"y": y + L.one()}]
    )


def test_derivation_expansion_binomial_oracle():
    # d = d/dy on QQ[y]: y^2 expands to y^2 + 2 y w + w^2
    L = FracField(QQ, ["y"])
    y = L.var("y")
    act = ActionSpec(L, "der", n=1, d_images={"y": L.one()})
    f = taylor_expand(y * y, act, 4)
    s = f.data[0]
    # oracle: coefficients of (y + w)^2 by direct polynomial expansion
    pr = L.poly_ring
    yy, ww = pr.var("y"), None
    import itertools

    expanded = {(0,): y * y, (1,): L.from_int(2) * y, (2,): L.one()}
    for k, v in expanded.items():
        assert s.coeff(k) == v
    assert s.coeff((3,)).is_zero()
    del yy, ww, itertools, pr


def test_endomorphism_expansion_iterates():
    L, act = step_endo_action()
    y = L.var("y")
    f = taylor_expand(y, act, 0, word_bound=3)
    vals = [f.value(k, ()) for k in range(4)]
    assert vals == [y, y + L.from_int(1), y + L.from_int(2), y + L.from_int(3)]


def test_trivial_action_constant_expansion():
    L, act = shift_action()
    y = L.var("y")
    triv = ActionSpec(L, "trivial", n=1)
    f = taylor_expand(y / (y + L.one()), triv, 4)
    assert f.data[0] == TruncSeries.const(L, ("t",), 4, y / (y + L.one()))


def test_expansion_of_fractions_uses_series_reciprocal():
    L, act = shift_action()
    y = L.var("y")
    f = taylor_expand(L.one() / y, act, 2)
    s = f.data[0]
    assert s.coeff((0,)) == L.one() / y
    assert s.coeff((1,)) == -(L.one() / (y * y))
    assert s.coeff((2,)) == L.one() / (y * y * y)


def test_expansion_multiplicative_random():
    L, act = shift_action()
    y = L.var("y")
    rng = random.Random(12)
    pool = [y, y * y, y + L.one(), L.one() / y, (y * y - L.one()) / y]
    for _ in range(25):
        a, b = rng.choice(pool), rng.choice(pool)
        assert taylor_expand(a * b, act, 5) == convolution(
            taylor_expand(a, act, 5), taylor_expand(b, act, 5)
        )


def test_expansion_equivariance_with_translation():
    # expanding d.a equals right-translating the expansion of a
    L, act = shift_action()
    y = L.var("y")
    for a in [y * y * y, L.one() / y]:
        ea = taylor_expand(a, act, 6)
        for k in range(1, 3):
            da = act.theta_coefficient(a, (k,))
            lhs = taylor_expand(da, act, 6 - k)
            rhs = translate(ea, 0, (k,))
            assert lhs == rhs


def test_taylor_map_caches():
    L, act = shift_action()
    tm = TaylorMap(act, 5)
    y = L.var("y")
    f1 = tm.expand(y * y)
    f2 = tm.expand(y * y)
    assert f1 is f2
    assert tm.expand(y).ev_unit() == y


# ----------------------------------------------------------- universality


def test_universal_factorization_of_expansion_itself():
    L, act = shift_action()
    y = L.var("y")
    tm = TaylorMap(act, 4)
    rep = check_expansion_universal(
        act, tm.expand, L, lambda c: L.const(c), [y, y * y, L.one() / y], 4
    )
    assert rep.ok


def test_universal_factorization_recovers_composed_map():
    # Lambda = coordinatewise g after expansion, with g(y) = y^2
    L, act = shift_action()
    y = L.var("y")

    def g(elem):
        from modalg.taylor import ring_hom

        return ring_hom(elem, {"y": y * y}, L, lambda c: L.const(c))

    def Lambda(elem):
        f = taylor_expand(elem, act, 4)
        return HomElement(
            L, f.monoid, f.tvars, f.horizon, f.word_bound,
            {w: s.map_coeffs(g, L) for w, s in f.data.items()},
        )

    rep = check_expansion_universal(act, Lambda, L, lambda c: L.const(c), [y, y * y], 4)
    assert rep.ok
    assert Lambda(y).ev_unit() == y * y


def test_universal_factorization_detects_violation():
    L, act = shift_action()
    y = L.var("y")

    def bad(elem):
        f = taylor_expand(elem, act, 4)
        s = f.data[0]
        broken = s + TruncSeries(L, s.vars, s.horizon, {(2,): elem})  # not a module map
        return HomElement(L, f.monoid, f.tvars, f.horizon, f.word_bound, {0: broken})

    rep = check_expansion_universal(act, bad, L, lambda c: L.const(c), [y * y], 4)
    assert not rep.ok


# --------------------------------------------------- tensor multiplication


def joint(L, act):
    theta_u = act  # the deformation direction reuses the translation action
    return ExpansionAlgebra(act, theta_u, t_horizon=3, w_horizon=3)


def test_merge_tensor_additive_generator():
    L, act = shift_action()
    y = L.var("y")
    alg = joint(L, act)
    rho_y = alg.expand_plain(y)
    one_w = TruncSeries.one(L, ("w",), 3)
    merged = alg.merge_tensor([(rho_y, one_w)])
    # the deformed realization of y: value y + t + w
    expected = alg.expand_rho(y)
    assert merged == expected
    coords = merged.coordinates()
    assert coords[(0, (0,), (0,))] == y
    assert coords[(0, (1,), (0,))] == L.one()
    assert coords[(0, (0,), (1,))] == L.one()


def test_merge_tensor_pure_w():
    L, act = shift_action()
    alg = joint(L, act)
    one = alg.expand_plain(L.one())
    w = TruncSeries.variable(L, ("w",), 3, "w")
    merged = alg.merge_tensor([(one, w)])
    assert merged == alg.from_w_series(w)


def test_merge_tensor_constant_factor():
    L, act = shift_action()
    y = L.var("y")
    alg = joint(L, act)
    rho0_y = act.constant_expansion(y, 3)
    one_w = TruncSeries.one(L, ("w",), 3)
    merged = alg.merge_tensor([(rho0_y, one_w)])
    assert merged == alg.expand_rho0(y)


def test_merge_tensor_injective_on_basis():
    # distinct tensor basis elements have independent coordinates
    from modalg.exactalg import restriction_kernel

    L, act = shift_action()
    y = L.var("y")
    alg = joint(L, act)
    rho_y = alg.expand_plain(y)
    rho0_y = act.constant_expansion(y, 3)
    one_hom = alg.expand_plain(L.one())
    one_w = TruncSeries.one(L, ("w",), 3)
    w = TruncSeries.variable(L, ("w",), 3, "w")
    basis = []
    for hom in (one_hom, rho0_y, rho_y):
        for ws in (one_w, w, w * w):
            basis.append(alg.merge_tensor([(hom, ws)]))
    keys = sorted({k for b in basis for k in b.coordinates()})
    cols = [[b.coordinates().get(k, L.zero()) for k in keys] for b in basis]
    ker = restriction_kernel(cols, L, QQ)
    assert ker == []


def test_merge_tensor_kernel_of_w_power():
    # a merged element vanishing to w-order k must come from the (w^k) part:
    # here, subtracting the w-expansions detects equal tensors
    L, act = shift_action()
    y = L.var("y")
    alg = joint(L, act)
    a = alg.merge_tensor([(alg.expand_plain(y), TruncSeries.one(L, ("w",), 3))])
    b = alg.expand_rho(y)
    assert (a - b).is_zero()
