"""The infinitesimal automorphism group of a hull, as a zero set.

Every polynomial relation among the derivatives of the expanded generators
is twisted into a family of differential polynomials in the unknown
transformation: coefficients are deformed in the w direction, each
generator symbol is replaced by the derivative of its deformation template
(the expansion with w routed through the Y symbols), and one generator is
extracted per operator coordinate.  The zero set of the resulting ideal over
a nilpotent test algebra is the group of infinitesimal automorphisms: points
correspond to transformations, and each point acts on the expanded
generators through the twisted-expansion formula.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

from .hull import HullData
from .lieritt import (
    DiffPoly,
    InfTransform,
    LieRittIdeal,
    NilAlgebra,
    SolutionFamily,
    multi_indices,
    solve_zero_set,
)
from .series import TruncSeries
from .taylor import JointElement


class YPoly:
    """Polynomial in the Y symbols with JointElement coefficients."""

    def __init__(self, alg, terms: dict):
        self.alg = alg
        self.terms = {k: v for k, v in terms.items() if not v.is_zero()}

    @classmethod
    def const(cls, alg, c: JointElement) -> "YPoly":
        return cls(alg, {(): c})

    def __add__(self, other: "YPoly") -> "YPoly":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return YPoly(self.alg, out)

    def __mul__(self, other: "YPoly") -> "YPoly":
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                key = _merge(k1, k2)
                prod = v1 * v2
                out[key] = out[key] + prod if key in out else prod
        return YPoly(self.alg, out)

    def deriv(self, l: tuple[int, ...], max_order: int) -> "YPoly":
        """Divided derivative acting on the Y symbols only (coefficients are
        w-free by construction); symbols beyond max_order evaluate to zero on
        every modeled transformation and are dropped."""
        if not any(l):
            return self
        out: dict = {}
        for key, coeff in self.terms.items():
            factors = []
            for (j, k), e in key:
                factors.extend([(j, k)] * e)
            for split in _splits(l, len(factors)):
                scale = 1
                new_syms = []
                dead = False
                for (j, k), part in zip(factors, split):
                    kk = tuple(a + b for a, b in zip(k, part))
                    if sum(kk) > max_order:
                        dead = True
                        break
                    b = 1
                    for a, bb in zip(kk, k):
                        b *= math.comb(a, bb)
                    scale *= b
                    new_syms.append((j, kk))
                if dead:
                    continue
                c = coeff.scale(self.alg.ring.from_int(scale))
                if c.is_zero():
                    continue
                counts: dict = {}
                for s in new_syms:
                    counts[s] = counts.get(s, 0) + 1
                key2 = tuple(sorted(counts.items()))
                out[key2] = out[key2] + c if key2 in out else c
        return YPoly(self.alg, out)


def _merge(k1, k2):
    counts: dict = {}
    for sym, e in itertools.chain(k1, k2):
        counts[sym] = counts.get(sym, 0) + e
    return tuple(sorted(counts.items()))


def _splits(l: tuple[int, ...], parts: int):
    if parts == 0:
        if not any(l):
            yield ()
        return
    if parts == 1:
        yield (l,)
        return
    for first in itertools.product(*(range(a + 1) for a in l)):
        rest = tuple(a - b for a, b in zip(l, first))
        for tail in _splits(rest, parts - 1):
            yield (first,) + tail


def build_ideal(hull: HullData, relations: Sequence[DiffPoly]) -> LieRittIdeal:
    """Twist each relation into differential-polynomial generators.

    Relation coefficients c become their w-deformations; the symbol for the
    k-th derivative of generator i becomes the k-th derivative of the
    template sum_m V_(i,m) Y^m.  One generator is extracted per operator
    coordinate (word, t-exponent); duplicates and scalar multiples are
    removed and each generator is normalized to leading coefficient one."""
    alg = hull.algebra
    L = hull.ext.L
    theta_u = alg.theta_u
    n = theta_u.n
    wh = alg.w_horizon
    wvars = theta_u.wvars

    # deformation templates and their derivatives
    zero_k = (0,) * n
    templates: dict[int, YPoly] = {}
    for i in range(hull.n_gens()):
        terms: dict = {}
        for m in multi_indices(n, wh):
            v = hull.derivative_table[(i, tuple(m))]
            coeff = alg.from_hom(v)
            if coeff.is_zero():
                continue
            counts: dict = {}
            for j, e in enumerate(m):
                if e:
                    counts[(j, zero_k)] = e
            key = tuple(sorted(counts.items()))
            terms[key] = terms[key] + coeff if key in terms else coeff
        templates[i] = YPoly(alg, terms)

    deriv_cache: dict[tuple[int, tuple[int, ...]], YPoly] = {}

    def template_deriv(i: int, k: tuple[int, ...]) -> YPoly:
        if (i, k) not in deriv_cache:
            deriv_cache[(i, k)] = templates[i].deriv(k, wh)
        return deriv_cache[(i, k)]

    gens: list[DiffPoly] = []
    seen: set = set()
    for rel in relations:
        # clearing multiplier: the deformation of the coefficient
        # denominators turns the rational coefficients into polynomials
        multiplier = None
        for _, coeff in rel.terms.items():
            c = coeff.coeff((0,) * len(coeff.vars))
            if hasattr(c, "den") and not c.den.is_const():
                den = L.from_poly(c.den)
                m = theta_u.theta_series(den, wh)
                multiplier = m if multiplier is None else multiplier * m
        twisted = YPoly(alg, {})
        for key, coeff in rel.terms.items():
            c = coeff.coeff((0,) * len(coeff.vars))
            joint_c = alg.from_w_series(theta_u.theta_series(c, wh))
            if multiplier is not None:
                joint_c = joint_c * alg.from_w_series(multiplier)
            term = YPoly.const(alg, joint_c)
            for (i, k), e in key:
                d = template_deriv(i, tuple(k))
                for _ in range(e):
                    term = term * d
            twisted = twisted + term
        # extract one differential polynomial per operator coordinate
        coords: dict = {}
        for ykey, joint in twisted.terms.items():
            for (word, texp, wexp), c in joint.coordinates().items():
                coords.setdefault((word, texp), {}).setdefault(ykey, {})[wexp] = c
        for coord in sorted(coords, key=str):
            terms = {
                ykey: TruncSeries(L, wvars, wh, wterms)
                for ykey, wterms in coords[coord].items()
            }
            poly = DiffPoly(n, L, wvars, wh, terms)
            poly = _normalize(poly, L)
            if poly is None or poly.is_zero():
                continue
            sig = _signature(poly, L)
            if sig not in seen:
                seen.add(sig)
                gens.append(poly)
    gens.sort(key=lambda g: _signature(g, L))
    return LieRittIdeal(n, L, wvars, wh, gens)


def _normalize(poly: DiffPoly, L) -> DiffPoly | None:
    """Scale so the leading term (highest Y-degree, then highest derivative
    order) has a w-minimal coefficient with unit scalar part."""
    if not poly.terms:
        return None
    lead_key = max(poly.terms, key=_term_order)
    series = poly.terms[lead_key]
    lead_exp = min(series.terms, key=lambda e: (sum(e), e))
    c = series.terms[lead_exp]
    s = _unit_scalar(L, c)
    if s is None:
        return poly
    inv = _lift_scalar_inv(L, s)
    return DiffPoly(
        poly.nstreams, poly.coeff_ring, poly.wvars, poly.horizon,
        {k: ser.scale(inv) for k, ser in poly.terms.items()},
    )


def _unit_scalar(L, c):
    """The scalar-field content of a field element's canonical form."""
    if hasattr(c, "num"):  # fraction over a polynomial ring
        if c.num.is_zero():
            return None
        _, lead = c.num.leading()
        return lead
    if isinstance(c, tuple):  # algebraic extension element
        for comp in c:
            if not comp.is_zero():
                _, lead = comp.num.leading()
                return lead
        return None
    return c


def _lift_scalar_inv(L, s):
    scalars = L.scalars if hasattr(L, "scalars") else L
    inv = scalars.inv(s)
    if hasattr(L, "const"):
        return L.const(inv)
    if hasattr(L, "from_base"):
        return L.from_base(L.base.const(inv))
    return inv


def _term_order(key):
    total = sum(e for _, e in key)
    orders = tuple(sorted((sum(k), i, k) for (i, k), _ in key))
    return (total, orders)


def _signature(poly: DiffPoly, L) -> tuple:
    out = []
    for key in sorted(poly.terms, key=str):
        s = poly.terms[key]
        out.append((str(key), tuple(sorted((e, L.to_str(c)) for e, c in s.terms.items()))))
    return tuple(out)


class UmemuraReport:
    """Solved infinitesimal automorphism group of a hull."""

    def __init__(self, hull: HullData, ideal: LieRittIdeal, family: SolutionFamily,
                 images: dict, checks: dict, classification: dict):
        self.hull = hull
        self.ideal = ideal
        self.family = family
        self.images = images
        self.checks = checks
        self.classification = classification

    def as_dict(self) -> dict:
        return {
            "ideal": [str(g) for g in self.ideal.generators],
            "solution": self.family.shape(),
            "parameters": list(self.family.params),
            "constraints": list(self.family.constraints),
            "images": {k: str(v) for k, v in self.images.items()},
            "checks": dict(self.checks),
            "formal_group": dict(self.classification),
        }


def solve_points(hull: HullData, relations: Sequence[DiffPoly],
                 ideal: LieRittIdeal | None = None) -> UmemuraReport:
    """Solve the ideal over the symbolic test algebra and reconstruct the
    action of each point on the expanded generators.

    The reconstruction follows the twisted-expansion formula: the image of
    an expanded generator is the sum over k of its k-th derivative times the
    k-th power of the transformation deviation.  Both the congruence to the
    identity modulo nilpotents and the preservation of all relations are
    re-checked on the symbolic family."""
    # re-check the precondition: relations vanish on the generators
    for rel in relations:
        acc = None
        for key, coeff in rel.terms.items():
            c = coeff.coeff((0,) * len(coeff.vars))
            term = None
            for (i, k), e in key:
                v = hull.derivative_table[(i, tuple(k))]
                for _ in range(e):
                    term = v if term is None else term * v
            if term is None:
                term = hull.algebra.expand_plain(hull.ext.L.one())
            term = term.scale(c)
            acc = term if acc is None else acc + term
        if acc is not None and not all(s.is_zero() for s in acc.data.values()):
            raise ValueError("relation does not vanish on the hull generators")

    if ideal is None:
        ideal = build_ideal(hull, relations)
    family = solve_zero_set(ideal)
    classification = identify_formal_group(family)
    if family.empty:
        return UmemuraReport(hull, ideal, family, {}, {"solved": False}, classification)

    alg = hull.algebra
    L = hull.ext.L
    P = family.algebra
    alg_P = alg.with_ring(P)
    n = alg.theta_u.n
    wh = alg.w_horizon

    # powers of the deviation of the solved transformation
    ident = [TruncSeries.variable(P, family.vars, wh, v) for v in family.vars]
    deviation = [c - ident[j] for j, c in enumerate(family.components)]

    def deviation_power(k: tuple[int, ...]) -> TruncSeries:
        out = TruncSeries.one(P, family.vars, wh)
        for j, e in enumerate(k):
            for _ in range(e):
                out = out * deviation[j]
        return out

    images = {}
    congruent = True
    for i, (label, _, joint) in enumerate(hull.rho_gens):
        img = alg_P.zero()
        for k in multi_indices(n, wh):
            v = hull.derivative_table[(i, tuple(k))]
            part = alg_P._deform_hom(v, P.scalar) * alg_P.from_w_series(deviation_power(tuple(k)))
            img = img + part
        images[label] = img
        # congruence: killing the parameters recovers the undeformed image
        reduced = JointElement(
            alg, {w: s.map_coeffs(P.unit_part, L) for w, s in img.data.items()}
        )
        if reduced != joint:
            congruent = False

    relations_ok = True
    for rel in relations:
        acc = alg_P.zero()
        for key, coeff in rel.terms.items():
            c = coeff.coeff((0,) * len(coeff.vars))
            term = alg_P.from_w_series(alg.theta_u.theta_series(c, wh), lift=P.scalar)
            for (i, k), e in key:
                base = images[hull.rho_gens[i][0]].theta_w(tuple(k))
                for _ in range(e):
                    term = term * base
            acc = acc + term
        if not acc.is_zero():
            relations_ok = False

    checks = {
        "solved": True,
        "congruent_to_identity": congruent,
        "relations_preserved": relations_ok,
        "constraints": list(family.constraints),
    }
    return UmemuraReport(hull, ideal, family, images, checks, classification)


def group_compatibility_check(hull: HullData, report: UmemuraReport) -> bool:
    """The point map sends composition of automorphisms to composition of
    transformations: applying one point to the reconstructed image of
    another equals reconstructing along the composed transformation."""
    family = report.family
    if family.empty or not family.params:
        return True
    L = hull.ext.L
    alg = hull.algebra
    n = alg.theta_u.n
    wh = alg.w_horizon
    P2 = NilAlgebra(L, tuple(f"s{i}" for i in range(len(family.params)))
                    + tuple(f"t{i}" for i in range(len(family.params))), 3)
    f = family.instantiate(P2, {p: P2.gen(f"s{i}") for i, p in enumerate(family.params)})
    g = family.instantiate(P2, {p: P2.gen(f"t{i}") for i, p in enumerate(family.params)})
    composed = f.compose(g)
    alg_P2 = alg.with_ring(P2)
    ident = [TruncSeries.variable(P2, family.vars, wh, v) for v in family.vars]

    def reconstruct(transform: InfTransform, i: int) -> JointElement:
        deviation = [c - ident[j] for j, c in enumerate(transform.comps)]
        img = alg_P2.zero()
        for k in multi_indices(n, wh):
            v = hull.derivative_table[(i, tuple(k))]
            power = TruncSeries.one(P2, family.vars, wh)
            for j, e in enumerate(k):
                for _ in range(e):
                    power = power * deviation[j]
            img = img + alg_P2._deform_hom(v, P2.scalar) * alg_P2.from_w_series(power)
        return img

    for i in range(hull.n_gens()):
        # phi_f applied to the image of phi_g: derivatives of phi_f's image,
        # paired with powers of phi_g's deviation
        img_f = reconstruct(f, i)
        dev_g = [c - ident[j] for j, c in enumerate(g.comps)]
        acc = alg_P2.zero()
        for k in multi_indices(n, wh):
            power = TruncSeries.one(P2, family.vars, wh)
            for j, e in enumerate(k):
                for _ in range(e):
                    power = power * dev_g[j]
            acc = acc + img_f.theta_w(tuple(k)) * alg_P2.from_w_series(power)
        if acc != reconstruct(composed, i):
            return False
    return True


# ------------------------------------------------------------ classification


def identify_formal_group(family: SolutionFamily) -> dict:
    """Match a solved family against the shipped one-parameter templates.

    Returns a dict with keys tag (trivial, Ga_hat, Gm_hat, Gm_hat_conjugate,
    unclassified, empty), display, parameter_law, and for the conjugate
    multiplicative case the straightening isomorphism."""
    if family.empty:
        return {"tag": "empty", "display": "empty zero set"}
    nparams = len(family.params)
    n = len(family.components)
    if nparams == 0:
        return {"tag": "trivial", "display": "trivial group (identity only)"}
    law = _parameter_law(family)
    if nparams == 1 and n == 1:
        P = family.algebra
        L = P.base
        direction: dict = {}
        for e, c in family.components[0].terms.items():
            lin = c.get((1,), None)
            if lin is not None and not L.is_zero(lin):
                direction[e] = lin
        if set(direction) == {(0,)} and L.eq(direction[(0,)], L.one()):
            return {"tag": "Ga_hat", "display": "additive formal group",
                    "parameter_law": law}
        if set(direction) == {(1,)} and L.eq(direction[(1,)], L.one()):
            return {"tag": "Gm_hat", "display": "multiplicative formal group",
                    "parameter_law": law}
        if set(direction) == {(0,), (1,)} and L.eq(direction[(1,)], L.one()):
            c = direction[(0,)]
            return {
                "tag": "Gm_hat_conjugate",
                "display": "multiplicative formal group (conjugated form)",
                "parameter_law": law,
                "isomorphism": f"(1 + a)*w  ->  ({L.to_str(c)})*a + (1 + a)*w",
            }
    return {"tag": "unclassified", "display": "unclassified formal group",
            "parameter_law": law}


def _parameter_law(family: SolutionFamily) -> str:
    """Compose two symbolic members and express the result in the family.

    For one-parameter linear families the composed transformation equals the
    family member at a parameter value u(s, t); the returned string shows u.
    An inexpressible composition reports 'not closed within bounds'."""
    L = family.algebra.base
    nparams = len(family.params)
    P2 = NilAlgebra(L, tuple(f"s{i}" for i in range(nparams))
                    + tuple(f"t{i}" for i in range(nparams)), 3)
    f = family.instantiate(P2, {p: P2.gen(f"s{i}") for i, p in enumerate(family.params)})
    g = family.instantiate(P2, {p: P2.gen(f"t{i}") for i, p in enumerate(family.params)})
    comp = f.compose(g)
    if nparams != 1:
        return "composition computed; no closed form attempted"
    # solve family(u) == comp for u by matching the coefficient where the
    # parameter direction is 1
    P = family.algebra
    direction: dict = {}
    for i, c in enumerate(family.components):
        for e, cc in c.terms.items():
            lin = cc.get((1,), None)
            if lin is not None:
                direction[(i, e)] = lin
    probe = next(((i, e) for (i, e), lin in direction.items() if L.eq(lin, L.one())), None)
    if probe is None:
        return "not closed within bounds"
    i, e = probe
    u = P2.nil_part(comp.comps[i].terms.get(e, P2.zero()))
    # verify: substituting u reproduces the composition
    check = family.instantiate(P2, {family.params[0]: u})
    if check != comp:
        return "not closed within bounds"
    return f"{family.params[0]}*{family.params[0]}' = {P2.to_str(u)}".replace(
        "s0", family.params[0]).replace("t0", f"{family.params[0]}'")
