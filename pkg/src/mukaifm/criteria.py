"""Numerical sufficient conditions for a transform to preserve stability.

Each :class:`CriterionKind` binds one inequality.  :func:`evaluate_criterion`
returns a :class:`CriterionReport` holding every intermediate value, the
hypotheses that were checked, and whether the whole condition holds.

Two families exist.  General criteria work in any :class:`FMContext` through
the coordinates ``(l, a, d, D)``, ``<v^2>`` and ``(D^2)``; they can also be
driven directly from an :class:`Instance`.  Special criteria concern the
Poincare bundle on an abelian surface with ``NS = ZH`` and read ``v`` as
``(r, dH, a)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .fm import FMContext, decompose
from .lattice import MukaiVector, SurfaceKind, pairing, square, to_fraction


class CriterionError(ValueError):
    pass


class CriterionKind(enum.Enum):
    LemmaKey = "LemmaKey"
    LemmaKey0 = "LemmaKey0"
    PropWIT2 = "PropWIT2"
    PropIT0 = "PropIT0"
    CorIT0_1 = "CorIT0_1"
    CorIT0_2 = "CorIT0_2"
    PropIT0_2 = "PropIT0_2"
    PropRk0 = "PropRk0"
    ThmAsymptotic = "ThmAsymptotic"
    PropAsymptotic3 = "PropAsymptotic3"
    ThmAsymptotic2 = "ThmAsymptotic2"
    PropKeySpecial = "PropKeySpecial"
    ThmAsymptoticSpecial = "ThmAsymptoticSpecial"
    RemarkRank3 = "RemarkRank3"
    RemarkT1 = "RemarkT1"
    Rank0LemmaG = "Rank0LemmaG"
    Rank0LemmaF = "Rank0LemmaF"
    LemmaCounterDomain = "LemmaCounterDomain"
    PropWitBirat = "PropWitBirat"
    RemarkGeneral = "RemarkGeneral"
    Star1 = "Star1"

    @classmethod
    def parse(cls, tag: str) -> "CriterionKind":
        try:
            return cls(tag.strip())
        except ValueError:
            raise CriterionError(f"unknown criterion {tag!r}") from None


# (machine key, sentence) describing what each condition guarantees.
CONCLUSIONS = {
    CriterionKind.LemmaKey: (
        "destabilizer_bounds",
        "stable subobjects F1 with 0<d1<d obey l1 <= l d1/d, resp. a1 < a d1/d"),
    CriterionKind.LemmaKey0: (
        "destabilizer_bounds_rank0",
        "stable subobjects F1 with 0<d1<d obey l1 <= 0, resp. a1/d1 < a/d"),
    CriterionKind.PropWIT2: ("wit2", "WIT_2 holds for F"),
    CriterionKind.PropIT0: ("it0", "IT_0 holds for E"),
    CriterionKind.CorIT0_1: ("it0_twisted_semistable",
                             "IT_0 holds and the image is twisted semi-stable"),
    CriterionKind.CorIT0_2: ("it0_twisted_stable",
                             "IT_0 holds and the image is twisted stable"),
    CriterionKind.PropIT0_2: ("it0_rank0", "IT_0 holds for the rank-0 sheaf E"),
    CriterionKind.PropRk0: ("rank0_image_stable",
                            "F^0(E) is G2-twisted stable; moduli of stable objects map isomorphically"),
    CriterionKind.ThmAsymptotic: ("image_twisted_semistable",
                                  "F^0(E) is G2-twisted semi-stable"),
    CriterionKind.PropAsymptotic3: ("wit2_image_stable",
                                    "the inverse transform of F is a stable sheaf"),
    CriterionKind.ThmAsymptotic2: ("moduli_isomorphism",
                                   "the transform induces an isomorphism of semi-stable moduli"),
    CriterionKind.PropKeySpecial: ("destabilizer_bounds_special",
                                   "stable F1 with 0<d1<d, d1/a1 <= d/a obey r1 <= r d1/d"),
    CriterionKind.ThmAsymptoticSpecial: ("gp_moduli_isomorphism",
                                         "G_P maps M_H(r,d,a)^ss isomorphically onto M(a,d,r)^ss"),
    CriterionKind.RemarkRank3: ("gp_moduli_isomorphism_rank_le3",
                                "G_P maps M_H(r,d,a)^ss isomorphically onto M(a,d,r)^ss"),
    CriterionKind.RemarkT1: ("it0_rank1", "IT_0 holds with respect to F_P"),
    CriterionKind.Rank0LemmaG: ("gp_rank0_isomorphism",
                                "G_P maps M_H(0,d,a)^ss isomorphically onto M(a,d,0)^ss"),
    CriterionKind.Rank0LemmaF: ("fp_rank0_isomorphism",
                                "F_P maps M_H(0,d,a)^ss isomorphically onto M(a,-d,0)^ss"),
    CriterionKind.LemmaCounterDomain: ("fp_destabilizes",
                                       "some mu-stable E has F^0_P(E) not mu-semi-stable"),
    CriterionKind.PropWitBirat: ("wit2_all_semistable",
                                 "WIT_2 holds for every mu-semi-stable sheaf with this vector"),
    CriterionKind.RemarkGeneral: ("image_polarization_general",
                                  "H^ is a general polarization for the image vector"),
    CriterionKind.Star1: ("polarization_general_rank0",
                          "H is general with respect to v and G"),
}

SPECIAL_KINDS = frozenset({
    CriterionKind.PropKeySpecial, CriterionKind.ThmAsymptoticSpecial,
    CriterionKind.RemarkRank3, CriterionKind.RemarkT1, CriterionKind.Rank0LemmaG,
    CriterionKind.Rank0LemmaF, CriterionKind.LemmaCounterDomain, CriterionKind.PropWitBirat,
})


@dataclass(frozen=True)
class CriterionReport:
    kind: CriterionKind
    inputs: dict
    computed: dict
    hypotheses: dict
    lhs: Fraction | None
    threshold: Fraction | None
    strict: bool
    inequality: bool
    satisfied: bool
    conclusion: str
    sentence: str
    notes: tuple = ()

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value, "inputs": self.inputs, "computed": self.computed,
            "hypotheses": self.hypotheses, "lhs": self.lhs, "threshold": self.threshold,
            "strict": self.strict, "inequality": self.inequality,
            "satisfied": self.satisfied, "conclusion": self.conclusion,
            "sentence": self.sentence, "notes": list(self.notes),
        }


@dataclass(frozen=True)
class Instance:
    """The numbers a general criterion depends on."""

    l: Fraction
    a: Fraction
    d: Fraction
    sq: Fraction
    D2: Fraction
    r0: int
    n: int
    eps: int = 0
    rank_one_ns: bool = True

    def __post_init__(self):
        for name in ("l", "a", "d", "sq", "D2"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))

    @classmethod
    def from_vector(cls, ctx: FMContext, v: MukaiVector) -> "Instance":
        c = decompose(v, ctx)
        return cls(c.l, c.a, c.d, square(v, ctx.ns_x), ctx.ns_x.dot(c.D, c.D),
                   ctx.r0, ctx.n, ctx.kind.epsilon, ctx.ns_x.rank == 1)

    def as_dict(self) -> dict:
        return {"l": self.l, "a": self.a, "d": self.d, "sq": self.sq, "D2": self.D2,
                "r0": self.r0, "n": self.n, "eps": self.eps}


def _report(kind, inputs, computed, hypotheses, lhs, threshold, strict=True,
            inequality=None, notes=()) -> CriterionReport:
    if inequality is None:
        inequality = lhs > threshold if strict else lhs >= threshold
    key, sentence = CONCLUSIONS[kind]
    satisfied = bool(inequality) and all(hypotheses.values())
    return CriterionReport(kind, inputs, computed, hypotheses, lhs, threshold, strict,
                           bool(inequality), satisfied, key, sentence, tuple(notes))


# general criteria ----------------------------------------------------------

def lemma_key_bound(i: Instance) -> Fraction:
    return max(4 * i.r0 ** 3 * i.l ** 2 + Fraction(1, 2 * i.n),
               2 * i.r0 ** 2 * i.l * (i.sq - i.D2))


def lemma_key0_bound(i: Instance) -> Fraction:
    return max((i.sq - i.D2) / 2, Fraction(2 * i.r0 + 1))


def _slope_ratio(i: Instance) -> Fraction:
    return i.d / (i.r0 * i.l) if i.l > 0 else Fraction(0)


def _eval_general(kind: CriterionKind, i: Instance, extras: dict) -> CriterionReport:
    r0, l, n = i.r0, i.l, i.n
    inputs = i.as_dict()
    disc = i.sq - i.D2
    if kind is CriterionKind.LemmaKey:
        N = lemma_key_bound(i)
        return _report(kind, inputs, {"N": N}, {"l>0": l > 0, "a>0": i.a > 0}, i.d, N)
    if kind is CriterionKind.LemmaKey0:
        N = lemma_key0_bound(i)
        return _report(kind, inputs, {"N": N, "a>N+1": i.a > N + 1},
                       {"l=0": l == 0, "d>0": i.d > 0}, i.a, N)
    if kind in (CriterionKind.PropWIT2, CriterionKind.PropIT0):
        thr = (max(4 * l * r0 ** 2 + 1 / (2 * n * r0 * l), 2 * r0 * disc)
               if l > 0 else Fraction(0))
        return _report(kind, inputs, {"d/(r0 l)": _slope_ratio(i)}, {"l>0": l > 0},
                       _slope_ratio(i), thr)
    if kind in (CriterionKind.CorIT0_1, CriterionKind.ThmAsymptotic):
        thr = max(4 * l * r0 ** 2 + 1, 2 * r0 * (disc + (r0 * l) ** 2 / 2))
        hyp = {"l>0": l > 0}
        notes = ()
        if kind is CriterionKind.ThmAsymptotic:
            hyp["l r0 in {1,2}"] = r0 * l in (1, 2)
            notes = ("(D^2) is taken from the decomposition of v itself",)
        return _report(kind, inputs, {"d/(r0 l)": _slope_ratio(i)}, hyp,
                       _slope_ratio(i), thr, notes=notes)
    if kind is CriterionKind.CorIT0_2:
        if i.rank_one_ns:
            general = True
        elif "h_general" in extras:
            general = bool(extras["h_general"])
        else:
            raise CriterionError("CorIT0_2 on NS rank > 1 needs extras 'h_general'")
        thr = max(4 * l * r0 ** 2 + 1, 2 * r0 * disc)
        return _report(kind, inputs, {"d/(r0 l)": _slope_ratio(i)},
                       {"l>0": l > 0, "<v^2> > 0": i.sq > 0, "H general": general},
                       _slope_ratio(i), thr)
    if kind in (CriterionKind.PropIT0_2, CriterionKind.PropRk0):
        thr = max(Fraction(2 * r0 + 1), disc / 2 + 1)
        return _report(kind, inputs, {}, {"l=0": l == 0}, i.a, thr)
    if kind in (CriterionKind.PropAsymptotic3, CriterionKind.ThmAsymptotic2):
        thr = max(4 * l * r0 ** 2 + 1, 2 * r0 * i.sq)
        return _report(kind, inputs, {"d/(r0 l)": _slope_ratio(i)},
                       {"l>0": l > 0, "NS = ZH": i.rank_one_ns}, _slope_ratio(i), thr)
    raise CriterionError(f"{kind.value} is not a general criterion")


def evaluate_instance(kind: CriterionKind, inst: Instance,
                      extras: dict | None = None) -> CriterionReport:
    """Evaluate a general criterion from raw numbers (no context needed)."""
    return _eval_general(kind, inst, dict(extras or {}))


# special criteria: Poincare bundle, NS = ZH ---------------------------------

def _rda(ctx: FMContext, v: MukaiVector) -> tuple:
    if not ctx.ns_x.is_rank_one_generated():
        raise CriterionError("this criterion needs NS = ZH with H the generator")
    if v is None or not v.is_integral():
        raise CriterionError(f"this criterion needs an integral vector (r, dH, a), got {v}")
    d = v.c1[0] * ctx.ns_x.H[0]
    return int(v.r), int(d), int(v.a)


def key_special_certificate(r: int, d: int) -> tuple:
    """``(k, r', d')`` with ``k = gcd(r, d)``, ``r d' - r' d = -k`` and ``0 <= r' < r``.

    ``r'`` is the smallest such value.
    """
    if r <= 0 or d <= 0:
        raise CriterionError("r and d must be positive")
    k = gcd(r, d)
    r1, d1 = r // k, d // k
    rp = pow(d1, -1, r1) if r1 > 1 else 0
    dp = (rp * d1 - 1) // r1
    assert r * dp - rp * d == -k and 0 <= rp < r
    return k, rp, dp


def _eval_special(kind: CriterionKind, ctx: FMContext, v, extras: dict) -> CriterionReport:
    n = ctx.n
    hyp = {"abelian": ctx.kind is SurfaceKind.ABELIAN}
    if kind is CriterionKind.LemmaCounterDomain:
        return _eval_counter_domain(ctx, v, extras, hyp)
    r, d, a = _rda(ctx, v)
    inputs = {"r": r, "d": d, "a": a, "n": n}
    sq = Fraction(2 * n * d * d - 2 * r * a)
    s = sq / 2
    if kind is CriterionKind.PropKeySpecial:
        hyp.update({"r>0": r > 0, "d>0": d > 0, "a>0": a > 0})
        if r <= 0 or d <= 0:
            raise CriterionError("PropKeySpecial needs r, d > 0")
        k, rp, dp = key_special_certificate(r, d)
        thr = max(Fraction(1, 2 * k) * (rp + Fraction(k - 1, k) * r) * sq, sq / 2)
        return _report(kind, inputs, {"<v^2>": sq, "k": k, "r'": rp, "d'": dp},
                       hyp, Fraction(d * n), thr)
    if kind is CriterionKind.ThmAsymptoticSpecial:
        hyp.update({"r>0": r > 0, "d>0": d > 0})
        return _report(kind, inputs, {"s": s, "rs": r * s, "dn": d * n}, hyp,
                       Fraction(d * n), r * s)
    if kind is CriterionKind.RemarkRank3:
        hyp.update({"r>0": r > 0, "d>0": d > 0, "r<=3": r <= 3})
        if r <= 0 or d <= 0:
            raise CriterionError("RemarkRank3 needs r, d > 0")
        k, rp, dp = key_special_certificate(r, d)
        hyp["k=1"] = k == 1
        return _report(kind, inputs, {"s": s, "k": k, "r'": rp, "d'": dp, "r's": rp * s},
                       hyp, Fraction(d * n), rp * s)
    if kind is CriterionKind.RemarkT1:
        hyp.update({"r=1": r == 1, "d>=2": d >= 2})
        return _report(kind, inputs, {"s": s}, hyp, Fraction(2 * (d - 1) * n), s)
    if kind in (CriterionKind.Rank0LemmaG, CriterionKind.Rank0LemmaF):
        if r != 0:
            raise CriterionError(f"{kind.value} needs a rank-0 vector, got r = {r}")
        hyp["d>0"] = d > 0
        thr = d * (d - 1) * n if kind is CriterionKind.Rank0LemmaG else d * d * n
        return _report(kind, inputs, {}, hyp, Fraction(a), Fraction(thr))
    if kind is CriterionKind.PropWitBirat:
        hyp.update({"r>0": r > 0, "d>0": d > 0})
        return _report(kind, inputs, {"<v^2>": sq}, hyp, sq, Fraction(2 * r),
                       inequality=sq < 2 * r, notes=("inequality reads <v^2> < 2r",))
    raise CriterionError(f"{kind.value} is not a special criterion")


def _eval_counter_domain(ctx, v, extras, hyp) -> CriterionReport:
    n = ctx.n
    if all(key in extras for key in ("r", "k", "s")):
        r, k, s = (int(to_fraction(extras[key])) for key in ("r", "k", "s"))
        d = k * r + 1
    else:
        r, d, a = _rda(ctx, v)
        if r <= 0 or (d - 1) % r:
            raise CriterionError("vector is not of the form d = kr + 1; pass r, k, s")
        k = (d - 1) // r
        s = d * d * n - r * a
    a = Fraction(d * d * n - s, r) if r else None
    lower = Fraction(d * n)
    upper = (d * d - Fraction((d - 1) ** 2, r)) * n - 2 * r if r else None
    hyp.update({"r>=1": r >= 1, "k>=1": k >= 1,
                "a integral": a is not None and a.denominator == 1})
    inside = upper is not None and lower <= s <= upper
    return _report(CriterionKind.LemmaCounterDomain,
                   {"r": r, "k": k, "n": n, "s": s},
                   {"d": d, "a": a, "s": s, "lower": lower, "upper": upper},
                   hyp, Fraction(s), None, strict=False, inequality=inside)


# criteria with side data ---------------------------------------------------

def _eval_remark_general(ctx: FMContext, v: MukaiVector, extras: dict) -> CriterionReport:
    from .oracle import INFINITE, shortest_Hperp
    i = Instance.from_vector(ctx, v)
    rl = i.r0 * i.l
    rhs = rl ** 2 * (i.sq + 2 * rl ** 2 * i.eps) / 4
    if "hperp_min" in extras:
        m = extras["hperp_min"]
        m = INFINITE if m == INFINITE else to_fraction(m)
    else:
        m = shortest_Hperp(ctx.ns_x, int(extras.get("cap", 50)))
    general = True if m == INFINITE else m > rhs
    N = lemma_key_bound(i)
    notes = ["vacuously satisfied (H^perp = 0)"] if m == INFINITE else []
    notes.append("evaluated together with d > N of the destabilizer bound")
    return _report(CriterionKind.RemarkGeneral, i.as_dict(),
                   {"hperp_min": m, "rhs": rhs, "N": N, "d>N": i.d > N},
                   {"l>0": i.l > 0}, m if m != INFINITE else None, rhs,
                   inequality=general and i.d > N, notes=notes)


def _eval_star1(ctx: FMContext, v: MukaiVector, extras: dict) -> CriterionReport:
    L = ctx.ns_x
    G = extras.get("G")
    g = ctx.v0_dual if G is None else G
    c = pairing(g, v, L)
    xi = v.c1
    if "d_xi" in extras:
        dxi = [tuple(to_fraction(x) for x in e) for e in extras["d_xi"]]
    elif L.is_rank_one_generated():
        top = xi[0] * L.H[0]
        if top.denominator != 1:
            raise CriterionError("c1(v) must be integral")
        dxi = [(Fraction(j),) for j in range(0, int(top) + 1)
               if L.dot((j,), (j,)) >= -2 * ctx.kind.epsilon]
    else:
        raise CriterionError("Star1 on NS rank > 1 needs an explicit 'd_xi' list")
    if c.denominator != 1:
        raise CriterionError(f"<v(G), v> = {c} is not an integer")
    failures = []
    for x1 in dxi:
        for b in range(-abs(int(c)) + 1, abs(int(c))):
            cls = tuple(c * p - b * q for p, q in zip(x1, xi))
            if any(cls) and L.degree(cls) == 0:
                failures.append({"xi1": list(x1), "b": b})
    return _report(CriterionKind.Star1, {"v": str(v), "G": str(g)},
                   {"<v(G),v>": c, "|D_xi|": len(dxi), "failures": failures},
                   {"rk v = 0": v.r == 0, "<v(G),v> != 0": c != 0},
                   None, None, inequality=not failures)


def evaluate_criterion(kind: CriterionKind | str, ctx: FMContext, v: MukaiVector | None,
                       extras: dict | None = None) -> CriterionReport:
    if isinstance(kind, str):
        kind = CriterionKind.parse(kind)
    extras = dict(extras or {})
    if kind in SPECIAL_KINDS:
        return _eval_special(kind, ctx, v, extras)
    if v is None:
        raise CriterionError(f"{kind.value} needs a vector")
    if kind is CriterionKind.RemarkGeneral:
        return _eval_remark_general(ctx, v, extras)
    if kind is CriterionKind.Star1:
        return _eval_star1(ctx, v, extras)
    return _eval_general(kind, Instance.from_vector(ctx, v), extras)


def evaluate_general_asymptotic(ctx: FMContext, v: MukaiVector,
                                extras: dict | None = None) -> CriterionReport:
    """Conjunction of RemarkGeneral with ThmAsymptotic and ``<v^2> > 0``."""
    rg = evaluate_criterion(CriterionKind.RemarkGeneral, ctx, v, extras)
    ta = evaluate_criterion(CriterionKind.ThmAsymptotic, ctx, v, extras)
    sq = square(v, ctx.ns_x)
    hyp = {**{f"RemarkGeneral:{k}": b for k, b in rg.hypotheses.items()},
           **{f"ThmAsymptotic:{k}": b for k, b in ta.hypotheses.items()},
           "<v^2> > 0": sq > 0}
    return CriterionReport(
        CriterionKind.RemarkGeneral, rg.inputs,
        {"RemarkGeneral": rg.computed, "ThmAsymptotic": ta.computed},
        hyp, None, None, True, rg.inequality and ta.inequality,
        rg.satisfied and ta.satisfied and sq > 0,
        "image_twisted_stable_general",
        "RemarkGeneral and ThmAsymptotic together: the image is stable for a general H^",
        ("conjunction RemarkGeneral and ThmAsymptotic",))
