"""Explicit families where a Fourier-Mukai transform destroys stability.

Each report lists the Mukai vectors involved, the slopes being compared, the
numerical side conditions of the family, and a verdict that is computed from
the slopes alone.  Image vectors are produced by :func:`mukaifm.fm.fm_apply`,
so a sheaf satisfying WIT_1 appears with the sign flipped back.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .fm import fm_apply, k3_example_context, poincare_context
from .lattice import (
    MukaiVector, NSLattice, SurfaceKind, line_bundle, structure_sheaf, twist,
)
from .twisted import TwistData, chi_twisted


class CounterexampleError(ValueError):
    pass


@dataclass(frozen=True)
class CounterexampleReport:
    scenario: str
    vectors: tuple
    slopes: tuple
    verdict: bool
    conditions: tuple
    values: dict = field(default_factory=dict)
    notes: tuple = ()

    def vector(self, name: str) -> MukaiVector:
        return dict(self.vectors)[name]

    def slope(self, name: str) -> Fraction:
        return dict(self.slopes)[name]

    @property
    def conditions_hold(self) -> bool:
        return all(ok for _, ok in self.conditions)

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "vectors": {k: str(v) for k, v in self.vectors},
            "slopes": {k: s for k, s in self.slopes},
            "verdict": self.verdict,
            "conditions": {k: ok for k, ok in self.conditions},
            "conditions_hold": self.conditions_hold,
            "values": self.values,
            "notes": list(self.notes),
        }


def _slope(v: MukaiVector, L: NSLattice) -> Fraction | None:
    return L.degree(v.c1) / v.r if v.r else None


EXAMPLE1_LATTICE = NSLattice(((0, 1), (1, 0)), (2, 1))
EXAMPLE1_D = (-1, 1)


def example1_report(r: int, lattice: NSLattice = EXAMPLE1_LATTICE,
                    D=EXAMPLE1_D) -> CounterexampleReport:
    """Abelian surface, Poincare bundle, ``E(D)`` an extension of ``F(D)`` by ``P(D)``.

    ``v(P) = (r, 0, 0)`` and ``v(F) = (1, D, -1)``; both are twisted by ``D``.
    """
    if r < 1:
        raise CounterexampleError("r must be at least 1")
    L = lattice
    D = tuple(Fraction(x) for x in D)
    DH, D2 = L.degree(D), L.dot(D, D)
    if (DH, D2) != (1, -2):
        raise CounterexampleError(f"need (D,H) = 1 and (D^2) = -2, got {DH}, {D2}")
    ctx = poincare_context(lattice=L)
    vP = MukaiVector(r, L.zero(), 0)
    vF = MukaiVector(1, D, -1)
    vPD, vFD = twist(vP, D, L), twist(vF, D, L)
    vED = vPD + vFD
    imP, imF, imE = (fm_apply(x, ctx) for x in (vPD, vFD, vED))
    # WIT_1: the first image sheaf has vector -fm_apply(.)
    f1P, f1F, f1E = -imP, -imF, -imE
    sP, sF = _slope(f1P, L), _slope(f1F, L)
    return CounterexampleReport(
        "example1",
        (("v(P(D))", vPD), ("v(F(D))", vFD), ("v(E(D))", vED),
         ("v(F1(P(D)))", f1P), ("v(F1(F(D)))", f1F), ("v(F1(E(D)))", f1E)),
        (("mu(F1(P(D)))", sP), ("mu(F1(F(D)))", sF)),
        sP > sF,
        (("(D,H) = 1", DH == 1), ("(D^2) = -2", D2 == -2),
         ("additive", imE == imP + imF)),
        {"r": r, "(H^2)": L.dot(L.H, L.H)},
        ("image vectors carry the WIT_1 sign: v(F^1) = -fm_apply(v)",
         "the slope comparison only uses (D,H) and (D^2)"),
    )


def example2_gap_formula(n: int, k: int, r: int, a: int) -> Fraction | None:
    num = 2 * n * (k * k * n - ((a + r) * k + 1))
    den = ((a * k * k + 2 * k) * n - r) * (k * k * n + 1)
    return Fraction(num, den) if den else None


def example2_report(n: int, k: int, r: int, a: int) -> CounterexampleReport:
    """K3 surface with ``NS = ZH``, kernel ``E^dual``, ``v(E) = (r, H, -a)``."""
    for name, x in (("n", n), ("k", k), ("r", r), ("a", a)):
        if x < 1:
            raise CounterexampleError(f"{name} must be positive")
    ctx = k3_example_context(n, k)
    L = ctx.ns_x
    vO = structure_sheaf(1, SurfaceKind.K3)
    vE = MukaiVector(r, (1,), -a)
    f2O = fm_apply(vO, ctx)          # WIT_2: sign +
    f1E = -fm_apply(vE, ctx)         # WIT_1: sign -
    sO, sE = _slope(f2O, L), _slope(f1E, L)
    gap = sE - sO if sO is not None and sE is not None else None
    closed = example2_gap_formula(n, k, r, a)
    return CounterexampleReport(
        "example2",
        (("v(E)", vE), ("v(F2(O))", f2O), ("v(F1(E))", f1E)),
        (("mu(F1(E))", sE), ("mu(F2(O))", sO)),
        gap is not None and gap > 0,
        (("kn >= a > r", k * n >= a > r), ("1 + k(r+a) < k^2 n", 1 + k * (r + a) < k * k * n)),
        {"gap": gap, "gap_closed_form": closed, "n": n, "k": k, "r": r, "a": a},
        ("v(F1(E)) = -fm_apply(v(E)); v(F2(O)) = fm_apply(v(O))",),
    )


def lemma_counter_report(r: int, k: int, n: int, s: int) -> CounterexampleReport:
    """Abelian, ``NS = ZH``: ``E`` extends ``F(kH)`` by ``O(kH)`` with ``d = kr + 1``."""
    if r < 1 or k < 1 or n < 1:
        raise CounterexampleError("r, k, n must be positive")
    ctx = poincare_context(n)
    L = ctx.ns_x
    d = k * r + 1
    a = Fraction(d * d * n - s, r)
    lower, upper = d * n, (d * d - Fraction((d - 1) ** 2, r)) * n - 2 * r
    vOk = line_bundle((k,), L, SurfaceKind.ABELIAN)
    vF = MukaiVector(r - 1, (1,), Fraction(-(s - n), r))
    vE = MukaiVector(r, (d,), a)
    vFk = twist(vF, (k,), L)
    chiFk = chi_twisted(TwistData.trivial(1), vFk, SurfaceKind.ABELIAN, L)
    imO, imE = fm_apply(vOk, ctx), fm_apply(vE, ctx)     # IT_0: sign +
    sO, sE = _slope(imO, L), _slope(imE, L)
    gap = sO - sE if sE is not None else None
    closed = Fraction(2 * (s - d * n), k * (d * d * n - s)) if d * d * n != s else None
    return CounterexampleReport(
        "lemma_counter",
        (("v(E)", vE), ("v(O(kH))", vOk), ("v(F(kH))", vFk),
         ("v(F0(O(kH)))", imO), ("v(F0(E))", imE)),
        (("mu(F0(O(kH)))", sO), ("mu(F0(E))", sE)),
        gap is not None and gap >= 0,
        (("a integral", a.denominator == 1), ("dn <= s", lower <= s),
         ("s <= upper", s <= upper), ("E = O(kH) + F(kH)", vE == vOk + vFk)),
        {"d": d, "a": a, "lower": Fraction(lower), "upper": upper, "gap": gap,
         "gap_closed_form": closed, "chi(F(kH))": chiFk, "r": r, "k": k, "n": n, "s": s},
        () if a.denominator == 1 else ("instance invalid: a is not an integer",),
    )
