"""Brute-force checks of the destabilizer lemmas, plus two lattice utilities.

Candidates for a destabilizing subobject ``F1`` of the image are written in
the coordinates ``(l1, a1, d1, D1)`` of the target side.  They range over the
superset ``r0*a1, r0*l1 in Z`` and ``d1 in (1/(2 n r0)) Z`` of the true lattice,
so an empty violation list is a sound statement.  The square of a candidate is
``2n d1^2 - 2 r0 l1 a1 + (D1^2)``.

Every violation of the claims needs ``l1 > 0`` and ``a1 > 0``.  With
``l1, a1 >= 1/r0`` the stable floor ``square >= -2 eps`` forces
``a1, l1 <= n d1^2 + eps``, which is where the certified caps come from.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd, isqrt
from typing import Iterator, Sequence

from .criteria import (
    CriterionKind, Instance, evaluate_instance, lemma_key0_bound, lemma_key_bound,
)
from .fm import FMContext, FMCoordinates
from .lattice import NSLattice, ns_class

INFINITE = "infinite"


class OracleError(ValueError):
    pass


class Claim(enum.Enum):
    KeyPart1 = "KeyPart1"
    KeyPart2 = "KeyPart2"
    KeyRem1 = "KeyRem1"
    KeyRem2 = "KeyRem2"
    Key0Part1 = "Key0Part1"
    Key0Part2 = "Key0Part2"
    Key0Rem1 = "Key0Rem1"
    Key0Rem2 = "Key0Rem2"


class Region(enum.Enum):
    KEY = "key"          # 0 < d1 < d and d1/a1 <= d/a
    EDGE = "edge"        # d1 = d
    UPTO = "upto"        # 0 < d1 <= d, no slope condition


class FloorMode(enum.Enum):
    STABLE = "stable"        # square >= -2 eps
    BOGOMOLOV = "bogomolov"  # square >= -2 eps gcd(r0 a1, r0 l1)^2


@dataclass(frozen=True)
class CandidateVector:
    a1: Fraction
    l1: Fraction
    d1: Fraction
    D1: tuple
    square: Fraction
    floor: Fraction

    def as_dict(self) -> dict:
        return {"a1": self.a1, "l1": self.l1, "d1": self.d1, "D1": list(self.D1),
                "square": self.square, "floor": self.floor}


@dataclass(frozen=True)
class ViolationRecord:
    candidate: CandidateVector
    claim: Claim
    detail: str

    def as_dict(self) -> dict:
        return {"claim": self.claim.value, "detail": self.detail,
                "candidate": self.candidate.as_dict()}


@dataclass(frozen=True)
class Constraints:
    """Search box.  ``None`` caps mean: use the certified caps (stable floor only)."""

    a1_cap: int | None = None
    l1_cap: int | None = None
    l1_min: Fraction = Fraction(0)
    region: Region = Region.KEY
    floor: FloorMode = FloorMode.STABLE
    D1_list: tuple | None = None


def certified_cap(ctx: FMContext, d) -> int:
    """Bound on ``a1`` and ``l1`` valid whenever both are at least ``1/r0``."""
    x = ctx.n * Fraction(d) ** 2 + ctx.kind.epsilon
    return -((-x.numerator) // x.denominator)


def _d1_list(ctx, coords, D1_list):
    if D1_list is not None:
        out = sorted(ns_class(D) for D in D1_list)
    elif ctx.ns_x.rank == 1:
        out = [ctx.ns_x.zero()]
    else:
        raise OracleError("NS rank > 1 needs an explicit D1 list")
    for D in out:
        if ctx.ns_x.degree(D) != 0:
            raise OracleError(f"D1 = {D} is not orthogonal to H")
    return out


def enumerate_candidates(ctx: FMContext, v_coords: FMCoordinates,
                         constraints: Constraints = Constraints()) -> Iterator[CandidateVector]:
    """Candidates in the requested region, in canonical ``(d1, a1, l1, D1)`` order."""
    d, a = v_coords.d, v_coords.a
    if d <= 0 or (a <= 0 and constraints.region is Region.KEY):
        raise OracleError("enumeration needs d > 0 (and a > 0 for the key region)")
    r0, n, eps = ctx.r0, ctx.n, ctx.kind.epsilon
    a_cap, l_cap = constraints.a1_cap, constraints.l1_cap
    stable = constraints.floor is FloorMode.STABLE
    if a_cap is None or l_cap is None:
        if not stable:
            raise OracleError("the Bogomolov floor needs explicit caps on a1 and l1")
        if constraints.l1_min < Fraction(1, r0):
            raise OracleError("certified caps need l1_min >= 1/r0; pass explicit caps")
        cap = certified_cap(ctx, d)
        a_cap = cap if a_cap is None else a_cap
        l_cap = cap if l_cap is None else l_cap
    D1s = _d1_list(ctx, v_coords, constraints.D1_list)
    D1sq = [ctx.ns_x.dot(D, D) for D in D1s]

    q = 2 * n * r0
    t_hi = d * q
    if t_hi.denominator != 1:
        raise OracleError(f"d = {d} is not in (1/(2 n r0)) Z")
    t_hi = int(t_hi)
    if constraints.region is Region.EDGE:
        t_range = [t_hi]
    elif constraints.region is Region.KEY:
        t_range = range(1, t_hi)
    else:
        t_range = range(1, t_hi + 1)
    A_hi = r0 * a_cap
    L_lo = -((-constraints.l1_min * r0).numerator // (constraints.l1_min * r0).denominator)
    L_hi = r0 * l_cap
    scale = 2 * n * r0 * r0  # square * scale = t^2 - 4 n r0 A L + scale * D1^2
    for t in t_range:
        d1 = Fraction(t, q)
        if constraints.region is Region.KEY:
            # d1/a1 <= d/a  <=>  a1 >= a d1 / d
            bound = a * d1 / d * r0
            A_lo = max(1, -((-bound.numerator) // bound.denominator))
        elif constraints.region is Region.EDGE:
            bound = a * r0
            A_lo = max(1, -((-bound.numerator) // bound.denominator)) if a > 0 else 1
        else:
            A_lo = 1
        for A in range(A_lo, A_hi + 1):
            a1 = Fraction(A, r0)
            for D, Dsq in zip(D1s, D1sq):
                base = t * t + scale * Dsq
                hi = L_hi
                if stable and A > 0:
                    # base - 4 n r0 A L >= -2 eps scale
                    top = base + 2 * eps * scale
                    cut = top // (4 * n * r0 * A)
                    hi = min(hi, cut)
                for L in range(L_lo, hi + 1):
                    S = base - 4 * n * r0 * A * L
                    sq = Fraction(S, scale)
                    if stable:
                        floor = Fraction(-2 * eps)
                    else:
                        g = gcd(A, L)
                        floor = Fraction(-2 * eps * g * g)
                    if sq < floor:
                        continue
                    yield CandidateVector(a1, Fraction(L, r0), d1, D, sq, floor)


def _sq_from_coords(ctx, c: FMCoordinates) -> Fraction:
    return 2 * ctx.n * c.d ** 2 - 2 * ctx.r0 * c.l * c.a + ctx.ns_x.dot(c.D, c.D)


def _instance(ctx, c: FMCoordinates) -> Instance:
    return Instance(c.l, c.a, c.d, _sq_from_coords(ctx, c), ctx.ns_x.dot(c.D, c.D),
                    ctx.r0, ctx.n, ctx.kind.epsilon, ctx.ns_x.rank == 1)


def _key_violations(c, cand) -> list:
    l, a, d = c.l, c.a, c.d
    l1, a1, d1 = cand.l1, cand.a1, cand.d1
    out = []
    if 0 < d1 < d:
        if a1 * d >= a * d1 and l1 * d > l * d1:
            out.append((Claim.KeyPart1, f"l1 = {l1} > l d1/d = {l * d1 / d}"))
        if l1 * d > l * d1 and a1 * d >= a * d1:
            out.append((Claim.KeyPart2, f"a1 = {a1} >= a d1/d = {a * d1 / d}"))
    elif d1 == d:
        if a1 >= a and l1 > l:
            out.append((Claim.KeyRem1, f"l1 = {l1} > l = {l}"))
        if l1 > l and a1 >= a:
            out.append((Claim.KeyRem2, f"a1 = {a1} >= a = {a}"))
    return out


def _key0_violations(c, cand, rem: bool) -> list:
    a, d = c.a, c.d
    l1, a1, d1 = cand.l1, cand.a1, cand.d1
    out = []
    if 0 < d1 < d:
        if a1 * d >= a * d1 and l1 > 0:
            out.append((Claim.Key0Part1, f"l1 = {l1} > 0"))
        if l1 > 0 and a1 * d >= a * d1:
            out.append((Claim.Key0Part2, f"a1/d1 = {a1 / d1} >= a/d = {a / d}"))
    elif d1 == d and rem:
        if a1 >= a and l1 > 0:
            out.append((Claim.Key0Rem1, f"l1 = {l1} > 0"))
        if l1 > 0 and a1 >= a:
            out.append((Claim.Key0Rem2, f"a1 = {a1} >= a = {a}"))
    return out


def verify_key_claims(ctx: FMContext, v_coords: FMCoordinates, caps: dict | None = None, *,
                      check_precondition: bool = True,
                      floor: FloorMode = FloorMode.STABLE,
                      D1_list: Sequence | None = None) -> list:
    """Violations of the destabilizer lemmas for ``v``.

    ``l > 0`` checks the positive-rank claims (needs ``d > N``); ``l = 0`` checks
    the rank-0 claims (needs ``a > N``; the ``d1 = d`` claims need ``a > N + 1``).
    Only candidates with ``l1 >= 1/r0`` are enumerated: no claim can fail otherwise.
    """
    caps = dict(caps or {})
    c = v_coords
    inst = _instance(ctx, c)
    if c.l > 0:
        pre = evaluate_instance(CriterionKind.LemmaKey, inst)
        rem = True
    elif c.l == 0:
        pre = evaluate_instance(CriterionKind.LemmaKey0, inst)
        rem = c.a > lemma_key0_bound(inst) + 1
    else:
        raise OracleError(f"l = {c.l} < 0: no claim applies")
    if check_precondition and not pre.satisfied:
        raise OracleError(f"precondition {pre.kind.value} fails: lhs {pre.lhs}, N {pre.threshold}")
    if not check_precondition:
        rem = True
    # every claim needs d1/a1 <= d/a, so the key and edge regions cover all violations
    records = []
    for region in (Region.KEY, Region.EDGE):
        cons = Constraints(a1_cap=caps.get("a1"), l1_cap=caps.get("l1"),
                           l1_min=Fraction(1, ctx.r0), region=region, floor=floor,
                           D1_list=tuple(D1_list) if D1_list is not None else None)
        for cand in enumerate_candidates(ctx, c, cons):
            found = _key_violations(c, cand) if c.l > 0 else _key0_violations(c, cand, rem)
            records.extend(ViolationRecord(cand, claim, detail) for claim, detail in found)
    return records


def jhf_identity_check(parts: Sequence, r0: int, n: int, l, d, a) -> bool:
    """Telescoping identity for a filtration with proportional factors.

    ``parts`` are ``(l_i, d_i, a_i)``; each term is ``(2n d^2 - 2 r0 l a)/l``.
    """
    l, d, a = Fraction(l), Fraction(d), Fraction(a)
    parts = [tuple(Fraction(x) for x in p) for p in parts]
    if not parts:
        raise OracleError("no parts")
    if any(p[0] <= 0 for p in parts):
        raise OracleError("every l_i must be positive")
    if (sum(p[0] for p in parts), sum(p[1] for p in parts), sum(p[2] for p in parts)) != (l, d, a):
        raise OracleError("parts do not sum to (l, d, a)")
    if any(p[0] * d != p[1] * l for p in parts):
        raise OracleError("parts are not proportional: l_i/l != d_i/d")

    def term(li, di, ai):
        return (2 * n * di * di - 2 * r0 * li * ai) / li

    return sum(term(*p) for p in parts) == term(l, d, a)


# shortest vector on the orthogonal complement of H ----------------------------

def _xgcd(a: int, b: int) -> tuple:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hperp_basis(lat: NSLattice) -> list:
    """Integral basis of ``{D in NS : (D, H) = 0}`` via unimodular column moves."""
    rho = lat.rank
    f = [sum(lat.gram[i][j] * lat.H[j] for j in range(rho)) for i in range(rho)]
    cols = [[int(i == j) for i in range(rho)] for j in range(rho)]
    for j in range(1, rho):
        f0, fj = f[0], f[j]
        if fj == 0:
            continue
        g, x, y = _xgcd(f0, fj)
        c0, cj = cols[0], cols[j]
        cols[0] = [x * p + y * q for p, q in zip(c0, cj)]
        cols[j] = [(fj // g) * p - (f0 // g) * q for p, q in zip(c0, cj)]
        f[0], f[j] = g, 0
    return [tuple(c) for c in cols[1:]] if f[0] != 0 else [tuple(c) for c in cols]


def _positive_definite(P) -> bool:
    m = len(P)
    A = [[Fraction(x) for x in row] for row in P]
    for k in range(m):
        if A[k][k] <= 0:
            return False
        for i in range(k + 1, m):
            f = A[i][k] / A[k][k]
            A[i] = [x - f * y for x, y in zip(A[i], A[k])]
    return True


def shortest_Hperp(lat: NSLattice, cap: int = 50):
    """``min{-(D^2) : (D, H) = 0, D != 0}``, or ``INFINITE`` when ``H^perp = 0``."""
    if lat.rank > 4:
        raise OracleError("shortest_Hperp supports NS rank <= 4")
    if lat.rank == 1:
        return INFINITE
    from .fm import _mat_inv
    B = hperp_basis(lat)
    m = len(B)
    P = [[-lat.dot(B[i], B[j]) for j in range(m)] for i in range(m)]
    if not _positive_definite(P):
        raise OracleError("H^perp is not negative definite")
    Pinv = _mat_inv(P)
    m0 = min(P[i][i] for i in range(m))
    bounds = []
    for i in range(m):
        x = m0 * Pinv[i][i]
        bounds.append(isqrt(x.numerator * x.denominator) // x.denominator)
    if max(bounds) > cap:
        raise OracleError(f"certified search box {bounds} exceeds cap {cap}")
    best = None
    for x in product(*(range(-b, b + 1) for b in bounds)):
        if not any(x):
            continue
        val = sum(P[i][j] * x[i] * x[j] for i in range(m) for j in range(m))
        if best is None or val < best:
            best = val
    return Fraction(best)
