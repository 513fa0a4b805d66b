from fractions import Fraction
from itertools import product
from math import gcd

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from mukaifm.fm import FMCoordinates, decompose, k3_example_context, poincare_context
from mukaifm.lattice import MukaiVector, NSLattice, mukai
from mukaifm.oracle import (
    INFINITE, Claim, Constraints, FloorMode, OracleError, Region, certified_cap,
    enumerate_candidates, hperp_basis, jhf_identity_check, shortest_Hperp,
    verify_key_claims,
)
from mukaifm.twisted import bogomolov_floor

from conftest import HYPERBOLIC


def naive_candidates(ctx, c, a_cap, l_cap, region, floor_mode):
    """Plain triple loop over the rational grid; no cuts."""
    q, r0, n, eps = 2 * ctx.n * ctx.r0, ctx.r0, ctx.n, ctx.kind.epsilon
    out = set()
    for t, A, L in product(range(1, int(c.d * q) + 1), range(1, r0 * a_cap + 1),
                           range(0, r0 * l_cap + 1)):
        d1, a1, l1 = Fraction(t, q), Fraction(A, r0), Fraction(L, r0)
        if region is Region.KEY and not (d1 < c.d and a1 * c.d >= c.a * d1):
            continue
        if region is Region.EDGE and not (d1 == c.d and a1 >= c.a):
            continue
        sq = 2 * n * d1 * d1 - 2 * r0 * l1 * a1
        g = gcd(A, L)
        fl = -2 * eps if floor_mode is FloorMode.STABLE else -2 * eps * g * g
        if sq >= fl:
            out.add((d1, a1, l1, sq))
    return out


CTXS = [poincare_context(1), poincare_context(2), k3_example_context(1, 1),
        k3_example_context(1, 2)]


@pytest.mark.parametrize("ctx", CTXS, ids=lambda c: f"{c.label}{c.r0}")
@pytest.mark.parametrize("region", [Region.KEY, Region.EDGE, Region.UPTO])
@pytest.mark.parametrize("floor", list(FloorMode))
def test_enumeration_matches_naive(ctx, region, floor):
    c = FMCoordinates(Fraction(1), Fraction(3), Fraction(2), (0,))
    cons = Constraints(a1_cap=4, l1_cap=3, region=region, floor=floor)
    got = [(x.d1, x.a1, x.l1, x.square) for x in enumerate_candidates(ctx, c, cons)]
    assert len(got) == len(set(got))
    assert set(got) == naive_candidates(ctx, c, 4, 3, region, floor)


def test_canonical_order():
    c = FMCoordinates(Fraction(1), Fraction(3), Fraction(2), (0,))
    cons = Constraints(a1_cap=4, l1_cap=3, region=Region.UPTO)
    keys = [(x.d1, x.a1, x.l1) for x in enumerate_candidates(poincare_context(1), c, cons)]
    assert keys == sorted(keys)


def test_certified_caps_need_stable_floor():
    c = FMCoordinates(Fraction(1), Fraction(3), Fraction(2), (0,))
    with pytest.raises(OracleError):
        list(enumerate_candidates(poincare_context(1), c,
                                  Constraints(floor=FloorMode.BOGOMOLOV, l1_min=Fraction(1))))
    with pytest.raises(OracleError):
        list(enumerate_candidates(poincare_context(1), c, Constraints()))


def test_certified_cap_is_sound():
    # with l1, a1 >= 1/r0 the floor forces a1 l1 <= n d1^2 / r0 + eps / r0
    for ctx in CTXS:
        for d in (1, 2, Fraction(5, 2 * ctx.n * ctx.r0)):
            cap = certified_cap(ctx, d)
            assert cap >= ctx.n * Fraction(d) ** 2 + ctx.kind.epsilon


class TestVerify:
    def test_lemma_key_region(self):
        ctx = poincare_context(1)
        assert verify_key_claims(ctx, decompose(mukai(1, 5, 24), ctx)) == []

    def test_rank0(self):
        ctx = poincare_context(1)
        assert verify_key_claims(ctx, decompose(mukai(0, 3, 10), ctx)) == []

    def test_negative_controls(self):
        ctx = poincare_context(1)
        for v in (mukai(1, 2, 1), mukai(0, 3, 7)):
            with pytest.raises(OracleError, match="precondition"):
                verify_key_claims(ctx, decompose(v, ctx))
            recs = verify_key_claims(ctx, decompose(v, ctx), check_precondition=False)
            assert recs
            for rec in recs:
                assert rec.candidate.square >= rec.candidate.floor

    def test_negative_control_claims(self):
        ctx = poincare_context(1)
        recs = verify_key_claims(ctx, decompose(mukai(1, 2, 1), ctx), check_precondition=False)
        assert {r.claim for r in recs} <= {Claim.KeyPart1, Claim.KeyPart2, Claim.KeyRem1,
                                           Claim.KeyRem2}

    def test_negative_l(self):
        ctx = poincare_context(1)
        with pytest.raises(OracleError):
            verify_key_claims(ctx, decompose(mukai(-1, 5, 24), ctx))

    def test_k3_context(self):
        ctx = k3_example_context(1, 1)
        c = FMCoordinates(Fraction(1), Fraction(35), Fraction(6), (0,))
        assert verify_key_claims(ctx, c) == []


@settings(max_examples=300)
@given(st.lists(st.tuples(st.integers(1, 5), st.integers(-20, 20)), min_size=1, max_size=5),
       st.integers(1, 5), st.integers(1, 4), st.integers(1, 3))
def test_jhf_identity(parts, dstep, r0, n):
    # proportional parts: d_i = dstep * l_i / r0 keeps l_i/l = d_i/d
    rows = [(Fraction(li, r0), Fraction(dstep * li, r0), Fraction(ai)) for li, ai in parts]
    l = sum(p[0] for p in rows)
    d = sum(p[1] for p in rows)
    a = sum(p[2] for p in rows)
    assert jhf_identity_check(rows, r0, n, l, d, a)


def test_jhf_rejects_bad_input():
    with pytest.raises(OracleError):
        jhf_identity_check([(1, 1, 0), (1, 2, 0)], 1, 1, 2, 3, 0)
    with pytest.raises(OracleError):
        jhf_identity_check([(1, 1, 0)], 1, 1, 2, 2, 0)


@given(st.integers(-30, 30), st.integers(-30, 30), st.integers(1, 3))
def test_bogomolov_floor_formula(a, l, r0):
    c = FMCoordinates(Fraction(l, r0), Fraction(a, r0), Fraction(0), (0,))
    assert bogomolov_floor(c, r0, k3_example_context(1, 1).kind) == -2 * gcd(a, l) ** 2
    assert bogomolov_floor(c, r0, poincare_context(1).kind) == 0


class TestShortest:
    def test_rank_one(self):
        assert shortest_Hperp(NSLattice.rank_one(3)) == INFINITE

    def test_hyperbolic(self):
        # H = (2,1) on U: H^perp is spanned by (2,-1), square -4
        assert shortest_Hperp(HYPERBOLIC) == 4
        assert all(HYPERBOLIC.degree(b) == 0 for b in hperp_basis(HYPERBOLIC))

    def test_diagonal(self):
        L = NSLattice(((2, 0), (0, -2)), (1, 0))
        assert shortest_Hperp(L) == 2

    def test_matches_brute_force(self):
        L = NSLattice(((2, 0, 0), (0, -2, 1), (0, 1, -4)), (1, 0, 0))
        best = min(-L.dot(x, x) for x in product(range(-6, 7), repeat=3)
                   if any(x) and L.degree(x) == 0)
        assert shortest_Hperp(L) == best

    def test_not_negative_definite(self):
        L = NSLattice(((2, 0, 0), (0, 0, 1), (0, 1, 0)), (1, 0, 0))
        with pytest.raises(OracleError):
            shortest_Hperp(L)
