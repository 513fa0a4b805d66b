from fractions import Fraction

import pytest
from hypothesis import assume, given
import hypothesis.strategies as st

from mukaifm.criteria import (
    CriterionError, CriterionKind as K, Instance, evaluate_criterion,
    evaluate_general_asymptotic, evaluate_instance, key_special_certificate,
    lemma_key_bound,
)
from mukaifm.fm import k3_example_context, poincare_context
from mukaifm.lattice import MukaiVector, mukai

from conftest import HYPERBOLIC

P1 = poincare_context(1)

STRICT_GENERAL = [K.LemmaKey, K.PropWIT2, K.PropIT0, K.CorIT0_1, K.CorIT0_2,
                  K.ThmAsymptotic, K.PropAsymptotic3, K.ThmAsymptotic2]


class TestExamples:
    def test_asymptotic_special(self):
        rep = evaluate_criterion(K.ThmAsymptoticSpecial, P1, mukai(1, 10, 99))
        assert rep.satisfied
        assert (rep.computed["s"], rep.computed["rs"], rep.computed["dn"]) == (1, 1, 10)

    def test_wit_birat(self):
        rep = evaluate_criterion(K.PropWitBirat, P1, mukai(2, 1, 1))
        assert rep.computed["<v^2>"] == -2 and rep.satisfied

    def test_counter_domain(self):
        rep = evaluate_criterion(K.LemmaCounterDomain, poincare_context(2), None,
                                 {"r": 2, "k": 1, "s": 8})
        assert rep.satisfied
        assert (rep.computed["d"], rep.computed["lower"], rep.computed["upper"]) == (3, 6, 10)

    def test_counter_domain_from_vector(self):
        rep = evaluate_criterion(K.LemmaCounterDomain, poincare_context(2), mukai(2, 3, 5))
        assert rep.inputs["s"] == 8 and rep.satisfied

    def test_cor_it0_boundary(self):
        at = evaluate_criterion(K.CorIT0_1, P1, mukai(1, 5, 24))
        assert at.threshold == 5 and at.lhs == 5 and not at.satisfied
        assert evaluate_criterion(K.CorIT0_1, P1, mukai(1, 6, 35)).satisfied

    def test_rank0_lemma(self):
        assert evaluate_criterion(K.Rank0LemmaG, P1, mukai(0, 3, 7)).satisfied
        assert not evaluate_criterion(K.Rank0LemmaF, P1, mukai(0, 3, 7)).satisfied
        assert evaluate_criterion(K.Rank0LemmaF, P1, mukai(0, 3, 10)).satisfied

    def test_lemma_key(self):
        rep = evaluate_criterion(K.LemmaKey, P1, mukai(1, 5, 24))
        assert rep.threshold == Fraction(9, 2) and rep.satisfied

    def test_lemma_key0(self):
        rep = evaluate_criterion(K.LemmaKey0, P1, mukai(0, 3, 10))
        assert rep.threshold == 9 and rep.satisfied and not rep.computed["a>N+1"]
        assert not evaluate_criterion(K.LemmaKey0, P1, mukai(0, 3, 7)).satisfied

    def test_rank0_props(self):
        for kind in (K.PropIT0_2, K.PropRk0):
            rep = evaluate_criterion(kind, P1, mukai(0, 3, 11))
            assert rep.threshold == 10 and rep.satisfied
            assert not evaluate_criterion(kind, P1, mukai(0, 3, 10)).satisfied

    def test_asymptotic_needs_small_l(self):
        rep = evaluate_criterion(K.ThmAsymptotic, P1, mukai(3, 100, 3333))
        assert rep.inequality and not rep.hypotheses["l r0 in {1,2}"] and not rep.satisfied

    def test_remark_t1(self):
        # s = d^2 n - a = 1, 2(d-1)n = 2
        assert evaluate_criterion(K.RemarkT1, P1, mukai(1, 2, 3)).satisfied
        assert not evaluate_criterion(K.RemarkT1, P1, mukai(1, 1, 0)).satisfied

    def test_remark_rank3(self):
        rep = evaluate_criterion(K.RemarkRank3, P1, mukai(2, 3, 4))
        assert rep.computed["k"] == 1 and rep.computed["r'"] == 1
        # s = 9 - 8 = 1, dn = 3 > r's = 1
        assert rep.satisfied
        assert not evaluate_criterion(K.RemarkRank3, P1, mukai(4, 3, 2)).satisfied

    def test_key_special(self):
        rep = evaluate_criterion(K.PropKeySpecial, P1, mukai(6, 4, 2))
        k, rp, dp = rep.computed["k"], rep.computed["r'"], rep.computed["d'"]
        assert (k, rp, dp) == (2, 2, 1)

    def test_unknown_tag(self):
        with pytest.raises(CriterionError, match="unknown criterion"):
            evaluate_criterion("Nope", P1, mukai(1, 1, 1))

    def test_special_needs_rank_one(self):
        ctx = poincare_context(lattice=HYPERBOLIC)
        with pytest.raises(CriterionError):
            evaluate_criterion(K.ThmAsymptoticSpecial, ctx, MukaiVector(1, (1, 1), 1))

    def test_rank0_lemma_shape(self):
        with pytest.raises(CriterionError):
            evaluate_criterion(K.Rank0LemmaG, P1, mukai(1, 3, 7))

    def test_special_records_surface(self):
        ctx = k3_example_context(1, 1)
        rep = evaluate_criterion(K.ThmAsymptoticSpecial, ctx, mukai(1, 10, 99))
        assert not rep.hypotheses["abelian"] and not rep.satisfied

    def test_cor_it0_2_needs_general_flag(self):
        ctx = poincare_context(lattice=HYPERBOLIC)
        v = MukaiVector(1, (10, 5), 3)
        with pytest.raises(CriterionError):
            evaluate_criterion(K.CorIT0_2, ctx, v)
        rep = evaluate_criterion(K.CorIT0_2, ctx, v, {"h_general": False})
        assert not rep.hypotheses["H general"]


class TestSideData:
    def test_remark_general_rank_one(self):
        rep = evaluate_criterion(K.RemarkGeneral, P1, mukai(1, 10, 99))
        assert rep.computed["hperp_min"] == "infinite"
        assert any("vacuous" in n for n in rep.notes)
        assert rep.satisfied  # d = 10 > N = 9/2

    def test_remark_general_rank_two(self):
        ctx = poincare_context(lattice=HYPERBOLIC)
        # D = 0 direction: v = (1, dH, a) with H = (2, 1)
        v = MukaiVector(1, (20, 10), 396)
        rep = evaluate_criterion(K.RemarkGeneral, ctx, v)
        assert rep.computed["hperp_min"] == 4
        sq = 4 * 100 - 2 * 396
        assert rep.computed["rhs"] == Fraction(sq, 4)
        assert rep.satisfied == (4 > Fraction(sq, 4) and rep.computed["d>N"])

    def test_general_asymptotic_conjunction(self):
        rep = evaluate_general_asymptotic(P1, mukai(1, 6, 35))
        assert rep.satisfied
        assert not evaluate_general_asymptotic(P1, mukai(1, 5, 24)).satisfied

    def test_star1_rank_one(self):
        rep = evaluate_criterion(K.Star1, P1, mukai(0, 3, 10))
        assert rep.computed["<v(G),v>"] == -10 and rep.computed["|D_xi|"] == 4
        assert rep.satisfied

    def test_star1_explicit_list(self):
        ctx = poincare_context(lattice=HYPERBOLIC)
        v = MukaiVector(0, (1, 0), 1)  # xi = f, (f, H) = 1
        # xi1 = f - 2g... chosen so that c*xi1 - b*xi is H-orthogonal for b = 0
        rep = evaluate_criterion(K.Star1, ctx, v, {"d_xi": [[-2, 1]]})
        assert rep.computed["failures"] and not rep.satisfied
        ok = evaluate_criterion(K.Star1, ctx, v, {"d_xi": [[0, 0], [1, 0]]})
        assert ok.satisfied

    def test_star1_needs_list_on_rank_two(self):
        ctx = poincare_context(lattice=HYPERBOLIC)
        with pytest.raises(CriterionError):
            evaluate_criterion(K.Star1, ctx, MukaiVector(0, (1, 0), 1))


@given(st.integers(1, 60), st.integers(1, 60))
def test_key_special_certificate(r, d):
    k, rp, dp = key_special_certificate(r, d)
    from math import gcd
    assert k == gcd(r, d) and r * dp - rp * d == -k and 0 <= rp < r


inst_strategy = st.builds(
    Instance,
    l=st.fractions(min_value=Fraction(1, 3), max_value=3, max_denominator=3),
    a=st.integers(1, 50), d=st.fractions(min_value=Fraction(1, 12), max_value=60, max_denominator=12),
    sq=st.integers(-10, 40), D2=st.integers(-6, 0), r0=st.integers(1, 3), n=st.integers(1, 3),
)


@given(inst_strategy, st.fractions(min_value=0, max_value=20))
def test_monotone_in_d(inst, step):
    bigger = Instance(inst.l, inst.a, inst.d + step, inst.sq, inst.D2, inst.r0, inst.n)
    for kind in STRICT_GENERAL:
        if evaluate_instance(kind, inst, {"h_general": True}).satisfied:
            assert evaluate_instance(kind, bigger, {"h_general": True}).satisfied


@given(inst_strategy)
def test_boundary_is_unsatisfied(inst):
    for kind in STRICT_GENERAL:
        thr = evaluate_instance(kind, inst).threshold
        lhs_scale = 1 if kind is K.LemmaKey else inst.r0 * inst.l
        at = Instance(inst.l, inst.a, thr * lhs_scale, inst.sq, inst.D2, inst.r0, inst.n)
        rep = evaluate_instance(kind, at)
        assert rep.lhs == rep.threshold and not rep.satisfied


@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 4))
def test_counter_domain_excludes_asymptotic_special(r, k, n):
    ctx = poincare_context(n)
    d = k * r + 1
    for s in range(d * n, d * d * n):
        dom = evaluate_criterion(K.LemmaCounterDomain, ctx, None, {"r": r, "k": k, "s": s})
        if not dom.satisfied:
            continue
        v = mukai(r, d, dom.computed["a"])
        assert not evaluate_criterion(K.ThmAsymptoticSpecial, ctx, v).satisfied


def test_lemma_key_bound_formula():
    inst = Instance(2, 1, 1, 10, -2, 1, 1)
    assert lemma_key_bound(inst) == max(Fraction(16) + Fraction(1, 2), 2 * 2 * 12)
