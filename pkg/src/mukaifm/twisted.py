"""Twisted rank, degree and Euler characteristic, and the orders they induce.

A twisting class ``G`` in ``K(X) (x) Q`` enters only through its Mukai vector.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .lattice import (
    LatticeError, MukaiVector, NSLattice, SurfaceKind, dual, mukai_tensor,
    pairing, structure_sheaf,
)


class Order(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class TwistData:
    g: MukaiVector

    def __post_init__(self):
        if self.g.r <= 0:
            raise LatticeError(f"twisting class needs positive rank, got {self.g.r}")

    @classmethod
    def trivial(cls, ns_rank: int, kind: SurfaceKind = SurfaceKind.ABELIAN) -> "TwistData":
        """No twist: ``G = O_X``, whose Mukai vector is ``(1, 0, eps)``."""
        return cls(structure_sheaf(ns_rank, kind))


def rk_twisted(G: TwistData, x: MukaiVector) -> Fraction:
    return G.g.r * x.r


def deg_twisted(G: TwistData, x: MukaiVector, L: NSLattice) -> Fraction:
    return G.g.r * L.degree(x.c1) - x.r * L.degree(G.g.c1)


def chi_twisted(G: TwistData, x: MukaiVector, kind: SurfaceKind,
                L: NSLattice) -> Fraction:
    """``chi(G^dual (x) x) = -<v(G^dual (x) x), v(O_X)>``."""
    y = mukai_tensor(dual(G.g), x, kind, L)
    return -pairing(y, structure_sheaf(L.rank, kind), L)


def slope_twisted(G: TwistData, x: MukaiVector, L: NSLattice) -> Fraction:
    rk = rk_twisted(G, x)
    if rk == 0:
        raise LatticeError("twisted slope of a rank-0 class")
    return deg_twisted(G, x, L) / rk


def reduced_hilbert_coefficients(G: TwistData, x: MukaiVector, kind: SurfaceKind,
                                 L: NSLattice) -> tuple:
    """Coefficients ``(c2, c1, c0)`` of ``m -> chi_G(x(mH)) / rk_G(x)``.

    With ``y = v(G^dual (x) x) = (R, C, A)`` the twist by ``mH`` is
    ``(R, C + mRH, A + m(C,H) + m^2 R n)`` and ``chi = a + eps*R``.
    """
    y = mukai_tensor(dual(G.g), x, kind, L)
    R = y.r
    if R == 0:
        raise LatticeError("zero twisted rank")
    return (Fraction(L.n), L.degree(y.c1) / R, (y.a + kind.epsilon * R) / R)


def _cmp(p, q) -> Order:
    for s, t in zip(p, q):
        if s != t:
            return Order.GREATER if s > t else Order.LESS
    return Order.EQUAL


def hilbert_compare(G: TwistData, f: MukaiVector, e: MukaiVector,
                    L: NSLattice, kind: SurfaceKind) -> Order:
    """Eventual order of the reduced twisted Hilbert polynomials of ``f`` and ``e``."""
    return _cmp(reduced_hilbert_coefficients(G, f, kind, L),
                reduced_hilbert_coefficients(G, e, kind, L))


def slope_compare(G: TwistData, f: MukaiVector, e: MukaiVector,
                  L: NSLattice) -> Order:
    """Order by twisted slope only (mu-stability)."""
    return _cmp((slope_twisted(G, f, L),), (slope_twisted(G, e, L),))


def bogomolov_floor(coords, r0: int, kind: SurfaceKind) -> Fraction:
    """Lower bound ``-2*eps*g^2``, ``g = gcd(a*r0, l*r0)``, for twisted-semistable classes.

    ``coords`` is anything with ``l`` and ``a`` attributes (normally
    :class:`mukaifm.fm.FMCoordinates`).
    """
    ar0, lr0 = Fraction(coords.a) * r0, Fraction(coords.l) * r0
    if ar0.denominator != 1 or lr0.denominator != 1:
        raise LatticeError(f"a*r0 = {ar0} and l*r0 = {lr0} must be integers")
    g = gcd(int(ar0), int(lr0))
    return Fraction(-2 * kind.epsilon * g * g)


def satisfies_bogomolov(sq, coords, r0: int, kind: SurfaceKind) -> bool:
    return Fraction(sq) >= bogomolov_floor(coords, r0, kind)
