"""Exact arithmetic in the algebraic Mukai lattice of an abelian or K3 surface.

A Mukai vector is stored as ``(r, c1, a)``: rank, a Neron-Severi class given by
rational coordinates over the basis of an :class:`NSLattice`, and the
coefficient of the point class.  Everything is ``fractions.Fraction``; nothing
in this package touches floating point.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


class LatticeError(ValueError):
    pass


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; reject floats."""
    if isinstance(x, bool):
        raise LatticeError(f"not a rational number: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise LatticeError(f"not a rational number: {x!r}") from None
    raise LatticeError(f"not an exact rational: {x!r}")


class SurfaceKind(enum.Enum):
    ABELIAN = "abelian"
    K3 = "k3"

    @property
    def epsilon(self) -> int:
        return 0 if self is SurfaceKind.ABELIAN else 1

    @classmethod
    def parse(cls, name: str) -> "SurfaceKind":
        try:
            return cls(name.lower())
        except ValueError:
            raise LatticeError(f"unknown surface kind {name!r}") from None


NSClass = tuple  # tuple[Fraction, ...] over the NS basis


def ns_class(coords: Iterable) -> NSClass:
    return tuple(to_fraction(c) for c in coords)


@dataclass(frozen=True)
class NSLattice:
    """Neron-Severi lattice: integral Gram matrix plus the polarization ``H``."""

    gram: tuple
    H: tuple

    def __post_init__(self):
        gram = tuple(tuple(int(x) for x in row) for row in self.gram)
        H = tuple(int(x) for x in self.H)
        rho = len(gram)
        if rho == 0 or any(len(row) != rho for row in gram):
            raise LatticeError("gram must be a non-empty square matrix")
        if len(H) != rho:
            raise LatticeError(f"H has {len(H)} coordinates, lattice rank is {rho}")
        for i in range(rho):
            if gram[i][i] % 2:
                raise LatticeError("gram must have even diagonal")
            for j in range(i):
                if gram[i][j] != gram[j][i]:
                    raise LatticeError("gram must be symmetric")
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "H", H)
        h2 = self.dot(H, H)
        if h2 <= 0:
            raise LatticeError(f"(H^2) = {h2} is not positive")

    @classmethod
    def rank_one(cls, n: int) -> "NSLattice":
        """``NS = ZH`` with ``(H^2) = 2n``."""
        if n <= 0:
            raise LatticeError("n must be positive")
        return cls(((2 * n,),), (1,))

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def n(self) -> int:
        return int(self.dot(self.H, self.H)) // 2

    def zero(self) -> NSClass:
        return (Fraction(0),) * self.rank

    def h_class(self) -> NSClass:
        return tuple(Fraction(h) for h in self.H)

    def dot(self, x: Sequence, y: Sequence) -> Fraction:
        if len(x) != self.rank or len(y) != self.rank:
            raise LatticeError(
                f"coordinate length mismatch: {len(x)}, {len(y)} vs rank {self.rank}")
        g = self.gram
        return sum((x[i] * g[i][j] * y[j]
                    for i in range(self.rank) for j in range(self.rank) if g[i][j]),
                   Fraction(0))

    def degree(self, x: Sequence) -> Fraction:
        return self.dot(x, self.H)

    def is_rank_one_generated(self) -> bool:
        """True when ``NS = ZH`` with ``H`` the generator."""
        return self.rank == 1 and abs(self.H[0]) == 1


def _add(x, y):
    return tuple(a + b for a, b in zip(x, y))


def _scale(t, x):
    return tuple(t * a for a in x)


@dataclass(frozen=True)
class MukaiVector:
    r: Fraction
    c1: NSClass
    a: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", to_fraction(self.r))
        object.__setattr__(self, "c1", ns_class(self.c1))
        object.__setattr__(self, "a", to_fraction(self.a))

    def __add__(self, other: "MukaiVector") -> "MukaiVector":
        _check_same_rank(self, other)
        return MukaiVector(self.r + other.r, _add(self.c1, other.c1), self.a + other.a)

    def __sub__(self, other: "MukaiVector") -> "MukaiVector":
        return self + (-other)

    def __neg__(self) -> "MukaiVector":
        return MukaiVector(-self.r, _scale(-1, self.c1), -self.a)

    def __mul__(self, t) -> "MukaiVector":
        t = to_fraction(t)
        return MukaiVector(t * self.r, _scale(t, self.c1), t * self.a)

    __rmul__ = __mul__

    @property
    def ns_rank(self) -> int:
        return len(self.c1)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in (self.r, self.a, *self.c1))

    def entries(self) -> tuple:
        return (self.r, *self.c1, self.a)

    def __str__(self) -> str:
        c1 = ",".join(str(c) for c in self.c1)
        return f"({self.r}, [{c1}], {self.a})"


def mukai(r, c1, a) -> MukaiVector:
    if isinstance(c1, (int, Fraction, str)):
        c1 = (c1,)
    return MukaiVector(r, c1, a)


def rho_class(ns_rank: int) -> MukaiVector:
    """The point class ``(0, 0, 1)``."""
    return MukaiVector(0, (0,) * ns_rank, 1)


def structure_sheaf(ns_rank: int, kind: SurfaceKind) -> MukaiVector:
    return MukaiVector(1, (0,) * ns_rank, kind.epsilon)


def _check_same_rank(x: MukaiVector, y: MukaiVector):
    if len(x.c1) != len(y.c1):
        raise LatticeError(f"NS rank mismatch: {len(x.c1)} vs {len(y.c1)}")


def pairing(x: MukaiVector, y: MukaiVector, L: NSLattice) -> Fraction:
    """Mukai pairing ``(x1, y1) - x0*y2 - x2*y0``."""
    _check_same_rank(x, y)
    return L.dot(x.c1, y.c1) - x.r * y.a - x.a * y.r


def square(x: MukaiVector, L: NSLattice) -> Fraction:
    return pairing(x, x, L)


def dual(x: MukaiVector) -> MukaiVector:
    return MukaiVector(x.r, _scale(-1, x.c1), x.a)


def cup(x: MukaiVector, y: MukaiVector, L: NSLattice) -> MukaiVector:
    """Plain cup product in ``H^0 + H^2 + H^4``."""
    _check_same_rank(x, y)
    return MukaiVector(
        x.r * y.r,
        _add(_scale(x.r, y.c1), _scale(y.r, x.c1)),
        x.r * y.a + y.r * x.a + L.dot(x.c1, y.c1),
    )


def mukai_tensor(x: MukaiVector, y: MukaiVector, kind: SurfaceKind,
                 L: NSLattice) -> MukaiVector:
    """``v(E (x) F)`` from ``v(E)`` and ``v(F)``.

    ``v = ch * sqrt(td)`` and ``sqrt(td) = 1 + eps*rho``, so the product of two
    Mukai vectors carries one surplus ``sqrt(td)`` factor; dividing it out
    subtracts ``eps * r1 * r2`` from the point coefficient.
    """
    p = cup(x, y, L)
    return MukaiVector(p.r, p.c1, p.a - kind.epsilon * x.r * y.r)


def exp_class(D: Sequence, L: NSLattice) -> MukaiVector:
    """``ch(O(D)) = (1, D, (D^2)/2)``; cup with it to twist by ``O(D)``."""
    D = ns_class(D)
    return MukaiVector(1, D, L.dot(D, D) / 2)


def line_bundle(D: Sequence, L: NSLattice, kind: SurfaceKind) -> MukaiVector:
    """Mukai vector of the line bundle ``O(D)``."""
    e = exp_class(D, L)
    return MukaiVector(e.r, e.c1, e.a + kind.epsilon)


def twist(v: MukaiVector, D: Sequence, L: NSLattice) -> MukaiVector:
    """``v(E(D))`` from ``v(E)``."""
    return cup(v, exp_class(D, L), L)


def from_chern(r, c1: Sequence, ch2, kind: SurfaceKind) -> MukaiVector:
    r = to_fraction(r)
    return MukaiVector(r, ns_class(c1), to_fraction(ch2) + kind.epsilon * r)


def to_chern(v: MukaiVector, kind: SurfaceKind) -> tuple:
    return v.r, v.c1, v.a - kind.epsilon * v.r


def is_isotropic(v: MukaiVector, L: NSLattice) -> bool:
    return square(v, L) == 0


def is_primitive(v: MukaiVector) -> bool:
    if not v.is_integral():
        raise LatticeError(f"is_primitive needs an integral vector, got {v}")
    g = 0
    for x in v.entries():
        g = gcd(g, int(x))
    return g == 1
