"""SL(2,Z) action on ``Z + ZH + Z rho`` of an abelian surface with ``NS = ZH``.

``S`` acts as the Poincare transform and ``T`` as tensoring with ``O(H)``.  On
cohomology ``S^2`` is the identity although ``S^2 = -I`` in the group, so this
is an action of the image only; faithfulness is never claimed.

A word acts as a composition written left to right: ``"ST"`` means ``S(T(v))``,
so the rightmost letter is applied first.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .fm import fm_apply, poincare_context
from .lattice import MukaiVector, NSLattice, twist


class SL2ZError(ValueError):
    pass


@dataclass(frozen=True)
class AlgVector:
    r: int
    d: int
    a: int

    def __post_init__(self):
        for name in ("r", "d", "a"):
            x = getattr(self, name)
            if isinstance(x, bool) or int(x) != x:
                raise SL2ZError(f"{name} must be an integer, got {x!r}")
            object.__setattr__(self, name, int(x))

    def __neg__(self) -> "AlgVector":
        return AlgVector(-self.r, -self.d, -self.a)

    def square(self, n: int = 1) -> int:
        return 2 * n * self.d * self.d - 2 * self.r * self.a

    def to_mukai(self) -> MukaiVector:
        return MukaiVector(self.r, (self.d,), self.a)

    @classmethod
    def from_mukai(cls, v: MukaiVector) -> "AlgVector":
        if v.ns_rank != 1 or not v.is_integral():
            raise SL2ZError(f"not an integral vector on ZH: {v}")
        return cls(int(v.r), int(v.c1[0]), int(v.a))

    def as_tuple(self) -> tuple:
        return (self.r, self.d, self.a)

    def __str__(self) -> str:
        return f"({self.r}, {self.d}, {self.a})"


GENERATORS = ("S", "T", "t")  # t is T^-1


def parse_word(word: str) -> tuple:
    """Tokens ``S``, ``T``, and ``t`` or ``T^-1`` for the inverse of ``T``."""
    out = []
    i = 0
    w = word.replace(" ", "")
    while i < len(w):
        if w.startswith("T^-1", i):
            out.append("t")
            i += 4
        elif w[i] in "STt":
            out.append(w[i])
            i += 1
        else:
            raise SL2ZError(f"bad letter {w[i]!r} in word {word!r}")
    return tuple(out)


def _apply_letter(g: str, v: AlgVector, n: int) -> AlgVector:
    L = NSLattice.rank_one(n)
    if g == "S":
        return AlgVector.from_mukai(fm_apply(v.to_mukai(), poincare_context(lattice=L)))
    step = 1 if g == "T" else -1
    return AlgVector.from_mukai(twist(v.to_mukai(), (step,), L))


def sl2z_apply(word, v: AlgVector, n: int = 1, allow_nonprincipal: bool = False) -> AlgVector:
    letters = parse_word(word) if isinstance(word, str) else tuple(word)
    if n < 1:
        raise SL2ZError("n must be positive")
    if "S" in letters and n != 1 and not allow_nonprincipal:
        raise SL2ZError("S needs a principal polarization (n = 1); set allow_nonprincipal")
    for g in reversed(letters):
        v = _apply_letter(g, v, n)
    return v


def is_positive(v: AlgVector) -> bool:
    return v.r > 0 or (v.r == 0 and v.d > 0) or (v.r == 0 and v.d == 0 and v.a > 0)


def positive_normalize(v: AlgVector) -> tuple:
    if v.as_tuple() == (0, 0, 0):
        raise SL2ZError("the zero vector has no positive normal form")
    return (v, 1) if is_positive(v) else (-v, -1)


@dataclass(frozen=True)
class BiratTarget:
    target: AlgVector
    functor: str
    companion: AlgVector
    raw: AlgVector

    def as_dict(self) -> dict:
        return {"target": str(self.target), "functor": self.functor,
                "companion": str(self.companion), "raw": str(self.raw)}


def birat_target(v: AlgVector, n: int = 1) -> BiratTarget:
    """Target of the birational correspondence for ``M_H(v)``.

    ``a > 0`` uses ``G_P``, ``a <= 0`` uses ``F_P`` (both with ``r, d > 0``);
    ``d = 0, a < 0`` is the isomorphism case of ``G_P``.  The companion
    ``(r, -d, a)`` has a birationally equivalent moduli space.
    """
    r, d, a = v.as_tuple()
    ctx = poincare_context(n)
    fm = AlgVector.from_mukai(fm_apply(v.to_mukai(), ctx))
    gm = AlgVector(fm.r, -fm.d, fm.a)
    if r > 0 and d > 0:
        raw, tag = (gm, "G_P") if a > 0 else (fm, "F_P")
    elif r > 0 and d == 0 and a < 0:
        raw, tag = gm, "G_P isomorphism"
    else:
        raise SL2ZError(f"{v} is outside every birational branch (need r, d > 0, or r > 0, d = 0, a < 0)")
    return BiratTarget(positive_normalize(raw)[0], tag, AlgVector(r, -d, a), raw)


def orbit_word(word, v: AlgVector, n: int = 1, depth: int = 1,
               allow_nonprincipal: bool = False) -> list:
    """``[v, w(v), w(w(v)), ...]`` up to ``depth`` applications."""
    out = [v]
    for _ in range(depth):
        out.append(sl2z_apply(word, out[-1], n, allow_nonprincipal))
    return out


def orbit_bfs(v: AlgVector, n: int = 1, depth: int = 1,
              allow_nonprincipal: bool = False) -> list:
    """Breadth-first orbit: ``(word, vector)`` for each new vector, shortest words first."""
    gens = GENERATORS if (n == 1 or allow_nonprincipal) else ("T", "t")
    seen = {v.as_tuple(): ""}
    out = [("", v)]
    frontier = deque([("", v, 0)])
    while frontier:
        w, x, k = frontier.popleft()
        if k == depth:
            continue
        for g in gens:
            y = _apply_letter(g, x, n)
            if y.as_tuple() not in seen:
                word = g + w
                seen[y.as_tuple()] = word
                out.append((word, y))
                frontier.append((word, y, k + 1))
    return out
