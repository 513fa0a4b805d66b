"""Cohomological Fourier-Mukai transforms between Mukai lattices.

A transform is fixed by an :class:`FMContext`: the isotropic vector ``v0`` of
the kernel restricted to ``X x {y}``, the vector ``w0`` of its restriction to
``{x} x Y``, and the correspondence ``D -> D^`` between Neron-Severi groups.
Every vector on ``X`` has unique coordinates ``(l, a, d, D)`` with
``(D, H) = 0``; the transform acts by swapping the roles of ``l`` and ``a``
and negating the divisor part.

Sign convention: ``fm_apply`` is the alternating sum ``sum (-1)^i [F^i]``.  A
sheaf satisfying WIT_1 therefore has image vector ``-v(F^1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .lattice import (
    LatticeError, MukaiVector, NSClass, NSLattice, SurfaceKind, dual,
    is_isotropic, is_primitive, ns_class, pairing, rho_class,
)
from .twisted import TwistData, deg_twisted


class ContextError(ValueError):
    pass


def _mat_vec(M, x) -> NSClass:
    return tuple(sum((m * xi for m, xi in zip(row, x)), Fraction(0)) for row in M)


def _mat_inv(M):
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ContextError("ns_map is singular")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return tuple(tuple(row[n:]) for row in A)


def _identity(n):
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class FMCoordinates:
    l: Fraction
    a: Fraction
    d: Fraction
    D: NSClass

    def __post_init__(self):
        for name in ("l", "a", "d"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        object.__setattr__(self, "D", ns_class(self.D))

    def as_dict(self) -> dict:
        return {"l": self.l, "a": self.a, "d": self.d, "D": list(self.D)}


@dataclass(frozen=True)
class FMContext:
    kind: SurfaceKind
    ns_x: NSLattice
    ns_y: NSLattice
    v0: MukaiVector
    w0: MukaiVector
    ns_map: tuple
    label: str = "custom"
    r0: int = field(init=False)
    n: int = field(init=False)
    v0_dual: MukaiVector = field(init=False)
    ns_map_inv: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ns_map", tuple(tuple(Fraction(x) for x in row)
                                                 for row in self.ns_map))
        object.__setattr__(self, "r0", int(self.v0.r) if self.v0.is_integral() else 0)
        object.__setattr__(self, "n", self.ns_x.n)
        object.__setattr__(self, "v0_dual", dual(self.v0))
        self._validate()
        object.__setattr__(self, "ns_map_inv", _mat_inv(self.ns_map))

    def _validate(self):
        X, Y = self.ns_x, self.ns_y
        for name, vec, lat in (("v0", self.v0, X), ("w0", self.w0, Y)):
            if vec.ns_rank != lat.rank:
                raise ContextError(f"{name} has NS rank {vec.ns_rank}, lattice rank {lat.rank}")
            if not vec.is_integral():
                raise ContextError(f"{name} = {vec} is not integral")
            if vec.r <= 0:
                raise ContextError(f"{name} must have positive rank, got {vec.r}")
            if not is_primitive(vec):
                raise ContextError(f"{name} = {vec} is not primitive")
            if not is_isotropic(vec, lat):
                raise ContextError(f"{name} = {vec} is not isotropic")
        if self.w0.r != self.v0.r:
            raise ContextError(f"rk w0 = {self.w0.r} differs from rk v0 = {self.v0.r}")
        M = self.ns_map
        if len(M) != Y.rank or any(len(row) != X.rank for row in M):
            raise ContextError(f"ns_map must be a {Y.rank}x{X.rank} matrix")
        if _mat_vec(M, X.h_class()) != Y.h_class():
            raise ContextError("ns_map does not send H to H^")
        for i in range(X.rank):
            for j in range(X.rank):
                ei = tuple(Fraction(int(k == i)) for k in range(X.rank))
                ej = tuple(Fraction(int(k == j)) for k in range(X.rank))
                if Y.dot(_mat_vec(M, ei), _mat_vec(M, ej)) != X.gram[i][j]:
                    raise ContextError("ns_map does not preserve the intersection pairing")
        if Y.dot(Y.H, Y.H) != X.dot(X.H, X.H):
            raise ContextError("(H^^2) differs from (H^2)")

    @property
    def xi0(self) -> NSClass:
        return self.v0.c1

    @property
    def xi0_tilde(self) -> NSClass:
        return self.w0.c1

    def hat(self, D: Sequence) -> NSClass:
        return _mat_vec(self.ns_map, ns_class(D))

    def unhat(self, Dhat: Sequence) -> NSClass:
        return _mat_vec(self.ns_map_inv, ns_class(Dhat))

    def describe(self) -> dict:
        return {"label": self.label, "kind": self.kind.value, "r0": self.r0, "n": self.n,
                "v0": str(self.v0), "w0": str(self.w0)}


def make_context(kind: SurfaceKind, ns_x: NSLattice, ns_y: NSLattice | None,
                 v0: MukaiVector, w0: MukaiVector, ns_map=None,
                 label: str = "custom") -> FMContext:
    ns_y = ns_x if ns_y is None else ns_y
    if ns_map is None:
        if ns_x.rank != ns_y.rank:
            raise ContextError("ns_map is required when NS ranks differ")
        ns_map = _identity(ns_x.rank)
    return FMContext(kind, ns_x, ns_y, v0, w0, ns_map, label)


def poincare_context(n: int | None = None, lattice: NSLattice | None = None) -> FMContext:
    """Poincare bundle on ``X x X^``: ``v0 = w0 = (1, 0, 0)``, NS identified."""
    if lattice is None:
        lattice = NSLattice.rank_one(n if n is not None else 1)
    elif n is not None and lattice.n != n:
        raise ContextError(f"lattice has n = {lattice.n}, asked for n = {n}")
    unit = MukaiVector(1, lattice.zero(), 0)
    return make_context(SurfaceKind.ABELIAN, lattice, lattice, unit, unit, label="poincare")


def k3_example_context(n: int, k: int) -> FMContext:
    """Transform with kernel ``E^dual`` on a K3 with ``NS = ZH``, ``(H^2) = 2n``.

    ``Y`` is the moduli space of the vector ``(k^2 n, kH, 1)``; the kernel
    ``E^dual`` restricts on both factors to bundles with vector
    ``(k^2 n, -kH, 1)``, which is the ``v0``/``w0`` pair stored here.
    """
    if n <= 0 or k <= 0:
        raise ContextError("n and k must be positive")
    lat = NSLattice.rank_one(n)
    v = MukaiVector(k * k * n, (-k,), 1)
    return make_context(SurfaceKind.K3, lat, lat, v, v, label="k3_example")


def k3_moduli_vector(n: int, k: int) -> MukaiVector:
    """The primitive isotropic vector ``(k^2 n, kH, 1)`` whose moduli space is ``Y``."""
    return MukaiVector(k * k * n, (k,), 1)


def decompose(v: MukaiVector, ctx: FMContext) -> FMCoordinates:
    X = ctx.ns_x
    if v.ns_rank != X.rank:
        raise LatticeError(f"vector NS rank {v.ns_rank} vs lattice rank {X.rank}")
    r0 = ctx.r0
    l = -pairing(v, rho_class(X.rank), X) / r0
    a = -pairing(v, ctx.v0_dual, X) / r0
    d = deg_twisted(TwistData(ctx.v0_dual), v, X) / (r0 * 2 * ctx.n)
    H = X.h_class()
    D = tuple(c + l * x - d * h for c, x, h in zip(v.c1, ctx.xi0, H))
    return FMCoordinates(l, a, d, D)


def recompose(c: FMCoordinates, ctx: FMContext, side: str = "X") -> MukaiVector:
    r0 = ctx.r0
    if side == "X":
        X = ctx.ns_x
        u = tuple(c.d * h + x for h, x in zip(X.h_class(), c.D))
        corr = X.dot(u, ctx.xi0) / r0
        nsp = MukaiVector(0, u, -corr)
        return c.l * ctx.v0_dual + c.a * rho_class(X.rank) + nsp
    if side == "Y":
        Y = ctx.ns_y
        u = tuple(c.d * h + x for h, x in zip(Y.h_class(), ctx.hat(c.D)))
        corr = Y.dot(u, ctx.xi0_tilde) / r0
        nsp = MukaiVector(0, u, corr)
        return c.l * rho_class(Y.rank) + c.a * ctx.w0 - nsp
    raise ValueError(f"side must be 'X' or 'Y', got {side!r}")


def decompose_y(w: MukaiVector, ctx: FMContext) -> FMCoordinates:
    """Coordinates of a vector on ``Y``; ``D`` is returned on the ``X`` side."""
    Y = ctx.ns_y
    if w.ns_rank != Y.rank:
        raise LatticeError(f"vector NS rank {w.ns_rank} vs lattice rank {Y.rank}")
    a = w.r / ctx.r0
    u = tuple(a * x - c for x, c in zip(ctx.xi0_tilde, w.c1))
    d = Y.degree(u) / (2 * ctx.n)
    Dhat = tuple(x - d * h for x, h in zip(u, Y.h_class()))
    l = w.a - a * ctx.w0.a + Y.dot(u, ctx.xi0_tilde) / ctx.r0
    return FMCoordinates(l, a, d, ctx.unhat(Dhat))


def fm_apply(v: MukaiVector, ctx: FMContext) -> MukaiVector:
    return recompose(decompose(v, ctx), ctx, "Y")


def fm_inverse(w: MukaiVector, ctx: FMContext) -> MukaiVector:
    return recompose(decompose_y(w, ctx), ctx, "X")


def gm_apply(v: MukaiVector, ctx: FMContext) -> MukaiVector:
    """Dual of the transform; the even shift contributes no sign."""
    return dual(fm_apply(v, ctx))


def fm_apply_k3_delta(v: MukaiVector, n: int, k: int) -> MukaiVector:
    """Closed form of the K3 example transform on ``NS = ZH``.

    ``1 -> 1``, ``xi -> -k(H, xi) + xi``, ``rho -> k^2 n - kH + rho``.
    """
    if v.ns_rank != 1:
        raise LatticeError("closed form needs NS = ZH")
    x = v.c1[0]
    return MukaiVector(v.r - 2 * k * n * x + k * k * n * v.a, (x - k * v.a,), v.a)
