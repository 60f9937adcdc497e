"""Affine maps, H-polyhedra and the LP-backed geometric queries on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .numerics import (
    ONE,
    ZERO,
    DimensionMismatch,
    LpStatus,
    Matrix,
    Scalar,
    Sense,
    Vector,
    Q,
    dot,
    lp_solve,
    mat,
    vec,
)


class GeometryError(Exception):
    pass


class EmptyInterior(GeometryError):
    pass


class Infeasible(GeometryError):
    pass


class EmptyPiece(GeometryError):
    pass


@dataclass(frozen=True)
class AffineMap:
    """``x -> gradient . x + offset``."""

    gradient: Vector
    offset: Scalar

    def __post_init__(self):
        object.__setattr__(self, "gradient", vec(self.gradient))
        object.__setattr__(self, "offset", Q(self.offset))

    @property
    def dim(self) -> int:
        return len(self.gradient)

    def __call__(self, x: Sequence) -> Scalar:
        return dot(self.gradient, x) + self.offset

    def __sub__(self, other: "AffineMap") -> "AffineMap":
        if other.dim != self.dim:
            raise DimensionMismatch("affine maps of different dimension")
        return AffineMap(tuple(a - b for a, b in zip(self.gradient, other.gradient)),
                         self.offset - other.offset)

    def __neg__(self) -> "AffineMap":
        return AffineMap(tuple(-a for a in self.gradient), -self.offset)

    @classmethod
    def constant(cls, n: int, value=0) -> "AffineMap":
        return cls((ZERO,) * n, Q(value))


@dataclass(frozen=True)
class Polyhedron:
    """``{x in R^dim : A x <= b}``; zero rows means all of R^dim."""

    A: Matrix
    b: Vector
    dim: int = field(default=-1)

    def __post_init__(self):
        A = mat(self.A)
        b = vec(self.b)
        dim = self.dim
        if dim < 0:
            if not A:
                raise DimensionMismatch("dimension is required for a polyhedron with no constraints")
            dim = len(A[0])
        if len(A) != len(b):
            raise DimensionMismatch(f"A has {len(A)} rows but b has {len(b)} entries")
        if any(len(row) != dim for row in A):
            raise DimensionMismatch(f"every row of A must have {dim} entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "dim", dim)

    @classmethod
    def whole_space(cls, n: int) -> "Polyhedron":
        return cls((), (), n)

    @classmethod
    def box(cls, lower: Sequence, upper: Sequence) -> "Polyhedron":
        n = len(lower)
        rows, rhs = [], []
        for i in range(n):
            e = [ZERO] * n
            e[i] = ONE
            rows.append(e)
            rhs.append(Q(upper[i]))
            rows.append([-v for v in e])
            rhs.append(-Q(lower[i]))
        return cls(rows, rhs, n)

    @property
    def m(self) -> int:
        return len(self.A)

    @cached_property
    def _sparse_rows(self):
        return [tuple((j, a) for j, a in enumerate(row) if a) for row in self.A]

    def contains(self, x: Sequence) -> bool:
        if len(x) != self.dim:
            raise DimensionMismatch("point dimension does not match polyhedron")
        for row, bi in zip(self._sparse_rows, self.b):
            s = ZERO
            for j, a in row:
                s += a * x[j]
            if s > bi:
                return False
        return True

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        if other.dim != self.dim:
            raise DimensionMismatch("polyhedra of different dimension")
        return Polyhedron(self.A + other.A, self.b + other.b, self.dim)

    def with_constraint(self, a: Sequence, bound) -> "Polyhedron":
        return Polyhedron(self.A + (vec(a),), self.b + (Q(bound),), self.dim)


@dataclass(frozen=True)
class InteriorWitness:
    center: Vector
    margin: Scalar

    def __post_init__(self):
        object.__setattr__(self, "center", vec(self.center))
        object.__setattr__(self, "margin", Q(self.margin))
        if self.margin <= 0:
            raise ValueError("interior margin must be positive")

    def valid_for(self, P: Polyhedron) -> bool:
        return all(dot(row, self.center) + self.margin <= bi for row, bi in zip(P.A, P.b))


def interior_point(P: Polyhedron) -> InteriorWitness:
    """Point with uniform slack ``t`` in every constraint, ``0 < t <= 1``.

    Solves ``max t`` subject to ``A x + t <= b`` and ``t <= 1``.
    """
    n = P.dim
    rows = [tuple(row) + (ONE,) for row in P.A]
    rows.append((ZERO,) * n + (ONE,))
    rhs = list(P.b) + [ONE]
    objective = (ZERO,) * n + (ONE,)
    out = lp_solve(objective, rows, rhs, Sense.MAX)
    assert out.optimal  # t can always be lowered, and t <= 1 bounds it
    t = out.value
    # t is free, so the best slack is negative exactly when P is empty
    if t < 0:
        raise Infeasible("polyhedron is empty")
    if t == 0:
        raise EmptyInterior("polyhedron has empty interior")
    return InteriorWitness(out.point[:n], t)


def dominates(f: AffineMap, g: AffineMap, P: Polyhedron) -> bool:
    """True iff ``f(x) >= g(x)`` for every ``x`` in ``P``."""
    if not (f.dim == g.dim == P.dim):
        raise DimensionMismatch("map and polyhedron dimensions differ")
    diff = f - g
    if not any(diff.gradient):
        if not feasible(P):
            raise EmptyPiece("piece is empty")
        return diff.offset >= 0
    out = lp_solve(diff.gradient, P.A, P.b, Sense.MIN)
    if out.status is LpStatus.INFEASIBLE:
        raise EmptyPiece("piece is empty")
    if out.status is LpStatus.UNBOUNDED:
        return False
    return out.value + diff.offset >= 0


def feasible(P: Polyhedron) -> bool:
    if not P.m:
        return True
    return lp_solve((ZERO,) * P.dim, P.A, P.b).status is LpStatus.OPTIMAL


def intersection_nonempty(P1: Polyhedron, P2: Polyhedron) -> bool:
    return feasible(P1.intersect(P2))


def sample_step(w: InteriorWitness, A: Matrix) -> Scalar:
    """Step that keeps ``center + step * e_i`` inside the polyhedron."""
    biggest = max((abs(a) for row in A for a in row), default=ZERO)
    return w.margin / (1 + biggest)


def affinely_independent_samples(w: InteriorWitness, A: Matrix) -> list[Vector]:
    """The center and ``center + eps * e_i`` for each coordinate ``i``."""
    eps = sample_step(w, A)
    points = [w.center]
    n = len(w.center)
    for i in range(n):
        p = list(w.center)
        p[i] = p[i] + eps
        points.append(tuple(p))
    return points
