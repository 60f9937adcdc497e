"""Exact rational arithmetic, dense linear algebra and a two-phase simplex.

Scalars are ``gmpy2.mpq`` values, which are kept in canonical form (positive
denominator, reduced) after every operation.  Vectors are tuples of scalars and
matrices are tuples of row tuples.  Products skip zero multipliers, which makes
the block-structured matrices produced by the network builders cheap to
multiply without a separate sparse type.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq

Scalar = type(mpq(0))
Vector = tuple
Matrix = tuple

ZERO = mpq(0)
ONE = mpq(1)


class NumericsError(Exception):
    pass


class SingularMatrix(NumericsError):
    pass


class DimensionMismatch(NumericsError, ValueError):
    pass


def Q(value) -> Scalar:
    """Coerce ints, Fractions, mpq and rational strings ("p/q", "p", "0.25")."""
    if isinstance(value, Scalar):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        raise TypeError("refusing to coerce a float to an exact rational")
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational string")
        try:
            return mpq(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    return mpq(value)


def fmt(x: Scalar) -> str:
    """Serialize a rational as "p/q", or "p" when the denominator is 1."""
    x = Q(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def vec(values: Iterable) -> Vector:
    return tuple(Q(v) for v in values)


def mat(rows: Iterable[Iterable]) -> Matrix:
    return tuple(vec(r) for r in rows)


def zeros(n: int) -> Vector:
    return (ZERO,) * n


def zero_matrix(rows: int, cols: int) -> Matrix:
    return tuple((ZERO,) * cols for _ in range(rows))


def identity(n: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def shape(A: Matrix, cols: int | None = None) -> tuple[int, int]:
    """Shape of ``A``; ``cols`` disambiguates matrices with no rows."""
    if not A:
        return 0, (cols or 0)
    return len(A), len(A[0])


def dot(a: Sequence, b: Sequence) -> Scalar:
    if len(a) != len(b):
        raise DimensionMismatch(f"dot of lengths {len(a)} and {len(b)}")
    s = ZERO
    for x, y in zip(a, b):
        if x and y:
            s += x * y
    return s


def matvec(A: Matrix, x: Sequence) -> Vector:
    return tuple(dot(row, x) for row in A)


def matmul(A: Matrix, B: Matrix, inner: int | None = None) -> Matrix:
    """Exact product ``A @ B``; zero entries of ``A`` are skipped."""
    if not A:
        return ()
    k = len(A[0])
    if len(B) != k:
        raise DimensionMismatch(f"matmul of {len(A)}x{k} by {len(B)} rows")
    if not B:
        return tuple(() for _ in A)
    p = len(B[0])
    out = []
    for row in A:
        acc = [ZERO] * p
        for a, brow in zip(row, B):
            if not a:
                continue
            for j, bv in enumerate(brow):
                if bv:
                    acc[j] += a * bv
        out.append(tuple(acc))
    return tuple(out)


def transpose(A: Matrix, cols: int | None = None) -> Matrix:
    if not A:
        return tuple(() for _ in range(cols or 0))
    return tuple(zip(*A))


def neg_matrix(A: Matrix) -> Matrix:
    return tuple(tuple(-v for v in row) for row in A)


def neg_vector(v: Sequence) -> Vector:
    return tuple(-x for x in v)


def vstack(blocks: Sequence[Matrix]) -> Matrix:
    return tuple(row for block in blocks for row in block)


def block_diag(blocks: Sequence[Matrix], cols: Sequence[int] | None = None) -> Matrix:
    """Block-diagonal assembly; ``cols`` gives widths for row-less blocks."""
    widths = [shape(b, cols[i] if cols else None)[1] for i, b in enumerate(blocks)]
    total = sum(widths)
    rows = []
    offset = 0
    for block, w in zip(blocks, widths):
        left = (ZERO,) * offset
        right = (ZERO,) * (total - offset - w)
        for r in block:
            rows.append(left + tuple(r) + right)
        offset += w
    return tuple(rows)


def solve_linear_system(A: Matrix, b: Sequence) -> Vector:
    """Solve ``A x = b`` exactly by Gaussian elimination.

    The pivot is the entry of largest magnitude in the current column.
    Raises SingularMatrix when ``A`` is rank deficient.
    """
    n = len(A)
    if len(b) != n or any(len(row) != n for row in A):
        raise DimensionMismatch("solve_linear_system needs a square system matching b")
    M = [list(row) + [Q(bi)] for row, bi in zip(A, b)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(M[r][col]))
        if not M[pivot][col]:
            raise SingularMatrix(f"matrix is singular (column {col})")
        M[col], M[pivot] = M[pivot], M[col]
        prow = M[col]
        pv = prow[col]
        for r in range(col + 1, n):
            factor = M[r][col]
            if not factor:
                continue
            factor = factor / pv
            row = M[r]
            for c in range(col, n + 1):
                if prow[c]:
                    row[c] -= factor * prow[c]
    x = [ZERO] * n
    for i in range(n - 1, -1, -1):
        row = M[i]
        s = row[n]
        for j in range(i + 1, n):
            if row[j]:
                s -= row[j] * x[j]
        x[i] = s / row[i]
    return tuple(x)


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class Sense(enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    value: Scalar | None = None
    point: Vector | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _pivot(T: list[list], basis: list[int], r: int, c: int) -> None:
    prow = T[r]
    pv = prow[c]
    if pv != ONE:
        inv = ONE / pv
        T[r] = prow = [v * inv if v else v for v in prow]
    nz = [j for j, v in enumerate(prow) if v]
    for i, row in enumerate(T):
        if i == r:
            continue
        f = row[c]
        if not f:
            continue
        for j in nz:
            row[j] -= f * prow[j]
    basis[r] = c


def _simplex(T: list[list], basis: list[int], allowed: int, max_pivots: int) -> bool:
    """Minimize the objective stored in the last row of ``T``.

    The last row holds reduced costs, with the negated objective value in the
    right-hand-side column.  Only columns below ``allowed`` may enter.  Bland's
    rule: lowest-index entering column, ties in the ratio test broken by the
    lowest-index basic variable.  Returns False when unbounded.
    """
    obj = T[-1]
    rhs = len(obj) - 1
    m = len(T) - 1
    for _ in range(max_pivots):
        obj = T[-1]
        enter = next((j for j in range(allowed) if obj[j] < 0), None)
        if enter is None:
            return True
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][rhs] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return False
        _pivot(T, basis, best[1], enter)
    raise NumericsError("simplex pivot budget exhausted")


def lp_solve(objective: Sequence, A: Matrix, b: Sequence, sense: Sense = Sense.MIN,
             max_pivots: int = 100_000) -> LpOutcome:
    """Optimize ``objective . x`` over ``{x free : A x <= b}`` exactly.

    Two-phase simplex with Bland's rule.  Each free variable is split into a
    nonnegative pair; rows with negative right-hand side get an artificial
    variable for phase one.
    """
    c = vec(objective)
    n = len(c)
    m = len(A)
    if len(b) != m or any(len(row) != n for row in A):
        raise DimensionMismatch(f"objective has {n} entries; constraints must be {m}x{n} with {m} bounds")
    if sense is Sense.MAX:
        c = neg_vector(c)
    bq = vec(b)

    # columns: x+ (n), x- (n), slack (m), artificial (na), rhs
    need_art = [i for i in range(m) if bq[i] < 0]
    na = len(need_art)
    ncols = 2 * n + m + na
    T: list[list] = []
    basis: list[int] = []
    art_of = {}
    for i in range(m):
        row = [ZERO] * (ncols + 1)
        sign = -1 if bq[i] < 0 else 1
        for j, a in enumerate(A[i]):
            a = Q(a)
            if a:
                row[j] = sign * a
                row[n + j] = -sign * a
        row[2 * n + i] = mpq(sign)
        row[ncols] = sign * bq[i]
        if sign < 0:
            col = 2 * n + m + len(art_of)
            art_of[i] = col
            row[col] = ONE
            basis.append(col)
        else:
            basis.append(2 * n + i)
        T.append(row)

    if na:
        obj = [ZERO] * (ncols + 1)
        for i in need_art:
            for j in range(ncols + 1):
                obj[j] -= T[i][j]
        for col in art_of.values():
            obj[col] = ZERO
        T.append(obj)
        _simplex(T, basis, ncols, max_pivots)
        if T[-1][ncols] != 0:
            return LpOutcome(LpStatus.INFEASIBLE)
        T.pop()
        first_art = 2 * n + m
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(T):
            if basis[i] >= first_art:
                row = T[i]
                col = next((j for j in range(first_art) if row[j]), None)
                if col is None:
                    T.pop(i)
                    basis.pop(i)
                    continue
                _pivot(T, basis, i, col)
            i += 1
        for row in T:
            del row[first_art:ncols]
        ncols = first_art

    obj = [ZERO] * (ncols + 1)
    for j in range(n):
        obj[j] = c[j]
        obj[n + j] = -c[j]
    for i, bc in enumerate(basis):
        f = obj[bc]
        if f:
            row = T[i]
            for j in range(ncols + 1):
                if row[j]:
                    obj[j] -= f * row[j]
    T.append(obj)
    if not _simplex(T, basis, ncols, max_pivots):
        return LpOutcome(LpStatus.UNBOUNDED)
    values = [ZERO] * ncols
    for i, bc in enumerate(basis):
        values[bc] = T[i][ncols]
    x = tuple(values[j] - values[n + j] for j in range(n))
    value = dot(vec(objective), x)
    return LpOutcome(LpStatus.OPTIMAL, value, x)
