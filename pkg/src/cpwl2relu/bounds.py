"""Size bounds for networks representing CPWL functions, ours and prior work.

All quantities are exact integers.  ``clog2(x)`` is the ceiling of ``log2 x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .builders import extremum_layers, extremum_width, r_sequence


@dataclass(frozen=True)
class BoundTriple:
    layers: int
    max_width: int
    hidden: int

    def as_tuple(self) -> tuple[int, int, int]:
        return self.layers, self.max_width, self.hidden

    def dominates(self, other) -> bool:
        """Component-wise ``other <= self``; accepts a NetStats or BoundTriple."""
        if hasattr(other, "hidden_neurons"):
            other = BoundTriple(other.depth, other.max_width, other.hidden_neurons)
        return (other.layers <= self.layers and other.max_width <= self.max_width
                and other.hidden <= self.hidden)


class InvalidArgs(ValueError):
    pass


def clog2(x: int) -> int:
    if x < 1:
        raise InvalidArgs("ceil(log2 x) needs x >= 1")
    return (x - 1).bit_length()


def theorem2_bounds(k: int, q: int) -> BoundTriple:
    """Bounds given ``k`` distinct linear components and ``q`` pieces."""
    if k < 1 or q < 1:
        raise InvalidArgs("k and q must be positive")
    if k > q:
        raise InvalidArgs(f"k={k} exceeds q={q}")
    lk, lq = clog2(k), clog2(q)
    layers = lq + lk + 1
    width = (3 * k + 1) // 2 * q if k > 1 else 0
    hidden = (3 * 2**lk + 2 * lk - 3) * q + 3 * 2**lq - 2 * lk - 3
    return BoundTriple(layers, width, hidden)


def theorem1_bounds(q: int) -> BoundTriple:
    """Bounds given only the piece count ``q``."""
    if q < 1:
        raise InvalidArgs("q must be positive")
    lq = clog2(q)
    layers = 2 * lq + 1
    width = (3 * q + 1) // 2 * q if q > 1 else 0
    hidden = (3 * 2**lq + 2 * lq - 3) * q + 3 * 2**lq - 2 * lq - 3
    return BoundTriple(layers, width, hidden)


def phi(n: int, k: int) -> int:
    """``min(sum_{i<=n} C(k(k-1)/2, i), k!)``: piece-count bound for ``k`` components."""
    if n < 1 or k < 1:
        raise InvalidArgs("phi needs n >= 1 and k >= 1")
    pairs = k * (k - 1) // 2
    return min(sum(math.comb(pairs, i) for i in range(n + 1)), math.factorial(k))


def theorem3_bounds(n: int, k: int) -> BoundTriple:
    """Bounds given the input dimension and ``k`` components only."""
    q = phi(n, k)
    lk, lq = clog2(k), clog2(q)
    layers = lq + lk + 1
    width = (3 * k + 1) // 2 * q if k > 1 else 0
    hidden = (3 * 2**lk + 2 * lk - 3) * q + 3 * 2**lq - 2 * lk - 3
    return BoundTriple(layers, width, hidden)


HE_MAX_EXPONENT = 1 << 24


def prior_bound_he_exponent(n: int, k: int, q: int) -> tuple[int, int]:
    """``(n, E)`` with the comparator equal to ``n * 2**E``; cheap for any size."""
    if min(n, k, q) < 1:
        raise InvalidArgs("n, k, q must be positive")
    if k >= n + 1:
        return n, k * q + (n + 1) * (k - n - 1)
    return n, k * q


def prior_bound_he(n: int, k: int, q: int) -> int:
    """Neuron count of the earlier construction as an exact integer.

    Refuses exponents above ``HE_MAX_EXPONENT`` bits; use
    ``prior_bound_he_exponent`` there (``q = k!`` gets there by ``k = 13``).
    """
    factor, e = prior_bound_he_exponent(n, k, q)
    if e > HE_MAX_EXPONENT:
        raise OverflowError(f"n * 2^{e} is too large to materialize")
    return factor << e


def prior_bound_hertrich(n: int, k: int) -> int:
    """Width bound ``k^(2n^2+3n+1)`` times the layer count ``ceil(log2(n+1)) + 1``."""
    if n < 1 or k < 1:
        raise InvalidArgs("n and k must be positive")
    return k ** (2 * n * n + 3 * n + 1) * (clog2(n + 1) + 1)


def construction_stats(active_sizes: Sequence[int]) -> BoundTriple:
    """Exact layer and hidden counts of the max-min construction, plus its width bound.

    ``active_sizes`` lists the active-set size of every piece.
    """
    q = len(active_sizes)
    depths = [extremum_layers(a) for a in active_sizes]
    deepest = max(depths)
    layers = extremum_layers(q) + deepest - 1
    width = max(sum(max(extremum_width(a), 2) for a in active_sizes), extremum_width(q))
    hidden = r_sequence(q) + sum(r_sequence(a) + 2 * (deepest - d)
                                 for a, d in zip(active_sizes, depths))
    return BoundTriple(layers, width, hidden)
