"""Network algebra for the compiler: extremum and identity networks, composition and concatenation."""

from __future__ import annotations

import enum
from functools import lru_cache
from typing import Sequence

from .geometry import AffineMap
from .numerics import (
    ONE,
    ZERO,
    DimensionMismatch,
    block_diag,
    identity,
    mat,
    matmul,
    matvec,
    neg_matrix,
    neg_vector,
    vstack,
    zeros,
)
from .relunet import Layer, ReluNetwork


class ExtremumKind(enum.Enum):
    MAX = "max"
    MIN = "min"


class EmptyList(ValueError):
    pass


# pairwise max(y1, y2) = relu(y2 - y1) + relu(y1) - relu(-y1)
_A = mat([[-1, 1], [1, 0], [-1, 0]])
_B = mat([[1, 1, -1]])
# pass-through of an unpaired value: y = relu(y) - relu(-y)
_C = mat([[1], [-1]])
_CT = mat([[1, -1]])


def _repeat(Y, s: int, cols: int):
    return block_diag([Y] * s, [cols] * s)


def _pair_layer(c_prev: int, c_next: int):
    """Block matrix feeding ``c_prev`` values into the pairwise-max units."""
    if c_prev % 2 == 0:
        return _repeat(_A, c_next, 2)
    return block_diag([_repeat(_A, c_next - 1, 2), _C], [2 * (c_next - 1), 1])


def _collect_layer(c_prev2: int, c_prev: int):
    """Block matrix turning the previous hidden layer back into ``c_prev`` values."""
    if c_prev2 % 2 == 0:
        return _repeat(_B, c_prev, 3)
    return block_diag([_repeat(_B, c_prev - 1, 3), _CT], [3 * (c_prev - 1), 2])


@lru_cache(maxsize=None)
def r_sequence(k: int) -> int:
    """Hidden-neuron count of the extremum network over ``k`` inputs."""
    if k < 1:
        raise ValueError("r(k) is defined for k >= 1")
    if k == 1:
        return 0
    if k % 2 == 0:
        return 3 * k // 2 + r_sequence(k // 2)
    return 2 + 3 * (k - 1) // 2 + r_sequence((k + 1) // 2)


def extremum_layers(m: int) -> int:
    return (m - 1).bit_length() + 1


def extremum_width(m: int) -> int:
    return 0 if m == 1 else (3 * m + 1) // 2


def extremum_network(fs: Sequence[AffineMap], kind: ExtremumKind = ExtremumKind.MAX) -> ReluNetwork:
    """Network computing ``max_i f_i(x)`` (or ``min``) by repeated pairwise halving.

    An odd count passes its last value through a ``(relu(y), relu(-y))`` pair
    rather than padding with phantom inputs.
    """
    fs = list(fs)
    if not fs:
        raise EmptyList("extremum over an empty list")
    n = fs[0].dim
    if any(f.dim != n for f in fs):
        raise DimensionMismatch("affine maps have different input dimensions")
    m = len(fs)
    l = extremum_layers(m)
    c = [m]
    for _ in range(1, l):
        c.append((c[-1] + 1) // 2)

    W1 = tuple(f.gradient for f in fs)
    b1 = tuple(f.offset for f in fs)
    if l == 1:
        return ReluNetwork(n, (Layer(W1, b1),))

    T = _pair_layer(c[0], c[1])
    weights = [(matmul(T, W1), matvec(T, b1))]
    for i in range(2, l):
        T = _pair_layer(c[i - 1], c[i])
        W = matmul(T, _collect_layer(c[i - 2], c[i - 1]))
        weights.append((W, zeros(len(W))))
    weights.append((_B, zeros(1)))

    if kind is ExtremumKind.MIN:
        W, b = weights[0]
        weights[0] = (neg_matrix(W), neg_vector(b))
        W, b = weights[-1]
        weights[-1] = (neg_matrix(W), neg_vector(b))
    return ReluNetwork.from_weights(n, weights)


def identity_network(n: int, l: int) -> ReluNetwork:
    """``l``-layer network computing the identity on R^n."""
    if n < 1 or l < 1:
        raise ValueError("identity_network needs n >= 1 and l >= 1")
    if l == 1:
        return ReluNetwork(n, (Layer(identity(n), zeros(n)),))
    up = _repeat(_C, n, 1)
    down = _repeat(_CT, n, 2)
    mid = _repeat(mat([[1, -1], [-1, 1]]), n, 2)
    weights = [(up, zeros(2 * n))]
    weights += [(mid, zeros(2 * n))] * (l - 2)
    weights.append((down, zeros(n)))
    return ReluNetwork.from_weights(n, weights)


def compose(g1: ReluNetwork, g2: ReluNetwork) -> ReluNetwork:
    """Network computing ``g2(g1(x))`` with ``l1 + l2 - 1`` layers.

    The last affine layer of ``g1`` is folded into the first layer of ``g2``.
    """
    if g1.output_dim != g2.input_dim:
        raise DimensionMismatch(f"g1 outputs {g1.output_dim} values but g2 expects {g2.input_dim}")
    last = g1.layers[-1]
    first = g2.layers[0]
    W = matmul(first.W, last.W)
    b = tuple(x + y for x, y in zip(matvec(first.W, last.b), first.b))
    layers = g1.layers[:-1] + (Layer(W, b),) + g2.layers[1:]
    return ReluNetwork(g1.input_dim, layers)


def concat(nets: Sequence[ReluNetwork]) -> ReluNetwork:
    """Parallel combination sharing one input; outputs are stacked in order.

    Shallower networks are first extended by an identity network so all
    depths agree, then hidden layers are assembled block-diagonally.
    """
    nets = list(nets)
    if not nets:
        raise EmptyList("concat of an empty list")
    n = nets[0].input_dim
    if any(g.input_dim != n for g in nets):
        raise DimensionMismatch("networks have different input dimensions")
    if len(nets) == 1:
        return nets[0]
    l = max(g.depth for g in nets)
    nets = [g if g.depth == l else compose(g, identity_network(g.output_dim, l - g.depth + 1))
            for g in nets]
    layers = [Layer(vstack([g.layers[0].W for g in nets]),
                    tuple(v for g in nets for v in g.layers[0].b))]
    for i in range(1, l):
        blocks = [g.layers[i].W for g in nets]
        layers.append(Layer(block_diag(blocks), tuple(v for g in nets for v in g.layers[i].b)))
    return ReluNetwork(n, tuple(layers))


def projections(q: int) -> list[AffineMap]:
    """Coordinate maps ``s -> s_m`` on R^q."""
    return [AffineMap(tuple(ONE if j == m else ZERO for j in range(q)), ZERO) for m in range(q)]
