"""Plain ReLU multilayer networks with exact rational weights."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .numerics import ZERO, DimensionMismatch, Matrix, Q, Scalar, Vector, fmt, mat, vec


class ParseError(ValueError):
    """Malformed network or instance payload; ``where`` names the field or line."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


def relu(x: Scalar) -> Scalar:
    return x if x > 0 else ZERO


@dataclass(frozen=True)
class Layer:
    W: Matrix
    b: Vector

    @property
    def out_dim(self) -> int:
        return len(self.W)

    @property
    def in_dim(self) -> int:
        return len(self.W[0]) if self.W else 0


@dataclass(frozen=True)
class NetStats:
    depth: int
    hidden_neurons: int
    max_width: int

    def as_tuple(self) -> tuple[int, int, int]:
        return self.depth, self.max_width, self.hidden_neurons


@dataclass(frozen=True)
class ReluNetwork:
    """``h_1 = W_1 x + b_1``, ``h_i = W_i relu(h_{i-1}) + b_i``; output ``h_l``.

    ReLU sits between consecutive layers only, never after the last one.
    """

    input_dim: int
    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(l if isinstance(l, Layer) else Layer(*l) for l in self.layers)
        layers = tuple(Layer(mat(l.W), vec(l.b)) for l in layers)
        if not layers:
            raise DimensionMismatch("a network needs at least one layer")
        prev = self.input_dim
        for i, layer in enumerate(layers, 1):
            if not layer.W:
                raise DimensionMismatch(f"layer {i} has no output units")
            if any(len(row) != prev for row in layer.W):
                raise DimensionMismatch(f"layer {i} expects {prev} inputs")
            if len(layer.b) != len(layer.W):
                raise DimensionMismatch(f"layer {i} bias length {len(layer.b)} != {len(layer.W)} rows")
            prev = len(layer.W)
        object.__setattr__(self, "layers", layers)

    @classmethod
    def from_weights(cls, input_dim: int, weights: Sequence[tuple]) -> "ReluNetwork":
        return cls(input_dim, tuple(Layer(W, b) for W, b in weights))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @cached_property
    def _sparse(self):
        return [
            ([tuple((j, w) for j, w in enumerate(row) if w) for row in layer.W], layer.b)
            for layer in self.layers
        ]

    @cached_property
    def _float_layers(self):
        return [
            (np.array([[float(w) for w in row] for row in layer.W]),
             np.array([float(v) for v in layer.b]))
            for layer in self.layers
        ]

    def __call__(self, x: Sequence) -> Vector:
        return evaluate(self, x)


def evaluate(net: ReluNetwork, x: Sequence, arithmetic: str = "rational"):
    """Forward pass.  ``arithmetic="float"`` is a numpy path for benchmarking."""
    if len(x) != net.input_dim:
        raise DimensionMismatch(f"input has {len(x)} entries, network expects {net.input_dim}")
    if arithmetic == "float":
        h = np.asarray(x, dtype=float)
        last = len(net.layers) - 1
        for i, (W, b) in enumerate(net._float_layers):
            h = W @ h + b
            if i < last:
                h = np.maximum(h, 0.0)
        return h
    if arithmetic != "rational":
        raise ValueError(f"unknown arithmetic {arithmetic!r}")
    h = tuple(Q(v) for v in x)
    last = len(net.layers) - 1
    for i, (rows, b) in enumerate(net._sparse):
        out = []
        for row, bias in zip(rows, b):
            s = bias
            for j, w in row:
                v = h[j]
                if v:
                    s += w * v
            out.append(s)
        h = tuple(out) if i == last else tuple(v if v > 0 else ZERO for v in out)
    return h


def stats(net: ReluNetwork) -> NetStats:
    hidden = [layer.out_dim for layer in net.layers[:-1]]
    return NetStats(net.depth, sum(hidden), max(hidden, default=0))


def to_dict(net: ReluNetwork) -> dict:
    return {
        "input_dim": net.input_dim,
        "layers": [
            {"W": [[fmt(w) for w in row] for row in layer.W], "b": [fmt(v) for v in layer.b]}
            for layer in net.layers
        ],
        "arithmetic": "rational",
    }


def serialize(net: ReluNetwork) -> bytes:
    return json.dumps(to_dict(net), separators=(",", ":")).encode()


def _rational(value, where: str):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(f"expected a rational string, got {value!r}", where)
    try:
        return Q(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(str(exc), where) from None


def parse_rational_list(value, where: str) -> Vector:
    if not isinstance(value, list):
        raise ParseError("expected a list", where)
    return tuple(_rational(v, f"{where}[{i}]") for i, v in enumerate(value))


def parse_rational_matrix(value, where: str) -> Matrix:
    if not isinstance(value, list):
        raise ParseError("expected a list of rows", where)
    rows = tuple(parse_rational_list(r, f"{where}[{i}]") for i, r in enumerate(value))
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ParseError("ragged matrix", where)
    return rows


def load_json(data: bytes | str):
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None


def from_dict(obj) -> ReluNetwork:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", "$")
    arithmetic = obj.get("arithmetic", "rational")
    if arithmetic != "rational":
        raise ParseError(f"unsupported arithmetic {arithmetic!r}", "arithmetic")
    n = obj.get("input_dim")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError("expected a positive integer", "input_dim")
    raw = obj.get("layers")
    if not isinstance(raw, list) or not raw:
        raise ParseError("expected a nonempty list", "layers")
    layers = []
    prev = n
    for i, layer in enumerate(raw):
        where = f"layers[{i}]"
        if not isinstance(layer, dict):
            raise ParseError("expected an object", where)
        W = parse_rational_matrix(layer.get("W"), f"{where}.W")
        b = parse_rational_list(layer.get("b"), f"{where}.b")
        if not W:
            raise ParseError("layer has no rows", f"{where}.W")
        if len(W[0]) != prev:
            raise ParseError(f"{len(W[0])} columns but previous layer has {prev} outputs", f"{where}.W")
        if len(b) != len(W):
            raise ParseError(f"{len(b)} biases for {len(W)} rows", f"{where}.b")
        layers.append(Layer(W, b))
        prev = len(W)
    return ReluNetwork(n, tuple(layers))


def deserialize(data: bytes | str) -> ReluNetwork:
    return from_dict(load_json(data))
