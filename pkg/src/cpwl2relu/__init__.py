"""Exact compilation of continuous piecewise linear functions into ReLU networks."""

__version__ = "0.1.0"

from .bounds import BoundTriple, phi, theorem1_bounds, theorem2_bounds, theorem3_bounds
from .builders import ExtremumKind, compose, concat, extremum_network, identity_network, r_sequence
from .compiler import CpwlInstance, Piece, compile, compile_traced, find_distinct_components, validate
from .geometry import AffineMap, InteriorWitness, Polyhedron
from .relunet import ReluNetwork, evaluate, stats

__all__ = [
    "AffineMap",
    "BoundTriple",
    "CpwlInstance",
    "ExtremumKind",
    "InteriorWitness",
    "Piece",
    "Polyhedron",
    "ReluNetwork",
    "compile",
    "compile_traced",
    "compose",
    "concat",
    "evaluate",
    "extremum_network",
    "find_distinct_components",
    "identity_network",
    "phi",
    "r_sequence",
    "stats",
    "theorem1_bounds",
    "theorem2_bounds",
    "theorem3_bounds",
    "validate",
]
