"""Compile a CPWL function, given as polyhedral pieces, into a ReLU network.

The construction is the max-min lattice form: for each piece, the minimum of
the linear components that dominate the function on that piece; then the
maximum of those minima.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Sequence

from .bounds import BoundTriple, construction_stats, theorem2_bounds
from .builders import ExtremumKind, compose, concat, extremum_network, projections
from .geometry import (
    AffineMap,
    EmptyInterior,
    EmptyPiece,
    Infeasible,
    InteriorWitness,
    Polyhedron,
    affinely_independent_samples,
    dominates,
    feasible,
    interior_point,
)
from .numerics import (
    DimensionMismatch,
    LpStatus,
    Q,
    Sense,
    SingularMatrix,
    Vector,
    fmt,
    lp_solve,
    solve_linear_system,
    transpose,
)
from .relunet import (
    ParseError,
    ReluNetwork,
    load_json,
    parse_rational_list,
    parse_rational_matrix,
    stats,
)


class CompileError(Exception):
    pass


class SingularFit(CompileError):
    pass


class InconsistentFit(CompileError):
    pass


class UncoveredPoint(CompileError):
    pass


@dataclass(frozen=True)
class Piece:
    region: Polyhedron
    f: AffineMap
    interior: InteriorWitness | None = None


@dataclass
class CpwlInstance:
    n: int
    pieces: list[Piece]

    def __post_init__(self):
        if not self.pieces:
            raise DimensionMismatch("an instance needs at least one piece")
        for i, piece in enumerate(self.pieces):
            if piece.region.dim != self.n or piece.f.dim != self.n:
                raise DimensionMismatch(f"piece {i} does not live in R^{self.n}")

    @property
    def q(self) -> int:
        return len(self.pieces)

    def witness(self, i: int) -> InteriorWitness:
        """Interior witness of piece ``i``, computed and cached on first use."""
        piece = self.pieces[i]
        if piece.interior is None:
            piece = Piece(piece.region, piece.f, interior_point(piece.region))
            self.pieces[i] = piece
        return piece.interior

    def locate(self, x: Sequence) -> int | None:
        for i, piece in enumerate(self.pieces):
            if piece.region.contains(x):
                return i
        return None

    def __call__(self, x: Sequence):
        """Evaluate ``p(x)`` from the first piece containing ``x``."""
        i = self.locate(x)
        if i is None:
            raise UncoveredPoint(f"no piece contains {[fmt(v) for v in x]}")
        return self.pieces[i].f(x)


def instance_to_dict(inst: CpwlInstance) -> dict:
    pieces = []
    for piece in inst.pieces:
        entry = {
            "A": [[fmt(a) for a in row] for row in piece.region.A],
            "b": [fmt(v) for v in piece.region.b],
            "f": {"a": [fmt(a) for a in piece.f.gradient], "b": fmt(piece.f.offset)},
        }
        if piece.interior is not None:
            entry["interior"] = {"center": [fmt(v) for v in piece.interior.center],
                                 "margin": fmt(piece.interior.margin)}
        pieces.append(entry)
    return {"n": inst.n, "pieces": pieces}


def dumps_instance(inst: CpwlInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


def instance_from_dict(obj) -> CpwlInstance:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", "$")
    n = obj.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError("expected a positive integer", "n")
    raw = obj.get("pieces")
    if not isinstance(raw, list) or not raw:
        raise ParseError("expected a nonempty list", "pieces")
    pieces = []
    for i, entry in enumerate(raw):
        where = f"pieces[{i}]"
        if not isinstance(entry, dict):
            raise ParseError("expected an object", where)
        A = parse_rational_matrix(entry.get("A", []), f"{where}.A")
        b = parse_rational_list(entry.get("b", []), f"{where}.b")
        if len(A) != len(b):
            raise ParseError(f"{len(A)} rows but {len(b)} bounds", where)
        if A and len(A[0]) != n:
            raise ParseError(f"rows must have {n} entries", f"{where}.A")
        fobj = entry.get("f")
        if not isinstance(fobj, dict):
            raise ParseError("expected an object with 'a' and 'b'", f"{where}.f")
        a = parse_rational_list(fobj.get("a"), f"{where}.f.a")
        if len(a) != n:
            raise ParseError(f"gradient must have {n} entries", f"{where}.f.a")
        offset = parse_rational_list([fobj.get("b")], f"{where}.f.b")[0]
        interior = None
        if entry.get("interior") is not None:
            iobj = entry["interior"]
            if not isinstance(iobj, dict):
                raise ParseError("expected an object", f"{where}.interior")
            center = parse_rational_list(iobj.get("center"), f"{where}.interior.center")
            margin = parse_rational_list([iobj.get("margin")], f"{where}.interior.margin")[0]
            if len(center) != n or margin <= 0:
                raise ParseError("center must have n entries and margin must be positive",
                                 f"{where}.interior")
            interior = InteriorWitness(center, margin)
        pieces.append(Piece(Polyhedron(A, b, n), AffineMap(a, offset), interior))
    return CpwlInstance(n, pieces)


def loads_instance(data: bytes | str) -> CpwlInstance:
    return instance_from_dict(load_json(data))


@dataclass(frozen=True)
class ComponentIndex:
    components: tuple[AffineMap, ...]
    piece_to_component: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.components)


def fit_affine(evaluator, w: InteriorWitness, A) -> tuple[AffineMap, list[Vector]]:
    """Recover the affine map of ``evaluator`` near ``w`` from ``n + 1`` samples."""
    points = affinely_independent_samples(w, A)
    x0 = points[0]
    n = len(x0)
    y0 = evaluator(x0)
    if n == 0:
        return AffineMap((), y0), points
    eps = points[1][0] - x0[0]
    S = tuple(tuple(eps if i == j else Q(0) for j in range(n)) for i in range(n))
    z = [evaluator(p) - y0 for p in points[1:]]
    try:
        a = solve_linear_system(transpose(S), z)
    except SingularMatrix as exc:
        raise SingularFit(str(exc)) from exc
    offset = y0 - sum(ai * xi for ai, xi in zip(a, x0))
    return AffineMap(a, offset), points


def find_distinct_components(inst: CpwlInstance, evaluator=None) -> ComponentIndex:
    """Fit each piece's map by black-box evaluation and deduplicate exactly.

    ``evaluator`` defaults to the instance itself.
    """
    evaluator = evaluator or inst
    components: list[AffineMap] = []
    index: dict[AffineMap, int] = {}
    owner = []
    for i, piece in enumerate(inst.pieces):
        try:
            w = inst.witness(i)
        except (EmptyInterior, Infeasible) as exc:
            raise SingularFit(f"piece {i}: {exc}") from exc
        f, points = fit_affine(evaluator, w, piece.region.A)
        if any(f(p) != piece.f(p) for p in points):
            raise InconsistentFit(f"piece {i}: fitted map disagrees with the declared map")
        j = index.get(f)
        if j is None:
            j = index[f] = len(components)
            components.append(f)
        owner.append(j)
    return ComponentIndex(tuple(components), tuple(owner))


def active_set(inst: CpwlInstance, comps: ComponentIndex, i: int) -> tuple[int, ...]:
    """Indices of components ``f_j`` with ``f_j >= p`` on piece ``i``."""
    region = inst.pieces[i].region
    own = comps.piece_to_component[i]
    p = comps.components[own]
    return tuple(j for j, f in enumerate(comps.components)
                 if j == own or dominates(f, p, region))


@dataclass(frozen=True)
class Compiled:
    network: ReluNetwork
    components: ComponentIndex
    active_sets: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return self.components.k

    @property
    def q(self) -> int:
        return len(self.active_sets)

    def bound(self) -> BoundTriple:
        return theorem2_bounds(self.k, self.q)

    def construction(self) -> BoundTriple:
        return construction_stats([len(a) for a in self.active_sets])


def compile_traced(inst: CpwlInstance) -> Compiled:
    comps = find_distinct_components(inst)
    sets = tuple(active_set(inst, comps, i) for i in range(inst.q))
    minima = [extremum_network([comps.components[j] for j in s], ExtremumKind.MIN) for s in sets]
    v = concat(minima)
    u = extremum_network(projections(inst.q), ExtremumKind.MAX)
    return Compiled(compose(v, u), comps, sets)


def compile(inst: CpwlInstance) -> ReluNetwork:
    return compile_traced(inst).network


@dataclass
class Violation:
    kind: str
    pieces: tuple[int, ...]
    detail: str

    def __str__(self):
        return f"{self.kind} {list(self.pieces)}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    checked_pairs: int = 0
    samples: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        head = "PASS" if self.ok else f"FAIL ({len(self.violations)} violations)"
        return [head] + [f"  {v}" for v in self.violations]


def sample_radius(inst: CpwlInstance) -> int:
    """Half-width of the sampling box: twice the largest witness coordinate, at least 2."""
    biggest = 1
    for piece in inst.pieces:
        if piece.interior is not None:
            for v in piece.interior.center:
                biggest = max(biggest, int(abs(v)) + 1)
    return 2 * biggest


def random_point(rng: random.Random, n: int, radius: int, den: int = 1000) -> Vector:
    return tuple(Q(f"{rng.randint(-radius * den, radius * den)}/{den}") for _ in range(n))


def validate(inst: CpwlInstance, samples: int = 200, seed: int = 0) -> ValidationReport:
    """Check nonempty interiors, pairwise consistency and sampled coverage."""
    report = ValidationReport()
    for i in range(inst.q):
        try:
            inst.witness(i)
        except Infeasible:
            report.violations.append(Violation("interior", (i,), "piece is empty"))
        except EmptyInterior:
            report.violations.append(Violation("interior", (i,), "piece has empty interior"))

    for i in range(inst.q):
        for j in range(i + 1, inst.q):
            P = inst.pieces[i].region.intersect(inst.pieces[j].region)
            diff = inst.pieces[i].f - inst.pieces[j].f
            if not feasible(P):
                continue
            report.checked_pairs += 1
            if not any(diff.gradient):
                if diff.offset:
                    report.violations.append(Violation(
                        "consistency", (i, j), f"maps differ by {fmt(diff.offset)} on the intersection"))
                continue
            for sense in (Sense.MIN, Sense.MAX):
                out = lp_solve(diff.gradient, P.A, P.b, sense)
                if out.status is LpStatus.UNBOUNDED:
                    report.violations.append(Violation(
                        "consistency", (i, j), f"{sense.value} of f_i - f_j on the intersection is unbounded"))
                    break
                value = out.value + diff.offset
                if value != 0:
                    x = ", ".join(fmt(v) for v in out.point)
                    report.violations.append(Violation(
                        "consistency", (i, j), f"f_i - f_j = {fmt(value)} at ({x})"))
                    break

    rng = random.Random(seed)
    radius = sample_radius(inst)
    for _ in range(samples):
        x = random_point(rng, inst.n, radius)
        report.samples += 1
        if inst.locate(x) is None:
            report.violations.append(Violation(
                "coverage", (), f"({', '.join(fmt(v) for v in x)}) lies in no piece"))
    return report


def check_bounds(result: Compiled) -> tuple[bool, BoundTriple]:
    bound = result.bound()
    return bound.dominates(stats(result.network)), bound
