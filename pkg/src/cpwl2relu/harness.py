"""Instance generators, arrangement enumeration, region extraction and checks."""

from __future__ import annotations

import csv
import io
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .compiler import CpwlInstance, Piece, compile_traced, random_point, sample_radius
from .geometry import (
    AffineMap,
    EmptyInterior,
    Infeasible,
    InteriorWitness,
    Polyhedron,
    affinely_independent_samples,
    interior_point,
)
from .numerics import ONE, ZERO, Q, Scalar, Vector, fmt
from .relunet import Layer, ReluNetwork, evaluate, stats


class DimensionTooLarge(ValueError):
    pass


class TooManyNeurons(ValueError):
    pass


MAX_RELUS = 20
MAX_ARRANGEMENT_DIM = 3


def _rand_rational(rng: random.Random, lo: int, hi: int, dens=(1, 1, 2, 3, 4)) -> Scalar:
    d = rng.choice(dens)
    return Q(rng.randint(lo * d, hi * d)) / d


def gen_1d(q: int, seed: int = 0, n: int = 1) -> CpwlInstance:
    """Random continuous piecewise linear function of the first coordinate.

    Breakpoints are strictly increasing, adjacent slopes differ, and offsets
    are chained so neighbouring maps agree at each breakpoint.  For ``n > 1``
    every piece shares one random gradient in coordinates ``2..n``.
    """
    if q < 1:
        raise ValueError("q must be positive")
    rng = random.Random(seed)
    pool = set()
    while len(pool) < q - 1:
        pool.add(Q(rng.randint(-20 * q, 20 * q)) / 4)
    breaks = sorted(pool)
    slopes = [_rand_rational(rng, -5, 5)]
    for _ in range(q - 1):
        s = _rand_rational(rng, -5, 5)
        while s == slopes[-1]:
            s = _rand_rational(rng, -5, 5)
        slopes.append(s)
    rest = tuple(_rand_rational(rng, -3, 3) for _ in range(n - 1))
    offsets = [_rand_rational(rng, -5, 5)]
    for t, s_prev, s in zip(breaks, slopes, slopes[1:]):
        offsets.append(offsets[-1] + (s_prev - s) * t)

    def row(sign):
        return (Q(sign),) + (ZERO,) * (n - 1)

    pieces = []
    for i in range(q):
        A, b = [], []
        if i > 0:
            A.append(row(-1))
            b.append(-breaks[i - 1])
        if i < q - 1:
            A.append(row(1))
            b.append(breaks[i])
        f = AffineMap((slopes[i],) + rest, offsets[i])
        pieces.append(Piece(Polyhedron(A, b, n), f))
    return CpwlInstance(n, pieces)


@dataclass(frozen=True)
class ArrangementCell:
    signs: tuple[int, ...]
    point: Vector
    region: Polyhedron
    margin: Scalar = ONE


def _signed_rows(h: AffineMap, sign: int):
    # sign * (a.x + c) >= 0  <=>  -sign*a.x <= sign*c
    return tuple(-sign * a for a in h.gradient), sign * h.offset


def enumerate_cells(hyperplanes: Sequence[AffineMap], n: int) -> list[ArrangementCell]:
    """All full-dimensional cells of the arrangement ``{h = 0}``.

    Depth-first search over sign vectors; a partial sign vector survives only
    if its open region has positive uniform slack.  Hyperplanes with zero
    gradient carry the fixed sign of their constant.
    """
    if n > MAX_ARRANGEMENT_DIM:
        raise DimensionTooLarge(f"cell enumeration is limited to n <= {MAX_ARRANGEMENT_DIM}")
    hs = list(hyperplanes)
    if any(h.dim != n for h in hs):
        raise ValueError("hyperplanes must live in R^n")
    cells: list[ArrangementCell] = []

    def walk(idx, signs, region, witness):
        if idx == len(hs):
            cells.append(ArrangementCell(tuple(signs), witness.center, region, witness.margin))
            return
        h = hs[idx]
        if not any(h.gradient):
            if not h.offset:
                raise ValueError(f"hyperplane {idx} is degenerate (0 = 0)")
            walk(idx + 1, signs + [1 if h.offset > 0 else -1], region, witness)
            return
        for sign in (1, -1):
            a, c = _signed_rows(h, sign)
            sub = region.with_constraint(a, c)
            try:
                w = interior_point(sub)
            except (EmptyInterior, Infeasible):
                continue
            walk(idx + 1, signs + [sign], sub, w)

    whole = Polyhedron.whole_space(n)
    walk(0, [], whole, InteriorWitness((ZERO,) * n, ONE))
    return cells


def _distinct_maps(rng: random.Random, n: int, k: int) -> list[AffineMap]:
    maps: list[AffineMap] = []
    while len(maps) < k:
        f = AffineMap(tuple(Q(rng.randint(-4, 4)) for _ in range(n)), Q(rng.randint(-4, 4)))
        if f not in maps:
            maps.append(f)
    return maps


def _random_expression(rng: random.Random, k: int) -> list[list[int]]:
    if k == 1:
        return [[0]]
    terms = rng.randint(2, k)
    size = max(1, (k + 1) // 2)
    return [sorted(rng.sample(range(k), rng.randint(1, size))) for _ in range(terms)]


def eval_maxmin(maps: Sequence[AffineMap], expression: Sequence[Sequence[int]], x) -> Scalar:
    return max(min(maps[i](x) for i in term) for term in expression)


def _pair_hyperplanes(maps: Sequence[AffineMap], indices: Sequence[int]) -> list[AffineMap]:
    hs: list[AffineMap] = []
    for a, i in enumerate(indices):
        for j in indices[a + 1:]:
            h = maps[i] - maps[j]
            if any(h.gradient) and h not in hs and -h not in hs:
                hs.append(h)
    return hs


def _cell_index(maps, expression, x, candidates) -> int:
    value = eval_maxmin(maps, expression, x)
    return next(i for i in candidates if maps[i](x) == value)


def maxmin_instance(maps: Sequence[AffineMap], expression: Sequence[Sequence[int]], n: int) -> CpwlInstance:
    """Pieces are the cells of the arrangement of pairwise differences of the
    maps the expression actually realizes; each cell carries its single map."""
    if n > MAX_ARRANGEMENT_DIM:
        raise DimensionTooLarge(f"maxmin instances are limited to n <= {MAX_ARRANGEMENT_DIM}")
    maps = list(maps)
    cells = enumerate_cells(_pair_hyperplanes(maps, range(len(maps))), n)
    everything = range(len(maps))
    realized = sorted({_cell_index(maps, expression, c.point, everything) for c in cells})
    cells = enumerate_cells(_pair_hyperplanes(maps, realized), n)
    pieces = []
    for c in cells:
        i = _cell_index(maps, expression, c.point, realized)
        region = c.region if c.region.m else Polyhedron.whole_space(n)
        pieces.append(Piece(region, maps[i], InteriorWitness(c.point, c.margin)))
    return CpwlInstance(n, pieces)


def gen_maxmin(n: int, k: int, seed: int = 0) -> CpwlInstance:
    """Random max-of-mins over ``k`` random distinct affine maps on R^n."""
    if n > MAX_ARRANGEMENT_DIM:
        raise DimensionTooLarge(f"maxmin instances are limited to n <= {MAX_ARRANGEMENT_DIM}")
    if k < 1:
        raise ValueError("k must be positive")
    rng = random.Random(seed)
    maps = _distinct_maps(rng, n, k)
    return maxmin_instance(maps, _random_expression(rng, k), n)


def random_network(n: int, widths: Sequence[int], seed: int = 0) -> ReluNetwork:
    """Scalar-output network with small rational weights."""
    rng = random.Random(seed)
    dims = [n] + list(widths) + [1]
    layers = []
    for d_in, d_out in zip(dims, dims[1:]):
        W = tuple(tuple(_rand_rational(rng, -3, 3, (1, 1, 2)) for _ in range(d_in)) for _ in range(d_out))
        b = tuple(_rand_rational(rng, -3, 3, (1, 1, 2)) for _ in range(d_out))
        layers.append(Layer(W, b))
    return ReluNetwork(n, tuple(layers))


def split_relus(total: int, hidden_layers: int) -> list[int]:
    base, extra = divmod(total, hidden_layers)
    widths = [base + (1 if i < extra else 0) for i in range(hidden_layers)]
    return [w for w in widths if w > 0] or [total]


def regions_from_network(net: ReluNetwork) -> CpwlInstance:
    """Linear regions of ``net`` as a CPWL instance, by exact activation search.

    Each neuron splits the current region into its active (``h >= 0``) and
    inactive (``h <= 0``) halves; halves with empty interior are pruned.  A
    neuron whose pre-activation is constant on the region takes its fixed state
    without branching.
    """
    relus = sum(layer.out_dim for layer in net.layers[:-1])
    if relus > MAX_RELUS:
        raise TooManyNeurons(f"{relus} ReLUs exceeds the limit of {MAX_RELUS}")
    if net.output_dim != 1:
        raise ValueError("regions_from_network needs a scalar-output network")
    n = net.input_dim
    pieces: list[Piece] = []

    def affine_layer(layer: Layer, forms):
        # forms: list of AffineMap (post-activation values as maps of x)
        out = []
        for row, bias in zip(layer.W, layer.b):
            grad = [ZERO] * n
            off = bias
            for w, f in zip(row, forms):
                if w:
                    off += w * f.offset
                    for j, a in enumerate(f.gradient):
                        if a:
                            grad[j] += w * a
            out.append(AffineMap(tuple(grad), off))
        return out

    def walk(layer_idx, pre, pos, post, region, witness):
        if pos == len(pre):
            nxt = affine_layer(net.layers[layer_idx + 1], post)
            if layer_idx + 1 == net.depth - 1:
                pieces.append(Piece(region, nxt[0], witness))
            else:
                walk(layer_idx + 1, nxt, 0, [], region, witness)
            return
        h = pre[pos]
        zero = AffineMap.constant(n)
        if not any(h.gradient):
            walk(layer_idx, pre, pos + 1, post + [h if h.offset > 0 else zero], region, witness)
            return
        for active in (True, False):
            a, c = _signed_rows(h, 1 if active else -1)
            sub = region.with_constraint(a, c)
            try:
                w = interior_point(sub)
            except (EmptyInterior, Infeasible):
                continue
            walk(layer_idx, pre, pos + 1, post + [h if active else zero], sub, w)

    first = net.layers[0]
    forms = [AffineMap(row, bias) for row, bias in zip(first.W, first.b)]
    if net.depth == 1:
        return CpwlInstance(n, [Piece(Polyhedron.whole_space(n), forms[0],
                                      InteriorWitness((ZERO,) * n, ONE))])
    walk(0, forms, 0, [], Polyhedron.whole_space(n), InteriorWitness((ZERO,) * n, ONE))
    return CpwlInstance(n, pieces)


@dataclass
class EquivalenceReport:
    ok: bool
    checked: int
    mismatch: tuple | None = None

    def lines(self) -> list[str]:
        if self.ok:
            return [f"PASS: {self.checked} points agree exactly"]
        x, expected, got = self.mismatch
        pt = ", ".join(fmt(v) for v in x)
        return [f"FAIL after {self.checked} points: at ({pt}) p = {fmt(expected)}, network = {fmt(got)}"]


def _interior_step(w: InteriorWitness, A) -> Scalar:
    # keeps center + step * u inside for any |u|_inf <= 1
    worst = max((sum(abs(a) for a in row) for row in A), default=ZERO)
    return w.margin / (1 + worst)


def verify_equivalence(inst: CpwlInstance, net: ReluNetwork, samples: int = 20,
                       seed: int = 0) -> EquivalenceReport:
    """Exact comparison of ``net`` against ``p`` on every piece.

    Checks the ``n + 1`` affine sample points of each piece and ``samples``
    random rational points drawn around the piece's interior witness.
    """
    if net.input_dim != inst.n or net.output_dim != 1:
        raise ValueError("network must map R^n to R")
    rng = random.Random(seed)
    checked = 0
    for i, piece in enumerate(inst.pieces):
        w = inst.witness(i)
        points = affinely_independent_samples(w, piece.region.A)
        step = _interior_step(w, piece.region.A)
        for _ in range(samples):
            u = [Q(rng.randint(-1000, 1000)) / 1000 for _ in range(inst.n)]
            points.append(tuple(c + step * ui for c, ui in zip(w.center, u)))
        for x in points:
            expected = piece.f(x)
            got = evaluate(net, x)[0]
            checked += 1
            if got != expected:
                return EquivalenceReport(False, checked, (x, expected, got))
    return EquivalenceReport(True, checked)


def compare_networks(a: ReluNetwork, b: ReluNetwork, points: int = 1000, seed: int = 0,
                     radius: int = 10) -> EquivalenceReport:
    """Exact agreement of two scalar networks at random rational points."""
    rng = random.Random(seed)
    for count in range(1, points + 1):
        x = random_point(rng, a.input_dim, radius)
        ya, yb = evaluate(a, x)[0], evaluate(b, x)[0]
        if ya != yb:
            return EquivalenceReport(False, count, (x, ya, yb))
    return EquivalenceReport(True, points)


def compare_instance(inst: CpwlInstance, net: ReluNetwork, points: int = 200,
                     seed: int = 0) -> EquivalenceReport:
    """Exact agreement at random points of the sampling box, via piece lookup."""
    rng = random.Random(seed)
    radius = sample_radius(inst)
    for count in range(1, points + 1):
        x = random_point(rng, inst.n, radius)
        expected = inst(x)
        got = evaluate(net, x)[0]
        if got != expected:
            return EquivalenceReport(False, count, (x, expected, got))
    return EquivalenceReport(True, points)


@dataclass(frozen=True)
class BenchRecord:
    q: int
    n: int
    seconds: float
    depth: int
    width: int
    hidden: int


BENCH_HEADER = ("q", "n", "seconds", "depth", "width", "hidden")


def _time_compile(q: int, n: int, seed: int):
    inst = gen_1d(q, seed=seed, n=n)
    start = time.perf_counter()
    net = compile_traced(inst).network
    return time.perf_counter() - start, stats(net)


def bench_threads() -> int:
    try:
        return max(1, int(os.environ.get("CPWL2RELU_THREADS", "1")))
    except ValueError:
        return 1


def bench(q_list: Sequence[int], n_list: Sequence[int], trials: int = 5, seed: int = 0,
          threads: int | None = None) -> list[BenchRecord]:
    """Mean compile time over ``trials`` random instances for each ``(q, n)``.

    Instances are ``gen_1d`` functions embedded in R^n.  Stats are those of the
    first trial.
    """
    threads = threads or bench_threads()
    jobs = [(q, n, t) for q in q_list for n in n_list for t in range(trials)]

    def run(job):
        q, n, t = job
        return job, _time_compile(q, n, seed * 1_000_003 + 7919 * t + 31 * q + n)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(run, jobs))
    else:
        results = dict(run(job) for job in jobs)
    records = []
    for q in q_list:
        for n in n_list:
            times = [results[(q, n, t)][0] for t in range(trials)]
            s = results[(q, n, 0)][1]
            records.append(BenchRecord(q, n, sum(times) / trials, s.depth, s.max_width, s.hidden_neurons))
    return records


def bench_csv(records: Sequence[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    for r in records:
        writer.writerow((r.q, r.n, f"{r.seconds:.6f}", r.depth, r.width, r.hidden))
    return buf.getvalue()
