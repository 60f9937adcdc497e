import math
import random

import pytest

from cpwl2relu.bounds import phi
from cpwl2relu.builders import extremum_network
from cpwl2relu.compiler import compile, compile_traced, find_distinct_components, validate
from cpwl2relu.geometry import AffineMap
from cpwl2relu.harness import (
    BENCH_HEADER,
    DimensionTooLarge,
    TooManyNeurons,
    bench,
    bench_csv,
    compare_networks,
    enumerate_cells,
    gen_1d,
    gen_maxmin,
    maxmin_instance,
    random_network,
    regions_from_network,
    verify_equivalence,
)
from cpwl2relu.numerics import Q
from cpwl2relu.relunet import Layer, ReluNetwork, evaluate


def test_gen_1d_examples():
    one = gen_1d(1, seed=3)
    assert one.q == 1 and one.pieces[0].region.m == 0
    five = gen_1d(5, seed=9)
    assert validate(five).ok
    for left, right in zip(five.pieces, five.pieces[1:]):
        t = right.region.b[0] * -1
        assert left.f((t,)) == right.f((t,))
        assert left.f.gradient != right.f.gradient
    assert gen_1d(6, seed=4) == gen_1d(6, seed=4)


def test_gen_1d_embedded():
    inst = gen_1d(4, seed=2, n=3)
    assert inst.n == 3 and validate(inst).ok
    assert len({p.f.gradient[1:] for p in inst.pieces}) == 1


def test_cells_examples():
    x, y = AffineMap((1, 0), 0), AffineMap((0, 1), 0)
    assert len(enumerate_cells([x], 2)) == 2
    assert len(enumerate_cells([x, y], 2)) == 4
    diag = AffineMap((1, 1), -1)
    cells = enumerate_cells([x, y, diag], 2)
    assert len(cells) == 7 == sum(math.comb(3, i) for i in range(3))
    assert len({c.signs for c in cells}) == 7
    for c in cells:
        for h, s in zip([x, y, diag], c.signs):
            assert s * h(c.point) > 0
    with pytest.raises(DimensionTooLarge):
        enumerate_cells([AffineMap((1, 0, 0, 0), 0)], 4)


def test_cells_zaslavsky_random():
    rng = random.Random(8)
    for _ in range(10):
        n, m = rng.randint(1, 3), rng.randint(1, 6)
        hs = [AffineMap(tuple(rng.randint(-3, 3) or 1 for _ in range(n)), rng.randint(-3, 3)) for _ in range(m)]
        assert len(enumerate_cells(hs, n)) <= sum(math.comb(m, i) for i in range(n + 1))


def test_gen_maxmin_examples():
    assert gen_maxmin(2, 1, seed=0).q == 1
    x = AffineMap((Q(1),), Q(0))
    inst = maxmin_instance([x, -x], [[0], [1]], 1)
    assert inst.q == 2
    assert {p.f for p in inst.pieces} == {x, -x}
    with pytest.raises(DimensionTooLarge):
        gen_maxmin(4, 3)


def test_gen_maxmin_phi_bound():
    for seed in range(6):
        inst = gen_maxmin(2, 4, seed=seed)
        assert validate(inst).ok
        k = find_distinct_components(inst).k
        assert k <= inst.q <= phi(2, k)
        assert inst.q <= sum(math.comb(6, i) for i in range(3))


def test_regions_examples():
    relu_x = ReluNetwork.from_weights(1, [([[1]], [0]), ([[1]], [0])])
    inst = regions_from_network(relu_x)
    assert sorted(p.f.gradient[0] for p in inst.pieces) == [0, 1]
    ext = extremum_network([AffineMap((1,), 0), AffineMap((-1,), 0)])
    maps = {p.f for p in regions_from_network(ext).pieces}
    assert maps == {AffineMap((1,), 0), AffineMap((-1,), 0)}


def test_regions_random_net_maps_and_coverage():
    net = random_network(2, [3, 3], seed=17)
    inst = regions_from_network(net)
    for i, piece in enumerate(inst.pieces):
        c = inst.witness(i).center
        assert piece.f(c) == evaluate(net, c)[0]
    rng = random.Random(1)
    for _ in range(200):
        x = tuple(Q(rng.randint(-5000, 5000)) / 1000 for _ in range(2))
        holders = [p for p in inst.pieces if p.region.contains(x)]
        assert holders
        assert {p.f(x) for p in holders} == {evaluate(net, x)[0]}


def test_regions_guard():
    with pytest.raises(TooManyNeurons):
        regions_from_network(random_network(2, [13, 12], seed=0))


def test_verify_pass_and_perturbed():
    inst = gen_1d(8, seed=5)
    net = compile(inst)
    assert verify_equivalence(inst, net).ok
    last = net.layers[-1]
    bad = ReluNetwork(net.input_dim, net.layers[:-1] + (Layer(last.W, (last.b[0] + Q(1) / 1000,)),))
    report = verify_equivalence(inst, bad)
    assert not report.ok
    x, expected, got = report.mismatch
    assert got - expected == Q(1) / 1000
    assert "FAIL" in report.lines()[0]


def test_round_trip_against_source_net():
    net = random_network(2, [4, 2], seed=3)
    inst = regions_from_network(net)
    result = compile_traced(inst)
    assert verify_equivalence(inst, result.network).ok
    assert compare_networks(net, result.network, points=1000, seed=3).ok


def test_bench_records_and_csv():
    records = bench([1, 3], [1, 2], trials=2, seed=1)
    assert [(r.q, r.n) for r in records] == [(1, 1), (1, 2), (3, 1), (3, 2)]
    assert all(r.seconds > 0 for r in records)
    text = bench_csv(records)
    lines = text.splitlines()
    assert lines[0] == ",".join(BENCH_HEADER) == "q,n,seconds,depth,width,hidden"
    assert len(lines) == 5
    assert lines[1].startswith("1,1,")


def test_bench_threads_env(monkeypatch):
    monkeypatch.setenv("CPWL2RELU_THREADS", "3")
    records = bench([2, 4], [1], trials=3, seed=0)
    serial = bench([2, 4], [1], trials=3, seed=0, threads=1)
    assert [(r.q, r.depth, r.width, r.hidden) for r in records] == \
        [(r.q, r.depth, r.width, r.hidden) for r in serial]
