"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import math
import random
import time

import pytest

from cpwl2relu.bounds import (
    phi,
    prior_bound_he,
    prior_bound_hertrich,
    theorem1_bounds,
    theorem2_bounds,
    theorem3_bounds,
)
from cpwl2relu.builders import (
    ExtremumKind,
    compose,
    concat,
    extremum_network,
    identity_network,
    r_sequence,
)
from cpwl2relu.compiler import compile_traced, find_distinct_components
from cpwl2relu.geometry import AffineMap
from cpwl2relu.harness import (
    compare_instance,
    compare_networks,
    enumerate_cells,
    gen_1d,
    gen_maxmin,
    random_network,
    regions_from_network,
    split_relus,
    verify_equivalence,
)
from cpwl2relu.numerics import Q
from cpwl2relu.relunet import evaluate, stats


def _maps(rng, m, n):
    return [AffineMap(tuple(Q(rng.randint(-20, 20)) / rng.randint(1, 6) for _ in range(n)),
                      Q(rng.randint(-20, 20)) / rng.randint(1, 6)) for _ in range(m)]


def _point(rng, n):
    return tuple(Q(rng.randint(-10**4, 10**4)) / rng.randint(1, 10**3) for _ in range(n))


def criterion_1():
    got = [theorem1_bounds(q).hidden for q in (2, 3, 4, 5)]
    got3 = [theorem3_bounds(1, k).hidden for k in (2, 3, 4)] + [theorem3_bounds(2, 3).hidden]
    ok = got == [11, 44, 57, 150] and got3 == [11, 57, 108, 95]
    return ok, f"theorem1 {got}, theorem3 {got3}", 1.0


def criterion_2():
    he = [prior_bound_he(1, 2, 2), prior_bound_he(1, 3, 3), prior_bound_he(1, 3, 6)]
    ht = [prior_bound_hertrich(1, 2), prior_bound_hertrich(1, 3), prior_bound_hertrich(2, 3)]
    ok = he == [16, 2048, 1048576] and ht == [128, 1458, 43046721]
    return ok, f"he {he}, hertrich {ht}", None


def criterion_3():
    head = [r_sequence(k) for k in (1, 2, 3)]
    bad = []
    for k in range(1, 2049):
        cap = 3 * (2 ** (k - 1).bit_length() - 1)
        if not r_sequence(k) <= cap < 6 * k - 3:
            bad.append(k)
        if k > 1 and r_sequence(k) <= r_sequence(k - 1):
            bad.append(k)
    return head == [0, 3, 8] and not bad, f"r(1..3) = {head}, violations at {bad[:5]}", 1.0


def criterion_4():
    rng = random.Random(4)
    failures = []
    for case in range(200):
        m, n = rng.randint(1, 16), rng.randint(1, 8)
        kind = rng.choice(list(ExtremumKind))
        fs = _maps(rng, m, n)
        net = extremum_network(fs, kind)
        s = stats(net)
        want = ((m - 1).bit_length() + 1, r_sequence(m), math.ceil(3 * m / 2) if m > 1 else 0)
        if (s.depth, s.hidden_neurons, s.max_width) != want:
            failures.append((case, "stats"))
            continue
        pick = max if kind is ExtremumKind.MAX else min
        for _ in range(100):
            x = _point(rng, n)
            if evaluate(net, x)[0] != pick(f(x) for f in fs):
                failures.append((case, "value"))
                break
    return not failures, f"200 cases x 100 points, failures {failures[:5]}", 30.0


def criterion_5():
    rng = random.Random(5)
    failures = []
    for case in range(100):
        n = rng.randint(1, 3)
        ni, li = rng.randint(1, 4), rng.randint(1, 5)
        ident = identity_network(ni, li)
        si = stats(ident)
        if (si.depth, si.hidden_neurons, si.max_width) != (li, 2 * ni * (li - 1), 2 * ni if li > 1 else 0):
            failures.append((case, "identity"))

        nets = [extremum_network(_maps(rng, rng.randint(1, 9), n), rng.choice(list(ExtremumKind)))
                for _ in range(rng.randint(2, 5))]
        l = max(g.depth for g in nets)
        c = concat(nets)
        sc = stats(c)
        hidden = sum(stats(g).hidden_neurons + 2 * g.output_dim * (l - g.depth) for g in nets)
        width = sum(max(stats(g).max_width, 2 * g.output_dim) for g in nets)
        if sc.depth != l or sc.hidden_neurons != hidden or sc.max_width > width:
            failures.append((case, "concat"))

        top = extremum_network([AffineMap(tuple(Q(int(i == j)) for j in range(len(nets))), Q(0))
                                for i in range(len(nets))])
        h = compose(c, top)
        sh, st = stats(h), stats(top)
        if (sh.depth, sh.hidden_neurons) != (sc.depth + st.depth - 1, sc.hidden_neurons + st.hidden_neurons):
            failures.append((case, "compose"))
        x = _point(rng, n)
        if evaluate(h, x)[0] != max(evaluate(g, x)[0] for g in nets) or evaluate(ident, x[:1] * ni) != x[:1] * ni:
            failures.append((case, "value"))
    return not failures, f"100 random builds, failures {failures[:5]}", 10.0


def _compile_and_check(inst):
    result = compile_traced(inst)
    report = verify_equivalence(inst, result.network, samples=20, seed=inst.q)
    within = theorem2_bounds(result.k, result.q).dominates(stats(result.network))
    return report.ok, within, result


def criterion_6():
    rng = random.Random(6)
    failures = []
    for i in range(50):
        q = rng.randint(1, 32)
        ok, within, _ = _compile_and_check(gen_1d(q, seed=i))
        if not (ok and within):
            failures.append(("1d", q, i, ok, within))
    for i in range(20):
        k = 2 + i % 4
        ok, within, _ = _compile_and_check(gen_maxmin(2, k, seed=i))
        if not (ok and within):
            failures.append(("maxmin", k, i, ok, within))
    return not failures, f"50 gen_1d + 20 gen_maxmin, failures {failures[:5]}", 300.0


def criterion_7():
    failures = []
    for seed in range(20):
        relus = 2 + seed % 7
        net = random_network(2, split_relus(relus, 1 + seed % 2), seed=seed)
        inst = regions_from_network(net)
        result = compile_traced(inst)
        if not verify_equivalence(inst, result.network, seed=seed).ok:
            failures.append((seed, "pieces"))
        if not compare_networks(net, result.network, points=1000, seed=seed).ok:
            failures.append((seed, "source"))
    return not failures, f"20 networks x 1000 points, failures {failures[:5]}", 300.0


def criterion_8():
    rng = random.Random(8)
    failures = []
    for i in range(50):
        n, m = rng.randint(1, 3), rng.randint(1, 8)
        hs = [AffineMap(tuple(rng.randint(-4, 4) for _ in range(n)), rng.randint(-4, 4)) for _ in range(m)]
        hs = [h for h in hs if any(h.gradient)] or [AffineMap((1,) * n, 0)]
        count = len(enumerate_cells(hs, n))
        if count > sum(math.comb(len(hs), j) for j in range(n + 1)):
            failures.append(("cells", i, count))
    for i in range(20):
        n, k = 1 + i % 3, 1 + i % 5
        inst = gen_maxmin(n, k, seed=i)
        kd = find_distinct_components(inst).k
        if not kd <= inst.q <= phi(n, kd):
            failures.append(("phi", i, kd, inst.q))
    return not failures, f"50 arrangements + 20 gen_maxmin, failures {failures[:5]}", 60.0


def criterion_9():
    inst = gen_1d(32, seed=9, n=100)
    start = time.perf_counter()
    result = compile_traced(inst)
    seconds = time.perf_counter() - start
    check = compare_instance(inst, result.network, points=20, seed=9)
    ok = seconds <= 60.0 and check.ok
    return ok, f"q=32 n=100 compiled in {seconds:.2f} s, spot check {'ok' if check.ok else 'FAILED'}", None


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def run_criterion(fn):
    start = time.perf_counter()
    ok, detail, limit = fn()
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed > limit:
        ok = False
        detail += f" (took {elapsed:.1f} s, limit {limit:.0f} s)"
    number = fn.__name__.split("_")[1]
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} [{elapsed:.2f} s]"
    return ok, line


@pytest.mark.parametrize("fn", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(fn, capsys):
    ok, line = run_criterion(fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(fn) for fn in CRITERIA]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
