"""Command-line entry point.

Exit codes: 0 success, 1 environment / usage / parse problems, 2 semantic
failure (validation or verification).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

from . import __version__
from .bounds import (
    InvalidArgs,
    phi,
    prior_bound_he_exponent,
    prior_bound_hertrich,
    theorem1_bounds,
    theorem2_bounds,
    theorem3_bounds,
)
from .compiler import (
    CompileError,
    compile_traced,
    dumps_instance,
    instance_from_dict,
    instance_to_dict,
    validate,
)
from .geometry import GeometryError
from .harness import (
    TooManyNeurons,
    bench,
    bench_csv,
    compare_networks,
    gen_1d,
    gen_maxmin,
    random_network,
    regions_from_network,
    split_relus,
    verify_equivalence,
)
from .numerics import DimensionMismatch
from .relunet import ParseError, from_dict, load_json, stats, to_dict

OK, ENV, SEMANTIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _sweep(text: str) -> tuple[str, list[int]]:
    try:
        name, span = text.split("=", 1)
        lo, hi = span.split("..", 1)
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=LO..HI, got {text!r}") from None
    if name not in ("q", "k") or lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad sweep {text!r}; use q=LO..HI or k=LO..HI with 1 <= LO <= HI")
    return name, list(range(lo, hi + 1))


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _triple(t) -> str:
    return f"layers={t.layers} width={t.max_width} hidden={t.hidden}"


def _stats_line(s) -> str:
    return f"layers={s.depth} width={s.max_width} hidden={s.hidden_neurons}"


def cmd_gen(args) -> int:
    if args.kind == "1d":
        inst = gen_1d(args.q, seed=args.seed, n=args.n)
    else:
        inst = gen_maxmin(args.n, args.k, seed=args.seed)
    _write_text(args.output, dumps_instance(inst) + "\n")
    return OK


def run_compile(args) -> int:
    obj = load_json(_read_text(args.input))
    if isinstance(obj, dict) and "instance" in obj:
        obj = obj["instance"]
    inst = instance_from_dict(obj)
    to_stdout = args.output in (None, "-")
    log = sys.stderr if to_stdout else sys.stdout
    if not args.no_validate:
        report = validate(inst, samples=args.samples, seed=args.seed)
        if not report.ok:
            print("validation failed", file=log)
            for line in report.lines():
                print(line, file=log)
            return SEMANTIC
    result = compile_traced(inst)
    if args.bundle:
        payload = {"instance": instance_to_dict(inst), "network": to_dict(result.network)}
    else:
        payload = to_dict(result.network)
    _write_text(args.output, json.dumps(payload, separators=(",", ":")) + "\n")
    bound = result.bound()
    realized = stats(result.network)
    print(f"pieces q={result.q} components k={result.k}", file=log)
    print(f"realized: {_stats_line(realized)}", file=log)
    print(f"bound (k={result.k}, q={result.q}): {_triple(bound)}", file=log)
    return OK


def cmd_verify(args) -> int:
    obj = load_json(_read_text(args.instance))
    if args.network is None:
        if not isinstance(obj, dict) or "network" not in obj or "instance" not in obj:
            raise ParseError("expected a bundle with 'instance' and 'network' or a separate network file", "$")
        inst, net = instance_from_dict(obj["instance"]), from_dict(obj["network"])
    else:
        inst = instance_from_dict(obj)
        net = from_dict(load_json(_read_text(args.network)))
    report = verify_equivalence(inst, net, samples=args.samples, seed=args.seed)
    for line in report.lines():
        print(line)
    return OK if report.ok else SEMANTIC


# comparator values above this many bits print as "n*2^E"
EXACT_BITS = 256


def _he_cell(n: int, k: int, q: int):
    factor, e = prior_bound_he_exponent(n, k, q)
    return factor << e if e <= EXACT_BITS else f"{factor}*2^{e}"


BOUND_COLUMNS = ("basis", "n", "k", "q", "layers", "width", "hidden", "he", "hertrich")


def bound_row(n: int, k: int | None, q: int | None) -> dict:
    if k is None and q is None:
        raise InvalidArgs("need q or k")
    if k is None:
        basis, k, ours = "q", q, theorem1_bounds(q)
        he = _he_cell(n, q, q)
    elif q is None:
        basis, q, ours = "n+k", phi(n, k), theorem3_bounds(n, k)
        he = _he_cell(n, k, math.factorial(k))
    else:
        basis, ours = "k+q", theorem2_bounds(k, q)
        he = _he_cell(n, k, q)
    return {"basis": basis, "n": n, "k": k, "q": q, "layers": ours.layers, "width": ours.max_width,
            "hidden": ours.hidden, "he": he, "hertrich": prior_bound_hertrich(n, k)}


def bound_rows(n_list: Sequence[int], k: int | None, q: int | None, sweep=None) -> list[dict]:
    rows = []
    for n in n_list:
        if sweep is None:
            rows.append(bound_row(n, k, q))
            continue
        name, values = sweep
        for v in values:
            if name == "q":
                rows.append(bound_row(n, k, v))
            else:
                rows.append(bound_row(n, v, q))
    return rows


def format_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    table = [list(BOUND_COLUMNS)] + [[str(r[c]) for c in BOUND_COLUMNS] for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(table)
        return buf.getvalue()
    widths = [max(len(line[i]) for line in table) for i in range(len(BOUND_COLUMNS))]
    return "".join("  ".join(cell.rjust(w) for cell, w in zip(line, widths)).rstrip() + "\n"
                   for line in table)


def run_bounds(args) -> int:
    if args.sweep is None and args.q is None and args.k is None:
        raise UsageError("bounds: supply --q, --k (with --n), or --sweep")
    if args.sweep is not None and getattr(args, args.sweep[0]) is not None:
        raise UsageError(f"bounds: --sweep {args.sweep[0]}=... conflicts with --{args.sweep[0]}")
    n_list = args.n or [1]
    if any(n < 1 for n in n_list):
        raise UsageError("bounds: n must be positive")
    rows = bound_rows(n_list, args.k, args.q, args.sweep)
    sys.stdout.write(format_rows(rows, args.format))
    return OK


def run_roundtrip(args) -> int:
    stage = "generate"
    try:
        net = random_network(args.n, split_relus(args.relus, args.hidden_layers), seed=args.seed)
        stage = "regions"
        inst = regions_from_network(net)
        stage = "compile"
        result = compile_traced(inst)
        stage = "verify"
        pieces = verify_equivalence(inst, result.network, samples=args.samples, seed=args.seed)
        direct = compare_networks(net, result.network, points=args.points, seed=args.seed)
    except TooManyNeurons as exc:
        print(f"{stage}: TooManyNeurons: {exc}", file=sys.stderr)
        return ENV
    except (CompileError, GeometryError, DimensionMismatch, ValueError) as exc:
        print(f"{stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return SEMANTIC
    realized = stats(result.network)
    print(f"seed={args.seed} n={args.n} relus={args.relus}")
    print(f"source: {_stats_line(stats(net))}")
    print(f"pieces q={result.q} components k={result.k}")
    print(f"realized: {_stats_line(realized)}")
    print(f"bound (k={result.k}, q={result.q}): {_triple(result.bound())}")
    print("pieces: " + pieces.lines()[0])
    print("source net: " + direct.lines()[0])
    return OK if pieces.ok and direct.ok else SEMANTIC


def run_bench(args) -> int:
    records = bench(args.q, args.n, trials=args.trials, seed=args.seed)
    text = bench_csv(records)
    _write_text(args.output, text)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpwl2relu", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random CPWL instance")
    p.add_argument("--kind", choices=("1d", "maxmin"), default="1d")
    p.add_argument("--q", type=int, default=4, help="pieces (1d)")
    p.add_argument("--n", type=int, default=1, help="input dimension")
    p.add_argument("--k", type=int, default=3, help="affine maps (maxmin)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compile", help="compile an instance to a ReLU network")
    p.add_argument("input", help="instance JSON path, or - for stdin")
    p.add_argument("-o", "--output", help="network JSON path (default stdout)")
    p.add_argument("--bundle", action="store_true", help="emit instance and network together")
    p.add_argument("--no-validate", action="store_true")
    p.add_argument("--samples", type=int, default=200, help="coverage samples during validation")
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=run_compile)

    p = sub.add_parser("verify", help="check a network against an instance")
    p.add_argument("instance", help="instance JSON, or a bundle from compile --bundle (- for stdin)")
    p.add_argument("network", nargs="?")
    p.add_argument("--samples", type=int, default=20, help="random points per piece")
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="print size bounds and prior-work comparators")
    p.add_argument("--n", type=_int_list, help="input dimension(s), comma separated (default 1)")
    p.add_argument("--k", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--sweep", type=_sweep, help="q=LO..HI or k=LO..HI")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.set_defaults(func=run_bounds)

    p = sub.add_parser("roundtrip", help="network -> regions -> compile -> verify")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--relus", type=int, default=8)
    p.add_argument("--hidden-layers", type=int, default=2)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--points", type=int, default=1000)
    p.set_defaults(func=run_roundtrip)

    p = sub.add_parser("bench", help="time compilation of random instances, CSV output")
    p.add_argument("--q", type=_int_list, default=[1, 2, 4, 8, 16, 32])
    p.add_argument("--n", type=_int_list, default=[1, 10, 100])
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=run_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return ENV
    except InvalidArgs as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ENV
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return ENV
    except (DimensionMismatch, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return ENV
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return ENV


if __name__ == "__main__":
    sys.exit(main())
