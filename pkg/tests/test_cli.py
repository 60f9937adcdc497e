import csv
import io
import json

import pytest

from cpwl2relu.cli import main


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


ABS = {"n": 1, "pieces": [
    {"A": [["1"]], "b": ["0"], "f": {"a": ["-1"], "b": "0"}},
    {"A": [["-1"]], "b": ["0"], "f": {"a": ["1"], "b": "0"}},
]}


@pytest.fixture
def abs_file(tmp_path):
    path = tmp_path / "abs.json"
    path.write_text(json.dumps(ABS))
    return path


def test_compile_abs(capsys, abs_file, tmp_path):
    out_path = tmp_path / "net.json"
    code, out, _ = run(capsys, "compile", str(abs_file), "-o", str(out_path))
    assert code == 0
    assert "realized: layers=2 width=3 hidden=3" in out
    assert "bound (k=2, q=2): layers=3 width=6 hidden=11" in out
    assert json.loads(out_path.read_text())["arithmetic"] == "rational"
    code, out, _ = run(capsys, "verify", str(abs_file), str(out_path))
    assert code == 0 and out.startswith("PASS")


def test_compile_discontinuous(capsys, tmp_path):
    bad = json.loads(json.dumps(ABS))
    bad["pieces"][1]["f"]["b"] = "1"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out, err = run(capsys, "compile", str(path))
    assert code == 2
    assert "consistency" in err and out == ""


def test_compile_io_and_parse_errors(capsys, tmp_path):
    assert run(capsys, "compile", str(tmp_path / "missing.json"))[0] == 1
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    code, _, err = run(capsys, "compile", str(junk))
    assert code == 1 and "line 1" in err


def test_verify_mismatch(capsys, abs_file, tmp_path):
    net = tmp_path / "net.json"
    net.write_text(json.dumps({"input_dim": 1, "layers": [{"W": [["1"]], "b": ["0"]}]}))
    code, out, _ = run(capsys, "verify", str(abs_file), str(net))
    assert code == 2 and out.startswith("FAIL")


def test_pipeline_through_stdin(capsys, monkeypatch):
    code, inst, _ = run(capsys, "gen", "--kind", "maxmin", "--n", "2", "--k", "3", "--seed", "5")
    assert code == 0
    code, bundle, err = run(capsys, "compile", "-", "--bundle", stdin=inst, monkeypatch=monkeypatch)
    assert code == 0 and "realized" in err
    code, out, _ = run(capsys, "verify", "-", stdin=bundle, monkeypatch=monkeypatch)
    assert code == 0 and out.startswith("PASS")


def test_pipeline_many_seeds(capsys, monkeypatch):
    for seed in range(100):
        q, n = 1 + seed % 16, 1 + seed % 2
        code, inst, _ = run(capsys, "gen", "--q", str(q), "--n", str(n), "--seed", str(seed))
        assert code == 0
        code, bundle, _ = run(capsys, "compile", "-", "--bundle", "--samples", "20",
                              stdin=inst, monkeypatch=monkeypatch)
        assert code == 0
        code, _, _ = run(capsys, "verify", "-", "--samples", "3", stdin=bundle, monkeypatch=monkeypatch)
        assert code == 0, seed


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bounds_q_row(capsys):
    code, out, _ = run(capsys, "bounds", "--q", "2", "--format", "csv")
    (row,) = rows(out)
    assert code == 0
    assert (row["n"], row["k"], row["hidden"], row["he"], row["hertrich"]) == ("1", "2", "11", "16", "128")
    (one,) = rows(run(capsys, "bounds", "--q", "1", "--format", "csv")[1])
    assert (one["layers"], one["width"], one["hidden"]) == ("1", "0", "0")


def test_bounds_nk_row(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "2", "--k", "3", "--format", "json")
    (row,) = json.loads(out)
    assert code == 0 and row["hidden"] == 95 and row["hertrich"] == 43046721 and row["q"] == 6


def test_bounds_sweeps(capsys):
    out = run(capsys, "bounds", "--sweep", "q=1..40", "--n", "1", "--format", "csv")[1]
    table = rows(out)
    assert len(table) == 40
    assert [r["hidden"] for r in table[1:5]] == ["11", "44", "57", "150"]
    out = run(capsys, "bounds", "--sweep", "k=1..21", "--n", "1,2", "--format", "csv")[1]
    table = rows(out)
    assert len(table) == 42
    assert [r["hidden"] for r in table[1:4]] == ["11", "57", "108"]
    assert table[21 + 2]["hidden"] == "95"


def test_bounds_errors(capsys):
    assert run(capsys, "bounds", "--k", "3", "--q", "2")[0] == 1
    assert run(capsys, "bounds")[0] == 1
    assert run(capsys, "bounds", "--sweep", "q=1..3", "--q", "2")[0] == 1
    assert run(capsys, "bounds", "--sweep", "z=1..3")[0] == 1
    assert run(capsys, "bounds", "--q", "2", "--bogus")[0] == 1


def test_bounds_table_is_aligned(capsys):
    out = run(capsys, "bounds", "--sweep", "k=1..4")[1]
    lines = out.splitlines()
    assert lines[0].split()[:4] == ["basis", "n", "k", "q"]
    assert len({len(line) for line in lines}) == 1


def test_roundtrip_default_and_determinism(capsys):
    first = run(capsys, "roundtrip")
    assert first[0] == 0
    assert "pieces q=" in first[1] and "bound (k=" in first[1]
    assert run(capsys, "roundtrip") == first


def test_roundtrip_guard(capsys):
    code, _, err = run(capsys, "roundtrip", "--relus", "25")
    assert code == 1 and "TooManyNeurons" in err and err.startswith("regions")


def test_gen_deterministic_and_seed_range(capsys, tmp_path):
    a = run(capsys, "gen", "--q", "7", "--seed", str(2**64 - 1))
    assert a[0] == 0 and a == run(capsys, "gen", "--q", "7", "--seed", str(2**64 - 1))
    assert run(capsys, "gen", "--seed", str(2**64))[0] == 1
    assert run(capsys, "gen", "--seed", "-1")[0] == 1


def test_bench_csv(capsys, tmp_path):
    path = tmp_path / "bench.csv"
    code, _, _ = run(capsys, "bench", "--q", "1,2", "--n", "1", "--trials", "1", "-o", str(path))
    assert code == 0
    table = rows(path.read_text())
    assert [(r["q"], r["n"]) for r in table] == [("1", "1"), ("2", "1")]
    assert float(table[0]["seconds"]) > 0


def test_bounds_large_comparator_is_exact_power(capsys):
    out = run(capsys, "bounds", "--n", "1", "--k", "7", "--format", "json")[1]
    (row,) = json.loads(out)
    assert row["he"] == "1*2^35290"
