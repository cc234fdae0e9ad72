import csv
import io
from fractions import Fraction

import numpy as np
import pytest

from ffmm import DenseMatrix, OpCounter, PrimeField, dixon_solve, mm_classic
from ffmm.cli import (
    BENCH_COLUMNS,
    EXIT_INPUT,
    EXIT_MATH,
    EXIT_OK,
    BenchRecord,
    format_bench,
    main,
    run_bench,
    tune_threshold,
)
from ffmm.dense import format_matrix, read_matrix, write_matrix
from ffmm.schemes import format_scheme, shipped_scheme

F = PrimeField(131071)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pair(tmp_path):
    rng = np.random.default_rng(0)
    A, B = DenseMatrix.random(37, 22, F, rng), DenseMatrix.random(22, 30, F, rng)
    write_matrix(tmp_path / "A.txt", A)
    write_matrix(tmp_path / "B.txt", B)
    return tmp_path, A, B


def test_mul_identity(tmp_path, capsys):
    rng = np.random.default_rng(1)
    B = DenseMatrix.random(6, 4, F, rng)
    write_matrix(tmp_path / "I.txt", DenseMatrix.identity(6, F))
    write_matrix(tmp_path / "B.txt", B)
    code, out, _ = run(capsys, "mul", tmp_path / "I.txt", tmp_path / "B.txt")
    assert code == EXIT_OK
    assert out == format_matrix(B)


def test_mul_classic_and_fast_agree(pair, capsys):
    d, A, B = pair
    outs = []
    for algo in ("classic", "fast", "waksman", "parallel"):
        target = d / f"C_{algo}.txt"
        code, _, _ = run(capsys, "mul", d / "A.txt", d / "B.txt", "--algo", algo, "--threshold", 4, "-o", target)
        assert code == EXIT_OK
        outs.append(target.read_text())
    assert len(set(outs)) == 1
    assert read_matrix(d / "C_fast.txt") == mm_classic(A, B)


def test_mul_integer_mode(tmp_path, capsys):
    big = 10**30
    (tmp_path / "A.txt").write_text(f"2 2 0\n{big} 1\n-1 2\n")
    (tmp_path / "B.txt").write_text(f"2 1 0\n{big}\n3\n")
    code, out, _ = run(capsys, "mul", tmp_path / "A.txt", tmp_path / "B.txt", "--algo", "fast")
    assert code == EXIT_OK
    assert out.split() == ["2", "1", "0", str(big * big + 3), str(-big + 6)]
    (tmp_path / "P.txt").write_text("1 1 7\n5\n")
    (tmp_path / "Q.txt").write_text("1 1 7\n6\n")
    code, out, _ = run(capsys, "mul", tmp_path / "P.txt", tmp_path / "Q.txt", "--mod", 0)
    assert code == EXIT_OK and out.split() == ["1", "1", "0", "30"]


def test_mul_errors(pair, capsys):
    d, _, _ = pair
    code, _, err = run(capsys, "mul", d / "A.txt", d / "A.txt")
    assert code == EXIT_INPUT and "error" in err
    (d / "bad.txt").write_text("2 2 7\n1 2 3\n")
    assert run(capsys, "mul", d / "bad.txt", d / "A.txt")[0] == EXIT_INPUT
    assert run(capsys, "mul", d / "missing.txt", d / "A.txt")[0] == EXIT_INPUT
    assert run(capsys, "mul")[0] == EXIT_INPUT
    (d / "odd.txt").write_text("1 3 131071\n1 2 3\n")
    (d / "col.txt").write_text("3 1 131071\n1\n2\n3\n")
    assert run(capsys, "mul", d / "odd.txt", d / "col.txt", "--algo", "waksman")[0] == EXIT_INPUT


def test_bench_csv_rows_and_gfops(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "256,512", "--algos", "classic,fast", "--threshold", 32)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == BENCH_COLUMNS
    assert [(r["n"], r["algo"]) for r in rows] == [("256", "classic"), ("256", "fast"), ("512", "classic"), ("512", "fast")]
    for r in rows:
        n, t = int(r["n"]), float(r["seconds"])
        assert float(r["gfops"]) == pytest.approx(2 * n**3 / t / 1e9, rel=1e-3, abs=1e-4)


def test_bench_fast_fewer_mults_at_1024():
    recs = run_bench([1024], 131071, ["classic", "fast"], threshold=64)
    classic, fast = recs
    assert classic.counts.mults == 1024**3
    assert fast.counts.mults < classic.counts.mults
    # 4 Winograd levels down to 64: 7^4 leaf products of size 64
    assert fast.counts.mults == 7**4 * 64**3


def test_bench_record_formula():
    r = BenchRecord(100, "classic", 7, 0.5, OpCounter())
    assert r.gfops == 2 * 100**3 / 0.5 / 1e9


def test_bench_fake_clock():
    ticks = iter(range(100))
    recs = run_bench([8, 16], 101, ["classic"], clock=lambda: next(ticks))
    assert [r.seconds for r in recs] == [1, 1]


def test_bench_markdown(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "32", "--algos", "classic", "--format", "md")
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "| " + " | ".join(BENCH_COLUMNS) + " |"
    assert set(lines[1]) <= set("|-")
    assert len(lines) == 3


def test_bench_unknown_algo(capsys):
    assert run(capsys, "bench", "--sizes", "8", "--algos", "nope")[0] == EXIT_INPUT


def test_format_bench_csv_header_only():
    assert format_bench([], "csv") == ",".join(BENCH_COLUMNS) + "\n"


def fake_timer(crossover):
    def measure(algo, n):
        if algo == "classic":
            return float(n**3)
        return float(n**3) * (0.9 if n >= crossover else 1.5)
    return measure


def test_tune_with_fake_timer():
    assert tune_threshold(131071, 4096, 16, fake_timer(256)) == 256
    assert tune_threshold(131071, 4096, 16, fake_timer(256)) == 256
    assert tune_threshold(131071, 128, 16, fake_timer(256)) is None
    assert tune_threshold(131071, 256, 16, fake_timer(256)) is None


def test_tune_requires_two_consecutive_wins():
    wins = {16: False, 32: True, 64: False, 128: True, 256: True}
    assert tune_threshold(3, 256, 16, lambda a, n: 0.0 if a == "fast" and wins[n] else 1.0) == 128


def test_tune_cli_no_crossover(capsys):
    code, out, _ = run(capsys, "tune", "--max-size", 8, "--start", 16)
    assert code == EXIT_OK and out.strip() == "no crossover <= 8"


def test_tune_cli_real_clock(capsys):
    code, out, _ = run(capsys, "tune", "--max-size", 64, "--start", 8)
    assert code == EXIT_OK
    words = out.split()
    if words[0] == "base_threshold":
        n = int(words[1])
        assert n > 0 and n & (n - 1) == 0
    else:
        assert out.strip() == "no crossover <= 64"


def write_int(path, rows):
    path.write_text(f"{len(rows)} {len(rows[0])} 0\n" + "\n".join(" ".join(map(str, r)) for r in rows) + "\n")


def test_solve_examples(tmp_path, capsys):
    write_int(tmp_path / "I.txt", [[1, 0], [0, 1]])
    write_int(tmp_path / "b.txt", [[7], [-9]])
    code, out, _ = run(capsys, "solve", tmp_path / "I.txt", tmp_path / "b.txt")
    assert code == EXIT_OK and out.split() == ["7/1", "-9/1"]
    write_int(tmp_path / "D.txt", [[2, 0], [0, 3]])
    write_int(tmp_path / "one.txt", [[1], [1]])
    code, out, _ = run(capsys, "solve", tmp_path / "D.txt", tmp_path / "one.txt")
    assert out.split() == ["1/2", "1/3"]


def test_solve_random_check(tmp_path, capsys):
    rng = np.random.default_rng(3)
    A = rng.integers(-1000, 1000, size=(9, 9)).tolist()
    b = rng.integers(-1000, 1000, size=(9, 1)).tolist()
    write_int(tmp_path / "A.txt", A)
    write_int(tmp_path / "b.txt", b)
    code, out, _ = run(capsys, "solve", tmp_path / "A.txt", tmp_path / "b.txt", "--check", "--seed", 1)
    lines = out.split()
    assert code == EXIT_OK and lines[-1] == "verified"
    assert [Fraction(x) for x in lines[:-1]] == list(dixon_solve(A, [r[0] for r in b], seed=1))


def test_solve_singular_and_bad_input(tmp_path, capsys):
    write_int(tmp_path / "S.txt", [[1, 2], [2, 4]])
    write_int(tmp_path / "b.txt", [[1], [1]])
    assert run(capsys, "solve", tmp_path / "S.txt", tmp_path / "b.txt")[0] == EXIT_MATH
    (tmp_path / "M.txt").write_text("2 2 7\n1 0\n0 1\n")
    assert run(capsys, "solve", tmp_path / "M.txt", tmp_path / "b.txt")[0] == EXIT_INPUT


def shipped_file(tmp_path, name):
    path = tmp_path / f"{name}.scheme"
    path.write_text(format_scheme(shipped_scheme(name)))
    return path


def test_scheme_verify_winograd(tmp_path, capsys):
    code, out, _ = run(capsys, "scheme", "verify", shipped_file(tmp_path, "winograd"))
    assert code == EXIT_OK and out.strip() == "OK rank=7"


def test_scheme_verify_failure(tmp_path, capsys):
    text = format_scheme(shipped_scheme("strassen")).splitlines()
    # flip one coefficient of the first product in the first block
    first = text[1].split()
    first[0] = "0" if first[0] != "0" else "1"
    text[1] = " ".join(first)
    bad = tmp_path / "bad.scheme"
    bad.write_text("\n".join(text) + "\n")
    code, out, _ = run(capsys, "scheme", "verify", bad)
    assert code == EXIT_MATH and out.startswith("FAIL (")


def test_scheme_dualize_six_ok(tmp_path, capsys):
    code, out, _ = run(capsys, "scheme", "dualize", shipped_file(tmp_path, "winograd"), "--verify")
    lines = out.strip().splitlines()
    assert code == EXIT_OK
    assert len(lines) == 6 and all(line.endswith("OK rank=7") for line in lines)


def test_scheme_dualize_out_dir(tmp_path, capsys):
    out_dir = tmp_path / "duals"
    out_dir.mkdir()
    code, _, _ = run(capsys, "scheme", "dualize", shipped_file(tmp_path, "strassen"), "--out-dir", out_dir)
    assert code == EXIT_OK
    files = sorted(out_dir.iterdir())
    assert len(files) == 6
    for f in files:
        assert run(capsys, "scheme", "verify", f)[1].strip() == "OK rank=7"


def test_scheme_exponent(capsys):
    code, out, _ = run(capsys, "scheme", "exponent", 70, 70, 70, 143640)
    assert code == EXIT_OK
    assert out.strip() == "2.795123" and float(out) < 2.7962
    assert run(capsys, "scheme", "exponent", 2, 2, 2, 7)[1].strip() == "2.807355"
    assert run(capsys, "scheme", "exponent", 7, 1, 7, 63, 2)[1].strip() == "2.659414"
    assert run(capsys, "scheme", "exponent", 2, 2)[0] == EXIT_INPUT


def test_scheme_export_import_round_trip(tmp_path, capsys):
    out = tmp_path / "w.scheme"
    assert run(capsys, "scheme", "export", "winograd", "-o", out)[0] == EXIT_OK
    again = tmp_path / "w2.scheme"
    assert run(capsys, "scheme", "import", out, "-o", again)[0] == EXIT_OK
    assert again.read_text() == out.read_text()
    assert run(capsys, "scheme", "export", "nonexistent")[0] == EXIT_INPUT


def test_scheme_expand_apa(tmp_path, capsys):
    from ffmm.schemes import Laurent
    from ffmm.schemes.apa import apa_dims_scheme
    # 1x1x1 product written as (L^-1 u)(L v) w
    products = [({("u", 0, 0): Laurent.mono(1, -1)}, {("v", 0, 0): Laurent.mono(1, 1)}, {("w", 0, 0): Laurent.mono(1)})]
    src = tmp_path / "apa.scheme"
    src.write_text(format_scheme(apa_dims_scheme(1, 1, 1, products, "tiny")))
    code, out, _ = run(capsys, "scheme", "verify", src)
    assert code == EXIT_OK and out.strip() == "OK border_rank=1"
    dst = tmp_path / "exact.scheme"
    assert run(capsys, "scheme", "expand", src, "-o", dst)[0] == EXIT_OK
    code, out, _ = run(capsys, "scheme", "verify", dst)
    assert code == EXIT_OK and out.startswith("OK rank=")


def test_scheme_expand_rejects_exact(tmp_path, capsys):
    assert run(capsys, "scheme", "expand", shipped_file(tmp_path, "winograd"))[0] == EXIT_INPUT


def test_scheme_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.scheme"
    bad.write_text("2 2 2 1\nnot numbers\n")
    assert run(capsys, "scheme", "verify", bad)[0] == EXIT_INPUT
    assert run(capsys, "scheme", "verify", tmp_path / "none.scheme")[0] == EXIT_INPUT


def test_binseg_cli(capsys):
    code, out, _ = run(capsys, "binseg", "inner", "--u", "1,2,3", "--v", "4,5,6", "--g", 2, "--h", 3)
    assert code == EXIT_OK and out.strip() == "32 k=7 products=1"
    assert run(capsys, "binseg", "sum", "--v", "5,7,9", "--h", 4)[1].split()[0] == "21"
    assert run(capsys, "binseg", "inner", "--u", "9", "--v", "1", "--g", 2, "--h", 1)[0] == EXIT_INPUT


def test_threads_env_overrides(monkeypatch, pair, capsys):
    d, A, B = pair
    monkeypatch.setenv("FFMM_THREADS", "3")
    code, out, _ = run(capsys, "mul", d / "A.txt", d / "B.txt", "--algo", "parallel", "--threshold", 4)
    assert code == EXIT_OK and out == format_matrix(mm_classic(A, B))
    monkeypatch.setenv("FFMM_THREADS", "many")
    assert run(capsys, "mul", d / "A.txt", d / "B.txt")[0] == EXIT_INPUT
