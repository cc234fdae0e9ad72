"""Command-line front end (``ffmm``)."""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import schemes as sch
from .binseg import SlotOverflow, binseg_inner, binseg_sum, slot_width
from .dense import DenseMatrix, DimensionError, format_matrix, read_matrix
from .factor import GenericRankProfileViolation
from .field import FieldError, NotInvertible, OpCounter, PrimeField
from .lift import DixonStats, SingularSystem, dixon_solve, solve_check
from .multiply import MULTIPLIERS, CascadeConfig

EXIT_OK, EXIT_INPUT, EXIT_MATH = 0, 1, 2


class MathFailure(Exception):
    pass


@dataclass
class BenchRecord:
    n: int
    algo: str
    mod: int
    seconds: float
    counts: OpCounter = dc_field(default_factory=OpCounter)

    @property
    def gfops(self) -> float:
        return 2 * self.n**3 / self.seconds / 1e9 if self.seconds > 0 else float("inf")

    def row(self) -> list:
        c = self.counts
        return [self.n, self.algo, self.mod, f"{self.seconds:.6f}", f"{self.gfops:.4f}",
                c.mults, c.adds, c.reductions]


BENCH_COLUMNS = ["n", "algo", "mod", "seconds", "gfops", "mults", "adds", "reductions"]


def _tasks(requested: int) -> int:
    env = os.environ.get("FFMM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"FFMM_THREADS must be an integer, got {env!r}") from None
    return requested


def _cfg(args) -> CascadeConfig:
    return CascadeConfig(base_threshold=args.threshold, parallel_tasks=_tasks(args.tasks))


def _multiply(A: DenseMatrix, B: DenseMatrix, algo: str, cfg: CascadeConfig,
              counter: OpCounter | None = None) -> DenseMatrix:
    if A.field is None and algo != "classic":
        # integer matrices only have an exact classical path
        algo = "classic"
    return MULTIPLIERS[algo](A, B, cfg, counter)


def _retarget(M: DenseMatrix, mod: int | None) -> DenseMatrix:
    if mod is None:
        return M
    rows = M.tolist() if M.field is None else [[int(x) % M.field.p for x in r] for r in M.data]
    return DenseMatrix.from_rows(rows, PrimeField(mod) if mod else None, bigint=not mod)


def cmd_mul(args) -> int:
    A = _retarget(read_matrix(args.A), args.mod)
    B = _retarget(read_matrix(args.B), args.mod)
    if (A.field is None) != (B.field is None) or (A.field and A.field.p != B.field.p):
        raise ValueError("operands have different moduli")
    C = _multiply(A, B, args.algo, _cfg(args))
    text = format_matrix(C)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def run_bench(sizes: Sequence[int], mod: int, algos: Sequence[str], threshold: int = 64,
              tasks: int = 1, seed: int = 0, clock: Callable[[], float] = time.perf_counter) -> list[BenchRecord]:
    F = PrimeField(mod)
    rng = np.random.default_rng(seed)
    cfg = CascadeConfig(base_threshold=threshold, parallel_tasks=tasks)
    out = []
    for n in sizes:
        A = DenseMatrix.random(n, n, F, rng)
        B = DenseMatrix.random(n, n, F, rng)
        for algo in algos:
            counter = OpCounter()
            t0 = clock()
            MULTIPLIERS[algo](A, B, cfg, counter)
            out.append(BenchRecord(n, algo, mod, clock() - t0, counter))
    return out


def format_bench(records: Sequence[BenchRecord], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in records:
            w.writerow(r.row())
        return buf.getvalue()
    lines = ["| " + " | ".join(BENCH_COLUMNS) + " |", "|" + "---|" * len(BENCH_COLUMNS)]
    lines += ["| " + " | ".join(str(x) for x in r.row()) + " |" for r in records]
    return "\n".join(lines) + "\n"


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None


def cmd_bench(args) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in MULTIPLIERS:
            raise ValueError(f"unknown algorithm {a!r}")
    recs = run_bench(_int_list(args.sizes), args.mod, algos, args.threshold, _tasks(args.tasks), args.seed)
    sys.stdout.write(format_bench(recs, args.format))
    return EXIT_OK


def measure_wall(algo: str, n: int, mod: int, seed: int = 0,
                 clock: Callable[[], float] = time.perf_counter) -> float:
    F = PrimeField(mod)
    rng = np.random.default_rng(seed)
    A = DenseMatrix.random(n, n, F, rng)
    B = DenseMatrix.random(n, n, F, rng)
    cfg = CascadeConfig(base_threshold=1, max_levels=1)
    t0 = clock()
    MULTIPLIERS["classic" if algo == "classic" else "fast"](A, B, cfg, None)
    return clock() - t0


def tune_threshold(mod: int, max_size: int, start: int = 16,
                   measure: Callable[[str, int], float] | None = None) -> int | None:
    """Smallest size where one fast level beats classic at it and at the next doubling."""
    measure = measure or (lambda algo, n: measure_wall(algo, n, mod))
    wins = []
    n = start
    while n <= max_size:
        wins.append((n, measure("fast", n) < measure("classic", n)))
        n *= 2
    for (n0, w0), (_, w1) in zip(wins, wins[1:]):
        if w0 and w1:
            return n0
    return None


def cmd_tune(args) -> int:
    best = tune_threshold(args.mod, args.max_size, args.start)
    if best is None:
        print(f"no crossover <= {args.max_size}")
    else:
        print(f"base_threshold {best}")
    return EXIT_OK


def _frac_text(x) -> str:
    return f"{x.numerator}/{x.denominator}"


def cmd_solve(args) -> int:
    A = read_matrix(args.A)
    b = read_matrix(args.b)
    if A.field is not None or b.field is not None:
        raise ValueError("solve expects integer matrices (modulus 0)")
    if b.cols != 1 or b.rows != A.rows:
        raise DimensionError("b must be a column with as many rows as A")
    rows = A.tolist()
    rhs = [r[0] for r in b.tolist()]
    stats = DixonStats()
    x = dixon_solve(rows, rhs, prime_bits=args.prime_bits, seed=args.seed, stats=stats)
    for v in x:
        print(_frac_text(v))
    if args.check:
        if not solve_check(rows, rhs, x):
            raise MathFailure("residual check failed")
        print("verified")
    return EXIT_OK


def _load_scheme(path: str):
    s = sch.read_scheme(path)
    return s


def _verify_line(s) -> tuple[bool, str]:
    if isinstance(s, sch.ApaScheme):
        ok = sch.apa_verify(s)
        return ok, f"OK border_rank={s.border_rank}" if ok else "FAIL"
    bad = sch.brent_residual(s)
    if bad is None:
        return True, f"OK rank={s.rank}"
    return False, f"FAIL {bad}"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_scheme(args) -> int:
    action = args.action
    if action == "exponent":
        if len(args.args) not in (4, 5):
            raise ValueError("exponent needs m n p r [disjoint]")
        m, n, p = (int(x) for x in args.args[:3])
        r = float(args.args[3])
        s = int(args.args[4]) if len(args.args) == 5 else 1
        if s == 1 and r.is_integer():
            val = sch.exponent_of(m, n, p, int(r))
        else:
            val = sch.apa_exponent(m, n, p, r, s)
        print(f"{val:.6f}")
        return EXIT_OK
    if action == "export":
        if len(args.args) != 1:
            raise ValueError("export needs a scheme name")
        try:
            s = sch.shipped_scheme(args.args[0])
        except FileNotFoundError:
            raise ValueError(f"no shipped scheme named {args.args[0]!r}") from None
        _emit(sch.format_scheme(s), args.out)
        return EXIT_OK
    if len(args.args) != 1:
        raise ValueError(f"{action} needs one scheme file")
    s = _load_scheme(args.args[0])
    if action == "verify":
        ok, line = _verify_line(s)
        print(line)
        return EXIT_OK if ok else EXIT_MATH
    if action == "import":
        ok, line = _verify_line(s)
        if not ok:
            print(line)
            return EXIT_MATH
        _emit(sch.format_scheme(s), args.out)
        return EXIT_OK
    if action == "expand":
        if not isinstance(s, sch.ApaScheme):
            raise ValueError("expand needs an APA scheme file")
        exact = sch.apa_to_bilinear(s)
        _emit(sch.format_scheme(exact), args.out)
        return EXIT_OK
    if action == "dualize":
        if isinstance(s, sch.ApaScheme):
            raise ValueError("dualize works on exact bilinear schemes")
        perms = [tuple(int(c) for c in args.perm)] if args.perm else list(sch.PERMUTATIONS)
        status = EXIT_OK
        for perm in perms:
            d = sch.dualize(s, perm)
            if args.verify:
                ok, line = _verify_line(d)
                print(f"{''.join(map(str, perm))} {d.dims} {line}")
                status = status if ok else EXIT_MATH
            elif args.out_dir:
                sch.write_scheme(Path(args.out_dir) / f"{s.name or 'scheme'}_{''.join(map(str, perm))}.scheme", d)
            else:
                sys.stdout.write(sch.format_scheme(d))
        return status
    raise ValueError(f"unknown scheme action {action!r}")


def cmd_binseg(args) -> int:
    counter = OpCounter()
    if args.op == "inner":
        u, v = _int_list(args.u), _int_list(args.v)
        val = binseg_inner(u, v, args.g, args.h, counter)
        print(f"{val} k={slot_width(args.g, args.h, len(u))} products={counter.mults}")
    else:
        v = _int_list(args.v)
        val = binseg_sum(v, args.h, counter)
        print(f"{val} k={slot_width(0, args.h, len(v))} products={counter.mults}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ffmm", description="Exact linear algebra over prime fields.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    m = sub.add_parser("mul", help="multiply two matrix files")
    m.add_argument("A")
    m.add_argument("B")
    m.add_argument("--mod", type=int, default=None, help="reinterpret inputs modulo p (0 = integers)")
    m.add_argument("--algo", choices=sorted(MULTIPLIERS), default="fast")
    m.add_argument("--threshold", type=int, default=64)
    m.add_argument("--tasks", type=int, default=1)
    m.add_argument("-o", "--out")
    m.set_defaults(func=cmd_mul)

    b = sub.add_parser("bench", help="time multipliers on random matrices")
    b.add_argument("--sizes", default="256,512")
    b.add_argument("--mod", type=int, default=131071)
    b.add_argument("--algos", default="classic,fast")
    b.add_argument("--format", choices=["csv", "md"], default="csv")
    b.add_argument("--threshold", type=int, default=64)
    b.add_argument("--tasks", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("tune", help="find the classic/fast crossover size")
    t.add_argument("--mod", type=int, default=131071)
    t.add_argument("--max-size", type=int, default=1024)
    t.add_argument("--start", type=int, default=16)
    t.set_defaults(func=cmd_tune)

    s = sub.add_parser("solve", help="exact rational solution of A x = b")
    s.add_argument("A")
    s.add_argument("b")
    s.add_argument("--check", action="store_true")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--prime-bits", type=int, default=20)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("scheme", help="verify, dualize, expand and convert MM schemes")
    c.add_argument("action", choices=["verify", "dualize", "exponent", "expand", "import", "export"])
    c.add_argument("args", nargs="*")
    c.add_argument("-o", "--out")
    c.add_argument("--perm", help="permutation such as 120")
    c.add_argument("--verify", action="store_true", help="dualize: verify each output instead of printing it")
    c.add_argument("--out-dir")
    c.set_defaults(func=cmd_scheme)

    g = sub.add_parser("binseg", help="inner product or sum by binary segmentation")
    g.add_argument("op", choices=["inner", "sum"])
    g.add_argument("--u", default="")
    g.add_argument("--v", required=True)
    g.add_argument("--g", type=int, default=0)
    g.add_argument("--h", type=int, required=True)
    g.set_defaults(func=cmd_binseg)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except (SingularSystem, NotInvertible, GenericRankProfileViolation, MathFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (ValueError, DimensionError, FieldError, SlotOverflow, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
