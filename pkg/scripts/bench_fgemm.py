"""Write a Gfops table (2n^3 / seconds / 1e9) for the multipliers over a range of sizes."""

import argparse
from pathlib import Path

from ffmm.cli import format_bench, run_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="128,256,512,1024")
    ap.add_argument("--mod", type=int, default=131071)
    ap.add_argument("--algos", default="classic,waksman,fast,parallel")
    ap.add_argument("--threshold", type=int, default=64)
    ap.add_argument("--tasks", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3, help="keep the fastest of this many runs")
    ap.add_argument("--out", type=Path, help="CSV path; a markdown copy is printed either way")
    args = ap.parse_args()
    sizes = [int(x) for x in args.sizes.split(",")]
    algos = args.algos.split(",")
    best = {}
    for seed in range(args.repeat):
        for r in run_bench(sizes, args.mod, algos, args.threshold, args.tasks, seed):
            key = (r.n, r.algo)
            if key not in best or r.seconds < best[key].seconds:
                best[key] = r
    records = [best[(n, a)] for n in sizes for a in algos]
    if args.out:
        args.out.write_text(format_bench(records, "csv"))
    print(format_bench(records, "md"), end="")


if __name__ == "__main__":
    main()
