"""Tabulate measured operation counts of the full 2x2 recursion against the closed forms."""

import argparse

import numpy as np

from ffmm import DenseMatrix, OpCounter, PrimeField, mm_fast_batched


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-k", type=int, default=8)
    ap.add_argument("--mod", type=int, default=131071)
    args = ap.parse_args()
    F = PrimeField(args.mod)
    rng = np.random.default_rng(0)
    laws = {"winograd": lambda k: 6 * 7**k - 5 * 4**k, "strassen": lambda k: 7 * 7**k - 6 * 4**k}
    print("k,n,scheme,mults,adds,field_ops,closed_form,classic")
    for k in range(1, args.max_k + 1):
        n = 2**k
        A, B = DenseMatrix.random(n, n, F, rng), DenseMatrix.random(n, n, F, rng)
        for scheme, law in laws.items():
            c = OpCounter()
            mm_fast_batched(A, B, scheme, c)
            print(f"{k},{n},{scheme},{c.mults},{c.adds},{c.field_ops},{law(k)},{2 * n**3 - n**2}")


if __name__ == "__main__":
    main()
