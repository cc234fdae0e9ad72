"""Print the exponent implied by known (m, n, p, rank) data points and the shipped schemes."""

from ffmm.schemes import KNOWN_POINTS, exponent_of, shipped_scheme


def main():
    print(f"{'source':<34} {'m':>4} {'n':>4} {'p':>4} {'rank':>10} {'omega':>9}")
    for name in ("winograd", "strassen", "trilinear_mm2"):
        s = shipped_scheme(name)
        m, n, p = s.dims
        print(f"{name:<34} {m:>4} {n:>4} {p:>4} {s.rank:>10} {exponent_of(m, n, p, s.rank):>9.6f}")
    for pt in KNOWN_POINTS:
        print(f"{pt.label:<34} {pt.m:>4} {pt.n:>4} {pt.p:>4} {pt.rank:>10g} {pt.omega:>9.6f}")


if __name__ == "__main__":
    main()
