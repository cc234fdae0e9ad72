"""Regenerate the scheme files shipped in src/ffmm/data."""

from pathlib import Path

from ffmm.schemes import (
    strassen_scheme,
    trilinear_mm2_scheme,
    trilinear_to_bilinear,
    winograd_scheme,
    write_scheme,
)

DATA = Path(__file__).resolve().parents[1] / "src" / "ffmm" / "data"


def main():
    DATA.mkdir(exist_ok=True)
    schemes = {
        "winograd": winograd_scheme(),
        "strassen": strassen_scheme(),
        "trilinear_mm2": trilinear_to_bilinear(trilinear_mm2_scheme(), "w"),
    }
    for name, s in schemes.items():
        path = DATA / f"{name}.scheme"
        write_scheme(path, s)
        print(f"wrote {path} (rank {s.rank})")


if __name__ == "__main__":
    main()
