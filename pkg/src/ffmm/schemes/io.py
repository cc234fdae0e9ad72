"""Text format for MM schemes.

::

    # comments start with '#'
    m n p r [apa]
    <r lines: A rows, m*n entries each>
    <r lines: B rows, n*p entries each>
    <r lines: C columns, one product per line, m*p entries each>

Entries are rationals ``num/den``; APA entries are Laurent polynomials such
as ``1+2*L^-1`` (no spaces inside an entry).
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .apa import ApaScheme, Laurent, apa_from_terms
from .core import BilinearScheme, mm_slot_names, mm_trilinear_target


class SchemeFormatError(ValueError):
    pass


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_scheme(s) -> str:
    if isinstance(s, BilinearScheme):
        m, n, p = s.dims
        lines = [f"{m} {n} {p} {s.rank}"]
        lines += [" ".join(_fmt(x) for x in row) for row in s.A]
        lines += [" ".join(_fmt(x) for x in row) for row in s.B]
        lines += [" ".join(_fmt(s.C[o][q]) for o in range(m * p)) for q in range(s.rank)]
        return "\n".join(lines) + "\n"
    if isinstance(s, ApaScheme):
        if s.dims is None:
            raise SchemeFormatError("only single MM schemes have a file format")
        m, n, p = s.dims
        lines = [f"{m} {n} {p} {s.border_rank} apa"]
        lines += [" ".join(str(x) for x in row) for row in s.F1]
        lines += [" ".join(str(x) for x in row) for row in s.F2]
        # third factor is stored by output entry i*p+k (w_ki)
        lines += [" ".join(str(row[k * m + i]) for i in range(m) for k in range(p)) for row in s.F3]
        return "\n".join(lines) + "\n"
    raise TypeError(f"cannot format {type(s).__name__}")


def parse_scheme(text: str, name: str = ""):
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise SchemeFormatError("empty scheme file")
    head = rows[0]
    apa = len(head) == 5 and head[4].lower() == "apa"
    if len(head) not in (4, 5) or (len(head) == 5 and not apa):
        raise SchemeFormatError("header must be 'm n p r [apa]'")
    try:
        m, n, p, r = (int(x) for x in head[:4])
    except ValueError:
        raise SchemeFormatError("header dimensions must be integers") from None
    if min(m, n, p, r) < 1:
        raise SchemeFormatError("dimensions and rank must be positive")
    body = rows[1:]
    if len(body) != 3 * r:
        raise SchemeFormatError(f"expected {3 * r} coefficient lines, found {len(body)}")
    widths = [m * n] * r + [n * p] * r + [m * p] * r
    for i, (row, w) in enumerate(zip(body, widths)):
        if len(row) != w:
            raise SchemeFormatError(f"line {i + 2}: expected {w} entries, found {len(row)}")
    conv = Laurent.parse if apa else Fraction
    try:
        vals = [[conv(x) for x in row] for row in body]
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemeFormatError(f"bad coefficient: {exc}") from None
    A, B, Ccols = vals[:r], vals[r:2 * r], vals[2 * r:]
    if not apa:
        C = [[Ccols[q][o] for q in range(r)] for o in range(m * p)]
        return BilinearScheme.make(m, n, p, A, B, C, name)
    slots = mm_slot_names(m, n, p)
    terms = []
    for q in range(r):
        terms.append((
            dict(zip(slots[0], A[q])),
            dict(zip(slots[1], B[q])),
            {slots[2][k * m + i]: Ccols[q][i * p + k] for i in range(m) for k in range(p)},
        ))
    return apa_from_terms(slots, terms, mm_trilinear_target(m, n, p), (m, n, p), name)


def read_scheme(path: str | Path):
    path = Path(path)
    return parse_scheme(path.read_text(), path.stem)


def write_scheme(path: str | Path, s) -> None:
    Path(path).write_text(format_scheme(s))


def shipped_scheme(name: str):
    """Load one of the scheme files bundled with the package."""
    from importlib import resources

    ref = resources.files("ffmm") / "data" / f"{name}.scheme"
    return parse_scheme(ref.read_text(), name)


