"""Trilinear aggregation for disjoint matrix products.

Two disjoint problems are encoded as

    trace(XYZ) + trace(UVW) = sum x_ij y_jk z_ki + u_jk v_ki w_ij

(the second product is MM(n, p, m) with its indices rotated so that each
aggregate ``(x_ij + u_jk)(y_jk + v_ki)(z_ki + w_ij)`` is indexed by the
same triple).  Slot 1 holds x and u, slot 2 holds y and v, slot 3 holds
z and w.  Three problems add a, b, c of index types ki, ij, jk.

Correction terms are generated by grouping the unwanted monomials of the
expanded aggregates by the pair of factors whose index pairs coincide, so
each group collapses to one product per index pair.
"""

from __future__ import annotations

from itertools import product

from .core import TrilinearScheme, target_from_monomials, trilinear_from_terms

# index pair used by each variable class
_PAIR = {
    "x": "ij", "y": "jk", "z": "ki",
    "u": "jk", "v": "ki", "w": "ij",
    "a": "ki", "b": "ij", "c": "jk",
}
_RANGE_KEYS = {"ij": ("i", "j"), "jk": ("j", "k"), "ki": ("k", "i")}


def _var(cls: str, i: int, j: int, k: int) -> tuple:
    env = {"i": i, "j": j, "k": k}
    a, b = _RANGE_KEYS[_PAIR[cls]]
    return (cls, env[a], env[b])


def _slots(classes, m: int, n: int, p: int) -> tuple:
    size = {"i": m, "j": n, "k": p}
    out = []
    for group in classes:
        names = []
        for cls in group:
            a, b = _RANGE_KEYS[_PAIR[cls]]
            names += [(cls, s, t) for s in range(size[a]) for t in range(size[b])]
        out.append(tuple(names))
    return tuple(out)


def _targets(classes, m, n, p):
    # the wanted products are the cyclic triples (class t of every slot)
    mons = []
    for t in range(len(classes[0])):
        c1, c2, c3 = classes[0][t], classes[1][t], classes[2][t]
        for i, j, k in product(range(m), range(n), range(p)):
            mons.append((1, _var(c1, i, j, k), _var(c2, i, j, k), _var(c3, i, j, k)))
    return mons


def _aggregate_scheme(classes, m, n, p, name) -> tuple[TrilinearScheme, list]:
    """Aggregates plus grouped corrections; returns the scheme and the unpaired monomials."""
    slots = _slots(classes, m, n, p)
    mons = _targets(classes, m, n, p)
    target = target_from_monomials(slots, mons)
    terms = []
    for i, j, k in product(range(m), range(n), range(p)):
        terms.append(tuple({_var(c, i, j, k): 1 for c in group} for group in classes))
    wanted = {tuple(classes[s][t] for s in range(3)) for t in range(len(classes[0]))}
    size = {"i": m, "j": n, "k": p}
    # unwanted class triples, grouped by the first pair of slots sharing an index pair
    groups: dict = {}
    lonely = []
    for combo in product(*classes):
        if combo in wanted:
            continue
        pairs = [_PAIR[c] for c in combo]
        for s, t in ((0, 1), (0, 2), (1, 2)):
            if pairs[s] == pairs[t]:
                groups.setdefault((s, t, combo[s], combo[t]), []).append(combo)
                break
        else:
            lonely.append(combo)
    for (s, t, cs, ct), combos in sorted(groups.items()):
        pair = _PAIR[cs]
        a, b = _RANGE_KEYS[pair]
        free = ({"i", "j", "k"} - {a, b}).pop()
        other = 3 - s - t
        for va in range(size[a]):
            for vb in range(size[b]):
                env = {a: va, b: vb}
                third: dict = {}
                for combo in combos:
                    for vf in range(size[free]):
                        env[free] = vf
                        key = _var(combo[other], env["i"], env["j"], env["k"])
                        third[key] = third.get(key, 0) + 1
                ijk = (env.get("i", 0), env.get("j", 0), env.get("k", 0))
                term = [None, None, None]
                term[s] = {_var(cs, *ijk): -1}
                term[t] = {_var(ct, *ijk): 1}
                term[other] = third
                terms.append(tuple(term))
    # index-disjoint leftovers cannot be grouped; subtract them one by one
    for combo in lonely:
        for i, j, k in product(range(m), range(n), range(p)):
            terms.append(({_var(combo[0], i, j, k): -1},
                          {_var(combo[1], i, j, k): 1},
                          {_var(combo[2], i, j, k): 1}))
    return trilinear_from_terms(slots, terms, target, None, name), lonely


def agg_pair_scheme(m: int, n: int, p: int) -> TrilinearScheme:
    """Rank mnp + mn + np + pm decomposition of two disjoint MM problems."""
    if min(m, n, p) < 1:
        raise ValueError("dimensions must be positive")
    t, lonely = _aggregate_scheme((("x", "u"), ("y", "v"), ("z", "w")), m, n, p,
                                  f"agg-pair{(m, n, p)}")
    assert not lonely
    return t


def agg_triple_scheme(m: int, n: int, p: int) -> TrilinearScheme:
    """Decomposition of three disjoint MM problems from mnp three-way aggregates.

    Besides the grouped corrections (three per index pair type, rank
    3(mn + np + pm) in total) the expansion contains three index-disjoint
    families (x_ij v_ki c_jk and its two shifts).  Each of their monomials
    occurs in exactly one aggregate, so they are removed term by term at a
    cost of 3mnp.
    """
    if min(m, n, p) < 1:
        raise ValueError("dimensions must be positive")
    t, lonely = _aggregate_scheme((("x", "u", "a"), ("y", "v", "b"), ("z", "w", "c")), m, n, p,
                                  f"agg-triple{(m, n, p)}")
    return t


def unpaired_families(m: int = 1, n: int = 1, p: int = 1) -> list:
    """Variable-class triples of the triple aggregate that no grouping can absorb."""
    return _aggregate_scheme((("x", "u", "a"), ("y", "v", "b"), ("z", "w", "c")), m, n, p, "")[1]


def disjoint_inputs(t: TrilinearScheme, values: dict) -> tuple[list, list]:
    """Slot-1 and slot-2 input vectors from {class: matrix} values."""
    vecs = []
    for slot in t.slots[:2]:
        vecs.append([values[c][a][b] for c, a, b in slot])
    return vecs[0], vecs[1]


def read_outputs(t: TrilinearScheme, out: list) -> dict:
    """Split slot-3 outputs into {class: {(a, b): value}} (value pairs with ``w_ab``)."""
    res: dict = {}
    for (c, a, b), val in zip(t.slots[2], out):
        res.setdefault(c, {})[(a, b)] = val
    return res

