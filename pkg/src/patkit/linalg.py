"""Exact linear algebra over Q and over prime fields.

Rational matrices are cleared of denominators row by row and reduced with
integer-only (fraction-free) row operations; each row is divided by the gcd
of its entries after every update, which keeps entries small.  Only the final
reduced echelon form is converted back to :class:`Fraction`.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

Matrix = Sequence[Sequence["int | Fraction"]]


def _integer_row(row: Sequence) -> list[int]:
    den = 1
    for v in row:
        if isinstance(v, Fraction):
            den = lcm(den, v.denominator)
    return [int(v * den) for v in row]


def _primitive(row: list[int]) -> list[int]:
    g = 0
    for v in row:
        if v:
            g = gcd(g, v)
            if g == 1:
                return row
    if g > 1:
        return [v // g for v in row]
    return row


def rref(rows: Matrix, ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row-echelon form of ``rows``.

    Returns the nonzero rows (pivot entries equal to 1, sorted by pivot
    column) and the list of pivot columns.
    """
    work = [_integer_row(r) for r in rows]
    if ncols is None:
        ncols = len(work[0]) if work else 0
    work = [_primitive(r) for r in work if any(r)]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(work):
            break
        p = next((i for i in range(r, len(work)) if work[i][c]), None)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        prow = work[r]
        a = prow[c]
        for i in range(len(work)):
            if i == r:
                continue
            b = work[i][c]
            if b:
                g = gcd(a, b)
                fa, fb = a // g, b // g
                work[i] = _primitive([fa * x - fb * y for x, y in zip(work[i], prow)])
        pivots.append(c)
        r += 1
    out = []
    for row, c in zip(work[:r], pivots):
        lead = row[c]
        out.append([Fraction(v, lead) for v in row])
    return out, pivots


def rank(rows: Matrix, ncols: int | None = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Matrix, ncols: int) -> list[list[Fraction]]:
    """Basis of {v : A v = 0} in reduced row-echelon normal form.

    Basis vectors have first nonzero entry 1 and are sorted by the position
    of that entry, so the output is canonical for the subspace.
    """
    red, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, c in zip(red, pivots):
            v[c] = -row[f]
        basis.append(v)
    return canonical_basis(basis, ncols)


def canonical_basis(vectors: Matrix, ncols: int) -> list[list[Fraction]]:
    """Canonical basis (RREF rows) of the span of ``vectors``."""
    if not vectors:
        return []
    return rref(vectors, ncols)[0]


def in_span(vector: Sequence, basis: Matrix, ncols: int) -> bool:
    if not any(vector):
        return True
    return rank(list(basis) + [vector], ncols) == rank(basis, ncols) if basis else False


def reduce_modulo(vector: Sequence, rows: list[list[Fraction]], pivots: list[int]) -> list[Fraction]:
    """Eliminate the pivot coordinates of an RREF basis from ``vector``."""
    v = [Fraction(x) for x in vector]
    for row, c in zip(rows, pivots):
        f = v[c]
        if f:
            v = [a - f * b for a, b in zip(v, row)]
    return v


# prime fields -----------------------------------------------------------------

def rref_mod(rows: Sequence[Sequence[int]], ncols: int, p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row-echelon form over the field of p elements."""
    work = [[v % p for v in r] for r in rows]
    work = [r for r in work if any(r)]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(work):
            break
        piv = next((i for i in range(r, len(work)) if work[i][c]), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = pow(work[r][c], -1, p)
        work[r] = [(v * inv) % p for v in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [(a - f * b) % p for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
    return work[:r], pivots


def nullspace_mod(rows: Sequence[Sequence[int]], ncols: int, p: int) -> list[list[int]]:
    """Basis of the nullspace over the field of p elements (p prime)."""
    red, pivots = rref_mod(rows, ncols, p)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [0] * ncols
        v[f] = 1
        for row, c in zip(red, pivots):
            v[c] = (-row[f]) % p
        basis.append(v)
    return basis
