"""Polynomial patterns, kernel systems and transferability.

A pattern is the tuple ``(x + P_1(y), ..., x + P_t(y))`` with integer
polynomials ``P_i`` vanishing at 0.  Its kernel system up to degree ``k`` is
the space of tuples ``(Q_1, ..., Q_t)`` of rational polynomials of degree at
most ``k`` with ``sum_i Q_i(x + P_i(y)) = 0``.  It is computed as the exact
nullspace of the map sending the coefficients ``q[i][l]`` to the monomial
coefficients of ``sum q[i][l] * (x + P_i(y))**l``.

Kernel vectors use a degree-major coordinate order: coordinate ``l*t + i``
holds the ``z**l`` coefficient of ``Q_i``.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from patkit import linalg
from patkit.poly import MultiPoly, UniPoly, compose, parse_uni, powers

PATTERN_VARS = ("x", "y")


class PatternError(ValueError):
    """Invalid pattern specification."""


@dataclass(frozen=True)
class PatternSpec:
    polys: tuple[UniPoly, ...]
    name: str | None = None

    def __post_init__(self):
        polys = tuple(UniPoly(p.coeffs, "y") for p in self.polys)
        object.__setattr__(self, "polys", polys)
        if len(polys) < 2:
            raise PatternError("a pattern needs at least two polynomials")
        for p in polys:
            if not p.is_integral():
                raise PatternError(f"non-integer coefficients in {p.to_text()}")
            if p.coeff(0) != 0:
                raise PatternError(f"{p.to_text()} has a nonzero constant term")
        if len(set(polys)) != len(polys):
            raise PatternError("pattern polynomials must be pairwise distinct")

    @classmethod
    def from_strings(cls, texts: Iterable[str], name: str | None = None) -> "PatternSpec":
        return cls(tuple(parse_uni(t, "y") for t in texts), name)

    @classmethod
    def parse(cls, text: str, default_name: str | None = None) -> "PatternSpec":
        """Parse the pattern file format: one polynomial per line, ``#`` comments,
        optional ``name:`` header."""
        name = default_name
        polys = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.lower().startswith("name:"):
                name = line.split(":", 1)[1].strip() or name
                continue
            polys.append(parse_uni(line, "y"))
        return cls(tuple(polys), name)

    @classmethod
    def from_file(cls, path: str | Path) -> "PatternSpec":
        path = Path(path)
        return cls.parse(path.read_text(encoding="utf-8"), default_name=path.stem)

    @property
    def t(self) -> int:
        return len(self.polys)

    @property
    def d(self) -> int:
        return max(int(p.degree) for p in self.polys if not p.is_zero())

    def permuted(self, perm: Sequence[int]) -> "PatternSpec":
        return PatternSpec(tuple(self.polys[j] for j in perm), self.name)

    def to_text(self) -> str:
        lines = [f"name: {self.name}"] if self.name else []
        lines += [p.to_text() for p in self.polys]
        return "\n".join(lines) + "\n"

    def labels(self) -> list[str]:
        return [p.to_text() for p in self.polys]


@dataclass(frozen=True)
class LinearizedPattern:
    """Coefficient matrix L with L[i][j-1] the y^j coefficient of P_i."""

    d: int
    L: tuple[tuple[int, ...], ...]

    @property
    def t(self) -> int:
        return len(self.L)

    @property
    def vars(self) -> tuple[str, ...]:
        return ("x",) + tuple(f"y{j}" for j in range(1, self.d + 1))

    def form(self, i: int) -> MultiPoly:
        """The linear form P_i*(y1, ..., yd) as a polynomial in x, y1..yd."""
        terms = {}
        for j, c in enumerate(self.L[i]):
            if c:
                mono = [0] * (self.d + 1)
                mono[j + 1] = 1
                terms[tuple(mono)] = c
        return MultiPoly(self.vars, terms)

    def shifted_form(self, i: int) -> MultiPoly:
        return MultiPoly.var(self.vars, "x") + self.form(i)

    def active_columns(self) -> list[int]:
        return [j for j in range(self.d) if any(row[j] for row in self.L)]


def linearize(p: PatternSpec) -> LinearizedPattern:
    d = p.d
    L = tuple(tuple(int(poly.coeff(j)) for j in range(1, d + 1)) for poly in p.polys)
    return LinearizedPattern(d, L)


# kernel systems ---------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _shift_powers(p: PatternSpec, k: int) -> tuple[tuple[MultiPoly, ...], ...]:
    """(x + P_i(y))**l for every i and l <= k."""
    x = MultiPoly.var(PATTERN_VARS, "x")
    return tuple(tuple(powers(x + poly.to_multi(PATTERN_VARS), k)) for poly in p.polys)


@functools.lru_cache(maxsize=64)
def _linear_powers(p: PatternSpec, k: int) -> tuple[tuple[MultiPoly, ...], ...]:
    lp = linearize(p)
    return tuple(tuple(powers(lp.shifted_form(i), k)) for i in range(p.t))


def _combine(qs: Sequence[UniPoly], table) -> MultiPoly:
    acc = MultiPoly.zero(table[0][0].vars)
    for q, pw in zip(qs, table):
        for e, c in q.coeffs.items():
            acc = acc.add_scaled(pw[e], c)
    return acc


def kernel_residual(p: PatternSpec, qs: Sequence[UniPoly]) -> MultiPoly:
    """sum_i Q_i(x + P_i(y)), expanded."""
    k = max((int(q.degree) for q in qs if not q.is_zero()), default=0)
    return _combine(qs, _shift_powers(p, k))


def linearized_residual(p: PatternSpec, qs: Sequence[UniPoly]) -> MultiPoly:
    """sum_i Q_i(x + P_i*(y1, ..., yd)), expanded."""
    k = max((int(q.degree) for q in qs if not q.is_zero()), default=0)
    return _combine(qs, _linear_powers(p, k))


@dataclass(frozen=True)
class KernelTuple:
    """An element (Q_1, ..., Q_t) of the kernel system; verified on construction."""

    pattern: PatternSpec = field(repr=False, compare=False)
    qs: tuple[UniPoly, ...]

    def __post_init__(self):
        qs = tuple(UniPoly(q.coeffs, "z") for q in self.qs)
        object.__setattr__(self, "qs", qs)
        if len(qs) != self.pattern.t:
            raise ValueError("kernel tuple length differs from the pattern length")
        residual = kernel_residual(self.pattern, qs)
        if not residual.is_zero():
            raise ValueError(f"not a kernel element: residual {residual.to_text()}")

    @classmethod
    def from_vector(cls, p: PatternSpec, vec: Sequence[Fraction]) -> "KernelTuple":
        t = p.t
        qs = [dict() for _ in range(t)]
        for idx, c in enumerate(vec):
            if c:
                qs[idx % t][idx // t] = c
        return cls(p, tuple(UniPoly(q, "z") for q in qs))

    def vector(self, k: int) -> list[Fraction]:
        t = len(self.qs)
        v = [Fraction(0)] * (t * (k + 1))
        for i, q in enumerate(self.qs):
            for e, c in q.coeffs.items():
                v[e * t + i] = c
        return v

    @property
    def degrees(self) -> set[int]:
        return {e for q in self.qs for e in q.coeffs}

    def is_single_degree(self) -> bool:
        return len(self.degrees) <= 1

    def linearized_residual(self) -> MultiPoly:
        return linearized_residual(self.pattern, self.qs)

    def to_json(self) -> list[str]:
        return [q.to_text() for q in self.qs]


@dataclass(frozen=True)
class KernelBasis:
    pattern: PatternSpec = field(repr=False)
    degree_bound: int
    basis: tuple[KernelTuple, ...]
    graded_dims: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vectors(self) -> list[list[Fraction]]:
        return [b.vector(self.degree_bound) for b in self.basis]

    @property
    def ncols(self) -> int:
        return self.pattern.t * (self.degree_bound + 1)


def kernel_matrix(p: PatternSpec, k: int) -> tuple[list[list[Fraction]], list[tuple[int, ...]]]:
    """Rows indexed by monomials x^a y^b, columns by (degree l, index i)."""
    table = _shift_powers(p, k)
    t = p.t
    monos = sorted({m for row in table for pw in row for m in pw.terms})
    index = {m: r for r, m in enumerate(monos)}
    mat = [[Fraction(0)] * (t * (k + 1)) for _ in monos]
    for i in range(t):
        for ell in range(k + 1):
            col = ell * t + i
            for m, c in table[i][ell].terms.items():
                mat[index[m]][col] = c
    return mat, monos


def default_degree_bound(p: PatternSpec) -> int:
    return p.t * p.d


def kernel_system(p: PatternSpec, k: int | None = None) -> KernelBasis:
    """Exact basis of the degree-<=k slice of the kernel system."""
    if k is None:
        k = default_degree_bound(p)
    if k < 1:
        raise ValueError("degree bound must be at least 1")
    t = p.t
    mat, _ = kernel_matrix(p, k)
    ncols = t * (k + 1)
    basis = linalg.nullspace(mat, ncols)
    graded = []
    for ell in range(k + 1):
        cols = range(ell * t, ell * t + t)
        sub = [[row[c] for c in cols] for row in mat]
        graded.append(t - linalg.rank(sub, t))
    tuples = tuple(KernelTuple.from_vector(p, v) for v in basis)
    return KernelBasis(p, k, tuples, tuple(graded))


def graded_basis(kb: KernelBasis) -> list[list[Fraction]]:
    """Basis of the direct sum of the single-degree slices, as full vectors."""
    p, k, t = kb.pattern, kb.degree_bound, kb.pattern.t
    mat, _ = kernel_matrix(p, k)
    out = []
    for ell in range(k + 1):
        cols = range(ell * t, ell * t + t)
        sub = [[row[c] for c in cols] for row in mat]
        for v in linalg.nullspace(sub, t):
            full = [Fraction(0)] * (t * (k + 1))
            for i, c in enumerate(v):
                full[ell * t + i] = c
            out.append(full)
    return out


def is_homogeneous(kb: KernelBasis) -> bool:
    return kb.dim == sum(kb.graded_dims)


def homogeneity_witness(kb: KernelBasis) -> KernelTuple | None:
    """A kernel element outside the span of the single-degree slices.

    The element is reduced modulo that span, eliminating coordinates in the
    order (highest degree, last index) first, then scaled so its first
    nonzero coordinate in that order is 1.
    """
    if is_homogeneous(kb):
        return None
    p, k, t = kb.pattern, kb.degree_bound, kb.pattern.t
    ncols = kb.ncols
    order = sorted(range(ncols), key=lambda c: (-(c // t), -(c % t)))
    graded = graded_basis(kb)
    permute = lambda v: [v[c] for c in order]
    g_rows, g_piv = linalg.rref([permute(v) for v in graded], ncols) if graded else ([], [])
    for v in kb.vectors():
        if linalg.in_span(v, graded, ncols):
            continue
        red = linalg.reduce_modulo(permute(v), g_rows, g_piv)
        lead = next(c for c in red if c)
        red = [c / lead for c in red]
        full = [Fraction(0)] * ncols
        for pos, c in zip(order, red):
            full[pos] = c
        return KernelTuple.from_vector(p, full)
    raise AssertionError("dimension count and span test disagree")


@dataclass(frozen=True)
class Classification:
    homogeneous: bool
    transferable: bool
    witness: KernelTuple | None
    degree_bound: int
    witness_residual: MultiPoly | None = None
    homogeneity_witness: KernelTuple | None = None
    graded_dims: tuple[int, ...] = ()
    kernel_dim: int = 0

    def to_json(self, p: PatternSpec) -> dict:
        out = {
            "name": p.name,
            "t": p.t,
            "d": p.d,
            "polys": p.labels(),
            "degree_bound": self.degree_bound,
            "scope": f"up to degree {self.degree_bound}",
            "kernel_dim": self.kernel_dim,
            "graded_dims": list(self.graded_dims),
            "homogeneous": self.homogeneous,
            "transferable": self.transferable,
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
            out["witness_residual"] = self.witness_residual.to_text()
        if self.homogeneity_witness is not None:
            out["homogeneity_witness"] = self.homogeneity_witness.to_json()
        return out


def is_transferable(p: PatternSpec, kb: KernelBasis) -> Classification:
    """Check every basis element against the linearised pattern."""
    witness, residual = None, None
    for b in kb.basis:
        r = b.linearized_residual()
        if not r.is_zero():
            witness, residual = b, r
            break
    homogeneous = is_homogeneous(kb)
    transferable = witness is None
    if transferable and not homogeneous:
        raise AssertionError("transferable pattern with a non-homogeneous kernel")
    return Classification(
        homogeneous=homogeneous,
        transferable=transferable,
        witness=witness,
        degree_bound=kb.degree_bound,
        witness_residual=residual,
        homogeneity_witness=homogeneity_witness(kb),
        graded_dims=kb.graded_dims,
        kernel_dim=kb.dim,
    )


def classify(p: PatternSpec, k: int | None = None) -> Classification:
    return is_transferable(p, kernel_system(p, k))


def same_span(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]], ncols: int) -> bool:
    return linalg.canonical_basis(a, ncols) == linalg.canonical_basis(b, ncols)


def classification_json(p: PatternSpec, cls: Classification) -> str:
    return json.dumps(cls.to_json(p), sort_keys=True)
