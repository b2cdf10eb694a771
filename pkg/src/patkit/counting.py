"""Counting operators for polynomial patterns over Z/NZ and their linear analogues.

``lambda_poly`` averages ``prod_i f_i(x + P_i(y))`` over ``x, y`` in Z/NZ.
``lambda_linear`` averages ``prod_i f_i(x + P_i*(y1, ..., yd))`` over
``x, y1, ..., yd``, where ``P_i*`` is the linear form with coefficient row
``L[i]``.  Only the columns of ``L`` that are not identically zero matter, so
the direct method loops over those alone.

The Fourier method uses
``Lambda* = sum over xi in H of prod_i fhat_i(xi_i)``, where ``H`` is the set
of frequency tuples with ``sum_i xi_i = 0`` and ``sum_i L[i][j] xi_i = 0`` for
every ``j`` (all mod N).  ``H`` is the nullspace of a small matrix over the
field with N elements and is enumerated through its coordinates in a basis.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from patkit import linalg
from patkit.cyclic import CyclicFunction, _dft_array
from patkit.numtheory import BudgetExceeded, enumeration_budget, is_prime
from patkit.parallel import chunk_ranges, chunked_sum, tree_sum
from patkit.patterns import LinearizedPattern, PatternSpec, linearize
from patkit.poly import values_mod

CHUNK_ELEMENTS = 1 << 20
DEFAULT_SAMPLES = 200_000
METHODS = ("auto", "direct", "fourier", "sampled")


class CountingError(ValueError):
    pass


def _check_inputs(fs: Sequence[CyclicFunction], N: int, t: int) -> np.ndarray:
    if len(fs) != t:
        raise CountingError(f"expected {t} functions, got {len(fs)}")
    for f in fs:
        if f.modulus != N:
            raise CountingError(f"modulus mismatch: function on Z/{f.modulus}Z, expected N = {N}")
    if not is_prime(N):
        raise CountingError(f"N = {N} is not prime; the counting operators are defined for prime N")
    return np.stack([f.values for f in fs])


def _poly_table(p: PatternSpec, N: int) -> np.ndarray:
    """Row i holds P_i(y) mod N for y = 0..N-1."""
    return np.array([values_mod(q, N) for q in p.polys], dtype=np.int64)


# polynomial operator --------------------------------------------------------

def lambda_poly(p: PatternSpec, fs: Sequence[CyclicFunction], N: int, workers: int = 1) -> complex:
    """E_{x,y in Z/NZ} prod_i f_i(x + P_i(y))."""
    vals = _check_inputs(fs, N, p.t)
    if N * N > enumeration_budget():
        raise BudgetExceeded(f"N^2 = {N * N} exceeds the enumeration budget")
    table = _poly_table(p, N)
    xs = np.arange(N)
    rows = max(1, CHUNK_ELEMENTS // N)

    def part(a: int, b: int) -> complex:
        prod = np.ones((b - a, N), dtype=complex)
        for i in range(p.t):
            idx = (xs[None, :] + table[i, a:b, None]) % N
            prod *= vals[i][idx]
        return complex(prod.sum())

    return chunked_sum(part, N, rows, workers) / (N * N)


# linear operator ------------------------------------------------------------

@dataclass(frozen=True)
class LinearEvaluation:
    value: complex
    method: str
    stderr: float | None = None
    samples: int | None = None


def _constraint_rows(lp: LinearizedPattern) -> list[list[int]]:
    rows = [[1] * lp.t]
    for j in lp.active_columns():
        rows.append([lp.L[i][j] for i in range(lp.t)])
    return rows


def annihilator_basis(lp: LinearizedPattern, N: int) -> list[list[int]]:
    """Basis over Z/NZ of {xi : sum xi_i = 0, sum_i L[i][j] xi_i = 0 for all j}."""
    return linalg.nullspace_mod(_constraint_rows(lp), lp.t, N)


def _sweep(basis: Sequence[Sequence[int]], N: int, a: int, b: int) -> np.ndarray:
    """Frequency tuples for the flat parameter indices a..b-1 (shape (t, b-a))."""
    idx = np.arange(a, b, dtype=np.int64)
    t = len(basis[0])
    xi = np.zeros((t, b - a), dtype=np.int64)
    for vec in basis:
        lam = idx % N
        idx = idx // N
        xi = (xi + np.array(vec, dtype=np.int64)[:, None] * lam[None, :]) % N
    return xi


def cost_direct(lp: LinearizedPattern, N: int) -> int:
    return N ** (len(lp.active_columns()) + 1)


def cost_fourier(lp: LinearizedPattern, N: int) -> int:
    return N ** len(annihilator_basis(lp, N)) * lp.t


def _linear_fourier(lp: LinearizedPattern, vals: np.ndarray, N: int, workers: int) -> complex:
    basis = annihilator_basis(lp, N)
    fhat = np.stack([_dft_array(v, -1) / N for v in vals])
    if not basis:
        return complex(np.prod(fhat[:, 0]))
    total = N ** len(basis)

    def part(a: int, b: int) -> complex:
        xi = _sweep(basis, N, a, b)
        prod = np.ones(b - a, dtype=complex)
        for i in range(lp.t):
            prod *= fhat[i][xi[i]]
        return complex(prod.sum())

    return chunked_sum(part, total, CHUNK_ELEMENTS, workers)


def _linear_offsets(rows: np.ndarray, N: int, a: int, b: int) -> np.ndarray:
    """Offsets sum_j rows[i][j] y_j mod N for the flat indices a..b-1 over
    (Z/NZ)^k, shape (len(rows), b-a)."""
    idx = np.arange(a, b, dtype=np.int64)
    off = np.zeros((rows.shape[0], b - a), dtype=np.int64)
    for j in range(rows.shape[1]):
        yj = idx % N
        idx = idx // N
        off = (off + rows[:, j, None] * yj[None, :]) % N
    return off


def _linear_direct(lp: LinearizedPattern, vals: np.ndarray, N: int, workers: int) -> complex:
    cols = lp.active_columns()
    rows = np.array([[lp.L[i][j] % N for j in cols] for i in range(lp.t)], dtype=np.int64).reshape(lp.t, len(cols))
    total = N ** len(cols)
    xs = np.arange(N)
    size = max(1, CHUNK_ELEMENTS // N)

    def part(a: int, b: int) -> complex:
        off = _linear_offsets(rows, N, a, b)
        prod = np.ones((b - a, N), dtype=complex)
        for i in range(lp.t):
            prod *= vals[i][(off[i][:, None] + xs[None, :]) % N]
        return complex(prod.sum())

    return chunked_sum(part, total, size, workers) / (total * N)


def _linear_sampled(lp: LinearizedPattern, vals: np.ndarray, N: int, samples: int,
                    seed: int) -> LinearEvaluation:
    cols = lp.active_columns()
    rows = np.array([[lp.L[i][j] % N for j in cols] for i in range(lp.t)], dtype=object)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x5A])))
    draws = rng.integers(0, N, size=(samples, len(cols) + 1))
    x = draws[:, 0]
    prod = np.ones(samples, dtype=complex)
    for i in range(lp.t):
        off = np.zeros(samples, dtype=np.int64)
        for k in range(len(cols)):
            off = (off + int(rows[i][k]) * draws[:, k + 1]) % N
        prod *= vals[i][(x + off) % N]
    mean = complex(prod.mean())
    stderr = float(np.std(prod) / np.sqrt(samples)) if samples > 1 else float("inf")
    return LinearEvaluation(mean, "sampled", stderr, samples)


def evaluate_linear(lp: LinearizedPattern, fs: Sequence[CyclicFunction], N: int,
                    method: str = "auto", workers: int = 1, seed: int = 0,
                    samples: int = DEFAULT_SAMPLES) -> LinearEvaluation:
    """Lambda* with the method used recorded.

    ``auto`` takes the cheaper of the exact methods and falls back to Monte
    Carlo sampling only when both exceed the enumeration budget.
    """
    if method not in METHODS:
        raise CountingError(f"unknown method {method!r}")
    vals = _check_inputs(fs, N, lp.t)
    budget = enumeration_budget()
    direct, fourier = cost_direct(lp, N), cost_fourier(lp, N)
    if method == "auto":
        feasible = [(c, m) for c, m in ((fourier, "fourier"), (direct, "direct")) if c <= budget]
        method = min(feasible)[1] if feasible else "sampled"
    # constant inputs: the average is the product, with no transform round-off
    constant = bool(np.all(vals == vals[:, :1]))
    if method == "direct":
        if direct > budget:
            raise BudgetExceeded(f"direct evaluation needs {direct} terms (budget {budget})")
        value = complex(np.prod(vals[:, 0])) if constant else _linear_direct(lp, vals, N, workers)
        return LinearEvaluation(value, "direct")
    if method == "fourier":
        if fourier > budget:
            raise BudgetExceeded(f"Fourier evaluation needs {fourier} terms (budget {budget})")
        value = complex(np.prod(vals[:, 0])) if constant else _linear_fourier(lp, vals, N, workers)
        return LinearEvaluation(value, "fourier-nullspace")
    return _linear_sampled(lp, vals, N, samples, seed)


def lambda_linear(lp: LinearizedPattern, fs: Sequence[CyclicFunction], N: int,
                  method: str = "auto", workers: int = 1) -> complex:
    """E_{x,y1..yd} prod_i f_i(x + P_i*(y1, ..., yd))."""
    return evaluate_linear(lp, fs, N, method, workers).value


# report ----------------------------------------------------------------------

def _cjson(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


@dataclass(frozen=True)
class CountingReport:
    modulus: int
    pattern: str | None
    lambda_poly: complex
    lambda_linear: complex
    gap: float
    method: str
    elapsed: float = field(default=0.0, compare=False)
    stderr: float | None = None
    samples: int | None = None

    def to_json(self) -> dict:
        out = {
            "N": self.modulus,
            "pattern": self.pattern,
            "lambda_poly": _cjson(self.lambda_poly),
            "lambda_linear": _cjson(self.lambda_linear),
            "gap": self.gap,
            "method": self.method,
        }
        if self.method == "sampled":
            out["samples"] = self.samples
            out["stderr"] = self.stderr
        return out


def transfer_gap(p: PatternSpec, fs: Sequence[CyclicFunction], N: int, method: str = "auto",
                 workers: int = 1, seed: int = 0, samples: int = DEFAULT_SAMPLES) -> CountingReport:
    start = time.perf_counter()
    lp = linearize(p)
    poly = lambda_poly(p, fs, N, workers)
    lin = evaluate_linear(lp, fs, N, method, workers, seed, samples)
    return CountingReport(N, p.name, poly, lin.value, abs(poly - lin.value), lin.method,
                          time.perf_counter() - start, lin.stderr, lin.samples)


# dual functions ---------------------------------------------------------------

def _dual_poly(p: PatternSpec, vals: np.ndarray, N: int, j: int) -> np.ndarray:
    table = _poly_table(p, N)
    xs = np.arange(N)
    parts = []
    for a, b in chunk_ranges(N, max(1, CHUNK_ELEMENTS // N)):
        prod = np.ones((b - a, N), dtype=complex)
        for i in range(p.t):
            if i != j:
                shift = (table[i, a:b] - table[j, a:b]) % N
                prod *= vals[i][(xs[None, :] + shift[:, None]) % N]
        parts.append(prod.sum(axis=0))
    out = tree_sum(parts)
    return out / N


def _dual_linear_fourier(lp: LinearizedPattern, vals: np.ndarray, N: int, j: int) -> np.ndarray:
    others = [i for i in range(lp.t) if i != j]
    cols = lp.active_columns()
    rows = [[lp.L[i][c] - lp.L[j][c] for i in others] for c in cols]
    rows = [r for r in rows if any(v % N for v in r)]
    basis = linalg.nullspace_mod(rows, len(others), N) if rows else \
        [[int(a == b) for a in range(len(others))] for b in range(len(others))]
    fhat = np.stack([_dft_array(vals[i], -1) / N for i in others])
    acc = np.zeros(N, dtype=complex)
    total = N ** len(basis)
    for a, b in chunk_ranges(total, CHUNK_ELEMENTS):
        xi = _sweep(basis, N, a, b) if basis else np.zeros((len(others), 1), dtype=np.int64)
        prod = np.ones(xi.shape[1], dtype=complex)
        for k in range(len(others)):
            prod *= fhat[k][xi[k]]
        freq = xi.sum(axis=0) % N
        acc += np.bincount(freq, weights=prod.real, minlength=N)
        acc += 1j * np.bincount(freq, weights=prod.imag, minlength=N)
    # sum_s acc[s] e(x s / N)
    return _dft_array(acc, +1)


def _dual_linear_direct(lp: LinearizedPattern, vals: np.ndarray, N: int, j: int) -> np.ndarray:
    cols = lp.active_columns()
    rows = np.array([[(lp.L[i][c] - lp.L[j][c]) % N for c in cols] for i in range(lp.t)],
                    dtype=np.int64).reshape(lp.t, len(cols))
    total = N ** len(cols)
    xs = np.arange(N)
    out = np.zeros(N, dtype=complex)
    for a, b in chunk_ranges(total, max(1, CHUNK_ELEMENTS // N)):
        off = _linear_offsets(rows, N, a, b)
        prod = np.ones((b - a, N), dtype=complex)
        for i in range(lp.t):
            if i != j:
                prod *= vals[i][(off[i][:, None] + xs[None, :]) % N]
        out += prod.sum(axis=0)
    return out / total


def dual_function(p: PatternSpec, fs: Sequence[CyclicFunction], N: int, j: int,
                  method: str = "auto") -> CyclicFunction:
    """D_j(x) = E_y prod_{i != j} f_i(x + P_i(y) - P_j(y)) minus the same
    average along the linearized pattern.

    With this normalisation ``E_x f_j(x) D_j(x) = Lambda - Lambda*``.
    """
    vals = _check_inputs(fs, N, p.t)
    if not 0 <= j < p.t:
        raise CountingError(f"index {j} out of range for t = {p.t}")
    lp = linearize(p)
    poly = _dual_poly(p, vals, N, j)
    if method == "auto":
        method = "direct" if cost_direct(lp, N) <= N ** 3 else "fourier"
    if method == "direct":
        if cost_direct(lp, N) > enumeration_budget():
            raise BudgetExceeded("direct dual function exceeds the enumeration budget")
        lin = _dual_linear_direct(lp, vals, N, j)
    elif method == "fourier":
        lin = _dual_linear_fourier(lp, vals, N, j)
    else:
        raise CountingError(f"unsupported dual-function method {method!r}")
    return CyclicFunction(N, poly - lin)


# configurations in sets ---------------------------------------------------------

@dataclass(frozen=True)
class ConfigCount:
    total: int
    nontrivial: int


def trivial_parameters(p: PatternSpec, N: int, convention: str = "mod") -> np.ndarray:
    """Boolean mask over y in 0..N-1 marking y with P_i(y) = P_j(y) for some i != j.

    ``mod`` compares residues mod N; ``integer`` compares the integer values
    at the representative y in 0..N-1.
    """
    if convention == "mod":
        table = _poly_table(p, N)
    elif convention == "integer":
        table = np.array([[int(q(y)) for y in range(N)] for q in p.polys], dtype=object)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    mask = np.zeros(N, dtype=bool)
    for i in range(p.t):
        for k in range(i + 1, p.t):
            mask |= np.asarray(table[i] == table[k], dtype=bool)
    return mask


def indicator(A, N: int) -> np.ndarray:
    ind = np.zeros(N, dtype=np.int64)
    for a in A:
        ind[int(a) % N] = 1
    return ind


def count_configs(p: PatternSpec, A, N: int, convention: str = "mod") -> ConfigCount:
    """Number of (x, y) with every x + P_i(y) in A, in total and with trivial y removed."""
    if not is_prime(N):
        raise CountingError(f"N = {N} is not prime")
    ind = indicator(A, N)
    table = _poly_table(p, N)
    xs = np.arange(N)
    per_y = np.zeros(N, dtype=np.int64)
    rows = max(1, CHUNK_ELEMENTS // N)
    for a, b in chunk_ranges(N, rows):
        prod = np.ones((b - a, N), dtype=np.int64)
        for i in range(p.t):
            prod *= ind[(xs[None, :] + table[i, a:b, None]) % N]
        per_y[a:b] = prod.sum(axis=1)
    trivial = trivial_parameters(p, N, convention)
    return ConfigCount(int(per_y.sum()), int(per_y[~trivial].sum()))
