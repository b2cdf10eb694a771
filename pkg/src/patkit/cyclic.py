"""Functions on Z/NZ and on Z, Fourier transforms, Gowers and Gowers--Peluse norms.

Conventions: ``e(t) = exp(2*pi*i*t)`` and the Fourier transform on Z/NZ is
normalised as ``fhat(xi) = E_x f(x) e(-x*xi/N)``, so that
``f(x) = sum_xi fhat(xi) e(x*xi/N)`` and ``||f||_{U^2}^4 = sum |fhat|^4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from patkit.numtheory import BudgetExceeded, enumeration_budget, next_prime_at_least

DIRECT_DFT_LIMIT = 256
ONE_BOUND_TOL = 1e-12


def e(t):
    return np.exp(2j * np.pi * np.asarray(t, dtype=float))


def phase_mod(residues: np.ndarray, N: int) -> np.ndarray:
    """e(r/N) for integer residues r (reduced before the float conversion)."""
    return e(np.mod(residues, N) / N)


@dataclass(frozen=True)
class CyclicFunction:
    modulus: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.modulus,):
            raise ValueError(f"expected {self.modulus} values, got shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def one_bounded(self) -> bool:
        return bool(np.max(np.abs(self.values), initial=0.0) <= 1 + ONE_BOUND_TOL)

    def shifted(self, c: int) -> "CyclicFunction":
        """x -> f(x + c)."""
        return CyclicFunction(self.modulus, np.roll(self.values, -c))

    def __mul__(self, other: "CyclicFunction") -> "CyclicFunction":
        if self.modulus != other.modulus:
            raise ValueError("modulus mismatch")
        return CyclicFunction(self.modulus, self.values * other.values)

    def conj(self) -> "CyclicFunction":
        return CyclicFunction(self.modulus, np.conj(self.values))

    def mean(self) -> complex:
        return complex(np.mean(self.values))


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate of a non-negative quantity and of its 2^k-th power."""

    value: float
    power_mean: float
    stderr: float
    samples: int


# Fourier analysis -------------------------------------------------------------

def _dft_array(values: np.ndarray, sign: int) -> np.ndarray:
    N = len(values)
    if N < DIRECT_DFT_LIMIT:
        k = np.arange(N)
        mat = e(sign * np.outer(k, k) % N / N)
        return mat @ values
    return np.fft.fft(values) if sign < 0 else np.fft.ifft(values) * N


def dft(f: CyclicFunction) -> CyclicFunction:
    """fhat(xi) = E_x f(x) e(-x*xi/N)."""
    return CyclicFunction(f.modulus, _dft_array(f.values, -1) / f.modulus)


def inverse_dft(fhat: CyclicFunction) -> CyclicFunction:
    """f(x) = sum_xi fhat(xi) e(x*xi/N)."""
    return CyclicFunction(fhat.modulus, _dft_array(fhat.values, +1))


# Gowers norms on Z/NZ ---------------------------------------------------------

_CHUNK_ELEMENTS = 1 << 22


def _gowers_power_batch(batch: np.ndarray, s: int) -> np.ndarray:
    """E_{x,h_1..h_s} Delta f(x) for each row of ``batch``."""
    if s == 1:
        m = batch.mean(axis=1)
        return m * np.conj(m)
    B, N = batch.shape
    idx = (np.arange(N)[None, :] + np.arange(N)[:, None]) % N  # [h, x] -> x + h
    out = np.empty(B, dtype=complex)
    rows_per_chunk = max(1, _CHUNK_ELEMENTS // (N * N))
    for start in range(0, B, rows_per_chunk):
        g = batch[start:start + rows_per_chunk]
        derived = g[:, None, :] * np.conj(g[:, idx])  # Delta_h g(x) = g(x) conj g(x+h)
        inner = _gowers_power_batch(derived.reshape(-1, N), s - 1)
        out[start:start + len(g)] = inner.reshape(len(g), N).mean(axis=1)
    return out


def gowers_power_cyclic(f: CyclicFunction, s: int, budget: int | None = None) -> complex:
    """||f||_{U^s}^{2^s} as a complex number (imaginary part is round-off)."""
    if s < 1:
        raise ValueError("order s must be at least 1")
    cap = enumeration_budget() if budget is None else budget
    if f.modulus ** (s + 1) > cap:
        hint = "use gowers_norm_u2_fourier" if s == 2 else "use gowers_norm_sampled"
        raise BudgetExceeded(f"N^(s+1) = {f.modulus}^{s + 1} exceeds the budget {cap}; {hint}")
    return complex(_gowers_power_batch(f.values[None, :], s)[0])


def gowers_norm_cyclic(f: CyclicFunction, s: int, budget: int | None = None) -> float:
    """(E_{x,h_1..h_s} Delta_{h_1..h_s} f(x))^{1/2^s} by direct summation."""
    power = gowers_power_cyclic(f, s, budget)
    if abs(power.imag) >= 1e-9:
        raise ArithmeticError(f"Gowers average has imaginary part {power.imag}")
    return max(power.real, 0.0) ** (1.0 / 2**s)


def gowers_norm_u2_fourier(f: CyclicFunction) -> float:
    """||f||_{U^2} from sum |fhat|^4."""
    fh = dft(f).values
    return float(np.sum(np.abs(fh) ** 4)) ** 0.25


def gowers_norm_sampled(f: CyclicFunction, s: int, samples: int, seed: int = 0) -> Estimate:
    """Unbiased sampling of the Gowers average over random (x, h_1..h_s)."""
    rng = np.random.Generator(np.random.Philox(seed))
    N = f.modulus
    pts = rng.integers(0, N, size=(samples, s + 1))
    x, hs = pts[:, 0], pts[:, 1:]
    acc = np.ones(samples, dtype=complex)
    for omega in range(2**s):
        bits = [(omega >> j) & 1 for j in range(s)]
        shift = x + hs @ np.array(bits)
        vals = f.values[shift % N]
        acc *= np.conj(vals) if sum(bits) % 2 else vals
    real = acc.real
    mean = float(real.mean())
    stderr = float(real.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("inf")
    return Estimate(max(mean, 0.0) ** (1.0 / 2**s), mean, stderr, samples)


def interval_modulus(N: int, s: int) -> int:
    """Smallest prime >= 2^s * N + 1."""
    return next_prime_at_least(2**s * N + 1)


def gowers_norm_interval(values: Sequence[complex], s: int, modulus: int | None = None,
                         budget: int | None = None) -> float:
    """||f||_{U^s[N]} for f on [N] = {1..N} (``values[x-1] = f(x)``)."""
    vals = np.asarray(values, dtype=complex)
    N = len(vals)
    Nt = interval_modulus(N, s) if modulus is None else modulus
    if Nt < 2**s * N:
        raise ValueError(f"embedding modulus {Nt} is smaller than 2^s*N = {2**s * N}")
    emb = np.zeros(Nt, dtype=complex)
    emb[1:N + 1] = vals
    ind = np.zeros(Nt, dtype=complex)
    ind[1:N + 1] = 1.0
    if s == 2:
        num = gowers_norm_u2_fourier(CyclicFunction(Nt, emb))
        den = gowers_norm_u2_fourier(CyclicFunction(Nt, ind))
    else:
        num = gowers_norm_cyclic(CyclicFunction(Nt, emb), s, budget)
        den = gowers_norm_cyclic(CyclicFunction(Nt, ind), s, budget)
    return num / den


# functions and measures on Z ------------------------------------------------

@dataclass(frozen=True)
class FiniteFunction:
    """f: Z -> C supported on [start, start + len(values) - 1].

    ``values`` may be an object array of Fractions for exact computation.
    """

    start: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1:
            raise ValueError("values must be one-dimensional")
        object.__setattr__(self, "values", vals)

    @property
    def stop(self) -> int:
        """Last point of the support window (inclusive)."""
        return self.start + len(self.values) - 1

    def __call__(self, x: int):
        if self.start <= x <= self.stop:
            return self.values[x - self.start]
        return 0

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Values at lo..hi inclusive; zero outside the support window.

        ``lo``/``hi`` may be arbitrarily large Python integers.
        """
        n = hi - lo + 1
        out = np.zeros(max(n, 0), dtype=self.values.dtype)
        a, b = max(lo, self.start), min(hi, self.stop)
        if a <= b:
            out[a - lo:b - lo + 1] = self.values[a - self.start:b - self.start + 1]
        return out

    def modulated(self, theta: float) -> "FiniteFunction":
        xs = np.arange(self.start, self.stop + 1)
        return FiniteFunction(self.start, self.values * e(theta * xs))

    @classmethod
    def indicator(cls, a: int, b: int, exact: bool = False) -> "FiniteFunction":
        vals = np.array([1] * (b - a + 1), dtype=object) if exact else np.ones(b - a + 1)
        return cls(a, vals)


@dataclass(frozen=True)
class ConstantFunction:
    """The constant function on Z (not finitely supported)."""

    value: complex = 1.0

    def window(self, lo: int, hi: int) -> np.ndarray:
        return np.full(max(hi - lo + 1, 0), self.value)


@dataclass(frozen=True)
class FiniteMeasure:
    support: tuple[tuple[int, "float | Fraction"], ...]

    def __post_init__(self):
        merged: dict[int, object] = {}
        for x, w in self.support:
            if w < 0:
                raise ValueError("measure weights must be non-negative")
            merged[int(x)] = merged.get(int(x), 0) + w
        supp = tuple(sorted((x, w) for x, w in merged.items() if w))
        if not supp:
            raise ValueError("empty measure")
        total = sum(w for _, w in supp)
        if abs(total - 1) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "support", supp)

    @classmethod
    def uniform(cls, a: int, b: int, exact: bool = False) -> "FiniteMeasure":
        n = b - a + 1
        w = Fraction(1, n) if exact else 1.0 / n
        return cls(tuple((x, w) for x in range(a, b + 1)))

    @classmethod
    def point(cls, h: int) -> "FiniteMeasure":
        return cls(((h, Fraction(1)),))

    @classmethod
    def progression(cls, q: int, a: int, b: int, exact: bool = False) -> "FiniteMeasure":
        """Uniform on q*[a..b]."""
        n = b - a + 1
        w = Fraction(1, n) if exact else 1.0 / n
        return cls(tuple((q * x, w) for x in range(a, b + 1)))

    def weight(self, x: int):
        return dict(self.support).get(x, 0)

    def __len__(self):
        return len(self.support)


def _delta_pair(f: FiniteFunction, h: int, h2: int) -> FiniteFunction | None:
    """x -> f(x+h) conj f(x+h2)."""
    lo = max(f.start - h, f.start - h2)
    hi = min(f.stop - h, f.stop - h2)
    if lo > hi:
        return None
    a = f.values[lo + h - f.start:hi + h - f.start + 1]
    b = f.values[lo + h2 - f.start:hi + h2 - f.start + 1]
    return FiniteFunction(lo, a * np.conj(b))


def _gp_base(f: FiniteFunction, mu: FiniteMeasure):
    """sum_x |sum_h mu(h) f(x+h)|^2."""
    exact = f.values.dtype == object
    hs = [h for h, _ in mu.support]
    hmin, hmax = min(hs), max(hs)
    n = len(f.values) + hmax - hmin
    g = np.zeros(n, dtype=object if exact else complex)
    for h, w in mu.support:
        off = hmax - h
        g[off:off + len(f.values)] += (w if exact else float(w)) * f.values
    return np.sum(g * np.conj(g))


def _gp_power(f: FiniteFunction, N: int, measures: Sequence[FiniteMeasure]):
    if len(measures) == 1:
        return _gp_base(f, measures[0])
    mu, rest = measures[0], measures[1:]
    acc = 0
    for h, w in mu.support:
        for h2, w2 in mu.support:
            g = _delta_pair(f, h, h2)
            if g is not None:
                ww = w * w2 if f.values.dtype == object else float(w) * float(w2)
                acc = acc + ww * _gp_power(g, N, rest)
    return acc


def gp_cost(f: FiniteFunction, measures: Sequence[FiniteMeasure]) -> int:
    cost = len(f.values) * len(measures[-1])
    for mu in measures[:-1]:
        cost *= len(mu) ** 2
    return cost


def gp_norm_power(f: FiniteFunction, N: int, measures: Sequence[FiniteMeasure],
                  budget: int | None = None):
    """||f||_{U_GP[N; mu_1..mu_k]}^{2^k}.

    Exact (a Fraction) when ``f.values`` and the weights are exact; otherwise a
    float.
    """
    if not measures:
        raise ValueError("at least one measure is required")
    cap = enumeration_budget() if budget is None else budget
    cost = gp_cost(f, measures)
    if cost > cap:
        raise BudgetExceeded(f"support-size product {cost} exceeds budget {cap}; use gp_norm_sampled")
    total = _gp_power(f, N, measures)
    if f.values.dtype == object:
        val = Fraction(total) / N if not isinstance(total, complex) else total / N
        return val
    total = complex(total)
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"Gowers--Peluse average has imaginary part {total.imag}")
    return total.real / N


def gp_norm(f: FiniteFunction, N: int, measures: Sequence[FiniteMeasure],
            budget: int | None = None) -> float:
    """Gowers--Peluse norm by exact expansion over the measure supports."""
    power = gp_norm_power(f, N, measures, budget)
    return max(float(power), 0.0) ** (1.0 / 2 ** len(measures))


def gp_norm_sampled(f: FiniteFunction, N: int, measures: Sequence[FiniteMeasure],
                    samples: int, seed: int = 0) -> Estimate:
    """Sample the outer difference pairs; the innermost measure is summed exactly."""
    rng = np.random.Generator(np.random.Philox(seed))
    k = len(measures)
    draws = []
    for mu in measures[:-1]:
        pts = np.array([h for h, _ in mu.support])
        probs = np.array([float(w) for _, w in mu.support])
        probs = probs / probs.sum()
        draws.append((rng.choice(pts, size=samples, p=probs), rng.choice(pts, size=samples, p=probs)))
    ffloat = FiniteFunction(f.start, np.asarray(f.values, dtype=complex))
    vals = np.empty(samples)
    for n in range(samples):
        g = ffloat
        for h, h2 in draws:
            g = _delta_pair(g, int(h[n]), int(h2[n])) if g is not None else None
        vals[n] = 0.0 if g is None else complex(_gp_base(g, measures[-1])).real / N
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("inf")
    return Estimate(max(mean, 0.0) ** (1.0 / 2**k), mean, stderr, samples)


# smoothed cutoff ---------------------------------------------------------------

def smoothed_cutoff(delta: float | Fraction, N: int) -> FiniteFunction:
    """(1_[N] * 1_[+-delta N]) / (2 floor(delta N) + 1), a [0,1]-valued ramp."""
    d = Fraction(str(delta)) if isinstance(delta, float) else Fraction(delta)
    if not 0 < d < Fraction(1, 2):
        raise ValueError("delta must lie in (0, 1/2)")
    m = math.floor(d * N)
    if m < 1:
        raise ValueError(f"N*delta = {float(d * N)} < 1")
    conv = np.convolve(np.ones(N), np.ones(2 * m + 1))
    # conv[0] corresponds to x = 1 - m
    return FiniteFunction(1 - m, conv / (2 * m + 1))


def fourier_l1_mass(g: FiniteFunction, oversample: int = 64) -> float:
    """Riemann approximation of int_0^1 |sum_x g(x) e(-x theta)| d theta."""
    n = len(g.values)
    M = 1 << max(10, math.ceil(math.log2(n * oversample)))
    padded = np.zeros(M, dtype=complex)
    padded[:n] = np.asarray(g.values, dtype=complex)
    return float(np.mean(np.abs(np.fft.fft(padded))))


# test-function generator -----------------------------------------------------

FUNCTION_KINDS = ("const", "interval", "quadphase", "polyphase", "randpm1", "file")


@dataclass(frozen=True)
class FunctionSpec:
    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")

    def to_text(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}:" + ",".join(str(p) for p in self.params)

    def materialize(self, N: int, index: int = 0) -> CyclicFunction:
        """The function on Z/NZ; ``index`` separates random streams of a pattern."""
        return CyclicFunction(N, self._values(np.arange(N), N, index))

    def on_interval(self, N: int, index: int = 0) -> FiniteFunction:
        """The same recipe evaluated at x = 1..N, as a function on Z supported on [N]."""
        return FiniteFunction(1, self._values(np.arange(1, N + 1), N, index))

    def _values(self, xs: np.ndarray, N: int, index: int) -> np.ndarray:
        kind, p = self.kind, self.params
        if kind == "const":
            return np.full(len(xs), complex(p[0]) if p else 1.0 + 0j)
        if kind == "interval":
            a, b = int(p[0]), int(p[1])
            residues = {v % N for v in range(a, b + 1)} if b - a < N else set(range(N))
            return np.array([1.0 if x % N in residues else 0.0 for x in xs], dtype=complex)
        if kind == "quadphase":
            c = int(p[0])
            return phase_mod((c * xs.astype(object) ** 2 % N).astype(np.int64), N)
        if kind == "polyphase":
            acc = np.zeros(len(xs), dtype=object)
            for j, c in enumerate(p, start=1):
                acc = (acc + int(c) * xs.astype(object) ** j) % N
            return phase_mod(acc.astype(np.int64), N)
        if kind == "randpm1":
            seed = int(p[0])
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
            return rng.choice(np.array([-1.0, 1.0]), size=len(xs)).astype(complex)
        if kind == "file":
            vals = read_values(p[0])
            if len(vals) != len(xs):
                raise ValueError(f"{p[0]}: expected {len(xs)} values, found {len(vals)}")
            return vals
        raise AssertionError(kind)


def read_values(path: str | Path) -> np.ndarray:
    """One value per line, ``re`` or ``re,im``; ``#`` comments allowed."""
    out = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [s.strip() for s in line.split(",")]
        if len(parts) == 1:
            out.append(complex(float(parts[0]), 0.0))
        elif len(parts) == 2:
            out.append(complex(float(parts[0]), float(parts[1])))
        else:
            raise ValueError(f"bad value line {raw!r}")
    return np.array(out, dtype=complex)


def parse_function_spec(text: str) -> FunctionSpec:
    """Parse ``const``, ``interval:a,b``, ``quadphase:c``, ``polyphase:c1,c2,...``,
    ``randpm1:seed`` or ``file:path``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip()
    if kind not in FUNCTION_KINDS:
        raise ValueError(f"unknown function kind {kind!r} in {text!r}")
    if kind == "file":
        if not rest:
            raise ValueError("file: needs a path")
        return FunctionSpec(kind, (rest,))
    params = tuple(s.strip() for s in rest.split(",")) if rest else ()
    arity = {"interval": 2, "quadphase": 1, "randpm1": 1}
    if kind in arity and len(params) != arity[kind]:
        raise ValueError(f"{kind} takes {arity[kind]} parameter(s), got {text!r}")
    if kind == "polyphase" and not params:
        raise ValueError("polyphase needs at least one coefficient")
    if kind == "const" and len(params) > 1:
        raise ValueError("const takes at most one value")
    try:
        if kind == "const":
            params = tuple(complex(x) for x in params)
        else:
            params = tuple(int(x) for x in params)
    except ValueError:
        raise ValueError(f"bad parameters in {text!r}") from None
    return FunctionSpec(kind, params)
