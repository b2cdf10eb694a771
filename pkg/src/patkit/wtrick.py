"""The W-trick for a single polynomial difference P(y).

Starting from ``P(y) = sum_{j=d'}^{d} b_j y^j`` with integer coefficients the
module provides

* the reduction to bottom coefficient 1, ``b^{-d'-1} P(b y)``;
* the highly divisible modulus ``W`` and ``P_W(y) = W^{-d'} P(W y)``;
* residue distributions of polynomials modulo q and an exact comparison
  routine for the Hensel-type distribution identities;
* the averaging operators ``lambda_W`` and ``lambda_model``.

The continuous average over ``z`` in [1/2, 1] used by ``lambda_W`` is
replaced by the uniform average over the 64 midpoints
``z_k = 1/2 + (2k + 1)/256``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from patkit.numtheory import (BudgetExceeded, ceil_cube_root, enumeration_budget, factorize,
                              floor_root, primes_upto)
from patkit.poly import UniPoly

Z_GRID_POINTS = 64
Z_GRID = tuple(Fraction(1, 2) + Fraction(2 * k + 1, 4 * Z_GRID_POINTS) for k in range(Z_GRID_POINTS))
Z_GRID_RULE = "midpoint rule, 64 equal subintervals of [1/2, 1]"
# prime-power components up to this size are enumerated outright
EXHAUSTIVE_COMPONENT_LIMIT = 1 << 24
_INT64_SAFE = 3_000_000_000


class WTrickError(ValueError):
    pass


class RangeEmpty(WTrickError):
    """An averaging range of an operator is empty for the given N."""


# normalisation and W ----------------------------------------------------------

def _coefficients(P: UniPoly) -> dict[int, int]:
    if not P.is_integral():
        raise WTrickError(f"{P.to_text()} must have integer coefficients")
    if P.is_zero():
        raise WTrickError("P must be nonzero")
    if P.coeff(0) != 0:
        raise WTrickError(f"{P.to_text()} has a nonzero constant term")
    return P.int_coeffs()


@dataclass(frozen=True)
class ScaleRecord:
    """Traces the substitution ``P -> b^{-d'-1} P(b y)``."""

    b: int
    d_prime: int

    @property
    def divisor(self) -> int:
        return self.b ** (self.d_prime + 1)

    def to_json(self) -> dict:
        return {"b": self.b, "substitution": f"y -> {self.b}*y",
                "divisor": str(self.divisor)}


def normalize_bottom(P: UniPoly) -> tuple[UniPoly, ScaleRecord]:
    coeffs = _coefficients(P)
    dp = min(coeffs)
    b = coeffs[dp]
    if b <= 0:
        raise WTrickError(f"bottom coefficient {b} must be positive (negate the pattern first)")
    out = {}
    for j, c in coeffs.items():
        # b^{-d'-1} * c * b^j
        out[j] = c * b ** (j - dp - 1) if j > dp else Fraction(c, b)
    Q = UniPoly(out, P.var)
    if not Q.is_integral() or Q.coeff(dp) != 1:
        raise AssertionError("normalisation must give an integer polynomial with bottom coefficient 1")
    return Q, ScaleRecord(b, dp)


def W_factors(d: int, w: int) -> tuple[int, int, int]:
    """The three products making up W, in order."""
    if w <= 1:
        raise WTrickError("w must exceed 1")
    if d < 1:
        raise WTrickError("degree must be positive")
    primes = primes_upto(w)
    dfact = math.factorial(d)
    first = math.prod(p for p in primes if math.gcd(p, d) == 1)
    second = math.prod(p ** (2 * d) for p in primes if math.gcd(p, dfact) != 1)
    e = ceil_cube_root(w)
    third = math.prod(p ** e for p in primes if p * p <= w)
    return first, second, third


def compute_W(d: int, w: int) -> int:
    W = math.prod(W_factors(d, w))
    if W % math.lcm(*range(1, w + 1)):
        raise AssertionError(f"lcm(1..{w}) does not divide W = {W}")
    return W


def rescale(P: UniPoly, W: int) -> UniPoly:
    """P_W(y) = W^{-d'} P(W y) for P with bottom coefficient 1."""
    coeffs = _coefficients(P)
    dp = min(coeffs)
    if coeffs[dp] != 1:
        raise WTrickError("rescale expects bottom coefficient 1")
    out = UniPoly({j: c * W ** (j - dp) for j, c in coeffs.items()}, P.var)
    if not out.is_integral():
        raise AssertionError("P_W must have integer coefficients")
    return out


@dataclass(frozen=True)
class WTrickContext:
    P: UniPoly
    original: UniPoly
    negated: bool
    scale: ScaleRecord
    d: int
    d_prime: int
    b: tuple[int, ...]
    w: int
    W: int
    P_W: UniPoly
    epsilon: int

    @classmethod
    def build(cls, P: UniPoly, w: int) -> "WTrickContext":
        coeffs = _coefficients(P)
        negated = coeffs[min(coeffs)] < 0
        base = -P if negated else P
        Pn, scale = normalize_bottom(base)
        c = Pn.int_coeffs()
        d, dp = max(c), min(c)
        W = compute_W(d, w)
        return cls(Pn, P, negated, scale, d, dp, tuple(c.get(j, 0) for j in range(dp, d + 1)),
                   w, W, rescale(Pn, W), 1 if c[d] > 0 else -1)

    @property
    def b_top(self) -> int:
        return self.b[-1]

    @property
    def leading(self) -> int:
        """Leading coefficient |b_d| W^{d-d'} of P_W."""
        return abs(self.b_top) * self.W ** (self.d - self.d_prime)

    def nu_scale(self, N: int) -> float:
        """(d'/d) (N/W^2)^{(d-d')/(2 d d')}."""
        expo = Fraction(self.d - self.d_prime, 2 * self.d * self.d_prime)
        return self.d_prime / self.d * _real_power(Fraction(N, self.W ** 2), expo)

    def nu(self, y, N: int):
        ys = np.asarray(y, dtype=float)
        return self.nu_scale(N) * ys ** (-(self.d - self.d_prime) / self.d)

    def model_y_range(self, N: int) -> int:
        """floor((N / W^2)^{1/(2d')})."""
        return floor_root(Fraction(N, self.W ** 2), 2 * self.d_prime)

    def w_y_range(self, z: Fraction, N: int) -> int:
        """floor((z N / (|b_d| W^{d-d'}))^{1/d})."""
        return floor_root(Fraction(z) * N / self.leading, self.d)

    def to_json(self) -> dict:
        return {
            "P": self.original.to_text(),
            "normalized_P": self.P.to_text(),
            "negated": self.negated,
            "scale": self.scale.to_json(),
            "d": self.d,
            "d_prime": self.d_prime,
            "b": [str(c) for c in self.b],
            "w": self.w,
            "W": str(self.W),
            "W_factorization": {str(p): e for p, e in sorted(factorize(self.W).items())},
            "P_W": self.P_W.to_text(),
            "epsilon": self.epsilon,
        }


def _real_power(x: Fraction, e: Fraction) -> float:
    """x**e in floating point, through logarithms so huge ratios do not overflow."""
    if x == 0:
        return 0.0
    logx = math.log(x.numerator) - math.log(x.denominator)
    return math.exp(float(e) * logx)


# residue distributions --------------------------------------------------------

def _values_mod_array(Q: UniPoly, q: int, start: int, stop: int) -> np.ndarray:
    """Q(y) mod q for y in start..stop-1."""
    coeffs = Q.int_coeffs()
    top = max(coeffs, default=0)
    if q < _INT64_SAFE:
        ys = np.arange(start, stop, dtype=np.int64) % q
        acc = np.zeros(stop - start, dtype=np.int64)
        for e in range(top, -1, -1):
            acc = (acc * ys + coeffs.get(e, 0) % q) % q
        return acc
    ys = np.arange(start, stop, dtype=object)
    acc = np.zeros(stop - start, dtype=object)
    for e in range(top, -1, -1):
        acc = (acc * ys + coeffs.get(e, 0)) % q
    return acc


@dataclass(frozen=True)
class ResidueDistribution:
    modulus: int
    counts: np.ndarray

    def __post_init__(self):
        if int(self.counts.sum()) != self.modulus:
            raise AssertionError("residue counts must sum to the modulus")

    def __eq__(self, other):
        return (isinstance(other, ResidueDistribution) and self.modulus == other.modulus
                and bool(np.array_equal(self.counts, other.counts)))

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.counts == 1))

    @property
    def support(self) -> list[int]:
        return [int(r) for r in np.flatnonzero(self.counts)]


def distribution_mod(Q: UniPoly, q: int, budget: int | None = None) -> ResidueDistribution:
    """Counts of Q(y) mod q over y in [q]."""
    if q < 1:
        raise WTrickError("modulus must be positive")
    if not Q.is_integral():
        raise WTrickError("Q must have integer coefficients")
    cap = enumeration_budget() if budget is None else budget
    if q > min(cap, _INT64_SAFE):
        raise BudgetExceeded(f"modulus {q} is too large to enumerate")
    counts = np.zeros(q, dtype=np.int64)
    step = 1 << 22
    for a in range(0, q, step):
        counts += np.bincount(_values_mod_array(Q, q, a, min(a + step, q)), minlength=q)
    return ResidueDistribution(q, counts)


@dataclass(frozen=True)
class HypothesisCheck:
    prime: int
    r: int
    coprime_bottom: bool
    higher_divisible: bool
    reference_congruent: bool
    needs_p_2d: bool

    @property
    def holds(self) -> bool:
        return self.coprime_bottom and self.higher_divisible and self.reference_congruent

    def to_json(self) -> dict:
        return {"p": self.prime, "r": self.r, "coprime_bottom": self.coprime_bottom,
                "higher_divisible": self.higher_divisible,
                "reference_congruent": self.reference_congruent,
                "needs_p_2d": self.needs_p_2d, "holds": self.holds}


@dataclass(frozen=True)
class ComponentCheck:
    prime: int
    exponent: int
    method: str
    equal: bool
    differences: tuple[tuple[int, int, int], ...] = ()

    def to_json(self) -> dict:
        out = {"p": self.prime, "k": self.exponent, "modulus": str(self.prime ** self.exponent),
               "method": self.method, "equal": self.equal}
        if self.differences:
            out["differences"] = [list(t) for t in self.differences]
        return out


@dataclass(frozen=True)
class HenselReport:
    Q: UniPoly
    reference: UniPoly
    q: int
    equal: bool
    hypotheses: tuple[HypothesisCheck, ...]
    components: tuple[ComponentCheck, ...]

    @property
    def hypotheses_hold(self) -> bool:
        return bool(self.hypotheses) and all(h.holds for h in self.hypotheses)

    def to_json(self) -> dict:
        return {
            "Q": self.Q.to_text(),
            "reference": self.reference.to_text(),
            "q": str(self.q),
            "equal": self.equal,
            "hypotheses_hold": self.hypotheses_hold,
            "hypotheses": [h.to_json() for h in self.hypotheses],
            "components": [c.to_json() for c in self.components],
        }


def check_hypotheses(Q: UniPoly, reference: UniPoly, q: int) -> tuple[HypothesisCheck, ...]:
    """Conditions of the prime-power distribution identity at each prime dividing q.

    Q = sum_{j>=r} c_j y^j with c_r prime to p and higher coefficients divisible
    by p (by p^{2d} when p <= d); the reference is a monomial c~ y^r with
    c~ = c_r mod p (mod p^{2d} when p <= d).  Returns an empty tuple when
    Q or the reference does not have that shape at all.
    """
    if Q.is_zero() or reference.is_zero():
        return ()
    cq, cr = Q.int_coeffs(), reference.int_coeffs()
    r = min(cq)
    d = max(cq)
    if r < 1 or len(cr) != 1 or r not in cr:
        return ()
    dfact = math.factorial(d)
    out = []
    for p in sorted(factorize(q)):
        strong = math.gcd(p, dfact) != 1
        mod = p ** (2 * d) if strong else p
        out.append(HypothesisCheck(
            prime=p, r=r,
            coprime_bottom=cq[r] % p != 0,
            higher_divisible=all(c % mod == 0 for j, c in cq.items() if j > r),
            reference_congruent=(cr[r] - cq[r]) % mod == 0,
            needs_p_2d=strong,
        ))
    return tuple(out)


def _congruent(Q: UniPoly, R: UniPoly, m: int) -> bool:
    a, b = Q.int_coeffs(), R.int_coeffs()
    return all((a.get(j, 0) - b.get(j, 0)) % m == 0 for j in set(a) | set(b))


def verify_hensel(Q: UniPoly, reference: UniPoly, q: int,
                  exhaustive_limit: int = EXHAUSTIVE_COMPONENT_LIMIT) -> HenselReport:
    """Decide exactly whether Q and the reference have the same distribution mod q.

    By the Chinese remainder theorem the distribution mod q is the tensor
    product of the distributions mod the prime powers p^k || q, so equality
    holds iff it holds for every component.  Components up to
    ``exhaustive_limit`` are enumerated; larger ones are decided by
    coefficientwise congruence mod p^k (which gives identical value maps) when
    it applies, and otherwise enumerated within the global budget.
    """
    if q < 1:
        raise WTrickError("modulus must be positive")
    hyps = check_hypotheses(Q, reference, q)
    comps = []
    for p, k in sorted(factorize(q).items()):
        m = p ** k
        if m > exhaustive_limit and _congruent(Q, reference, m):
            comps.append(ComponentCheck(p, k, "congruent-coefficients", True))
            continue
        a, b = distribution_mod(Q, m), distribution_mod(reference, m)
        diff = np.flatnonzero(a.counts != b.counts)
        comps.append(ComponentCheck(
            p, k, "exhaustive", diff.size == 0,
            tuple((int(l), int(a.counts[l]), int(b.counts[l])) for l in diff[:10]),
        ))
    return HenselReport(Q, reference, q, all(c.equal for c in comps), hyps, tuple(comps))


def admissible_residues(P_W: UniPoly, m: int) -> list[int]:
    """Sorted {P_W(y) mod m : y in [m]}."""
    if m < 1:
        raise WTrickError("modulus must be positive")
    return distribution_mod(P_W, m).support


@dataclass(frozen=True)
class AdmissibleSummary:
    modulus: int
    count: int | None
    residues: tuple[int, ...]
    truncated: bool
    status: str

    def to_json(self) -> dict:
        return {"modulus": str(self.modulus), "count": None if self.count is None else str(self.count),
                "residues": [str(r) for r in self.residues], "truncated": self.truncated,
                "status": self.status}


def admissible_summary(P_W: UniPoly, m: int, cap: int = 64,
                       component_limit: int = EXHAUSTIVE_COMPONENT_LIMIT,
                       scan_limit: int = 1 << 20) -> AdmissibleSummary:
    """Count and smallest ``cap`` admissible residues mod m, via CRT components."""
    if m == 1:
        return AdmissibleSummary(1, 1, (0,), False, "complete")
    sets = {}
    for p, k in factorize(m).items():
        pk = p ** k
        if pk > component_limit:
            return AdmissibleSummary(m, None, (), True, f"component {p}^{k} exceeds the enumeration limit")
        sets[pk] = set(admissible_residues(P_W, pk))
    count = math.prod(len(s) for s in sets.values())
    found = []
    for ell in range(min(m, scan_limit)):
        if all(ell % pk in s for pk, s in sets.items()):
            found.append(ell)
            if len(found) == cap:
                break
    complete = len(found) == count
    status = "complete" if complete else ("truncated" if len(found) == cap else "partial scan")
    return AdmissibleSummary(m, count, tuple(found), not complete, status)


# operators --------------------------------------------------------------------

def _gather(f, shift: int, N: int) -> np.ndarray:
    """Values f(x + shift) for x = 1..N."""
    return f.window(1 + shift, N + shift)


def _product_sum(fs, shifts: Sequence[int], N: int) -> complex:
    prod = None
    for f, s in zip(fs, shifts):
        v = _gather(f, s, N)
        prod = v if prod is None else prod * v
    return complex(np.sum(prod))


def _all_constant(fs) -> bool:
    return all(not hasattr(f, "start") for f in fs)


def _check_operator_args(fs, a: Sequence[int]) -> None:
    if len(fs) != len(a):
        raise WTrickError("need one coefficient a_i per function")
    if len(set(a)) != len(a):
        raise WTrickError("the coefficients a_i must be distinct")


@dataclass(frozen=True)
class OperatorValue:
    value: complex
    terms: int
    detail: dict = field(default_factory=dict)


def lambda_W(ctx: WTrickContext, fs, a: Sequence[int], N: int) -> OperatorValue:
    """E_{z} E_{x in [N], y in [M_z]} prod_i f_i(x + a_i P_W(y)) with the z-average
    over ``Z_GRID`` and M_z = floor((z N / (|b_d| W^{d-d'}))^{1/d})."""
    _check_operator_args(fs, a)
    ranges = [ctx.w_y_range(z, N) for z in Z_GRID]
    if min(ranges) < 1:
        raise RangeEmpty(
            f"the y-range is empty for z = 1/2 at N = {N}: need N >= 2*|b_d|*W^(d-d') = "
            f"{2 * ctx.leading} (W = {ctx.W}); the operator is only meaningful for N much larger "
            "than a power of W")
    top = max(ranges)
    if N * top * len(fs) > enumeration_budget():
        raise BudgetExceeded(f"lambda_W needs about {N * top * len(fs)} evaluations")
    consts = _all_constant(fs)
    per_y = np.zeros(top + 1, dtype=complex)
    for y in range(1, top + 1):
        if consts:
            per_y[y] = complex(np.prod([f.value for f in fs])) * N
        else:
            v = int(ctx.P_W(y))
            per_y[y] = _product_sum(fs, [ai * v for ai in a], N)
    prefix = np.cumsum(per_y)
    vals = [prefix[M] / (N * M) for M in ranges]
    return OperatorValue(complex(np.mean(vals)), N * top,
                         {"z_grid": Z_GRID_RULE, "y_range_min": min(ranges), "y_range_max": top})


def model_z_range(N: int) -> tuple[int, int]:
    """Integers z with N^{1/2}/2 <= z <= N^{1/2}."""
    lo = max(1, math.isqrt(N) // 2)
    while 4 * lo * lo < N:
        lo += 1
    return lo, math.isqrt(N)


def nu_mean(ctx: WTrickContext, N: int) -> float:
    Y = ctx.model_y_range(N)
    if Y < 1:
        raise RangeEmpty(f"no y with y <= (N/W^2)^(1/(2d')) at N = {N}, W = {ctx.W}")
    return float(np.mean(ctx.nu(np.arange(1, Y + 1), N)))


def lambda_model(ctx: WTrickContext, fs, a: Sequence[int], N: int) -> OperatorValue:
    """E_{x in [N], y in [Y], z in [N^{1/2}/2, N^{1/2}]} nu(y) prod_i f_i(x + a_i (eps z W + 1) y^{d'})
    with Y = floor((N/W^2)^{1/(2d')})."""
    _check_operator_args(fs, a)
    Y = ctx.model_y_range(N)
    if Y < 1:
        raise RangeEmpty(
            f"the y-range [(N/W^2)^(1/(2d'))] is empty at N = {N}: need N >= W^2 = {ctx.W ** 2} "
            f"(W = {ctx.W}, d' = {ctx.d_prime})")
    zlo, zhi = model_z_range(N)
    if zlo > zhi:
        raise RangeEmpty(f"no integer z in [N^(1/2)/2, N^(1/2)] at N = {N}")
    nz = zhi - zlo + 1
    nu = ctx.nu(np.arange(1, Y + 1), N)
    if _all_constant(fs):
        const = complex(np.prod([f.value for f in fs]))
        return OperatorValue(const * float(np.mean(nu)), Y,
                             {"y_range": Y, "z_range": [zlo, zhi], "nu_mean": float(np.mean(nu))})
    if N * Y * nz * len(fs) > enumeration_budget():
        raise BudgetExceeded(f"lambda_model needs about {N * Y * nz * len(fs)} evaluations")
    total = 0j
    for y in range(1, Y + 1):
        row = 0j
        yd = y ** ctx.d_prime
        for z in range(zlo, zhi + 1):
            step = (ctx.epsilon * z * ctx.W + 1) * yd
            row += _product_sum(fs, [ai * step for ai in a], N)
        total += nu[y - 1] * row
    return OperatorValue(total / (N * Y * nz), N * Y * nz,
                         {"y_range": Y, "z_range": [zlo, zhi], "nu_mean": float(np.mean(nu))})
