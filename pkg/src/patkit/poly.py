"""Exact sparse polynomials over the rationals.

Coefficients are :class:`fractions.Fraction` values, always in lowest terms.
A :class:`MultiPoly` carries an explicit, fixed tuple of variable names and a
map from exponent tuples to coefficients; a :class:`UniPoly` is a map from
exponents to coefficients in a single named variable.  Zero coefficients are
never stored, so structural equality is polynomial equality.

Text form is a sum of ``c*x^a*y^b`` terms, for example ``y^2 - 1*y^4``.
Terms are listed in ascending graded-lexicographic order over the variable
order ``x, y, y1, ..., yd, z``.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

Number = Union[int, Fraction]
Monomial = tuple[int, ...]


class PolyParseError(ValueError):
    """Malformed polynomial text."""


def var_sort_key(name: str) -> tuple:
    """Canonical variable order: x, y, y1, y2, ..., z, then anything else."""
    if name == "x":
        return (0, 0, "")
    if name == "y":
        return (1, 0, "")
    m = re.fullmatch(r"y(\d+)", name)
    if m:
        return (2, int(m.group(1)), "")
    if name == "z":
        return (3, 0, "")
    return (4, 0, name)


def canonical_vars(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(names), key=var_sort_key))


def _frac(c: Number) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"exact coefficient required, got {type(c).__name__}")


def format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_terms(items: list[tuple[str, Fraction]]) -> str:
    """Join (monomial text, coefficient) pairs; an empty monomial is a constant."""
    if not items:
        return "0"
    out = []
    for k, (mono, c) in enumerate(items):
        neg = c < 0
        mag = -c if neg else c
        if not mono:
            body = format_coeff(mag)
        elif c == 1:
            body = mono
        else:
            body = f"{format_coeff(mag)}*{mono}"
        if k == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


class MultiPoly:
    """Multivariate polynomial over Q with a fixed variable universe."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Iterable[str], terms: Mapping[Monomial, Number] | None = None):
        self.vars: tuple[str, ...] = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate variable names in {self.vars}")
        n = len(self.vars)
        clean: dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            mono = tuple(mono)
            if len(mono) != n or any(e < 0 for e in mono):
                raise ValueError(f"bad exponent vector {mono} for variables {self.vars}")
            c = _frac(c)
            if c:
                clean[mono] = c
        self.terms: dict[Monomial, Fraction] = clean
        self._hash = None

    # construction -----------------------------------------------------------
    @classmethod
    def _raw(cls, vars: tuple[str, ...], terms: dict[Monomial, Fraction]) -> "MultiPoly":
        obj = cls.__new__(cls)
        obj.vars = vars
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, vars: Iterable[str]) -> "MultiPoly":
        return cls(vars)

    @classmethod
    def const(cls, vars: Iterable[str], c: Number) -> "MultiPoly":
        vars = tuple(vars)
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def var(cls, vars: Iterable[str], name: str) -> "MultiPoly":
        vars = tuple(vars)
        exps = [0] * len(vars)
        exps[vars.index(name)] = 1
        return cls(vars, {tuple(exps): 1})

    def with_vars(self, vars: Iterable[str]) -> "MultiPoly":
        """Embed into a larger (or reordered) variable universe."""
        vars = tuple(vars)
        missing = [v for v in self.vars if v not in vars]
        if missing:
            used = {self.vars[i] for mono in self.terms for i, e in enumerate(mono) if e}
            if used & set(missing):
                raise ValueError(f"variables {missing} are used and absent from {vars}")
        index = {v: i for i, v in enumerate(vars)}
        terms = {}
        for mono, c in self.terms.items():
            exps = [0] * len(vars)
            for v, e in zip(self.vars, mono):
                if e:
                    exps[index[v]] = e
            terms[tuple(exps)] = c
        return MultiPoly._raw(vars, terms)

    # queries ----------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> float:
        """Total degree; ``-inf`` for the zero polynomial."""
        if not self.terms:
            return -math.inf
        return max(sum(m) for m in self.terms)

    def coeff(self, mono: Monomial) -> Fraction:
        return self.terms.get(tuple(mono), Fraction(0))

    def _check(self, other: "MultiPoly") -> None:
        if self.vars != other.vars:
            raise ValueError(f"variable universe mismatch: {self.vars} vs {other.vars}")

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(self.vars, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            s = terms.get(mono, 0) + c
            if s:
                terms[mono] = s
            else:
                terms.pop(mono, None)
        return MultiPoly._raw(self.vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(self.vars, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Number) -> "MultiPoly":
        c = _frac(c)
        if not c:
            return MultiPoly._raw(self.vars, {})
        return MultiPoly._raw(self.vars, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check(other)
        terms: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                terms[m] = terms.get(m, 0) + c1 * c2
        return MultiPoly._raw(self.vars, {m: c for m, c in terms.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power")
        result = MultiPoly.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def add_scaled(self, other: "MultiPoly", c: Fraction) -> "MultiPoly":
        """Return self + c*other without building the intermediate product."""
        self._check(other)
        if not c:
            return self
        terms = dict(self.terms)
        for mono, v in other.terms.items():
            s = terms.get(mono, 0) + c * v
            if s:
                terms[mono] = s
            else:
                terms.pop(mono, None)
        return MultiPoly._raw(self.vars, terms)

    # comparison -------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(self.vars, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # text -------------------------------------------------------------------
    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in ascending graded-lex order over the canonical variable order."""
        order = sorted(range(len(self.vars)), key=lambda i: var_sort_key(self.vars[i]))

        def key(item):
            mono = item[0]
            return (sum(mono), tuple(-mono[i] for i in order))

        return sorted(self.terms.items(), key=key)

    def to_text(self) -> str:
        order = sorted(range(len(self.vars)), key=lambda i: var_sort_key(self.vars[i]))
        items = []
        for mono, c in self.sorted_terms():
            parts = []
            for i in order:
                e = mono[i]
                if e == 1:
                    parts.append(self.vars[i])
                elif e > 1:
                    parts.append(f"{self.vars[i]}^{e}")
            items.append(("*".join(parts), c))
        return _format_terms(items)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPoly({self.vars!r}, {self.to_text()!r})"


class UniPoly:
    """Univariate polynomial over Q in a named variable."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Mapping[int, Number] | Iterable[Number] | None = None, var: str = "y"):
        if coeffs is None:
            items: Iterable = ()
        elif isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            items = enumerate(coeffs)
        clean: dict[int, Fraction] = {}
        for e, c in items:
            if e < 0:
                raise ValueError("negative exponent")
            c = _frac(c)
            if c:
                clean[int(e)] = clean.get(int(e), 0) + c
        self.coeffs: dict[int, Fraction] = {e: c for e, c in clean.items() if c}
        self.var = var

    @classmethod
    def monomial(cls, e: int, c: Number = 1, var: str = "y") -> "UniPoly":
        return cls({e: c}, var)

    @property
    def degree(self) -> float:
        """Largest exponent; ``-inf`` for the zero polynomial."""
        return max(self.coeffs) if self.coeffs else -math.inf

    @property
    def low_degree(self) -> float:
        """Smallest exponent with nonzero coefficient; ``inf`` for zero."""
        return min(self.coeffs) if self.coeffs else math.inf

    def coeff(self, e: int) -> Fraction:
        return self.coeffs.get(e, Fraction(0))

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs.values())

    def int_coeffs(self) -> dict[int, int]:
        if not self.is_integral():
            raise ValueError(f"non-integral coefficient in {self.to_text()}")
        return {e: int(c) for e, c in self.coeffs.items()}

    def dense(self, length: int | None = None) -> list[Fraction]:
        n = (int(self.degree) + 1 if self.coeffs else 0) if length is None else length
        return [self.coeff(e) for e in range(n)]

    def __call__(self, value: Number) -> Number:
        acc: Number = 0
        for e in range(int(self.degree), -1, -1) if self.coeffs else ():
            acc = acc * value + self.coeff(e)
        return acc

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly({0: other}, self.var)
        if not isinstance(other, UniPoly):
            return NotImplemented
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return UniPoly(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly({e: -c for e, c in self.coeffs.items()}, self.var)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly({0: other}, self.var)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return UniPoly({e: c * other for e, c in self.coeffs.items()}, self.var)
        if not isinstance(other, UniPoly):
            return NotImplemented
        out: dict[int, Fraction] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return UniPoly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "UniPoly":
        result = UniPoly({0: 1}, self.var)
        for _ in range(n):
            result = result * self
        return result

    def scale_arg(self, c: Number) -> "UniPoly":
        """Return the polynomial y -> p(c*y)."""
        c = _frac(c)
        return UniPoly({e: v * c**e for e, v in self.coeffs.items()}, self.var)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly({0: other}, self.var)
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def to_multi(self, vars: Iterable[str] | None = None) -> MultiPoly:
        vars = tuple(vars) if vars is not None else (self.var,)
        k = vars.index(self.var)
        terms = {}
        for e, c in self.coeffs.items():
            mono = [0] * len(vars)
            mono[k] = e
            terms[tuple(mono)] = c
        return MultiPoly._raw(vars, terms)

    def to_text(self) -> str:
        items = []
        for e in sorted(self.coeffs):
            mono = "" if e == 0 else (self.var if e == 1 else f"{self.var}^{e}")
            items.append((mono, self.coeffs[e]))
        return _format_terms(items)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"UniPoly({self.to_text()!r}, var={self.var!r})"


def add(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    return a + b


def mul(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    return a * b


def powers(s: MultiPoly, upto: int) -> list[MultiPoly]:
    """[s^0, s^1, ..., s^upto]."""
    out = [MultiPoly.const(s.vars, 1)]
    for _ in range(upto):
        out.append(out[-1] * s)
    return out


def compose(q: UniPoly, s: MultiPoly, cache: list[MultiPoly] | None = None) -> MultiPoly:
    """Fully expanded q(s).

    ``cache`` may hold precomputed powers of ``s`` (see :func:`powers`); it is
    extended in place when too short.
    """
    if q.is_zero():
        return MultiPoly.zero(s.vars)
    deg = int(q.degree)
    if cache is None:
        acc = MultiPoly.zero(s.vars)
        for e in range(deg, -1, -1):
            acc = acc * s + q.coeff(e)
        return acc
    if not cache:
        cache.append(MultiPoly.const(s.vars, 1))
    while len(cache) <= deg:
        cache.append(cache[-1] * s)
    acc = MultiPoly.zero(s.vars)
    for e, c in q.coeffs.items():
        acc = acc.add_scaled(cache[e], c)
    return acc


def eval_mod(p: UniPoly, y: int, N: int) -> int:
    """p(y) mod N in [0, N) for a polynomial with integer coefficients."""
    if N < 2:
        raise ValueError("modulus must be at least 2")
    coeffs = p.int_coeffs()
    acc = 0
    for e in range(max(coeffs, default=0), -1, -1):
        acc = (acc * y + coeffs.get(e, 0)) % N
    return acc


def values_mod(p: UniPoly, N: int, ys: Iterable[int] | None = None) -> list[int]:
    """[p(y) mod N for y in ys] (default ys = 0..N-1)."""
    coeffs = p.int_coeffs()
    top = max(coeffs, default=0)
    dense = [coeffs.get(e, 0) % N for e in range(top + 1)]
    out = []
    for y in range(N) if ys is None else ys:
        acc = 0
        for c in reversed(dense):
            acc = (acc * y + c) % N
        out.append(acc)
    return out


# parsing --------------------------------------------------------------------

_FACTOR = re.compile(r"(?P<num>\d+(?:/\d+)?)?(?P<var>[A-Za-z][A-Za-z_]*\d*)?(?:\^(?P<exp>\d+))?")


def _parse_terms(text: str) -> list[tuple[Fraction, dict[str, int]]]:
    s = re.sub(r"\s+", "", text).replace("**", "^")
    if not s:
        raise PolyParseError("empty polynomial")
    if s[0] not in "+-":
        s = "+" + s
    pieces = re.findall(r"([+-])([^+-]*)", s)
    if "".join(sign + body for sign, body in pieces) != s:
        raise PolyParseError(f"cannot parse {text!r}")
    terms = []
    for sign, body in pieces:
        if not body:
            raise PolyParseError(f"dangling sign in {text!r}")
        coeff = Fraction(-1 if sign == "-" else 1)
        exps: dict[str, int] = {}
        for factor in body.split("*"):
            m = _FACTOR.fullmatch(factor)
            if not factor or m is None or (m.group("num") is None and m.group("var") is None):
                raise PolyParseError(f"bad factor {factor!r} in {text!r}")
            num, var, exp = m.group("num"), m.group("var"), m.group("exp")
            if num is not None:
                value = Fraction(num)
                if value.denominator == 0:
                    raise PolyParseError(f"zero denominator in {text!r}")
                coeff *= value ** int(exp) if (exp is not None and var is None) else value
            if var is not None:
                exps[var] = exps.get(var, 0) + (int(exp) if exp is not None else 1)
        terms.append((coeff, exps))
    return terms


def parse_multi(text: str, vars: Iterable[str] | None = None) -> MultiPoly:
    """Parse canonical text (``**`` accepted for ``^``) into a MultiPoly."""
    try:
        terms = _parse_terms(text)
    except ZeroDivisionError:
        raise PolyParseError(f"zero denominator in {text!r}") from None
    used = {v for _, exps in terms for v in exps}
    if vars is None:
        vars = canonical_vars(used)
    else:
        vars = tuple(vars)
        extra = used - set(vars)
        if extra:
            raise PolyParseError(f"unexpected variables {sorted(extra)} in {text!r}")
    index = {v: i for i, v in enumerate(vars)}
    acc: dict[Monomial, Fraction] = {}
    for c, exps in terms:
        mono = [0] * len(vars)
        for v, e in exps.items():
            mono[index[v]] += e
        key = tuple(mono)
        acc[key] = acc.get(key, 0) + c
    return MultiPoly(vars, acc)


def parse_uni(text: str, var: str | None = None) -> UniPoly:
    """Parse a univariate polynomial; the variable defaults to the one used (or ``y``)."""
    mp = parse_multi(text)
    used = [v for v in mp.vars if any(m[mp.vars.index(v)] for m in mp.terms)]
    if len(used) > 1:
        raise PolyParseError(f"expected a univariate polynomial, got variables {used}")
    name = var or (used[0] if used else "y")
    if used and used[0] != name:
        raise PolyParseError(f"expected variable {name!r}, got {used[0]!r}")
    k = mp.vars.index(used[0]) if used else None
    return UniPoly({(m[k] if k is not None else 0): c for m, c in mp.terms.items()}, name)
