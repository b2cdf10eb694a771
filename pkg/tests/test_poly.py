from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from patkit.poly import (MultiPoly, PolyParseError, UniPoly, add, compose, eval_mod, mul,
                         parse_multi, parse_uni, values_mod)

XY = ("x", "y")


def P(text, vars=XY):
    return parse_multi(text, vars)


def to_sympy(p: MultiPoly):
    syms = sympy.symbols(p.vars)
    expr = sympy.Integer(0)
    for mono, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for s, e in zip(syms, mono):
            term *= s ** e
        expr += term
    return sympy.expand(expr)


coeff = st.fractions(min_value=-5, max_value=5, max_denominator=4)
monomial = st.tuples(st.integers(0, 3), st.integers(0, 3))
multi = st.dictionaries(monomial, coeff, max_size=4).map(lambda d: MultiPoly(XY, d))
uni = st.lists(st.integers(-4, 4), max_size=4).map(lambda cs: UniPoly(cs, "z"))
int_uni = st.lists(st.integers(-20, 20), max_size=5).map(lambda cs: UniPoly(cs))


class TestArithmetic:
    def test_cancellation(self):
        assert add(P("x + y"), P("-x")) == P("y")

    def test_zero_identity(self):
        p = P("3*x^2*y - 1/2*y")
        assert add(MultiPoly.zero(XY), p) == p

    def test_doubling(self):
        assert add(P("x^2"), P("x^2")) == P("2*x^2")

    def test_difference_of_squares(self):
        assert mul(P("x + y"), P("x - y")) == P("x^2 - y^2")

    def test_one_is_identity(self):
        p = P("x^3 - 2/3*x*y")
        assert mul(p, MultiPoly.const(XY, 1)) == p

    def test_square_matches_sympy(self):
        got = mul(P("x + 2*y"), P("x + 2*y"))
        assert got == P("x^2 + 4*x*y + 4*y^2")
        x, y = sympy.symbols("x y")
        assert to_sympy(got) == sympy.expand((x + 2 * y) ** 2)

    def test_no_zero_terms_stored(self):
        p = P("x + y") - P("x")
        assert all(c != 0 for c in p.terms.values())
        assert (P("x") - P("x")).is_zero()
        assert (P("x") - P("x")).degree == float("-inf")

    def test_universe_mismatch(self):
        with pytest.raises(ValueError):
            add(P("x"), parse_multi("x", ("x", "z")))
        with pytest.raises(ValueError):
            mul(P("x"), parse_multi("x", ("x", "z")))

    @given(multi, multi, multi)
    def test_ring_laws(self, a, b, c):
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c

    @given(multi, multi)
    def test_product_matches_sympy(self, a, b):
        assert to_sympy(a * b) == sympy.expand(to_sympy(a) * to_sympy(b))


class TestCompose:
    def test_square_into_shift(self):
        s = P("x + y^2")
        assert compose(parse_uni("z^2", "z"), s) == P("x^2 + 2*x*y^2 + y^4")

    def test_identity(self):
        s = P("x^2 - 7/3*x*y + y")
        assert compose(parse_uni("z", "z"), s) == s

    def test_substitution(self):
        assert compose(parse_uni("2*z + z^2", "z"), P("x")) == P("2*x + x^2")

    @settings(max_examples=60)
    @given(uni, uni, multi)
    def test_multiplicative(self, q1, q2, s):
        assert compose(q1 * q2, s) == compose(q1, s) * compose(q2, s)

    @settings(max_examples=60)
    @given(uni, multi)
    def test_matches_sympy(self, q, s):
        z = sympy.Symbol("z")
        qs = sum(sympy.Rational(c.numerator, c.denominator) * z ** e for e, c in q.coeffs.items())
        want = sympy.expand(sympy.sympify(qs).subs(z, to_sympy(s)))
        assert to_sympy(compose(q, s)) == want


class TestEvalMod:
    def test_square(self):
        assert eval_mod(parse_uni("y^2"), 3, 5) == 4

    def test_zero_constant_term(self):
        assert eval_mod(parse_uni("y^2 - y^4"), 0, 7) == 0

    def test_cubic(self):
        assert eval_mod(parse_uni("y^3 + 2*y"), 4, 11) == 6

    def test_negative_values_reduced(self):
        assert eval_mod(parse_uni("-y"), 1, 7) == 6

    def test_rejects_rational(self):
        with pytest.raises(ValueError):
            eval_mod(parse_uni("1/2*y"), 3, 5)

    def test_rejects_small_modulus(self):
        with pytest.raises(ValueError):
            eval_mod(parse_uni("y"), 3, 1)

    @given(int_uni, int_uni, st.integers(-50, 50), st.integers(2, 60))
    def test_homomorphism(self, p1, p2, y, N):
        assert eval_mod(p1 + p2, y, N) == (eval_mod(p1, y, N) + eval_mod(p2, y, N)) % N
        assert eval_mod(p1 * p2, y, N) == (eval_mod(p1, y, N) * eval_mod(p2, y, N)) % N

    @given(int_uni, st.integers(2, 40))
    def test_values_mod_agrees(self, p, N):
        assert values_mod(p, N) == [eval_mod(p, y, N) for y in range(N)]
        assert values_mod(p, N) == [int(p(y)) % N for y in range(N)]


class TestText:
    def test_canonical_form(self):
        assert parse_uni("y^2 - y^4").to_text() == "y^2 - 1*y^4"

    def test_aliases_and_whitespace(self):
        assert parse_uni(" y ** 2  -  1 * y**4 ") == parse_uni("y^2 - y^4")

    def test_rational_coefficients(self):
        p = parse_uni("1/2*y - 3/4*y^3")
        assert p.coeff(1) == Fraction(1, 2) and p.coeff(3) == Fraction(-3, 4)

    def test_grlex_order(self):
        assert P("y^2 + x + 1 + x*y").to_text() == "1 + x + x*y + y^2"

    @given(multi)
    def test_round_trip(self, p):
        assert parse_multi(p.to_text(), XY) == p

    @pytest.mark.parametrize("bad", ["y^", "2**", "y + + y", "(y)", "y^-1"])
    def test_malformed(self, bad):
        with pytest.raises(PolyParseError):
            parse_uni(bad)
