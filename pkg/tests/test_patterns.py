import json
import time
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from conftest import CUBIC_POLYS, P1_POLYS, P2_POLYS
from patkit import linalg
from patkit.patterns import (KernelTuple, PatternError, PatternSpec, classification_json, classify,
                             is_homogeneous, is_transferable, kernel_system, linearize, same_span)
from patkit.poly import MultiPoly, UniPoly, parse_multi, parse_uni


def pat(*polys, name=None):
    return PatternSpec.from_strings(polys, name)


def sympy_kernel_dim(polys, k):
    """Independent oracle: nullity of the coefficient map, built with sympy."""
    x, y = sympy.symbols("x y")
    Ps = [sympy.sympify(p.replace("^", "**")) for p in polys]
    cols = []
    for ell in range(k + 1):
        for P in Ps:
            cols.append(sympy.Poly(sympy.expand((x + P) ** ell), x, y))
    monos = sorted({m for c in cols for m in c.monoms()})
    M = sympy.Matrix([[c.coeff_monomial(m) for c in cols] for m in monos])
    return M.cols - M.rank()


def kernel_vec(qs, t, k):
    polys = [parse_uni(q, "z") for q in qs]
    return [polys[i].coeff(l) for l in range(k + 1) for i in range(t)]


class TestPatternSpec:
    def test_needs_two(self):
        with pytest.raises(PatternError):
            pat("y")

    def test_zero_constant_term(self):
        with pytest.raises(PatternError):
            pat("0", "y + 1")

    def test_distinct(self):
        with pytest.raises(PatternError):
            pat("y", "y")

    def test_integer_coefficients(self):
        with pytest.raises(PatternError):
            pat("0", "1/2*y")

    def test_file_format(self, tmp_path):
        f = tmp_path / "p.pat"
        f.write_text("# a comment\nname: three-ap\n0\ny   # first difference\n2*y\n")
        p = PatternSpec.from_file(f)
        assert p.name == "three-ap" and p.t == 3 and p.d == 1
        assert PatternSpec.parse(p.to_text()) == p


class TestLinearize:
    def test_linear(self):
        lp = linearize(pat("y", "2*y"))
        assert lp.d == 1 and lp.L == ((1,), (2,))

    def test_cubic_running_example(self):
        lp = linearize(pat("y", "2*y", "y^3", "2*y^3"))
        assert lp.d == 3
        assert lp.L == ((1, 0, 0), (2, 0, 0), (0, 0, 1), (0, 0, 2))

    def test_quartic(self):
        lp = linearize(pat("y^2", "y^2 - y^4"))
        assert lp.d == 4 and lp.L == ((0, 1, 0, 0), (0, 1, 0, -1))

    @given(st.lists(st.lists(st.integers(-5, 5), min_size=1, max_size=4), min_size=1, max_size=4))
    def test_substitution_recovers_polynomials(self, rows):
        polys = {UniPoly([0] + r) for r in rows} | {UniPoly([0])}
        if len(polys) < 2:
            return
        p = PatternSpec(tuple(polys))
        lp = linearize(p)
        for i, P in enumerate(p.polys):
            # y_j -> y^j turns the linear form back into P_i
            sub = MultiPoly.zero(("x", "y"))
            for mono, c in lp.form(i).terms.items():
                sub = sub + UniPoly({mono.index(1): c}).to_multi(("x", "y"))
            assert sub == P.to_multi(("x", "y"))


class TestKernelSystem:
    def test_p1_identity_in_kernel(self, p1):
        kb = kernel_system(p1, 2)
        v = kernel_vec(["2*z + z^2", "-2*z^2", "z^2", "-2*z"], 4, 2)
        assert linalg.in_span(v, kb.vectors(), kb.ncols)

    def test_two_point_pattern(self):
        kb = kernel_system(pat("0", "y"), 1)
        assert kb.dim == 1
        assert same_span(kb.vectors(), [kernel_vec(["1", "-1"], 2, 1)], kb.ncols)

    def test_three_ap(self):
        kb = kernel_system(pat("0", "y", "2*y"), 2)
        assert kb.dim == 3
        assert kb.graded_dims == (2, 1, 0)
        assert linalg.in_span(kernel_vec(["z", "-2*z", "z"], 3, 2), kb.vectors(), kb.ncols)

    def test_constants_reported(self, p2):
        kb = kernel_system(p2, 3)
        assert kb.graded_dims[0] == p2.t - 1

    def test_frozen_dimensions(self, p1, p2):
        # values confirmed by sympy_kernel_dim in test_matches_sympy_oracle
        kb1 = kernel_system(p1, 2)
        assert (kb1.dim, kb1.graded_dims) == (5, (3, 1, 0))
        kb2 = kernel_system(p2, 12)
        assert kb2.dim == 8
        assert kb2.graded_dims == (5, 2, 1) + (0,) * 10

    @pytest.mark.parametrize("polys,k", [(P1_POLYS, 2), (P1_POLYS, 3), (P2_POLYS, 3),
                                         (CUBIC_POLYS, 3), (("0", "y^2"), 4), (("0", "y", "y^2"), 4)])
    def test_matches_sympy_oracle(self, polys, k):
        assert kernel_system(pat(*polys), k).dim == sympy_kernel_dim(polys, k)

    def test_tuples_verified_on_construction(self, p1):
        with pytest.raises(ValueError):
            KernelTuple(p1, tuple(parse_uni(q, "z") for q in ["z", "0", "0", "0"]))

    def test_basis_elements_vanish_symbolically(self, p2):
        x, y, z = sympy.symbols("x y z")
        Ps = [sympy.sympify(q.replace("^", "**")) for q in P2_POLYS]
        for b in kernel_system(p2, 4).basis:
            total = 0
            for Q, P in zip(b.qs, Ps):
                q = sympy.sympify(Q.to_text().replace("^", "**"))
                total += q.subs(z, x + P)
            assert sympy.expand(total) == 0

    @pytest.mark.parametrize("polys", [P1_POLYS, P2_POLYS, ("0", "y^2", "y^3")])
    def test_monotone_in_degree(self, polys):
        p = pat(*polys)
        for k in (2, 3, 4):
            big, small = kernel_system(p, k), kernel_system(p, k - 1)
            t = p.t
            # kernel(k-1), padded, lies in kernel(k)
            for v in small.vectors():
                assert linalg.in_span(v + [Fraction(0)] * t, big.vectors(), big.ncols)
            # and the degree <= k-1 part of kernel(k) is no larger
            top = [v[k * t:] for v in big.vectors()]
            assert big.dim - linalg.rank(top, t) == small.dim

    @settings(max_examples=15, deadline=None)
    @given(st.permutations(range(6)))
    def test_permutation_equivariance(self, perm):
        p = PatternSpec.from_strings(P2_POLYS)
        q = p.permuted(perm)
        k, t = 3, p.t
        kp, kq = kernel_system(p, k), kernel_system(q, k)
        moved = [[v[l * t + perm[i]] for l in range(k + 1) for i in range(t)] for v in kp.vectors()]
        assert same_span(moved, kq.vectors(), kq.ncols)


class TestClassification:
    def test_p1_not_homogeneous(self, p1):
        c = classify(p1)
        assert not c.homogeneous and not c.transferable
        assert c.degree_bound == 8
        assert [q.to_text() for q in c.homogeneity_witness.qs] == ["2*z + z^2", "-2*z^2", "z^2", "-2*z"]

    def test_p2_homogeneous_not_transferable(self, p2):
        c = classify(p2, 12)
        assert c.homogeneous and not c.transferable
        w = kernel_vec([q.to_text() for q in c.witness.qs], 6, 2)
        target = kernel_vec(["-3*z^2", "z^2", "z^2", "z^2", "z^2", "-z^2"], 6, 2)
        ratio = Fraction(w[12], target[12])
        assert [a * ratio for a in target] == w
        res = c.witness_residual
        assert res == parse_multi("y2^2 - y1*y3", res.vars).scale(2 * ratio)
        assert res.to_text() == "2/3*y1*y3 - 2/3*y2^2"

    def test_three_ap_homogeneous(self):
        assert is_homogeneous(kernel_system(pat("0", "y", "2*y"), 2))

    @pytest.mark.parametrize("coeffs", [(0, 1, 2), (1, 3, -2, 5), (0, 1, 2, 3)])
    def test_linear_patterns_transferable(self, coeffs):
        p = pat(*[f"{a}*y" for a in coeffs])
        assert classify(p).transferable

    def test_cubic_running_example_transferable(self, cubic):
        c = classify(cubic, 6)
        assert c.transferable and c.homogeneous and c.witness is None

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=1, max_size=3, unique=True))
    def test_transferable_implies_homogeneous(self, rows):
        polys = {UniPoly([0])} | {UniPoly([0, a, b]) for a, b in rows}
        if len(polys) < 2:
            return
        p = PatternSpec(tuple(polys))
        c = is_transferable(p, kernel_system(p, 4))
        assert c.homogeneous or not c.transferable

    def test_json(self, p1):
        out = json.loads(classification_json(p1, classify(p1, 2)))
        assert {"name", "t", "d", "degree_bound", "graded_dims", "homogeneous",
                "transferable", "witness"} <= set(out)
        assert out["scope"] == "up to degree 2"

    def test_p2_runtime(self, p2):
        start = time.perf_counter()
        classify(p2, 12)
        assert time.perf_counter() - start < 5
