"""Worked examples with published values, re-run as a self-check.

``reproduce_reference_examples`` evaluates every item and returns a list of
``ExampleOutcome``; the ``reproduce`` CLI command prints one line per item and
exits nonzero when anything fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from patkit.cyclic import smoothed_cutoff
from patkit.patterns import PatternSpec, classify, kernel_system, linearize, same_span
from patkit.poly import MultiPoly, UniPoly, compose, parse_multi, parse_uni
from patkit.wtrick import WTrickContext, compute_W, nu_mean, rescale

P1 = ("0", "y", "2*y", "y^2")
P2 = ("0", "-y^2", "y^2", "y", "y^3", "y + y^3")


@dataclass(frozen=True)
class ExampleOutcome:
    name: str
    passed: bool
    detail: str

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _p1_identity() -> tuple[bool, str]:
    p = PatternSpec.from_strings(P1, "P1")
    z = ("2*z + z^2", "-2*z^2", "z^2", "-2*z")
    qs = [parse_uni(q, "z") for q in z]
    kb = kernel_system(p, 2)
    vec = []
    for l in range(3):
        vec += [q.coeff(l) for q in qs]
    inside = same_span(kb.vectors(), kb.vectors() + [vec], kb.ncols)
    xs = ("x", "y")
    lhs = MultiPoly.zero(xs)
    for q, poly in zip(qs, p.polys):
        lhs = lhs + compose(q, MultiPoly.var(xs, "x") + poly.to_multi(xs))
    return inside and lhs.is_zero(), f"tuple in kernel: {inside}; expansion: {lhs.to_text() or '0'}"


def _p1_not_homogeneous() -> tuple[bool, str]:
    c = classify(PatternSpec.from_strings(P1, "P1"))
    w = c.homogeneity_witness
    return (not c.homogeneous and w is not None), \
        f"homogeneous={c.homogeneous}; witness={w.to_json() if w else None}"


def _p2_classification() -> tuple[bool, str]:
    c = classify(PatternSpec.from_strings(P2, "P2"), 12)
    ok = c.homogeneous and not c.transferable and c.witness is not None
    res = c.witness_residual
    target = parse_multi("y2^2 - y1*y3", res.vars) if res is not None else None
    ratio_ok = False
    if ok and target is not None:
        coeff = res.coeff(next(iter(target.terms)))
        ratio_ok = coeff != 0 and res == target.scale(coeff)
    return ok and ratio_ok, (f"homogeneous={c.homogeneous}, transferable={c.transferable}, "
                             f"residual={res.to_text() if res is not None else None}")


def _p2_witness_direction() -> tuple[bool, str]:
    p = PatternSpec.from_strings(P2, "P2")
    kb = kernel_system(p, 2)
    coeffs = (-3, 1, 1, 1, 1, -1)
    vec = [Fraction(0)] * (2 * p.t) + [Fraction(c) for c in coeffs]
    inside = same_span(kb.vectors(), kb.vectors() + [vec], kb.ncols)
    return inside, f"(-3z^2, z^2, z^2, z^2, z^2, -z^2) in kernel: {inside}"


def _linearization() -> tuple[bool, str]:
    lp = linearize(PatternSpec.from_strings(("y", "2*y", "y^3", "2*y^3")))
    want = ((1, 0, 0), (2, 0, 0), (0, 0, 1), (0, 0, 2))
    return lp.L == want and lp.d == 3, f"L={lp.L}"


def _lcm_divides_W() -> tuple[bool, str]:
    bad = [(d, w) for w in (3, 5, 10) for d in (1, 2, 3, 4)
           if compute_W(d, w) % math.lcm(*range(1, w + 1))]
    return not bad, "all divisible" if not bad else f"failures: {bad}"


def _rescaled_difference() -> tuple[bool, str]:
    P = parse_uni("y^2 - y^4")
    out = []
    for w in (2, 3, 5):
        ctx = WTrickContext.build(P, w)
        want = UniPoly({2: 1, 4: -ctx.W ** 2})
        out.append(ctx.P_W == want == rescale(P, ctx.W))
    return all(out), f"P_W = y^2 - W^2 y^4 for w in (2, 3, 5): {out}"


def _cutoff_values() -> tuple[bool, str]:
    G = smoothed_cutoff(Fraction(1, 10), 100)
    g50, g_11 = G(50), G(-11)
    return g50 == 1 and g_11 == 0, f"G(50)={g50}, G(-11)={g_11}"


def _nu_mean_bounded() -> tuple[bool, str]:
    ctx = WTrickContext.build(parse_uni("y^2 - y^4"), 2)
    means = {N: nu_mean(ctx, N) for N in (10**6, 10**10, 10**14)}
    ok = all(0 < m <= 2 for m in means.values())
    return ok, "; ".join(f"N={N}: {m:.6f}" for N, m in means.items())


EXAMPLES: tuple[tuple[str, Callable[[], tuple[bool, str]]], ...] = (
    ("linearize (y, 2y, y^3, 2y^3)", _linearization),
    ("kernel of (0, y, 2y, y^2) contains (2z+z^2, -2z^2, z^2, -2z)", _p1_identity),
    ("(0, y, 2y, y^2) is not homogeneous", _p1_not_homogeneous),
    ("(0, -y^2, y^2, y, y^3, y+y^3) kernel relation (-3, 1, 1, 1, 1, -1) z^2", _p2_witness_direction),
    ("(0, -y^2, y^2, y, y^3, y+y^3) homogeneous, not transferable", _p2_classification),
    ("lcm(1..w) divides W", _lcm_divides_W),
    ("P_W = y^2 - W^2 y^4 for P = y^2 - y^4", _rescaled_difference),
    ("smoothed cutoff G(50) = 1 and G(-11) = 0 (delta = 0.1, N = 100)", _cutoff_values),
    ("mean of nu lies in (0, 2]", _nu_mean_bounded),
)


def reproduce_reference_examples() -> list[ExampleOutcome]:
    out = []
    for name, fn in EXAMPLES:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure of that item, not of the run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(ExampleOutcome(name, bool(ok), detail))
    return out
