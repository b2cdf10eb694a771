"""Polynomial pattern transference toolkit.

Exact kernel systems and transferability of polynomial patterns, counting
operators over Z/NZ with their linearised analogues, Gowers and
Gowers--Peluse norms, W-trick machinery and extremal pattern-free sets.
"""

from patkit.poly import MultiPoly, UniPoly, compose, eval_mod, parse_multi, parse_uni
from patkit.patterns import (
    Classification,
    KernelBasis,
    KernelTuple,
    LinearizedPattern,
    PatternSpec,
    classify,
    is_homogeneous,
    is_transferable,
    kernel_system,
    linearize,
)

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "KernelBasis",
    "KernelTuple",
    "LinearizedPattern",
    "MultiPoly",
    "PatternSpec",
    "UniPoly",
    "classify",
    "compose",
    "eval_mod",
    "is_homogeneous",
    "is_transferable",
    "kernel_system",
    "linearize",
    "parse_multi",
    "parse_uni",
]
