"""Largest pattern-free subsets of Z/NZ for tiny N.

A set is free when it contains no nontrivial configuration, i.e. no
``{x + P_i(y)}`` with ``y`` such that the residues ``P_i(y) mod N`` are
pairwise distinct.  Configurations are precomputed as bitmasks; the exact
search is a depth-first branch and bound over residues in increasing order
with 0 pinned into the set (translation invariance).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from patkit.counting import count_configs, trivial_parameters, _poly_table
from patkit.numtheory import is_prime
from patkit.patterns import PatternSpec

DEFAULT_NODE_BUDGET = 10**7


@dataclass(frozen=True)
class SearchResult:
    N: int
    pattern: str | None
    r: int
    witness: tuple[int, ...]
    nodes_explored: int
    exact: bool

    def to_json(self) -> dict:
        return {"N": self.N, "pattern": self.pattern, "r": self.r,
                "witness": list(self.witness), "nodes_explored": self.nodes_explored,
                "exact": self.exact}


def _require_prime(N: int) -> None:
    if not is_prime(N):
        raise ValueError(f"N = {N} is not prime")


def configurations(p: PatternSpec, N: int) -> list[int]:
    """Distinct bitmasks of the nontrivial configurations in Z/NZ."""
    table = _poly_table(p, N)
    trivial = trivial_parameters(p, N)
    masks = set()
    for y in np.flatnonzero(~trivial):
        offs = [int(v) for v in table[:, y]]
        for x in range(N):
            m = 0
            for o in offs:
                m |= 1 << ((x + o) % N)
            masks.add(m)
    return sorted(masks)


def _by_top_element(masks: Iterable[int], N: int) -> list[list[int]]:
    """Masks grouped by their largest element, so insertion in increasing order
    only has to test the masks completed by the new element."""
    groups: list[list[int]] = [[] for _ in range(N)]
    for m in masks:
        groups[m.bit_length() - 1].append(m)
    return groups


def _by_element(masks: Iterable[int], N: int) -> list[list[int]]:
    groups: list[list[int]] = [[] for _ in range(N)]
    for m in masks:
        for v in range(N):
            if m >> v & 1:
                groups[v].append(m)
    return groups


def is_free(p: PatternSpec, A: Iterable[int], N: int) -> bool:
    _require_prime(N)
    return count_configs(p, A, N).nontrivial == 0


def _mask_to_set(mask: int, N: int) -> tuple[int, ...]:
    return tuple(v for v in range(N) if mask >> v & 1)


def max_free_exact(p: PatternSpec, N: int, budget: int = DEFAULT_NODE_BUDGET) -> SearchResult:
    """Exact r_P(Z/NZ) by branch and bound; ``exact`` is False if the node budget ran out."""
    _require_prime(N)
    groups = _by_top_element(configurations(p, N), N)
    best_mask, best_size = 1, 1  # {0} is always free
    nodes = 0
    exhausted = False
    # explicit stack of (next residue, current mask, size)
    stack = [(1, 1, 1)]
    while stack:
        v, mask, size = stack.pop()
        nodes += 1
        if nodes > budget:
            exhausted = True
            break
        if size > best_size:
            best_mask, best_size = mask, size
        if v >= N or size + (N - v) <= best_size:
            continue
        # exclude v (explored second), include v (explored first)
        stack.append((v + 1, mask, size))
        new = mask | 1 << v
        if all(m & new != m for m in groups[v]):
            stack.append((v + 1, new, size + 1))
    witness = _mask_to_set(best_mask, N)
    if not is_free(p, witness, N):
        raise AssertionError("search returned a set containing a configuration")
    return SearchResult(N, p.name, best_size, witness, nodes, not exhausted)


def greedy_free(p: PatternSpec, N: int, seed: int = 0) -> SearchResult:
    """Insert residues in a seeded random order whenever the set stays free."""
    _require_prime(N)
    groups = _by_element(configurations(p, N), N)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, N])))
    mask = 0
    nodes = 0
    for v in rng.permutation(N):
        v = int(v)
        nodes += 1
        new = mask | 1 << v
        if all(m & new != m for m in groups[v]):
            mask = new
    witness = _mask_to_set(mask, N)
    if not is_free(p, witness, N):
        raise AssertionError("greedy set contains a configuration")
    return SearchResult(N, p.name, len(witness), witness, nodes, False)

