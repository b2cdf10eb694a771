import itertools

import pytest

from patkit.extremal import configurations, greedy_free, is_free, max_free_exact
from patkit.patterns import PatternSpec


def pat(*polys):
    return PatternSpec.from_strings(polys)


def brute_r(p, N):
    """Largest free subset by running through all 2^N subsets, largest first."""
    configs = set()
    for x, y in itertools.product(range(N), repeat=2):
        pts = [(x + int(P(y))) % N for P in p.polys]
        if len(set(pts)) == len(pts):
            configs.add(frozenset(pts))
    for size in range(N, -1, -1):
        for A in itertools.combinations(range(N), size):
            S = set(A)
            if not any(c <= S for c in configs):
                return size
    return 0


PATTERNS = [("0", "y"), ("0", "y", "2*y"), ("0", "y^2"), ("0", "y", "y^2"), ("0", "y^2", "2*y^2"),
            ("0", "y^3")]


class TestIsFree:
    def test_empty(self):
        assert is_free(pat("0", "y"), set(), 7)

    def test_two_points(self):
        assert not is_free(pat("0", "y"), {2, 5}, 7)

    def test_three_ap_pair(self):
        assert is_free(pat("0", "y", "2*y"), {0, 1}, 5)
        assert not is_free(pat("0", "y", "2*y"), {0, 1, 2}, 5)

    def test_rejects_composite(self):
        with pytest.raises(ValueError):
            is_free(pat("0", "y"), {0}, 6)

    def test_configurations_have_t_points(self):
        assert all(bin(m).count("1") == 3 for m in configurations(pat("0", "y", "y^2"), 11))


class TestExact:
    def test_two_point_pattern(self):
        res = max_free_exact(pat("0", "y"), 7)
        assert res.r == 1 and res.exact

    @pytest.mark.parametrize("N,r", [(5, 2), (7, 3), (11, 4), (13, 4), (17, 5)])
    def test_three_ap_values(self, N, r):
        assert max_free_exact(pat("0", "y", "2*y"), N).r == r

    @pytest.mark.parametrize("N,r", [(5, 2), (7, 1), (11, 1), (13, 3), (17, 3)])
    def test_square_difference_values(self, N, r):
        assert max_free_exact(pat("0", "y^2"), N).r == r

    @pytest.mark.parametrize("polys", PATTERNS)
    @pytest.mark.parametrize("N", [3, 5, 7, 11, 13])
    def test_matches_subset_enumeration(self, polys, N):
        p = pat(*polys)
        res = max_free_exact(p, N)
        assert res.exact
        assert res.r == brute_r(p, N)
        assert is_free(p, res.witness, N) and len(res.witness) == res.r

    def test_budget_exhaustion(self):
        res = max_free_exact(pat("0", "y", "2*y"), 17, budget=10)
        assert not res.exact
        assert is_free(pat("0", "y", "2*y"), res.witness, 17)

    @pytest.mark.parametrize("base,extra", [(("0", "y"), "2*y"), (("0", "y^2"), "y"),
                                             (("0", "y", "2*y"), "3*y")])
    @pytest.mark.parametrize("N", [7, 11, 13])
    def test_extending_pattern_never_lowers_r(self, base, extra, N):
        assert max_free_exact(pat(*base, extra), N).r >= max_free_exact(pat(*base), N).r


class TestGreedy:
    @pytest.mark.parametrize("N", [5, 7, 13])
    def test_two_point_pattern(self, N):
        assert greedy_free(pat("0", "y"), N, seed=1).r == 1

    def test_seed_determinism(self):
        p = pat("0", "y", "2*y")
        assert greedy_free(p, 17, 4) == greedy_free(p, 17, 4)

    @pytest.mark.parametrize("seed", range(5))
    def test_below_exact(self, seed):
        p = pat("0", "y", "2*y")
        g = greedy_free(p, 17, seed)
        assert not g.exact
        assert is_free(p, g.witness, 17)
        assert g.r <= max_free_exact(p, 17).r
