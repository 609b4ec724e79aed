import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mqcbound import oracle
from mqcbound.combinatorics import (
    binomial_exact,
    binomial_row,
    degeneracy,
    max_rank,
    max_rank_even,
    rank_report,
)


def product_binomial(n, k):
    """Multiply-out oracle: n!/(k!(n-k)!) as a falling product, no math.comb."""
    num = 1
    for i in range(n - k + 1, n + 1):
        num *= i
    den = 1
    for i in range(1, k + 1):
        den *= i
    return num // den


def matching_rank(N, q):
    """Maximum matching between basis states whose up-counts differ by q.

    Independent route to R^N_q: a partial permutation on the +-q support
    has rank twice the matching size, and generic operators reach it.
    """
    g = nx.Graph()
    ups = [bin(b).count("1") for b in range(1 << N)]
    left = [b for b in range(1 << N) if (ups[b] // q) % 2 == 0]
    g.add_nodes_from(range(1 << N))
    for a in range(1 << N):
        for b in range(1 << N):
            if ups[a] - ups[b] == q:
                g.add_edge(a, b)
    m = nx.bipartite.maximum_matching(g, top_nodes=left) if g.number_of_edges() else {}
    return len(m)  # dict holds both directions, so this is already 2 * |matching|


class TestBinomial:
    def test_small(self):
        assert binomial_exact(4, 2) == 6
        assert binomial_exact(4, -2) == 0
        assert binomial_exact(4, 5) == 0
        assert binomial_exact(0, 0) == 1

    def test_negative_n(self):
        with pytest.raises(ValueError):
            binomial_exact(-1, 0)

    def test_large_matches_product_oracle(self):
        exact = binomial_exact(10000, 5000)
        oracle_value = product_binomial(10000, 5000)
        assert len(str(exact)) == len(str(oracle_value))
        assert exact == oracle_value

    @given(st.integers(0, 300))
    def test_row_matches_comb(self, n):
        row = binomial_row(n)
        assert list(row) == [math.comb(n, k) for k in range(n + 1)]


class TestDegeneracy:
    def test_examples(self):
        assert degeneracy(4, 0) == 6
        assert degeneracy(4, 2) == 1
        assert degeneracy(3, 0.5) == 3
        assert degeneracy(3, Fraction(-3, 2)) == 1

    def test_non_integral(self):
        with pytest.raises(ValueError):
            degeneracy(4, 0.5)
        with pytest.raises(ValueError):
            degeneracy(3, 1)

    @given(st.integers(1, 60))
    def test_symmetric_and_complete(self, N):
        ns = [Fraction(2 * up - N, 2) for up in range(N + 1)]
        assert all(degeneracy(N, n) == degeneracy(N, -n) for n in ns)
        assert sum(degeneracy(N, n) for n in ns) == 2**N


class TestMaxRank:
    @pytest.mark.parametrize("N", range(1, 31))
    def test_anchors(self, N):
        assert max_rank(N, N) == 2
        assert max_rank(N, 1) == 2**N
        if N >= 2:
            assert max_rank(N, N - 1) == 4

    def test_n4_q2(self):
        # frozen from the dense zigzag rank and the chain enumeration
        assert oracle.numerical_rank(oracle.zigzag_max_rank_operator(4, 2)) == 12
        assert max_rank(4, 2) == 12
        assert max_rank_even(4, 2) == 12
        assert max_rank_even(4, 4) == 2

    def test_even_formula_agrees(self):
        for N in range(2, 13, 2):
            for q in range(2, N + 1, 2):
                assert max_rank(N, q) == max_rank_even(N, q), (N, q)
        assert max_rank_even(6, 2) == max_rank(6, 2)

    def test_even_formula_agrees_large(self):
        for N in (40, 100, 250):
            for q in range(2, N + 1, 6):
                assert max_rank(N, q) == max_rank_even(N, q), (N, q)

    def test_even_formula_rejects_odd(self):
        with pytest.raises(ValueError):
            max_rank_even(5, 2)
        with pytest.raises(ValueError):
            max_rank_even(6, 3)

    @pytest.mark.parametrize("q", [0, 7])
    def test_order_out_of_range(self, q):
        with pytest.raises(ValueError):
            max_rank(6, q)

    @pytest.mark.parametrize("N", range(1, 7))
    def test_matching_oracle(self, N):
        for q in range(1, N + 1):
            assert max_rank(N, q) == matching_rank(N, q), (N, q)

    @pytest.mark.parametrize("N", range(1, 7))
    def test_dense_zigzag_rank(self, N):
        for q in range(1, N + 1):
            assert oracle.numerical_rank(oracle.zigzag_max_rank_operator(N, q)) == max_rank(N, q)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 120).flatmap(lambda N: st.tuples(st.just(N), st.integers(1, N))))
    def test_even_and_bounded(self, Nq):
        N, q = Nq
        R = max_rank(N, q)
        assert R % 2 == 0
        assert 2 <= R <= 2**N

    def test_rank_report(self):
        report = rank_report(4)
        assert [(e.q, e.rank, e.half_rank) for e in report.entries] == [(1, 16, 8), (2, 12, 6), (3, 4, 2), (4, 2, 1)]
