import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sicnum.number_theory import (
    DimensionSequence,
    FactorizationBoundError,
    Tower,
    dimension_sequence,
    dimension_towers,
    dprime,
    is_squarefree,
    pell_fundamental,
    pell_scan,
    sic_discriminant,
    squarefree_part,
)

from .oracles import (
    D5_M,
    D5_TERMS,
    D5_TOWERS,
    PELL_FUNDAMENTAL,
    chebyshev_dimension,
    pell_reference,
    squarefree_reference,
)


class TestSquarefree:
    @pytest.mark.parametrize("n,D", [(45, 5), (1, 1), (12, 3), (2**10, 1), (2 * 3 * 5 * 7, 210)])
    def test_examples(self, n, D):
        assert squarefree_part(n) == D

    def test_zero(self):
        with pytest.raises(ValueError):
            squarefree_part(0)

    def test_trial_division_bound(self, monkeypatch):
        monkeypatch.setattr("sicnum.number_theory.TRIAL_DIVISION_BOUND", 100)
        with pytest.raises(FactorizationBoundError):
            squarefree_part(101 * 103)
        assert squarefree_part(2 * 97 * 97) == 2


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**9))
def test_squarefree_cofactor_is_square(n):
    D = squarefree_part(n)
    k = math.isqrt(n // D)
    assert n % D == 0 and k * k * D == n and is_squarefree(D)
    assert D == squarefree_reference(n)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**5), st.integers(1, 10**5))
def test_squarefree_multiplicative(a, b):
    assume(math.gcd(a, b) == 1)
    assert squarefree_part(a * b) == squarefree_part(a) * squarefree_part(b)


class TestDiscriminant:
    @pytest.mark.parametrize("d", D5_TERMS)
    def test_d5_family(self, d):
        rec = sic_discriminant(d)
        assert rec.D == 5 and rec.d_prime == dprime(d)

    def test_d5_is_three(self):
        assert sic_discriminant(5).D == 3

    def test_small_d_rejected(self):
        with pytest.raises(ValueError):
            sic_discriminant(3)


@settings(max_examples=200, deadline=None)
@given(st.integers(4, 10**5))
def test_discriminant_invariants(d):
    n = (d - 3) * (d + 1)
    D = sic_discriminant(d).D
    assert is_squarefree(D) and n % D == 0 and math.isqrt(n // D) ** 2 == n // D


class TestPell:
    @pytest.mark.parametrize("D", sorted(PELL_FUNDAMENTAL))
    def test_frozen_values(self, D):
        assert pell_fundamental(D) == PELL_FUNDAMENTAL[D]

    def test_agrees_with_chakravala_up_to_200(self):
        for D in range(2, 201):
            if is_squarefree(D):
                assert pell_fundamental(D) == pell_reference(D), D

    def test_agrees_with_scan_where_feasible(self):
        for D in range(2, 201):
            if is_squarefree(D):
                d1, m1 = pell_fundamental(D)
                if m1 <= 10**6:
                    assert pell_scan(D, m1) == (d1, m1), D

    def test_scan_gives_up(self):
        assert pell_scan(193, 1000) is None

    @pytest.mark.parametrize("D", [4, 12, 1, 0])
    def test_rejects_non_squarefree(self, D):
        with pytest.raises(ValueError):
            pell_fundamental(D)


class TestSequence:
    def test_d5(self):
        seq = dimension_sequence(5, 12)
        assert seq.terms == D5_TERMS and seq.m_values == D5_M and seq.d1 == 4

    def test_first_term(self):
        for D in (2, 3, 13):
            assert dimension_sequence(D, 1).terms == (pell_fundamental(D)[0],)

    def test_long_sequence_exceeds_int64(self):
        seq = dimension_sequence(5, 60)
        assert seq.terms[-1] > 2**64
        assert all((d - 1) ** 2 - m * m * 5 == 4 for d, m in zip(seq.terms, seq.m_values))

    def test_validation(self):
        with pytest.raises(ArithmeticError):
            DimensionSequence(5, 4, (4, 9), (1, 3))
        with pytest.raises(ValueError):
            dimension_sequence(5, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 50))
def test_recurrence_matches_chebyshev(D):
    assume(is_squarefree(D))
    seq = dimension_sequence(D, 20)
    assert list(seq.terms) == [chebyshev_dimension(seq.d1, j) for j in range(1, 21)]


class TestTowers:
    def test_d5_towers(self):
        towers = [t.chain for t in dimension_towers(dimension_sequence(5, 12))]
        assert tuple(towers) == D5_TOWERS

    def test_single_term(self):
        assert [t.chain for t in dimension_towers(dimension_sequence(5, 1))] == [(4,)]

    def test_max_len(self):
        towers = dimension_towers(dimension_sequence(5, 12), max_len=2)
        assert all(len(t) <= 2 for t in towers)
        assert (4, 8) in [t.chain for t in towers]

    def test_dprime_chains(self):
        towers = [t.chain for t in dimension_towers(dimension_sequence(5, 12), use_dprime=True)]
        assert (8, 16, 96, 4416) in towers

    def test_invalid_chain(self):
        with pytest.raises(ValueError):
            Tower((4, 6))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 60), st.integers(1, 14))
    def test_chains_are_maximal(self, D, count):
        assume(is_squarefree(D))
        seq = dimension_sequence(D, count)
        towers = dimension_towers(seq)
        covered = {x for t in towers for x in t.chain}
        assert covered == set(seq.terms)
        for t in towers:
            top = t.chain[-1]
            assert not any(x > top and x % top == 0 for x in seq.terms)
