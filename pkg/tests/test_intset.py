import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from addcomb.bigraph import BiGraph
from addcomb.errors import CapExceededError, DanglingEdgeError, EmptyOperandError
from addcomb.intset import (
    FiniteIntSet,
    difference_set,
    doubling_stats,
    energy_k,
    energy_plus,
    productset,
    rep_function,
    restricted_sumset,
    sumset,
)

int_sets = st.sets(st.integers(-200, 200), min_size=1, max_size=12).map(
    FiniteIntSet.from_iterable
)


def iset(*xs):
    return FiniteIntSet.from_iterable(xs)


def test_sorted_dedup_construction():
    assert FiniteIntSet.from_iterable([3, 1, 1, 2]).elements == (1, 2, 3)
    with pytest.raises(ValueError):
        FiniteIntSet((2, 1))


def test_parse_and_text_roundtrip():
    s = FiniteIntSet.parse("5\n-1\n3\n")
    assert s.elements == (-1, 3, 5)
    assert FiniteIntSet.parse(s.to_text()) == s
    assert FiniteIntSet.parse("[4, 2, 2]").elements == (2, 4)


def test_sumset_examples():
    assert sumset(iset(0, 1), iset(0, 1)).elements == (0, 1, 2)
    ap = iset(*range(10))
    assert len(sumset(ap, ap)) == 19
    assert sumset(iset(1, 2, 4), iset(1, 2, 4)).elements == (2, 3, 4, 5, 6, 8)


def test_productset_examples():
    assert productset(iset(1, 2, 4), iset(1, 2, 4)).elements == (1, 2, 4, 8, 16)
    b = iset(3, 7, 11)
    assert productset(iset(1), b) == b
    assert productset(iset(2, 3), iset(2, 3)).elements == (4, 6, 9)


def test_difference_set():
    assert difference_set(iset(0, 1), iset(0, 1)).elements == (-1, 0, 1)


def test_empty_operand_errors():
    empty = FiniteIntSet(())
    for op in (sumset, productset, difference_set):
        with pytest.raises(EmptyOperandError):
            op(empty, iset(1))


def test_rep_function_examples():
    r = rep_function(iset(0, 1), iset(0, 1), "plus")
    assert r.support == {0: 1, 1: 2, 2: 1}
    r = rep_function(iset(0, 1), iset(0, 1), "minus")
    assert r.support == {-1: 1, 0: 2, 1: 1}
    assert rep_function(iset(5), iset(3), "plus").support == {8: 1}


@given(int_sets, int_sets, st.sampled_from(["plus", "minus"]))
def test_rep_function_mass_and_support(a, b, sign):
    r = rep_function(a, b, sign)
    assert r.total_mass() == len(a) * len(b)
    assert all(c >= 1 for c in r.support.values())
    if sign == "plus":
        assert r.values_set() == sumset(a, b)


def test_energy_examples():
    assert energy_plus(iset(0, 1)).energy == 6
    assert energy_plus(iset(0, 1, 2)).energy == 19
    assert energy_plus(iset(1, 2, 4, 8)).energy == 28  # distinct pairwise sums


@given(int_sets, int_sets)
@settings(max_examples=60)
def test_energy_oracle_equivalence(a, b):
    conv = energy_plus(a, b, method="convolution")
    oracle = energy_plus(a, b, method="quadruple-oracle")
    assert conv.energy == oracle.energy


@given(int_sets)
def test_energy_bounds(a):
    e = energy_plus(a).energy
    n = len(a)
    assert n * n <= e <= n**3
    if n >= 2:
        sums = [x + y for x, y in itertools.combinations_with_replacement(a.elements, 2)]
        sidon = len(sums) == len(set(sums))
        assert e >= 2 * n * n - n
        assert (e == 2 * n * n - n) == sidon


@given(int_sets, int_sets)
@settings(max_examples=40)
def test_energy_cauchy_schwarz(a, b):
    eab = energy_plus(a, b).energy
    assert eab * eab <= energy_plus(a).energy * energy_plus(b).energy


@given(int_sets, st.integers(-50, 50), st.sampled_from([-3, -1, 1, 2, 7]))
def test_energy_dilation_translation_invariance(a, d, c):
    transformed = a.dilate(c).translate(d)
    assert energy_plus(transformed).energy == energy_plus(a).energy


def test_oracle_cap():
    big = FiniteIntSet.from_iterable(range(1100))
    with pytest.raises(CapExceededError):
        energy_plus(big, big, method="quadruple-oracle")


def test_energy_k_examples():
    assert energy_k(iset(0, 1), 2) == 6
    assert energy_k(iset(42), 5) == 1
    # brute force over all 64 sextuples
    a = (0, 1)
    brute = sum(
        1
        for t in itertools.product(a, repeat=6)
        if t[0] + t[1] + t[2] == t[3] + t[4] + t[5]
    )
    assert brute == 20
    assert energy_k(iset(0, 1), 3) == brute


@given(st.sets(st.integers(-20, 20), min_size=1, max_size=6).map(FiniteIntSet.from_iterable))
@settings(max_examples=30)
def test_energy_k_matches_pair_energy(a):
    assert energy_k(a, 2) == energy_plus(a).energy


def test_energy_k_cap():
    with pytest.raises(CapExceededError):
        energy_k(FiniteIntSet.from_iterable(range(100)), 5)
    with pytest.raises(ValueError):
        energy_k(iset(1), 1)


def test_restricted_sumset():
    a = iset(0, 1, 2)
    diag = BiGraph.from_member_pairs(a, a, [(0, 0), (1, 1), (2, 2)])
    assert restricted_sumset(a, a, diag).elements == (0, 2, 4)
    assert restricted_sumset(a, a, BiGraph.complete(a, a)) == sumset(a, a)
    s = iset(1, 2, 4, 8)
    g = BiGraph.from_member_pairs(s, s, [(1, 2), (2, 1), (4, 8)])
    assert restricted_sumset(s, s, g).elements == (3, 12)


def test_restricted_sumset_dangling_edge():
    a = iset(0, 1, 2)
    g = BiGraph.complete(a, a)
    with pytest.raises(DanglingEdgeError):
        restricted_sumset(iset(0, 1), a, g)


def test_doubling_stats():
    s = iset(1, 2, 4, 8)
    d = doubling_stats(s)
    assert d.k_mult == Fraction(7, 4)
    assert d.k_plus == Fraction(10, 4)
    ap = iset(*range(7))
    assert doubling_stats(ap).k_plus == Fraction(13, 7)
    assert doubling_stats(s, iset(1, 2)).k_mult is None
