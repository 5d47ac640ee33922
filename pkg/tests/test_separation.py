import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from addcomb.errors import EmptyOperandError, NonPositiveElementError, StructureError
from addcomb.families import one_prime_family, unstructured_family
from addcomb.intset import FiniteIntSet, energy_plus
from addcomb.separation import (
    CoverSystem,
    SlicedFamily,
    chang_bound,
    compose_bounds,
    empirical_ratio,
    energy_cover_bound,
    final_assembly,
    one_prime_bound,
    sqrt_leq,
    trivial_bound,
)


def iset(*xs):
    return FiniteIntSet.from_iterable(xs)


def fam(coeffs, slices):
    return SlicedFamily(iset(*coeffs), {a: iset(*x) for a, x in slices.items()})


def test_family_validation():
    with pytest.raises(StructureError):  # gcd(2, 4) = 2
        fam([1, 2], {1: [3], 2: [4]})
    with pytest.raises(StructureError):  # slices must match coefficients
        SlicedFamily(iset(1, 2), {1: iset(3)})
    with pytest.raises(EmptyOperandError):
        SlicedFamily(iset(1), {1: FiniteIntSet(())})


def test_family_json_roundtrip():
    f = fam([1, 2], {1: [1, 3], 2: [1, 5]})
    assert SlicedFamily.from_json(f.to_json()) == f


def test_empirical_ratio_single_slice():
    f = fam([1], {1: [2, 3, 7]})
    r = empirical_ratio(f)
    assert r.union_energy == r.slice_energies[0]
    assert r.ratio == 1.0
    assert r.within(1)


def test_empirical_ratio_worked_example():
    f = fam([1, 2], {1: [1, 3], 2: [1, 5]})
    r = empirical_ratio(f)
    assert f.union().elements == (1, 2, 3, 10)
    assert r.union_energy == 32
    assert r.slice_energies == (6, 6)
    assert abs(r.ratio - 32**0.5 / (2 * 6**0.5)) < 1e-12
    assert r.within(6) and r.within(2)


def test_sqrt_leq_exact_paths():
    assert sqrt_leq(32, [6, 6], Fraction(2))
    assert not sqrt_leq(32, [6, 6], Fraction(1))
    assert sqrt_leq(25, [25], Fraction(1))  # equality, single radical
    assert sqrt_leq(96, [6, 6], Fraction(2))  # equality in a shared class: 4*sqrt(6)
    assert not sqrt_leq(97, [6, 6], Fraction(2))


def test_trivial_bound():
    assert trivial_bound(iset(*range(5))).value == 5
    assert trivial_bound(iset(9)).value == 1
    assert trivial_bound(iset(*range(100))).value == 100
    with pytest.raises(EmptyOperandError):
        trivial_bound(FiniteIntSet(()))


def test_one_prime_bound():
    assert one_prime_bound(iset(1, 2, 4), 2).value == 6
    assert one_prime_bound(iset(1), 7).value == 6
    assert one_prime_bound(iset(3, 9), 3).value == 6
    with pytest.raises(StructureError):
        one_prime_bound(iset(2, 6), 2)


def test_chang_bound_examples():
    r = chang_bound(iset(1, 2, 4, 8))
    assert r.k_mult == Fraction(7, 4)
    assert r.bound.value == 36  # 6**ceil(7/4)
    assert r.psi_rank == 6  # sharper: rank 1
    assert r.projection.primes == (2,)
    assert chang_bound(iset(5)).bound.value == 6
    r = chang_bound(iset(2, 3, 6))
    assert r.k_mult == 2 and r.bound.value == 36


def test_compose_bounds():
    six = one_prime_bound(iset(1, 2), 2)
    assert compose_bounds(six, six).value == 36
    one = trivial_bound(iset(7))
    assert compose_bounds(one, six).value == 6
    decomposition = fam([2, 4], {2: [3, 9], 4: [3, 9]})
    assert compose_bounds(six, trivial_bound(iset(3, 9)), decomposition).value == 12
    with pytest.raises(StructureError):
        bad = SlicedFamily.__new__(SlicedFamily)  # bypass validation to build bad data
        object.__setattr__(bad, "coefficients", iset(2, 4))
        object.__setattr__(bad, "slices", {2: iset(6), 4: iset(6)})
        compose_bounds(six, six, bad)


@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]))
@settings(max_examples=60, deadline=None)
def test_one_prime_families_stay_below_six(seed, p):
    f = one_prime_family(random.Random(seed), prime=p, max_coefficients=6, max_slice=8,
                         value_cap=200)
    assert empirical_ratio(f).within(6)


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_any_family_meets_cardinality_bound(seed):
    f = unstructured_family(random.Random(seed), max_coefficients=6, max_slice=8,
                            value_cap=200)
    assert empirical_ratio(f).within(len(f.coefficients))


@given(st.sets(st.tuples(st.integers(0, 4), st.integers(0, 3)), min_size=1, max_size=8))
@settings(max_examples=40)
def test_chang_energy_bound(vs):
    # E(A) <= 36**ceil(K) |A|^2 via singleton slices
    a = FiniteIntSet.from_iterable(2**x * 3**y for x, y in vs)
    psi = chang_bound(a).bound.value
    assert energy_plus(a).energy <= psi**2 * len(a) ** 2


def test_cover_system_validation():
    a = iset(0, 1, 2)
    parts = (iset(0, 1), iset(1, 2), iset(0, 2))
    cov = CoverSystem(a, parts, 2)
    assert cov.multiplicity == 2
    with pytest.raises(StructureError):
        CoverSystem(a, parts, 3)
    assert CoverSystem.build(a, parts).multiplicity == 2


def test_energy_cover_examples():
    a = iset(0, 1, 2)
    single = CoverSystem(a, (a,), 1)
    rep = energy_cover_bound(single)
    assert rep.bound_exact == rep.actual == 19  # single part: equality
    cov = CoverSystem(a, (iset(0, 1), iset(1, 2), iset(0, 2)), 2)
    rep = energy_cover_bound(cov)
    assert rep.part_energies == (6, 6, 6)
    assert rep.bound_exact == Fraction(486, 16)
    assert rep.actual == 19


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_energy_cover_random_partitions(seed):
    rng = random.Random(seed)
    base = FiniteIntSet.from_iterable(rng.sample(range(-50, 51), rng.randint(2, 20)))
    pieces = [[] for _ in range(rng.randint(1, 4))]
    for x in base:
        pieces[rng.randrange(len(pieces))].append(x)
    parts = tuple(FiniteIntSet.from_iterable(p) for p in pieces if p)
    cov = CoverSystem(base, parts, 1)
    rep = energy_cover_bound(cov)
    assert rep.passed and rep.actual <= rep.bound * (1 + 1e-9)


def test_final_assembly_worked_example():
    rep = final_assembly(iset(1, 2, 4, 8), iset(1, 2))
    assert rep.parts == 5 and rep.multiplicity == 2
    assert rep.energy_bound == Fraction(5**4 * 6, 2**4)
    assert rep.actual_energy == 28
    assert rep.pr_ok


def test_final_assembly_self_and_singleton():
    a = iset(1, 2, 4, 8)
    rep = final_assembly(a, a)
    assert rep.multiplicity == 4 and rep.parts == rep.ratio_set_full == 7
    assert rep.energy_bound == Fraction(7**4 * 28, 4**4)
    rep = final_assembly(a, iset(2))
    assert rep.multiplicity == 1 and rep.parts == 4
    assert rep.energy_bound == Fraction(4**4 * 1, 1)  # singleton part energy is 1


def test_final_assembly_validation():
    with pytest.raises(StructureError):
        final_assembly(iset(1, 2), iset(3))
    with pytest.raises(NonPositiveElementError):
        final_assembly(iset(-1, 2), iset(2))


@given(st.sets(st.integers(1, 60), min_size=2, max_size=10), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_final_assembly_dominates_energy(xs, seed):
    a = FiniteIntSet.from_iterable(xs)
    rng = random.Random(seed)
    sub = FiniteIntSet.from_iterable(rng.sample(a.elements, rng.randint(1, len(a))))
    rep = final_assembly(a, sub)
    assert rep.actual_energy <= rep.energy_bound


@given(st.sets(st.integers(-40, 40), min_size=1, max_size=10),
       st.integers(1, 7), st.integers(1, 7))
@settings(max_examples=40)
def test_energy_rational_dilation_invariance(xs, p, q):
    # a rational dilate (p/q)X scaled clear of denominators keeps the energy
    a = FiniteIntSet.from_iterable(xs)
    dilated = FiniteIntSet.from_iterable(p * x for x in a)  # q * (p/q) * x
    assert energy_plus(dilated).energy == energy_plus(a).energy
