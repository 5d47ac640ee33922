import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from addcomb.bigraph import BiGraph
from addcomb.errors import EmptyOperandError
from addcomb.families import fibering_instances, lattice_box, lattice_rank1, random_bigraph
from addcomb.fibering import (
    ConstantsConfig,
    choose_split,
    dyadic_pigeonhole,
    fiber_profile,
    fibering_lemma,
    prefix_split,
)
from addcomb.valuation import LatticeSet

RELAXED = ConstantsConfig(c_small=Fraction(1, 1000), C_big=Fraction(1000))


def test_dyadic_pigeonhole_examples():
    r = dyadic_pigeonhole([1, 1, 2, 3, 8])
    assert (r.exponent, r.mass) == (3, 8)
    assert r.members == (4,)
    r = dyadic_pigeonhole([7, 7, 7])
    assert r.mass == 21 and r.members == (0, 1, 2)
    r = dyadic_pigeonhole([1, 2, 4])
    assert (r.exponent, r.mass) == (2, 4)


def test_dyadic_pigeonhole_errors():
    with pytest.raises(EmptyOperandError):
        dyadic_pigeonhole([])
    with pytest.raises(ValueError):
        dyadic_pigeonhole([1, 0])


@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=60))
def test_dyadic_pigeonhole_mass_floor(ws):
    r = dyadic_pigeonhole(ws)
    span = max(ws).bit_length() - min(ws).bit_length() + 1
    assert r.mass * span >= sum(ws)
    assert all(2**r.exponent <= ws[i] < 2 ** (r.exponent + 1) for i in r.members)


def test_choose_split_examples():
    singleton = LatticeSet.from_vectors([(0, 0)])
    assert choose_split(singleton, singleton) == 0

    box = lattice_box((1, 7))  # {0,1} x {0..7}, 16 vectors
    # N = 256, N^(1/4) = 4; f = (32, 16, 2)
    assert fiber_profile(box, box) == [32, 16, 2]
    assert choose_split(box, box) == 1

    line = lattice_rank1(5, dim=2)  # 25 = N >= 17, fibers are singletons
    assert fiber_profile(line, line)[1] == 2
    assert choose_split(line, line) == 0


def test_prefix_split():
    assert prefix_split(1, 3) == ((0,), (1, 2))
    assert prefix_split(0, 2) == ((), (0, 1))


def test_box_decomposition_exact_values():
    a = lattice_box((1, 3))
    g = BiGraph.complete(a, a)
    d, trace = fibering_lemma(a, a, g, coords=(0,))
    assert (d.M1, d.M2, d.m1, d.m2) == (2, 2, 4, 4)
    assert d.delta1 == 1 and d.delta2 == 1
    assert d.k1_sq == Fraction(9, 4) and d.k1 == 1.5
    assert d.k2_sq == Fraction(49, 16) and d.k2 == 1.75
    assert d.conclusions_pass()
    assert trace.n1 == 4 and not trace.swapped


def test_rank1_trivial_split_is_identity_like():
    a = lattice_rank1(4, dim=1)
    g = BiGraph.complete(a, a)
    d, trace = fibering_lemma(a, a, g, coords=(), cfg=RELAXED)
    assert (d.M1, d.M2) == (1, 1)
    assert (d.m1, d.m2) == (4, 4)
    assert d.delta1 == 1 and d.delta2 == 1
    assert d.k1_sq == 1  # single base point sums to itself
    assert d.k2_sq == Fraction(49, 16)  # the whole-set doubling 7/4
    assert trace.degenerate_split is not None


def test_full_split_has_trivial_fibers():
    a = lattice_box((1, 1))
    g = BiGraph.complete(a, a)
    d, trace = fibering_lemma(a, a, g, coords=(0, 1))
    assert d.m1 == d.m2 == 1
    assert d.k2_sq == 1
    assert d.M1 == len(a)
    assert trace.degenerate_split is not None


def test_refined_objects_are_contained_in_inputs():
    rng = random.Random(11)
    a = lattice_box((1, 2))
    g = random_bigraph(rng, a, a, 0.6)
    d, _ = fibering_lemma(a, a, g, coords=(0,), cfg=RELAXED)
    assert set(d.refined_left.vectors) <= set(a.vectors)
    assert set(d.refined_right.vectors) <= set(a.vectors)
    assert set(d.graph.edge_members()) <= set(g.edge_members())


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_random_instances_verify(seed):
    rng = random.Random(seed)
    a = lattice_box((1, 2))
    g = random_bigraph(rng, a, a, 0.5)
    d, trace = fibering_lemma(a, a, g, cfg=RELAXED)
    assert d.conclusions_pass(RELAXED)
    assert trace.counts_non_increasing()


def test_determinism():
    rng = random.Random(3)
    a = lattice_box((2, 1))
    g = random_bigraph(rng, a, a, 0.5)
    d1, t1 = fibering_lemma(a, a, g, coords=(0,), cfg=RELAXED)
    d2, t2 = fibering_lemma(a, a, g, coords=(0,), cfg=RELAXED)
    assert d1.to_json() == d2.to_json()
    assert t1.to_json() == t2.to_json()


def test_structured_instances_all_pass():
    for a1, a2, g in fibering_instances(99, 12):
        d, _ = fibering_lemma(a1, a2, g, cfg=RELAXED)
        table = d.verify(RELAXED)
        assert all(r["pass"] for r in table.values())


def test_step_mass_accounting():
    # after the right-side pruning, the retained edges keep at least a
    # c * delta/10 fraction of the input row mass against the survivors
    for a1, a2, g in fibering_instances(5, 6):
        d, trace = fibering_lemma(a1, a2, g, cfg=RELAXED)
        names = [s.name for s in trace.steps]
        prune = trace.steps[names.index("right_fiber_prune")]
        colstep = trace.steps[names.index("right_column_filter")]
        delta = float(trace.steps[0].detail["delta"])
        n1_side = trace.steps[0].left
        floor = float(RELAXED.c_small) * (delta / 10.0) * n1_side * colstep.right
        assert prune.edges >= floor


def test_config_validation():
    with pytest.raises(ValueError):
        ConstantsConfig(c_small=2)
    with pytest.raises(ValueError):
        ConstantsConfig(C_big=Fraction(1, 2))
    with pytest.raises(ValueError):
        ConstantsConfig(approx_factor=3)


def test_auto_swap_handles_lopsided_instances():
    tall = lattice_box((0, 3))  # single base point fiber of size 4
    wide = lattice_box((1, 1))
    g = BiGraph.complete(wide, tall)
    d, trace = fibering_lemma(wide, tall, g, coords=(0,), cfg=RELAXED)
    assert trace.swapped
    assert d.conclusions_pass(RELAXED)
    # decomposition is reported in the caller's orientation
    assert set(d.refined_left.vectors) <= set(wide.vectors)
    assert set(d.refined_right.vectors) <= set(tall.vectors)
