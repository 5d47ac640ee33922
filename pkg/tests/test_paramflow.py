import math

import pytest
from hypothesis import given, settings, strategies as st

from addcomb.errors import DomainGuardError, EmptyFeasibleRegionError
from addcomb.paramflow import (
    DEFAULT_STRONG_CONSTANTS,
    E_TO_E,
    ParamTriple,
    StrongPairConstants,
    better_pair,
    constraint_region,
    freiman_pair,
    induction_step,
    split_target_gamma,
    strong_contraction,
    strong_pair,
    strong_pair_branches,
    theorem1_exponent,
    tree_simulate,
    trivial_pair,
)

triples = st.builds(
    ParamTriple,
    N=st.floats(1e2, 1e16),
    delta=st.floats(1e-3, 1.0),
    K=st.floats(16.0, 1e6),
)


def test_param_triple_validation():
    with pytest.raises(ValueError):
        ParamTriple(0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        ParamTriple(10, 1.5, 1.0)
    with pytest.raises(ValueError):
        ParamTriple(10, 1.0, 0.5)


def test_trivial_pair():
    p = trivial_pair(ParamTriple(1e6, 0.5, 3.0))
    assert p.psi == pytest.approx(1e6) and p.phi == pytest.approx(5e5)


def test_freiman_examples():
    p = freiman_pair(ParamTriple(1e6, 1.0, 2.0), C=1.0)
    assert abs(p.psi - math.e**2) < 1e-9
    assert abs(p.phi - 5e5) < 1e-3
    p = freiman_pair(ParamTriple(1e6, 1e-3, 1e6), C=1.0)  # K/delta huge: cap
    assert p.psi == pytest.approx(1e6) and p.log_psi == math.log(1e6)
    p = freiman_pair(ParamTriple(1e9, 1.0, 1.0), C=1.0)
    assert abs(p.psi - math.e) < 1e-12 and abs(p.phi - 1e9) < 1e-3


def test_better_boundary_and_guard():
    t = ParamTriple(1e12, 1.0, E_TO_E)
    p = better_pair(t, C=1.0, gamma=0.25)
    assert abs(p.log_phi - (math.log(1e12) - math.e)) < 1e-9  # loglog = 1
    assert abs(p.log_psi - (math.e**4 + 0.25 * math.log(1e12))) < 1e-9
    with pytest.raises(DomainGuardError):
        better_pair(ParamTriple(1e12, 1.0, 2.0))


def test_strong_constants_validation():
    with pytest.raises(ValueError):
        StrongPairConstants(B1=2.0, B2=1.0)
    with pytest.raises(ValueError):
        StrongPairConstants(tau=0.9)
    with pytest.raises(ValueError):
        StrongPairConstants(A2=0.5)


def test_strong_pair_branches_and_guard():
    k = DEFAULT_STRONG_CONSTANTS
    with pytest.raises(DomainGuardError):
        strong_pair(ParamTriple(10.0, 1.0, 1.0), k)
    # bootstrap regime equals the guarded improved formulas
    t = ParamTriple(1e4, 1.0, 100.0)
    b = strong_pair(t, k)
    assert b.formula == "strong"
    rep = strong_pair_branches(t, k)
    assert rep["used"] == "bootstrap"
    assert rep["bootstrap"].log_phi == b.log_phi
    # above the threshold, the asymptotic branch applies
    t2 = ParamTriple(1e8, 1.0, 100.0)
    rep2 = strong_pair_branches(t2, k)
    assert rep2["used"] == "asymptotic"
    assert strong_pair(t2, k).log_phi == rep2["asymptotic"].log_phi


def test_strong_pair_trivial_triple_structure():
    # K = delta = 1 kills those factors: phi = e^(A3 llN^2) N^(1-tau) before
    # clamping, psi = e^(-B3 llN^2) N^gamma before clamping
    k = StrongPairConstants(tau=0.25, gamma=0.25, Nbar=1e4)
    t = ParamTriple(1e6, 1.0, 1.0)
    p = strong_pair(t, k)
    lln = math.log(math.log(1e6))
    assert abs(p.log_phi_raw - (k.A3 * lln**2 + 0.75 * math.log(1e6))) < 1e-9
    assert abs(p.log_psi_raw - (-k.B3 * lln**2 + 0.25 * math.log(1e6))) < 1e-9
    # clamps keep the value semantics: phi <= delta N, psi >= 1
    assert p.phi <= t.N * t.delta and p.psi >= 1.0


@given(triples)
@settings(max_examples=100)
def test_pair_value_invariants(t):
    for pair in (
        freiman_pair(t),
        better_pair(t),
        strong_pair(t),
        trivial_pair(t),
    ):
        assert pair.psi >= 1.0
        assert pair.phi <= t.N * t.delta * (1 + 1e-12)


@given(st.floats(1e2, 1e16), st.floats(1e-3, 1.0), st.floats(16.0, 5e5))
@settings(max_examples=60)
def test_monotone_in_kdelta(n, d, k):
    # doubling the doubling constant never lowers psi or raises phi
    for ev in (freiman_pair, better_pair, lambda t: strong_pair(t)):
        lo, hi = ev(ParamTriple(n, d, k)), ev(ParamTriple(n, d, 2 * k))
        assert hi.log_psi >= lo.log_psi - 1e-9
        assert hi.log_phi <= lo.log_phi + 1e-9


@given(st.floats(1e2, 1e12), st.floats(1e-3, 1.0), st.floats(16.0, 1e6))
@settings(max_examples=60)
def test_monotone_in_n(n, d, k):
    # phi never shrinks with N for all evaluators; psi for the closed forms
    # whose growth survives at this scale
    t1, t2 = ParamTriple(n, d, k), ParamTriple(4 * n, d, k)
    for ev in (freiman_pair, better_pair, lambda t: strong_pair(t)):
        assert ev(t2).log_phi >= ev(t1).log_phi - 1e-9
    for ev in (freiman_pair, better_pair):
        assert ev(t2).log_psi >= ev(t1).log_psi - 1e-9


def test_contraction_grid_for_shipped_constants():
    k = DEFAULT_STRONG_CONSTANTS
    for n in (1e2, 1e4, 1e8, 1e14, 1e20):
        for d in (1e-3, 1e-2, 0.1, 0.5, 1.0):
            rep = strong_contraction(k, n, d)
            assert rep.phi_ok, (n, d)
            assert rep.psi_ok, (n, d)


def test_theorem1_exponent():
    rep = theorem1_exponent(StrongPairConstants(A1=1.0, B1=1.0))
    assert rep.Lambda == 14
    rep = theorem1_exponent(StrongPairConstants(tau=0.05, gamma=0.05))
    assert abs(rep.energy_exponent - 2.45) < 1e-12
    tau, gamma = split_target_gamma(0.4)
    assert 8 * tau + gamma == pytest.approx(0.4)
    assert (tau, gamma) == (0.025, 0.2)


def test_induction_step_degenerate_symmetric():
    # delta = 1, K = 1 with the exponential pair: both caps go active and the
    # extremal value is C * N, attained at the symmetric split
    t = ParamTriple(1e6, 1.0, 1.0)
    rep = induction_step(lambda tt: freiman_pair(tt, C=1.0), t, C=32.0, c=1e-4)
    assert rep.pair.log_psi == pytest.approx(math.log(32.0) + math.log(1e6), rel=1e-12)
    n1, n2 = rep.psi_children[0].N, rep.psi_children[1].N
    assert n1 * n2 == pytest.approx(1e6, rel=1e-9)
    root = math.sqrt(1e6)
    sym = (
        math.log(32.0)
        + freiman_pair(ParamTriple(root, rep.psi_children[0].delta, rep.psi_children[0].K)).log_psi
        + freiman_pair(ParamTriple(root, rep.psi_children[1].delta, rep.psi_children[1].K)).log_psi
    )
    assert sym == pytest.approx(rep.pair.log_psi, rel=1e-12)


def test_induction_step_monotone_in_k():
    child = lambda tt: freiman_pair(tt, C=1.0)
    lo = induction_step(child, ParamTriple(1e12, 1.0, 1e3), C=32.0, c=1e-4, points=9)
    hi = induction_step(child, ParamTriple(1e12, 1.0, 1e4), C=32.0, c=1e-4, points=9)
    assert hi.pair.log_psi >= lo.pair.log_psi - 1e-9


def test_induction_step_golden_regression():
    rep = induction_step(
        lambda tt: freiman_pair(tt, C=1.0), ParamTriple(1e12, 1.0, 1e3), C=32.0, c=1e-4
    )
    assert rep.pair.log_psi == pytest.approx(31.096757018728276, rel=1e-9)
    assert rep.pair.log_phi == pytest.approx(-46.640857828582966, rel=1e-9)
    assert rep.feasible_points == rep.grid_points == 33**3


def test_induction_step_infeasible_region():
    with pytest.raises(EmptyFeasibleRegionError):
        induction_step(
            lambda tt: freiman_pair(tt, C=1.0), ParamTriple(1e6, 1.0, 1.0), C=1.0, c=1.0
        )


def test_tree_depth_zero_and_one():
    root = ParamTriple(1e20, 1.0, 1e4)
    rep0 = tree_simulate(root, 0)
    assert rep0.levels == () and rep0.all_bounds_pass
    rep1 = tree_simulate(root, 1)
    children = rep1.root.children
    assert children is not None
    region = constraint_region(root, 1.0, 1.0)
    d0, d1 = children[0].data.delta, children[1].data.delta
    assert d0 * d1 >= region.dd_low * (1 - 1e-9)
    assert rep1.all_bounds_pass


def test_tree_acceptance_instance():
    rep = tree_simulate(ParamTriple(1e20, 1.0, 1e4), 4)
    assert rep.all_bounds_pass
    for lv in rep.levels:
        assert lv.kdelta_bound["measured"] < 15**lv.level * math.log(1e4)


def test_tree_log_guard():
    with pytest.raises(DomainGuardError):
        tree_simulate(ParamTriple(1e20, 1.0, 1.0), 1)


def test_better_vs_freiman_phi_crossover():
    # phi_better / phi_freiman = (delta/K)^(loglog(K/delta) - 1): the ratio
    # crosses one exactly where loglog = 1; locate it by bisection on the
    # analytically continued gap
    delta = 1.0

    def gap(k):
        return math.log(k / delta) * (math.log(math.log(k / delta)) - 1.0)

    lo, hi = math.e + 1e-6, 1e3
    assert gap(lo) < 0 < gap(hi)
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    assert hi == pytest.approx(E_TO_E, rel=1e-9)
    # above the crossover the improved pair certifies a smaller graph
    t = ParamTriple(1e12, 1.0, 100.0)
    assert better_pair(t, C=1.0).log_phi < freiman_pair(t, C=1.0).log_phi
