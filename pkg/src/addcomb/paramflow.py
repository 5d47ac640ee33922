"""Closed-form evaluators and simulators for the scale-recursion scheme.

Triples (N, delta, K) describe a bipartite instance: N the product of the two
set sizes, delta the graph density, K the normalized doubling constant along
the graph.  A pair value (psi, phi) attaches to a triple: phi lower-bounds a
certified subgraph size, psi upper-bounds the separation constant of its
neighborhoods.  Three closed-form families are provided (the exponential
small-doubling pair, the loglog-improved pair, and the strong pair with its
bootstrap threshold), together with the one-step combiner that extremizes a
pair over the constrained parameter region, a binary-tree simulator with
adversarial boundary splits, and the final exponent calculator.

Everything here is double precision evaluated in log space with explicit
guards; these are formula evaluations, not exact combinatorics.  Values are
clamped into their semantic ranges (phi <= delta*N since a subgraph cannot
exceed the graph; psi >= 1): the raw formula logs ride along in each value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainGuardError, EmptyFeasibleRegionError

LOG_FLOOR = 2.0
E_TO_E = math.exp(math.e)  # domain edge for loglog formulas
_EXP_MAX = 700.0  # math.exp overflows just above this


def _logg(x: float) -> float:
    """Natural log with the argument clamped below at 2."""
    return math.log(max(x, LOG_FLOOR))


def _safe_exp(x: float) -> float:
    if x > _EXP_MAX:
        return math.inf
    if x < -_EXP_MAX:
        return 0.0
    return math.exp(x)


@dataclass(frozen=True)
class ParamTriple:
    """Instance data (N, delta, K) with N >= 1, 0 < delta <= 1, K >= 1."""

    N: float
    delta: float
    K: float

    def __post_init__(self) -> None:
        if not (self.N >= 1 and 0 < self.delta <= 1 and self.K >= 1):
            raise ValueError(f"invalid triple {(self.N, self.delta, self.K)}")

    @property
    def kdelta(self) -> float:
        return self.K / self.delta

    @property
    def log_N(self) -> float:
        return math.log(self.N)


@dataclass(frozen=True)
class PairValue:
    """A (psi, phi) evaluation; log fields are exact companions of the
    clamped values, raw fields keep the unclamped formula logs."""

    psi: float
    phi: float
    formula: str  # trivial | freiman | better | strong
    log_psi: float
    log_phi: float
    log_psi_raw: float
    log_phi_raw: float


def _make_pair(log_psi_raw: float, log_phi_raw: float, t: ParamTriple, formula: str) -> PairValue:
    log_phi = min(log_phi_raw, math.log(t.delta) + t.log_N)
    log_psi = max(log_psi_raw, 0.0)
    return PairValue(
        psi=_safe_exp(log_psi),
        phi=_safe_exp(log_phi),
        formula=formula,
        log_psi=log_psi,
        log_phi=log_phi,
        log_psi_raw=log_psi_raw,
        log_phi_raw=log_phi_raw,
    )


def trivial_pair(t: ParamTriple) -> PairValue:
    """psi = N, phi = delta*N: always valid, never informative."""
    return _make_pair(t.log_N, math.log(t.delta) + t.log_N, t, "trivial")


def freiman_pair(t: ParamTriple, C: float = 1.0) -> PairValue:
    """psi = min(exp((K/delta)^C), N), phi = (delta/K)^C * N."""
    try:
        growth = (t.K / t.delta) ** C
    except OverflowError:
        growth = math.inf
    log_psi = min(growth, t.log_N)
    log_phi = C * (math.log(t.delta) - math.log(t.K)) + t.log_N
    return _make_pair(log_psi, log_phi, t, "freiman")


def _better_logs(t: ParamTriple, C: float, gamma: float, guarded: bool) -> tuple[float, float]:
    lk = math.log(max(t.kdelta, LOG_FLOOR)) if guarded else math.log(t.kdelta)
    ll = math.log(lk)
    if guarded:
        ll = max(ll, 1.0)
    log_phi = C * ll * (math.log(t.delta) - math.log(t.K)) + t.log_N
    log_psi = max(math.log(t.kdelta), 0.0) ** (C / gamma) + gamma * t.log_N
    return log_psi, log_phi


def better_pair(t: ParamTriple, C: float = 1.0, gamma: float = 0.25) -> PairValue:
    """phi = (delta/K)^(C loglog(K/delta)) N, psi = exp(log(K/delta)^(C/gamma)) N^gamma.

    Requires K/delta >= e^e so the loglog exponent is at least one.
    """
    if t.kdelta < E_TO_E:
        raise DomainGuardError(f"K/delta = {t.kdelta} below the e^e domain edge")
    log_psi, log_phi = _better_logs(t, C, gamma, guarded=False)
    return _make_pair(log_psi, log_phi, t, "better")


@dataclass(frozen=True)
class StrongPairConstants:
    """Constants for the strong pair; B3 > B2 > B1 and A2, A3 > A1 are
    required by the two-child contraction, Nbar is the bootstrap threshold
    below which the loglog-improved formulas are used instead."""

    tau: float = 0.125
    gamma: float = 0.125
    A1: float = 1.0
    A2: float = 100.0
    A3: float = 750.0
    B1: float = 1.0
    B2: float = 25.0
    B3: float = 180.0
    Nbar: float = 1e6
    bootstrap_C: float = 1.0

    def __post_init__(self) -> None:
        if not (0 < self.tau < 0.5 and 0 < self.gamma < 0.5):
            raise ValueError("tau and gamma must lie in (0, 1/2)")
        if not (self.B3 > self.B2 > self.B1 > 0):
            raise ValueError("need B3 > B2 > B1 > 0")
        if not (self.A2 > self.A1 > 0 and self.A3 > self.A1):
            raise ValueError("need A2, A3 > A1 > 0")
        if self.Nbar <= math.exp(math.e):
            raise ValueError("Nbar must exceed e^e")


DEFAULT_STRONG_CONSTANTS = StrongPairConstants()


def strong_pair(t: ParamTriple, k: StrongPairConstants = DEFAULT_STRONG_CONSTANTS) -> PairValue:
    """phi = K^-A1 delta^(A2 llN) e^(A3 llN^2) N^(1-tau) and the psi
    counterpart, for N above the bootstrap threshold; below it the
    loglog-improved formulas (with guarded loglog) apply instead."""
    if t.N <= math.exp(math.e):
        raise DomainGuardError(f"N = {t.N} must exceed e^e")
    if t.N <= k.Nbar:
        log_psi, log_phi = _better_logs(t, k.bootstrap_C, k.gamma, guarded=True)
        return _make_pair(log_psi, log_phi, t, "strong")
    lln = math.log(math.log(t.N))
    ld, lk = math.log(t.delta), math.log(t.K)
    log_phi = -k.A1 * lk + k.A2 * lln * ld + k.A3 * lln * lln + (1 - k.tau) * t.log_N
    log_psi = k.B1 * lk - k.B2 * lln * ld - k.B3 * lln * lln + k.gamma * t.log_N
    return _make_pair(log_psi, log_phi, t, "strong")


def strong_pair_branches(
    t: ParamTriple, k: StrongPairConstants = DEFAULT_STRONG_CONSTANTS
) -> dict:
    """Evaluate both branches at a triple and flag which phi dominates."""
    bootstrap = _make_pair(*_better_logs(t, k.bootstrap_C, k.gamma, guarded=True), t, "strong")
    lln = math.log(math.log(t.N))
    ld, lk = math.log(t.delta), math.log(t.K)
    asymptotic = _make_pair(
        k.B1 * lk - k.B2 * lln * ld - k.B3 * lln * lln + k.gamma * t.log_N,
        -k.A1 * lk + k.A2 * lln * ld + k.A3 * lln * lln + (1 - k.tau) * t.log_N,
        t,
        "strong",
    )
    return {
        "bootstrap": bootstrap,
        "asymptotic": asymptotic,
        "used": "bootstrap" if t.N <= k.Nbar else "asymptotic",
        "phi_dominant": "bootstrap" if bootstrap.log_phi >= asymptotic.log_phi else "asymptotic",
    }


@dataclass(frozen=True)
class ContractionReport:
    """The two-child contraction factors u, v (in logs) at one (N, delta)."""

    log_u_phi: float
    log_v_phi: float
    log_u_psi: float
    log_v_psi: float

    @property
    def phi_ok(self) -> bool:  # need u*v >= 1
        return self.log_u_phi + self.log_v_phi >= -1e-9

    @property
    def psi_ok(self) -> bool:  # need u*v <= 1
        return self.log_u_psi + self.log_v_psi <= 1e-9


def strong_contraction(
    k: StrongPairConstants, n_value: float, delta: float
) -> ContractionReport:
    """Loss/gain factors when one scale splits into two half scales:

      u_phi = (log N)^(-10 A1 - 6 A2 llN - 40) e^(0.9 A3 llN^2)
      v_phi = delta^(14 A1 - log(20/11) A2 + 40)

    and the mirrored psi pair.  The strong pair is self-improving when
    u*v >= 1 for phi and u*v <= 1 for psi across the working grid.
    """
    lln = math.log(math.log(n_value))
    ld = math.log(delta)
    c2011 = math.log(20 / 11)
    return ContractionReport(
        log_u_phi=-(10 * k.A1 + 6 * k.A2 * lln + 40) * lln + 0.9 * k.A3 * lln * lln,
        log_v_phi=(14 * k.A1 - c2011 * k.A2 + 40) * ld,
        log_u_psi=(10 * k.B1 + 6 * k.B2 * lln) * lln - 0.9 * k.B3 * lln * lln,
        log_v_psi=(-14 * k.B1 + c2011 * k.B2) * ld,
    )


@dataclass(frozen=True)
class ExponentReport:
    Lambda: float
    energy_exponent: float


def theorem1_exponent(k: StrongPairConstants, K: float = 1.0) -> ExponentReport:
    """Final exponents: Lambda = 2 B1 + 8 + 4 A1 on K, and 2 + 8 tau + gamma
    on the set size."""
    return ExponentReport(
        Lambda=2 * k.B1 + 8 + 4 * k.A1,
        energy_exponent=2 + 8 * k.tau + k.gamma,
    )


def split_target_gamma(gamma_total: float) -> tuple[float, float]:
    """Equal split of a target excess: tau = g/16, gamma = g/2 gives
    8 tau + gamma = gamma_total exactly."""
    return gamma_total / 16, gamma_total / 2


# ---------------------------------------------------------------------------
# one recursion step: extremize pair products over the constraint region
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintRegion:
    """Derived bounds for the child parameters of a parent triple."""

    nn_low: float  # N' N'' >= nn_low
    nn_high: float  # N' N'' <= N
    sum_high: float  # N' + N'' <= sum_high
    kk_high: float  # K' K'' <= kk_high
    dd_low: float  # delta' delta'' >= dd_low


def constraint_region(t: ParamTriple, C: float, c: float) -> ConstraintRegion:
    lkd = _logg(t.kdelta)
    try:
        sum_high = C * t.delta**-45 * t.K**11 * math.sqrt(t.N)
    except OverflowError:
        sum_high = math.inf
    return ConstraintRegion(
        nn_low=c * t.delta**7 * lkd**-22 * t.N,
        nn_high=t.N,
        sum_high=sum_high,
        kk_high=C * t.K * _logg(t.K) ** 8 / t.delta**11,
        dd_low=c * t.delta / lkd**6,
    )


def _log_grid(lo: float, hi: float, points: int) -> list[float]:
    if hi < lo:
        return []
    if points == 1 or hi == lo:
        return [lo]
    llo, lhi = math.log(lo), math.log(hi)
    return [math.exp(llo + i * (lhi - llo) / (points - 1)) for i in range(points)]


@dataclass(frozen=True)
class InductionReport:
    pair: PairValue
    psi_children: tuple[ParamTriple, ParamTriple]
    phi_children: tuple[ParamTriple, ParamTriple]
    feasible_points: int
    grid_points: int


def induction_step(
    child: Callable[[ParamTriple], PairValue],
    t: ParamTriple,
    C: float = 32.0,
    c: float = 1e-4,
    points: int = 33,
) -> InductionReport:
    """psi* = C max psi(N',d',K') psi(N'',d'',K'') and phi* = min phi phi''
    over the constrained split region, by grid search.

    The grid ranges over (N', delta', K'); the second child sits at the
    binding boundary for each objective (largest N'' and K'', smallest
    delta'' for psi; smallest N'' for phi).  Extremization is approximate by
    construction: values are grid extrema, reported as such.
    """
    region = constraint_region(t, C, c)
    if region.kk_high < 1 or region.dd_low > 1 or region.nn_low > region.nn_high:
        raise EmptyFeasibleRegionError(f"constraints admit no split of {t}")

    n_grid = _log_grid(max(1.0, region.nn_low / t.N), min(t.N, region.sum_high), points)
    d_grid = _log_grid(min(region.dd_low, 1.0), 1.0, points)
    k_grid = _log_grid(1.0, region.kk_high, points)

    best_psi = -math.inf
    best_phi = math.inf
    arg_psi: tuple[ParamTriple, ParamTriple] | None = None
    arg_phi: tuple[ParamTriple, ParamTriple] | None = None
    feasible = 0
    log_c_mult = math.log(C)

    for n1 in n_grid:
        nn2_hi = min(t.N / n1, region.sum_high - n1)
        nn2_lo = max(1.0, region.nn_low / n1)
        if nn2_hi < 1.0 or nn2_lo > min(t.N / n1, region.sum_high - n1):
            continue
        for d1 in d_grid:
            d2 = min(region.dd_low / d1, 1.0)
            if d2 > 1.0:
                continue
            for k1 in k_grid:
                k2 = max(region.kk_high / k1, 1.0)
                feasible += 1
                try:
                    left = child(ParamTriple(n1, d1, k1))
                    right_hi = child(ParamTriple(nn2_hi, d2, k2))
                    val_psi = log_c_mult + left.log_psi + right_hi.log_psi
                    if val_psi > best_psi:
                        best_psi = val_psi
                        arg_psi = (ParamTriple(n1, d1, k1), ParamTriple(nn2_hi, d2, k2))
                    right_lo = child(ParamTriple(nn2_lo, d2, k2))
                    val_phi = left.log_phi + right_lo.log_phi
                    if val_phi < best_phi:
                        best_phi = val_phi
                        arg_phi = (ParamTriple(n1, d1, k1), ParamTriple(nn2_lo, d2, k2))
                except DomainGuardError:
                    continue

    if arg_psi is None or arg_phi is None:
        raise EmptyFeasibleRegionError(f"no feasible grid point for {t}")
    probe = child(arg_psi[0])
    pair = PairValue(
        psi=_safe_exp(best_psi),
        phi=_safe_exp(best_phi),
        formula=probe.formula,
        log_psi=best_psi,
        log_phi=best_phi,
        log_psi_raw=best_psi,
        log_phi_raw=best_phi,
    )
    return InductionReport(pair, arg_psi, arg_phi, feasible, len(n_grid) * len(d_grid) * len(k_grid))


# ---------------------------------------------------------------------------
# binary tree with adversarial boundary splits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeNode:
    index: str  # bit string; "" at the root
    data: ParamTriple
    children: tuple["TreeNode", "TreeNode"] | None = None


def _check_child_constraints(parent: ParamTriple, c0: ParamTriple, c1: ParamTriple,
                             C: float, c: float) -> None:
    region = constraint_region(parent, C, c)
    tol = 1 + 1e-9
    ok = (
        region.nn_low / tol <= c0.N * c1.N <= region.nn_high * tol
        and c0.N + c1.N <= region.sum_high * tol
        and c0.K * c1.K <= region.kk_high * tol
        and c0.delta * c1.delta * tol >= region.dd_low
    )
    if not ok:
        raise EmptyFeasibleRegionError(
            f"boundary children of {parent} violate the split constraints"
        )


def _split_node(t: ParamTriple, C: float, c: float) -> tuple[ParamTriple, ParamTriple]:
    """Even split at the adversarial boundary: minimal N and delta products,
    maximal K product."""
    if t.kdelta < 2:
        raise DomainGuardError(f"K/delta = {t.kdelta} < 2 at a tree node")
    region = constraint_region(t, C, c)
    n_c = max(math.sqrt(region.nn_low), 1.0)
    d_c = min(math.sqrt(region.dd_low), 1.0)
    k_c = max(math.sqrt(region.kk_high), 1.0)
    child = ParamTriple(n_c, d_c, k_c)
    _check_child_constraints(t, child, child, C, c)
    return child, child


def _build_tree(index: str, t: ParamTriple, depth: int, C: float, c: float) -> TreeNode:
    if depth == 0:
        return TreeNode(index, t)
    c0, c1 = _split_node(t, C, c)
    return TreeNode(
        index,
        t,
        (
            _build_tree(index + "0", c0, depth - 1, C, c),
            _build_tree(index + "1", c1, depth - 1, C, c),
        ),
    )


@dataclass(frozen=True)
class LevelReport:
    level: int
    sum_log_delta: float
    sum_log_K: float
    sum_log_N: float
    max_log_kdelta: float
    delta_product: dict
    k_product: dict
    n_product: dict
    kdelta_bound: dict


@dataclass(frozen=True)
class TreeReport:
    root: TreeNode
    levels: tuple[LevelReport, ...]
    leaf_log_phi_product: float
    leaf_log_psi_product: float
    closed_log_phi: float | None
    closed_log_psi: float | None
    all_bounds_pass: bool

    def to_json(self) -> dict:
        def node_json(n: TreeNode) -> dict:
            out = {"index": n.index, "N": n.data.N, "delta": n.data.delta, "K": n.data.K}
            if n.children:
                out["children"] = [node_json(ch) for ch in n.children]
            return out

        return {
            "tree": node_json(self.root),
            "levels": [
                {
                    "level": lv.level,
                    "sum_log_delta": lv.sum_log_delta,
                    "sum_log_K": lv.sum_log_K,
                    "sum_log_N": lv.sum_log_N,
                    "max_log_kdelta": lv.max_log_kdelta,
                    "delta_product": lv.delta_product,
                    "k_product": lv.k_product,
                    "n_product": lv.n_product,
                    "kdelta_bound": lv.kdelta_bound,
                }
                for lv in self.levels
            ],
            "leaf_log_phi_product": self.leaf_log_phi_product,
            "leaf_log_psi_product": self.leaf_log_psi_product,
            "closed_log_phi": self.closed_log_phi,
            "closed_log_psi": self.closed_log_psi,
            "all_bounds_pass": self.all_bounds_pass,
        }


def tree_simulate(
    t: ParamTriple,
    depth: int,
    C: float = 1.0,
    c: float = 1.0,
    leaf_C: float = 1.0,
    gamma: float = 0.25,
) -> TreeReport:
    """Build the depth-l tree with adversarial splits and verify, at every
    level, the product bounds for delta, K and N and the per-node
    log(K/delta) bound (in log space, so deep levels cannot overflow).

    Leaf products of the exponential small-doubling pair are compared with
    the loglog-improved closed forms at the root for reference.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    root = _build_tree("", t, depth, C, c)

    levels: list[list[TreeNode]] = [[root]]
    for _ in range(depth):
        levels.append([ch for node in levels[-1] for ch in node.children])

    lkd_root = math.log(t.kdelta)
    llkd_root = math.log(lkd_root)
    ld_root = math.log(t.delta)
    log15 = math.log(15.0)
    reports = []
    all_pass = True
    for lvl in range(1, depth + 1):
        nodes = levels[lvl]
        width = 2**lvl
        s_d = sum(math.log(n.data.delta) for n in nodes)
        s_k = sum(math.log(n.data.K) for n in nodes)
        s_n = sum(math.log(n.data.N) for n in nodes)
        mx = max(math.log(n.data.kdelta) for n in nodes)
        d_bound = -6 * lvl * width * log15 - 6 * width * llkd_root + ld_root
        k_bound = 50 * lvl * width * log15 + 50 * width * llkd_root - 7 * lvl * ld_root + math.log(t.K)
        n_bound = -100 * lvl * width * log15 - 200 * width * llkd_root + 30 * lvl * ld_root + t.log_N
        kd_bound = 15**lvl * lkd_root
        rows = {
            "delta_product": {"measured": s_d, "bound": d_bound, "pass": s_d > d_bound},
            "k_product": {"measured": s_k, "bound": k_bound, "pass": s_k < k_bound},
            "n_product": {"measured": s_n, "bound": n_bound, "pass": s_n > n_bound},
            "kdelta_bound": {"measured": mx, "bound": kd_bound, "pass": mx < kd_bound},
        }
        all_pass = all_pass and all(r["pass"] for r in rows.values())
        reports.append(LevelReport(lvl, s_d, s_k, s_n, mx, **rows))

    leaf_phi = sum(freiman_pair(n.data, C=leaf_C).log_phi for n in levels[depth])
    leaf_psi = (2**depth) * math.log(max(C, 1.0)) + sum(
        freiman_pair(n.data, C=leaf_C).log_psi for n in levels[depth]
    )
    closed_phi = closed_psi = None
    if t.kdelta >= E_TO_E:
        closed = better_pair(t, C=leaf_C, gamma=gamma)
        closed_phi, closed_psi = closed.log_phi, closed.log_psi
    return TreeReport(
        root=root,
        levels=tuple(reports),
        leaf_log_phi_product=leaf_phi,
        leaf_log_psi_product=leaf_psi,
        closed_log_phi=closed_phi,
        closed_log_psi=closed_psi,
        all_bounds_pass=all_pass,
    )
