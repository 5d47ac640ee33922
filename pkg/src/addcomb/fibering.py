"""Refinement pipeline producing a subgraph with uniform fibers.

Given two lattice sets, a bipartite graph between them and a coordinate
split, the pipeline refines both sides and the graph until

  (1) all fibers on each side share a common scale within a factor of two,
  (2) the base graph is dense and every surviving base edge carries a fiber
      graph of a common size scale,
  (3) the normalized doubling constant of every fiber graph sits in a
      factor-two window, and the base doubling constant is measured exactly.

Stages: degree pruning, column filtering and fiber-size bucketing on the
right side, the symmetric treatment of the left side, fiber-graph-size
bucketing, and a doubling-constant cutoff plus bucketing.  Bucket selection
is dyadic pigeonholing: group by the dyadic interval [2^k, 2^(k+1)), keep the
bucket of maximal total mass, ties broken toward the larger exponent.

Thresholds use the measured input density and doubling constant.  Size and
density decisions are exact (integers and Fractions; doubling constants are
compared through their rational squares); only thresholds involving
logarithms go through floats, which keeps runs deterministic.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bigraph import BiGraph, cheap_regularize
from .errors import EmptyGraphError, EmptyOperandError, EmptySurvivorError
from .valuation import LatticeSet

Vec = tuple[int, ...]
LOG_FLOOR = 2.0


def _logg(x: float) -> float:
    """Natural log with the argument clamped below at 2."""
    return math.log(max(x, LOG_FLOOR))


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class ConstantsConfig:
    """Tunable absolute constants.

    ``c_small`` scales every lower-bound threshold (1 = literal constants;
    smaller values relax the pruning for small instances), ``C_big`` scales
    the doubling-constant cutoff.  The approximation factor for "same scale"
    windows is fixed at 2.
    """

    c_small: Fraction = Fraction(1)
    C_big: Fraction = Fraction(1)
    approx_factor: int = 2
    auto_swap: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "c_small", _as_fraction(self.c_small))
        object.__setattr__(self, "C_big", _as_fraction(self.C_big))
        if not (0 < self.c_small <= 1 <= self.C_big):
            raise ValueError("need 0 < c_small <= 1 <= C_big")
        if self.approx_factor != 2:
            raise ValueError("the approximation factor is fixed at 2")


DEFAULT_CONSTANTS = ConstantsConfig()


@dataclass(frozen=True)
class PigeonholeReport:
    exponent: int
    members: tuple[int, ...]
    mass: int


def dyadic_pigeonhole(weights: Sequence[int]) -> PigeonholeReport:
    """Bucket positive weights into dyadic ranges [2^k, 2^(k+1)) and return
    the bucket of maximal total mass (ties toward the larger exponent).

    The returned mass is at least total / (number of dyadic ranges between
    the smallest and largest weight), which is asserted.
    """
    if not weights:
        raise EmptyOperandError("dyadic pigeonhole needs at least one weight")
    if any(w < 1 for w in weights):
        raise ValueError("weights must be positive integers")
    buckets: dict[int, list[int]] = {}
    for idx, w in enumerate(weights):
        buckets.setdefault(w.bit_length() - 1, []).append(idx)
    best = max(buckets, key=lambda k: (sum(weights[i] for i in buckets[k]), k))
    mass = sum(weights[i] for i in buckets[best])
    span = (max(weights).bit_length()) - (min(weights).bit_length()) + 1
    assert mass * span >= sum(weights), "pigeonhole mass fell below total/span"
    return PigeonholeReport(best, tuple(buckets[best]), mass)


@dataclass
class StepRecord:
    name: str
    left: int
    right: int
    edges: int
    detail: dict = field(default_factory=dict)


@dataclass
class FiberingTrace:
    """Intermediate quantities of one pipeline run.

    When ``swapped`` is true the whole trace (including the input record) is
    stated in the swapped orientation, so per-side survivor counts stay
    non-increasing from step to step.
    """

    config: ConstantsConfig
    steps: list[StepRecord] = field(default_factory=list)
    n1: int | None = None
    swapped: bool = False
    degenerate_split: str | None = None

    def record(self, name: str, left: int, right: int, edges: int, **detail) -> None:
        self.steps.append(StepRecord(name, left, right, edges, detail))

    def counts_non_increasing(self) -> bool:
        seq = [(s.left, s.right, s.edges) for s in self.steps]
        return all(
            a[0] >= b[0] and a[1] >= b[1] and a[2] >= b[2] for a, b in zip(seq, seq[1:])
        )

    def to_json(self) -> dict:
        return {
            "n1": self.n1,
            "swapped": self.swapped,
            "degenerate_split": self.degenerate_split,
            "steps": [
                {
                    "name": s.name,
                    "left": s.left,
                    "right": s.right,
                    "edges": s.edges,
                    "detail": {k: _jsonable(v) for k, v in s.detail.items()},
                }
                for s in self.steps
            ],
        }


def _jsonable(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


@dataclass(frozen=True)
class FiberingDecomposition:
    """The certified output: refined sides, refined graph, and the scales
    (M1, m1, M2, m2), densities (delta1, delta2) and doubling constants
    (K1, K2) of its base/fiber structure.

    Doubling constants are square roots of rationals; their exact squares are
    stored and the float values exposed as properties.
    """

    refined_left: LatticeSet
    refined_right: LatticeSet
    graph: BiGraph
    coords_i: tuple[int, ...]
    coords_j: tuple[int, ...]
    M1: int
    m1: int
    M2: int
    m2: int
    delta1: Fraction
    delta2: Fraction
    k1_sq: Fraction
    k2_sq: Fraction
    input_left_size: int
    input_right_size: int
    input_density: Fraction
    input_doubling_sq: Fraction

    @property
    def k1(self) -> float:
        return math.sqrt(float(self.k1_sq))

    @property
    def k2(self) -> float:
        return math.sqrt(float(self.k2_sq))

    @property
    def input_doubling(self) -> float:
        return math.sqrt(float(self.input_doubling_sq))

    def base(self) -> BiGraph:
        from .bigraph import base_graph

        return base_graph(self.graph, self.coords_i)

    def _fiber_stats(self):
        left_fibs = self.refined_left.fibers(self.coords_i)
        right_fibs = self.refined_right.fibers(self.coords_i)
        per_edge = []
        groups: dict[tuple[Vec, Vec], list[tuple[Vec, Vec]]] = {}
        ci, cj = self.coords_i, self.coords_j
        for u, v in self.graph.edge_members():
            key = (tuple(u[c] for c in ci), tuple(v[c] for c in ci))
            groups.setdefault(key, []).append(
                (tuple(u[c] for c in cj), tuple(v[c] for c in cj))
            )
        for (bx, by), pairs in sorted(groups.items()):
            sums = {tuple(a + b for a, b in zip(x, y)) for x, y in pairs}
            sz_l = len(left_fibs[bx])
            sz_r = len(right_fibs[by])
            per_edge.append(
                {
                    "base": (bx, by),
                    "fiber_edges": len(pairs),
                    "k_plus_sq": Fraction(len(sums) ** 2, sz_l * sz_r),
                }
            )
        return left_fibs, right_fibs, per_edge

    def verify(self, cfg: ConstantsConfig = DEFAULT_CONSTANTS) -> dict:
        """Check every structural conclusion exactly and report the
        quantitative constant inequalities with measured slack."""
        left_fibs, right_fibs, per_edge = self._fiber_stats()
        base = self.base()

        ok_sizes = (
            len(left_fibs) == self.M1
            and len(right_fibs) == self.M2
            and all(self.m1 <= len(f) <= 2 * self.m1 for f in left_fibs.values())
            and all(self.m2 <= len(f) <= 2 * self.m2 for f in right_fibs.values())
        )
        ok_graph = (
            len(base.edges) >= self.delta1 * self.M1 * self.M2
            and all(e["fiber_edges"] >= self.delta2 * self.m1 * self.m2 for e in per_edge)
        )
        base_sum = len(base.graph_sumset())
        ok_doubling = Fraction(base_sum * base_sum, self.M1 * self.M2) == self.k1_sq and all(
            self.k2_sq <= e["k_plus_sq"] <= 4 * self.k2_sq for e in per_edge
        )

        n1_, n2_ = self.input_left_size, self.input_right_size
        delta_f = float(self.input_density)
        k_f = self.input_doubling
        log_kd = _logg(k_f / delta_f)
        c = float(cfg.c_small)
        big = float(cfg.C_big)

        def ge_row(lhs: float, rhs: float) -> dict:
            return {"pass": lhs >= rhs, "measured": lhs, "bound": rhs,
                    "slack": lhs / rhs if rhs > 0 else math.inf}

        def le_row(lhs: float, rhs: float) -> dict:
            return {"pass": lhs <= rhs, "measured": lhs, "bound": rhs,
                    "slack": rhs / lhs if lhs > 0 else math.inf}

        return {
            "(1) uniform_fiber_size": {"pass": ok_sizes, "M1": self.M1, "m1": self.m1,
                                       "M2": self.M2, "m2": self.m2},
            "(2) uniform_graph_fibering": {"pass": ok_graph, "delta1": self.delta1,
                                           "delta2": self.delta2,
                                           "base_edges": len(base.edges)},
            "(3) bounded_doubling": {"pass": ok_doubling, "k1_sq": self.k1_sq,
                                     "k2_sq": self.k2_sq},
            "set_mass_left": ge_row(self.M1 * self.m1, c * n1_ * delta_f**2 / log_kd),
            "set_mass_right": ge_row(self.M2 * self.m2, c * n2_ * delta_f**2 / log_kd),
            "density_product": ge_row(float(self.delta1 * self.delta2),
                                      c * delta_f / log_kd**3),
            "doubling_product": le_row(self.k1 * self.k2,
                                       big * k_f * _logg(k_f) / delta_f**2),
        }

    def conclusions_pass(self, cfg: ConstantsConfig = DEFAULT_CONSTANTS) -> bool:
        table = self.verify(cfg)
        return all(
            table[k]["pass"]
            for k in ("(1) uniform_fiber_size", "(2) uniform_graph_fibering",
                      "(3) bounded_doubling")
        )

    def to_json(self) -> dict:
        return {
            "split": {"I": list(self.coords_i), "J": list(self.coords_j)},
            "left": self.refined_left.to_json(),
            "right": self.refined_right.to_json(),
            "graph_edges": sorted([list(u), list(v)] for u, v in self.graph.edge_members()),
            "M1": self.M1, "m1": self.m1, "M2": self.M2, "m2": self.m2,
            "delta1": _jsonable(self.delta1), "delta2": _jsonable(self.delta2),
            "k1_sq": _jsonable(self.k1_sq), "k2_sq": _jsonable(self.k2_sq),
            "k1": self.k1, "k2": self.k2,
        }


def _proj(v: Vec, coords: Sequence[int]) -> Vec:
    return tuple(v[c] for c in coords)


def _fiber_map(vectors, coords) -> dict[Vec, list[Vec]]:
    out: dict[Vec, list[Vec]] = {}
    for v in sorted(vectors):
        out.setdefault(_proj(v, coords), []).append(v)
    return out


def fiber_profile(a1: LatticeSet, a2: LatticeSet) -> list[int]:
    """f(t) = max fiber size of a1 + max fiber size of a2 over the length-t
    prefix projection, for t = 0 .. dim."""
    if a1.dim != a2.dim:
        raise ValueError("sets must share a coordinate dimension")
    out = []
    for t in range(a1.dim + 1):
        prefix = tuple(range(t))
        f1 = max(len(f) for f in _fiber_map(a1.vectors, prefix).values())
        f2 = max(len(f) for f in _fiber_map(a2.vectors, prefix).values())
        out.append(f1 + f2)
    return out


def choose_split(a1: LatticeSet, a2: LatticeSet) -> int:
    """Largest prefix length t with f(t) >= (|a1||a2|)^(1/4).

    f is non-increasing and f(0) = |a1| + |a2| always clears the threshold,
    so the result is well defined; 0 is a valid (trivial split) answer and is
    returned directly when both sets are singletons.
    """
    if len(a1) == 0 or len(a2) == 0:
        raise EmptyOperandError("split selection needs non-empty sets")
    if len(a1) == 1 and len(a2) == 1:
        return 0
    n_total = len(a1) * len(a2)
    profile = fiber_profile(a1, a2)
    for t in range(a1.dim, -1, -1):
        if profile[t] ** 4 >= n_total:
            return t
    return 0


def prefix_split(t: int, dim: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return tuple(range(t)), tuple(range(t, dim))


def _sq_exponent(q: Fraction) -> int:
    """k with 4^k <= q < 4^(k+1), exact."""
    k = 0
    if q >= 1:
        while q >= 4:
            q /= 4
            k += 1
    else:
        while q < 1:
            q *= 4
            k -= 1
    return k


def _select_bucket(entries, key_exponent, mass):
    """Group entries by dyadic exponent, return (exponent, [entries], total
    mass) for the bucket of maximal mass, ties toward the larger exponent."""
    buckets: dict[int, list] = {}
    for e in entries:
        buckets.setdefault(key_exponent(e), []).append(e)
    best = max(buckets, key=lambda k: (sum(mass(e) for e in buckets[k]), k))
    return best, buckets[best], sum(mass(e) for e in buckets[best])


def fibering_lemma(
    a1: LatticeSet,
    a2: LatticeSet,
    g: BiGraph,
    coords: Sequence[int] | None = None,
    cfg: ConstantsConfig = DEFAULT_CONSTANTS,
) -> tuple[FiberingDecomposition, FiberingTrace]:
    """Run the full refinement pipeline for the given coordinate split.

    With ``coords=None`` the split is the prefix selected by
    :func:`choose_split`.  The returned decomposition has passed its own
    structural verification; the quantitative constant checks are available
    through ``decomposition.verify(cfg)``.
    """
    if not g.edges:
        raise EmptyGraphError("pipeline needs a non-empty graph")
    if g.left.vectors != a1.vectors or g.right.vectors != a2.vectors:
        raise ValueError("graph carriers must match the supplied lattice sets")
    if a1.index != a2.index:
        raise ValueError("lattice sets must share a prime index")
    if coords is None:
        coords = prefix_split(choose_split(a1, a2), a1.dim)[0]
    ci = tuple(coords)
    cj = a1.complement(ci)
    trace = FiberingTrace(config=cfg)
    if len(ci) == 0:
        trace.degenerate_split = "trivial base: all coordinates in the fiber part"
    elif len(cj) == 0:
        trace.degenerate_split = "trivial fibers: all coordinates in the base part"

    n1_in, n2_in = len(a1), len(a2)
    e_in = len(g.edges)
    delta = Fraction(e_in, n1_in * n2_in)
    s_in = len(g.graph_sumset())
    k_sq = Fraction(s_in * s_in, n1_in * n2_in)
    k_f = math.sqrt(float(k_sq))
    delta_f = float(delta)
    trace.record("input", n1_in, n2_in, e_in, delta=delta, k_sq=k_sq)

    reg = cheap_regularize(g)
    left = list(reg.graph.left.vectors)
    right = list(reg.graph.right.vectors)
    edges = set(reg.graph.edge_members())
    trace.record("degree_prune", len(left), len(right), len(edges))

    swapped = False
    if cfg.auto_swap:
        max_l = max(len(f) for f in _fiber_map(left, ci).values())
        max_r = max(len(f) for f in _fiber_map(right, ci).values())
        if max_r > max_l:
            swapped = True
            left, right = right, left
            edges = {(v, u) for u, v in edges}
            for rec in trace.steps:  # restate earlier records in pipeline orientation
                rec.left, rec.right = rec.right, rec.left
    trace.swapped = swapped

    # --- right side: column filter, small-fiber prune, size bucket -------
    fibs_l = _fiber_map(left, ci)
    n1 = max(len(f) for f in fibs_l.values())
    xstar = min(b for b, f in fibs_l.items() if len(f) == n1)
    column = set(fibs_l[xstar])
    col_deg = Counter(v for u, v in edges if u in column)
    # keep right vertices with column degree >= delta/8 * n1
    right_f = [v for v in right if 8 * col_deg.get(v, 0) * n1_in * n2_in >= e_in * n1]
    if not right_f:
        raise EmptySurvivorError("column filter removed every right vertex")
    edges = {(u, v) for u, v in edges if v in set(right_f)}
    trace.n1 = n1
    trace.record("right_column_filter", len(left), len(right_f), len(edges),
                 n1=n1, base_point=list(xstar))

    thr1 = cfg.c_small * delta**5 * n1 / (10**4 * k_sq)
    fibs_r = {b: f for b, f in _fiber_map(right_f, ci).items() if len(f) > thr1}
    if not fibs_r:
        raise EmptySurvivorError("small-fiber prune removed every right fiber")
    kept = [v for f in fibs_r.values() for v in f]
    edges = {(u, v) for u, v in edges if v in set(kept)}
    trace.record("right_fiber_prune", len(left), len(kept), len(edges), threshold=float(thr1))

    exp_r, bucket_r, mass_r = _select_bucket(
        sorted(fibs_r.items()), lambda e: len(e[1]).bit_length() - 1, lambda e: len(e[1])
    )
    m2 = min(len(f) for _, f in bucket_r)
    right2 = [v for _, f in sorted(bucket_r) for v in f]
    right2_set = set(right2)
    edges = {(u, v) for u, v in edges if v in right2_set}
    if not edges:
        raise EmptySurvivorError("right fiber bucket left no edges")
    trace.record("right_fiber_bucket", len(left), len(right2), len(edges),
                 exponent=exp_r, mass=mass_r, m2=m2)

    # --- left side: small-fiber prune, size bucket weighted by edges -----
    # keep left fibers with size > c * 1e-5 * delta^2 * m2 / K, compared via squares
    rhs2 = (cfg.c_small * delta**2 * m2) ** 2
    fibs_l2 = {
        b: f
        for b, f in _fiber_map(left, ci).items()
        if Fraction(len(f) ** 2) * k_sq * 10**10 > rhs2
    }
    if not fibs_l2:
        raise EmptySurvivorError("small-fiber prune removed every left fiber")
    left_kept = [v for f in fibs_l2.values() for v in f]
    edges = {(u, v) for u, v in edges if u in set(left_kept)}
    trace.record("left_fiber_prune", len(left_kept), len(right2), len(edges))

    edge_mass = Counter()
    base_of = {u: _proj(u, ci) for u in left_kept}
    for u, v in edges:
        edge_mass[base_of[u]] += 1
    weighted = [(b, f, edge_mass.get(b, 0)) for b, f in sorted(fibs_l2.items())]
    if sum(w for _, _, w in weighted) == 0:
        raise EmptySurvivorError("no edges remain into the right bucket")
    exp_l, bucket_l, mass_l = _select_bucket(
        weighted, lambda e: len(e[1]).bit_length() - 1, lambda e: e[2]
    )
    m1 = min(len(f) for _, f, _ in bucket_l)
    left2 = [v for _, f, _ in sorted(bucket_l) for v in f]
    left2_set = set(left2)
    edges = {(u, v) for u, v in edges if u in left2_set}
    if not edges:
        raise EmptySurvivorError("left fiber bucket left no edges")
    trace.record("left_fiber_bucket", len(left2), len(right2), len(edges),
                 exponent=exp_l, mass=mass_l, m1=m1)

    # --- fiber graphs: size floor and size bucket ------------------------
    groups: dict[tuple[Vec, Vec], list[tuple[Vec, Vec]]] = {}
    for u, v in edges:
        key = (_proj(u, ci), _proj(v, ci))
        groups.setdefault(key, []).append((u, v))
    floor3 = float(cfg.c_small) * delta_f / (16.0 * _logg(k_f / delta_f)) * m1 * m2
    groups = {k: p for k, p in groups.items() if len(p) >= floor3}
    if not groups:
        raise EmptySurvivorError("fiber-graph floor removed every base edge")
    trace.record("fiber_graph_floor", len(left2), len(right2),
                 sum(len(p) for p in groups.values()), threshold=floor3)

    exp_g, bucket_g, mass_g = _select_bucket(
        sorted(groups.items()), lambda e: len(e[1]).bit_length() - 1, lambda e: len(e[1])
    )
    delta2 = Fraction(min(len(p) for _, p in bucket_g), m1 * m2)
    groups = dict(bucket_g)
    trace.record("fiber_graph_bucket", len(left2), len(right2),
                 sum(len(p) for p in groups.values()),
                 exponent=exp_g, mass=mass_g, delta2=delta2)

    # --- doubling constants: cutoff then bucket ---------------------------
    fibs_left2 = _fiber_map(left2, ci)
    fibs_right2 = _fiber_map(right2, ci)
    stats = []
    for (bx, by), pairs in sorted(groups.items()):
        sums = {tuple(a + b for a, b in zip(_proj(u, cj), _proj(v, cj))) for u, v in pairs}
        q = Fraction(len(sums) ** 2, len(fibs_left2[bx]) * len(fibs_right2[by]))
        stats.append(((bx, by), pairs, q))
    cutoff = float(cfg.C_big) * _logg(k_f / delta_f) ** 3 * delta_f ** (-10) * k_f
    surviving = [s for s in stats if float(s[2]) <= cutoff * cutoff]
    h_size = len(stats) - len(surviving)
    if not surviving:
        raise EmptySurvivorError("doubling cutoff removed every base edge")
    trace.record("doubling_cutoff", len(left2), len(right2),
                 sum(len(p) for _, p, _ in surviving), cutoff=cutoff, h_size=h_size)

    exp_k, bucket_k, mass_k = _select_bucket(
        surviving, lambda s: _sq_exponent(s[2]), lambda s: 1
    )
    k2_sq = min(s[2] for s in bucket_k)
    final_groups = {key: pairs for key, pairs, _ in bucket_k}
    final_edges = {e for pairs in final_groups.values() for e in pairs}
    trace.record("doubling_bucket", len(left2), len(right2), len(final_edges),
                 exponent=exp_k, mass=mass_k, k2_sq=k2_sq)

    if swapped:
        left2, right2 = right2, left2
        final_edges = {(v, u) for u, v in final_edges}
        fibs_left2, fibs_right2 = fibs_right2, fibs_left2
        m1, m2 = m2, m1
        base_pairs = {(by, bx) for bx, by in final_groups}
    else:
        base_pairs = set(final_groups)

    ref_left = LatticeSet(a1.index, tuple(sorted(set(left2))))
    ref_right = LatticeSet(a2.index, tuple(sorted(set(right2))))
    graph = BiGraph.from_member_pairs(ref_left, ref_right, sorted(final_edges))

    M1 = len(ref_left.project(ci))
    M2 = len(ref_right.project(ci))
    delta1 = Fraction(len(base_pairs), M1 * M2)
    base_sums = {tuple(x + y for x, y in zip(bx, by)) for bx, by in base_pairs}
    k1_sq = Fraction(len(base_sums) ** 2, M1 * M2)

    decomp = FiberingDecomposition(
        refined_left=ref_left,
        refined_right=ref_right,
        graph=graph,
        coords_i=ci,
        coords_j=cj,
        M1=M1,
        m1=m1,
        M2=M2,
        m2=m2,
        delta1=delta1,
        delta2=delta2,
        k1_sq=k1_sq,
        k2_sq=k2_sq,
        input_left_size=n1_in,
        input_right_size=n2_in,
        input_density=delta,
        input_doubling_sq=k_sq,
    )
    assert decomp.conclusions_pass(cfg), "pipeline produced an unverified decomposition"
    assert trace.counts_non_increasing(), "survivor counts increased across steps"
    return decomp, trace
