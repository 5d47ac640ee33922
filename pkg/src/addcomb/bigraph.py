"""Bipartite graphs over integer or lattice vertex sets.

Edges are stored as index pairs into the two sorted vertex sequences, which
keeps carriers immutable and serialization positional.  Besides degrees and
restricted sumsets, the module implements iterative low-degree pruning with
its exact minimum-degree and size guarantees, and coordinate fiberings of
lattice graphs (base graph over a projection, fiber graphs over base points).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

from .errors import BasePointError, EmptyGraphError
from .intset import FiniteIntSet
from .valuation import LatticeSet

Side = Union[FiniteIntSet, LatticeSet]


def _members(side: Side) -> tuple:
    if isinstance(side, FiniteIntSet):
        return side.elements
    return side.vectors


def _subset(side: Side, keep: Sequence[int]) -> Side:
    keep = sorted(keep)
    if isinstance(side, FiniteIntSet):
        return FiniteIntSet(tuple(side.elements[i] for i in keep))
    vecs = tuple(side.vectors[i] for i in keep)
    src = None
    if side.source is not None:
        src = FiniteIntSet(tuple(side.source.elements[i] for i in keep))
    return LatticeSet(side.index, vecs, source=src)


def _side_to_json(side: Side):
    if isinstance(side, FiniteIntSet):
        return side.to_json()
    return side.to_json()


def _side_from_json(data) -> Side:
    if isinstance(data, dict):
        return LatticeSet.from_json(data)
    if data and isinstance(data[0], list):
        return LatticeSet.from_vectors(data)
    return FiniteIntSet.from_iterable(data)


@dataclass(frozen=True)
class BiGraph:
    """A bipartite edge set between two vertex carriers."""

    left: Side
    right: Side
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        nl, nr = len(_members(self.left)), len(_members(self.right))
        for i, j in self.edges:
            if not (0 <= i < nl and 0 <= j < nr):
                raise IndexError(f"edge ({i}, {j}) out of range for sides {nl} x {nr}")

    @classmethod
    def complete(cls, left: Side, right: Side) -> "BiGraph":
        nl, nr = len(_members(left)), len(_members(right))
        return cls(left, right, frozenset((i, j) for i in range(nl) for j in range(nr)))

    @classmethod
    def from_index_pairs(cls, left: Side, right: Side, pairs: Iterable[tuple[int, int]]) -> "BiGraph":
        return cls(left, right, frozenset((int(i), int(j)) for i, j in pairs))

    @classmethod
    def from_member_pairs(cls, left: Side, right: Side, pairs: Iterable[tuple]) -> "BiGraph":
        li = {m: i for i, m in enumerate(_members(left))}
        ri = {m: i for i, m in enumerate(_members(right))}
        return cls(left, right, frozenset((li[u], ri[v]) for u, v in pairs))

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def density(self) -> Fraction:
        nl, nr = len(_members(self.left)), len(_members(self.right))
        if nl == 0 or nr == 0:
            raise EmptyGraphError("density of a graph with an empty side")
        return Fraction(len(self.edges), nl * nr)

    @cached_property
    def left_adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {}
        for i, j in self.edges:
            adj.setdefault(i, set()).add(j)
        return {i: frozenset(s) for i, s in adj.items()}

    @cached_property
    def right_adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {}
        for i, j in self.edges:
            adj.setdefault(j, set()).add(i)
        return {j: frozenset(s) for j, s in adj.items()}

    def left_degree(self, i: int) -> int:
        return len(self.left_adjacency.get(i, ()))

    def right_degree(self, j: int) -> int:
        return len(self.right_adjacency.get(j, ()))

    def edge_members(self) -> Iterator[tuple]:
        lm, rm = _members(self.left), _members(self.right)
        for i, j in sorted(self.edges):
            yield lm[i], rm[j]

    def transpose(self) -> "BiGraph":
        return BiGraph(self.right, self.left, frozenset((j, i) for i, j in self.edges))

    def graph_sumset(self) -> tuple:
        """Sorted distinct sums over edges; vector sums are componentwise."""
        lm, rm = _members(self.left), _members(self.right)
        if lm and isinstance(lm[0], tuple):
            sums = {tuple(x + y for x, y in zip(lm[i], rm[j])) for i, j in self.edges}
        else:
            sums = {lm[i] + rm[j] for i, j in self.edges}
        return tuple(sorted(sums))

    def to_json(self) -> dict:
        return {
            "left": _side_to_json(self.left),
            "right": _side_to_json(self.right),
            "edges": sorted([i, j] for i, j in self.edges),
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "BiGraph":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_index_pairs(
            _side_from_json(data["left"]), _side_from_json(data["right"]), data["edges"]
        )


@dataclass(frozen=True)
class RegularizedGraph:
    """Survivors of iterative low-degree pruning, with the input statistics
    needed to restate the pruning guarantees exactly."""

    graph: BiGraph
    input_density: Fraction
    left_original: int
    right_original: int
    input_edges: int

    @property
    def sub_left(self) -> Side:
        return self.graph.left

    @property
    def sub_right(self) -> Side:
        return self.graph.right

    @property
    def sub_edges(self) -> frozenset[tuple[int, int]]:
        return self.graph.edges

    def conclusions(self) -> dict[str, bool]:
        """The five survivor guarantees, each checked with exact arithmetic:

        every left degree >= (delta/4)|Y0|, every right degree >= (delta/4)|X0|,
        |X'| >= (delta/2)|X0|, |Y'| >= (delta/2)|Y0|, |G'| >= (delta/2)|X0||Y0|.
        """
        g = self.graph
        e0, x0, y0 = self.input_edges, self.left_original, self.right_original
        nl, nr = len(_members(g.left)), len(_members(g.right))
        # delta/4 * Y0 = E0/(4 X0); comparisons cleared of denominators
        min_left = all(4 * g.left_degree(i) * x0 >= e0 for i in range(nl))
        min_right = all(4 * g.right_degree(j) * y0 >= e0 for j in range(nr))
        return {
            "min_left_degree": min_left,
            "min_right_degree": min_right,
            "left_size": 2 * nl * y0 >= e0,
            "right_size": 2 * nr * x0 >= e0,
            "edge_count": 2 * len(g.edges) >= e0,
        }


def cheap_regularize(g: BiGraph) -> RegularizedGraph:
    """Repeatedly delete vertices of degree below a quarter of the input
    average row/column mass until none remain.

    Passes alternate left then right in sorted vertex order; since deleting a
    left vertex only lowers right degrees, removing every currently
    under-degree vertex per pass is order-independent and deterministic.  The
    counting guarantee (at most half of all edges can ever be deleted) makes
    full wipe-out impossible; the five survivor inequalities are asserted on
    the output.
    """
    if not g.edges:
        raise EmptyGraphError("cannot regularize a graph with no edges")
    x0 = len(_members(g.left))
    y0 = len(_members(g.right))
    e0 = len(g.edges)
    adj_l: dict[int, set[int]] = {i: set(s) for i, s in g.left_adjacency.items()}
    adj_r: dict[int, set[int]] = {j: set(s) for j, s in g.right_adjacency.items()}
    alive_l = set(range(x0))
    alive_r = set(range(y0))

    changed = True
    while changed:
        changed = False
        # left threshold: deg >= delta/4 * Y0  <=>  4*deg*X0 >= E0
        for i in sorted(alive_l):
            if 4 * len(adj_l.get(i, ())) * x0 < e0:
                alive_l.discard(i)
                for j in adj_l.pop(i, ()):
                    adj_r[j].discard(i)
                changed = True
        for j in sorted(alive_r):
            if 4 * len(adj_r.get(j, ())) * y0 < e0:
                alive_r.discard(j)
                for i in adj_r.pop(j, ()):
                    adj_l[i].discard(j)
                changed = True

    keep_l = sorted(i for i in alive_l if adj_l.get(i))
    keep_r = sorted(j for j in alive_r if adj_r.get(j))
    assert keep_l and keep_r, "pruning emptied a side, impossible by edge counting"
    li = {i: k for k, i in enumerate(keep_l)}
    ri = {j: k for k, j in enumerate(keep_r)}
    edges = frozenset((li[i], ri[j]) for i in keep_l for j in adj_l[i])
    out = RegularizedGraph(
        graph=BiGraph(_subset(g.left, keep_l), _subset(g.right, keep_r), edges),
        input_density=g.density,
        left_original=x0,
        right_original=y0,
        input_edges=e0,
    )
    checks = out.conclusions()
    assert all(checks.values()), f"pruning guarantees violated: {checks}"
    return out


def _require_lattice(g: BiGraph) -> tuple[LatticeSet, LatticeSet]:
    if not isinstance(g.left, LatticeSet) or not isinstance(g.right, LatticeSet):
        raise TypeError("fibering operations need lattice vertex sets")
    return g.left, g.right


def base_graph(g: BiGraph, coords: Sequence[int]) -> BiGraph:
    """Project every edge to the given coordinates and deduplicate."""
    left, right = _require_lattice(g)
    lp = left.project(coords)
    rp = right.project(coords)
    cs = tuple(coords)
    li = {v: i for i, v in enumerate(lp.vectors)}
    ri = {v: i for i, v in enumerate(rp.vectors)}
    lm, rm = left.vectors, right.vectors
    edges = frozenset(
        (li[tuple(lm[i][c] for c in cs)], ri[tuple(rm[j][c] for c in cs)]) for i, j in g.edges
    )
    return BiGraph(lp, rp, edges)


def fiber_set(x: LatticeSet, coords: Sequence[int], base_point: Sequence[int]) -> LatticeSet:
    """The fiber of a lattice set over one base point of its projection."""
    return x.fiber(coords, base_point)


def fiber_graph(
    g: BiGraph, coords: Sequence[int], x: Sequence[int], y: Sequence[int]
) -> BiGraph:
    """Edges of ``g`` sitting over the base edge (x, y), expressed in the
    complementary coordinates; carriers are the two fiber sets."""
    left, right = _require_lattice(g)
    cs = tuple(coords)
    rest = left.complement(cs)
    bx, by = tuple(x), tuple(y)
    pairs = []
    for i, j in g.edges:
        u, v = left.vectors[i], right.vectors[j]
        if tuple(u[c] for c in cs) == bx and tuple(v[c] for c in cs) == by:
            pairs.append((tuple(u[c] for c in rest), tuple(v[c] for c in rest)))
    if not pairs:
        raise BasePointError(f"({bx}, {by}) is not an edge of the base graph")
    fl = left.fiber(cs, bx)
    fr = right.fiber(cs, by)
    return BiGraph.from_member_pairs(fl, fr, pairs)


@dataclass(frozen=True)
class Fibering:
    """A graph split over a coordinate partition: the base graph plus one
    fiber graph per base edge.  Reassembling all fibers over their base
    points reproduces the original edge set exactly."""

    coords_i: tuple[int, ...]
    coords_j: tuple[int, ...]
    base: BiGraph
    fibers: dict[tuple[tuple[int, ...], tuple[int, ...]], BiGraph]

    def reassembled_edges(self) -> frozenset[tuple[tuple[int, ...], tuple[int, ...]]]:
        dim = len(self.coords_i) + len(self.coords_j)
        out = set()
        for (bx, by), fg in self.fibers.items():
            for u_rest, v_rest in fg.edge_members():
                u = [0] * dim
                v = [0] * dim
                for c, val in zip(self.coords_i, bx):
                    u[c] = val
                for c, val in zip(self.coords_j, u_rest):
                    u[c] = val
                for c, val in zip(self.coords_i, by):
                    v[c] = val
                for c, val in zip(self.coords_j, v_rest):
                    v[c] = val
                out.add((tuple(u), tuple(v)))
        return frozenset(out)

    def verify(self, g: BiGraph) -> bool:
        original = frozenset((u, v) for u, v in g.edge_members())
        return self.reassembled_edges() == original


def natural_fibering(g: BiGraph, coords: Sequence[int]) -> Fibering:
    """Split ``g`` into its base graph over the given coordinates and the
    fiber graph over every base edge."""
    left, _ = _require_lattice(g)
    cs = tuple(coords)
    rest = left.complement(cs)
    base = base_graph(g, cs)
    fibers = {}
    for bx, by in base.edge_members():
        fibers[(bx, by)] = fiber_graph(g, cs, bx, by)
    return Fibering(cs, rest, base, fibers)
