"""Seeded generators for test families: integer sets, sliced families,
random bipartite graphs and structured lattice instances.

Everything is deterministic for a fixed seed (``random.Random`` instances,
never the module-level RNG)."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Sequence

from .bigraph import BiGraph
from .errors import CapExceededError, EmptyOperandError
from .intset import FiniteIntSet
from .separation import SlicedFamily
from .valuation import LatticeSet, first_primes

ELEMENT_CAP = 1 << 128  # generators refuse to emit anything larger

KINDS = (
    "arithmetic_progression",
    "geometric",
    "exponent_box",
    "random_subset",
    "union_b_times_c",
    "model_3d_ap",
)


@dataclass(frozen=True)
class FamilySpec:
    """A named generator plus its integer parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_json(cls, data: dict | str) -> "FamilySpec":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["kind"], dict(data.get("params", {})))


def _check_cap(values, cap: int = ELEMENT_CAP) -> FiniteIntSet:
    out = FiniteIntSet.from_iterable(values)
    if len(out) == 0:
        raise EmptyOperandError("generator produced an empty set")
    if max(abs(out.elements[0]), abs(out.elements[-1])) > cap:
        raise CapExceededError(f"element magnitude exceeds {cap}")
    return out


def exponent_box(primes: Sequence[int], bounds: Sequence[int]) -> FiniteIntSet:
    """{prod p_i^e_i : 0 <= e_i <= b_i}: integers whose exponent vectors fill
    a box."""
    if len(primes) != len(bounds):
        raise ValueError("one bound per prime")
    values = [1]
    for p, b in zip(primes, bounds):
        values = [v * p**e for v in values for e in range(b + 1)]
    return _check_cap(values)


def generate(spec: FamilySpec) -> FiniteIntSet:
    """Materialize a family spec; deterministic for a fixed seed."""
    p = spec.params
    if spec.kind == "arithmetic_progression":
        start, step, length = p.get("start", 0), p.get("step", 1), p["length"]
        if step == 0 or length < 1:
            raise ValueError("need step != 0 and length >= 1")
        return _check_cap(start + i * step for i in range(length))
    if spec.kind == "geometric":
        start, ratio, length = p.get("start", 1), p.get("ratio", 2), p["length"]
        if ratio in (0, 1, -1) or start == 0 or length < 1:
            raise ValueError("need |ratio| >= 2, start != 0, length >= 1")
        return _check_cap(start * ratio**i for i in range(length))
    if spec.kind == "exponent_box":
        return exponent_box(p["primes"], p["bounds"])
    if spec.kind == "random_subset":
        rng = random.Random(p.get("seed", 0))
        low, high, size = p.get("low", -1000), p.get("high", 1000), p["size"]
        if size > high - low + 1:
            raise ValueError("size exceeds the range")
        return _check_cap(rng.sample(range(low, high + 1), size))
    if spec.kind == "union_b_times_c":
        fam = one_prime_family(
            random.Random(p.get("seed", 0)),
            prime=p.get("prime", 2),
            max_coefficients=p.get("coefficients", 4),
            max_slice=p.get("slice_size", 6),
            value_cap=p.get("value_cap", 1000),
        )
        return _check_cap(fam.union().elements)
    if spec.kind == "model_3d_ap":
        outer, middle = p["outer"], p["middle"]
        return exponent_box((2, 3, 5), (outer, middle, outer))
    raise ValueError(f"unknown family kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# sliced families for separation measurements
# ---------------------------------------------------------------------------


def _coprime_slice(rng: random.Random, avoid: Sequence[int], size: int, cap: int) -> FiniteIntSet:
    vals: set[int] = set()
    while len(vals) < size:
        x = rng.randint(1, cap)
        if all(x % q for q in avoid):
            vals.add(x)
    return FiniteIntSet.from_iterable(vals)


def one_prime_family(
    rng: random.Random,
    prime: int = 2,
    max_coefficients: int = 8,
    max_slice: int = 12,
    value_cap: int = 1000,
) -> SlicedFamily:
    """Coefficients are distinct powers of one prime; slices avoid it."""
    n_coeff = rng.randint(1, max_coefficients)
    exponents = rng.sample(range(0, max_coefficients + 2), n_coeff)
    coeffs = FiniteIntSet.from_iterable(prime**e for e in exponents)
    slices = {
        a: _coprime_slice(rng, (prime,), rng.randint(1, max_slice), value_cap)
        for a in coeffs
    }
    return SlicedFamily(coeffs, slices)


def unstructured_family(
    rng: random.Random,
    max_coefficients: int = 8,
    max_slice: int = 12,
    value_cap: int = 1000,
) -> SlicedFamily:
    """Coefficients built from the primes 2, 3, 5; slices avoid all three."""
    support = (2, 3, 5)
    coeffs: set[int] = set()
    n_coeff = rng.randint(1, max_coefficients)
    while len(coeffs) < n_coeff:
        v = 1
        for q in support:
            v *= q ** rng.randint(0, 4)
        coeffs.add(v)
    coeff_set = FiniteIntSet.from_iterable(coeffs)
    slices = {
        a: _coprime_slice(rng, support, rng.randint(1, max_slice), value_cap)
        for a in coeff_set
    }
    return SlicedFamily(coeff_set, slices)


# ---------------------------------------------------------------------------
# graphs and lattice instances
# ---------------------------------------------------------------------------


def random_bigraph(
    rng: random.Random, left: FiniteIntSet | LatticeSet, right: FiniteIntSet | LatticeSet,
    density: float,
) -> BiGraph:
    """Exactly round(density * |L| * |R|) edges sampled without replacement."""
    nl = len(left.elements if isinstance(left, FiniteIntSet) else left.vectors)
    nr = len(right.elements if isinstance(right, FiniteIntSet) else right.vectors)
    count = max(1, round(density * nl * nr))
    ids = rng.sample(range(nl * nr), count)
    return BiGraph.from_index_pairs(left, right, ((i // nr, i % nr) for i in ids))


def lattice_box(bounds: Sequence[int]) -> LatticeSet:
    """All integer vectors 0 <= v_i <= bounds_i."""
    vecs = [()]
    for b in bounds:
        vecs = [v + (e,) for v in vecs for e in range(b + 1)]
    return LatticeSet.from_vectors(vecs, primes=first_primes(len(bounds)))


def lattice_union(bounds_a: Sequence[int], bounds_b: Sequence[int], shift: Sequence[int]) -> LatticeSet:
    """Union of one box with a shifted box: mixed fiber sizes."""
    if len(bounds_a) != len(bounds_b) or len(bounds_a) != len(shift):
        raise ValueError("dimension mismatch")
    a = lattice_box(bounds_a).vectors
    b = [tuple(x + s for x, s in zip(v, shift)) for v in lattice_box(bounds_b).vectors]
    return LatticeSet.from_vectors(set(a) | set(b), primes=first_primes(len(bounds_a)))


def lattice_rank1(length: int, dim: int = 2) -> LatticeSet:
    """Collinear vectors along the first axis, padded to the given dimension."""
    vecs = [(i,) + (0,) * (dim - 1) for i in range(length)]
    return LatticeSet.from_vectors(vecs, primes=first_primes(dim))


def fibering_instances(seed: int, count: int) -> list[tuple[LatticeSet, LatticeSet, BiGraph]]:
    """Structured inputs for the refinement pipeline: product boxes,
    mixed-fiber unions and rank-one degenerates, with complete and random
    graphs in rotation."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        style = len(out) % 5
        if style in (0, 1):  # boxes
            dims = rng.choice([(1, 3), (2, 2), (1, 1, 1), (3, 1), (1, 2, 1)])
            a1 = lattice_box(dims)
            a2 = lattice_box(rng.choice([dims, tuple(reversed(dims))]))
        elif style in (2, 3):  # mixed-fiber unions
            a1 = lattice_union((1, 3), (1, 1), (2, 0))
            a2 = lattice_union((1, rng.choice([2, 3])), (2, 1), (0, rng.choice([3, 4])))
        else:  # rank-one degenerates
            a1 = lattice_rank1(rng.randint(3, 8))
            a2 = lattice_rank1(rng.randint(3, 8))
        if a1.index != a2.index:
            continue
        if style % 2 == 0:
            g = BiGraph.complete(a1, a2)
        else:
            g = random_bigraph(rng, a1, a2, 0.5)
        out.append((a1, a2, g))
    return out
