"""Prime-exponent embeddings of positive integer sets.

A positive integer factors as a product of primes; collecting the exponents
over a fixed index of primes embeds a set of integers into an integer lattice.
This module computes that embedding, its affine rank over the rationals (the
multiplicative dimension), the Freiman sumset lower bound it implies, and
small injective coordinate projections.  All linear algebra is exact
(`Fraction`), never floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import FactorBoundError, NonPositiveElementError
from .intset import FiniteIntSet, productset

PRIME_CEILING = 10**6  # trial division stops here; larger cofactors must self-certify


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality check."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def first_primes(count: int) -> tuple[int, ...]:
    out: list[int] = []
    n = 2
    while len(out) < count:
        if is_prime(n):
            out.append(n)
        n += 1
    return tuple(out)


def factorize(n: int, ceiling: int = PRIME_CEILING) -> dict[int, int]:
    """Exact factorization by trial division up to ``ceiling``.

    A leftover cofactor below ceiling**2 is necessarily prime and accepted;
    anything larger raises rather than guessing.
    """
    if n < 1:
        raise NonPositiveElementError(f"cannot factor non-positive {n}")
    factors: dict[int, int] = {}
    m = n
    d = 2
    while d * d <= m and d <= ceiling:
        while m % d == 0:
            factors[d] = factors.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        if m > ceiling * ceiling:
            raise FactorBoundError(f"cofactor {m} of {n} exceeds ceiling^2 = {ceiling**2}")
        factors[m] = factors.get(m, 0) + 1
    return factors


@dataclass(frozen=True)
class PrimeIndex:
    """Strictly increasing tuple of distinct primes indexing lattice coordinates."""

    primes: tuple[int, ...]

    def __post_init__(self) -> None:
        ps = self.primes
        if any(ps[i] >= ps[i + 1] for i in range(len(ps) - 1)):
            raise ValueError("primes must be strictly increasing")
        for p in ps:
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self) -> Iterator[int]:
        return iter(self.primes)


@dataclass(frozen=True)
class LatticeSet:
    """A set of integer exponent vectors over a prime index.

    ``source`` is the originating integer set when the lattice set was built
    by :func:`valuate`; reconstructing each vector then reproduces the source
    exactly.  Raw vector sets (boxes, unions) carry ``source=None``.
    """

    index: PrimeIndex
    vectors: tuple[tuple[int, ...], ...]
    source: FiniteIntSet | None = None

    def __post_init__(self) -> None:
        n = len(self.index)
        for v in self.vectors:
            if len(v) != n:
                raise ValueError("vector length must match the prime index")
        if len(set(self.vectors)) != len(self.vectors):
            raise ValueError("vectors must be distinct")

    @classmethod
    def from_vectors(
        cls, vectors: Iterable[Sequence[int]], primes: Sequence[int] | None = None
    ) -> "LatticeSet":
        vecs = tuple(sorted({tuple(int(c) for c in v) for v in vectors}))
        dim = len(vecs[0]) if vecs else 0
        idx = PrimeIndex(tuple(primes) if primes is not None else first_primes(dim))
        return cls(idx, vecs)

    @property
    def primes(self) -> tuple[int, ...]:
        return self.index.primes

    @property
    def dim(self) -> int:
        return len(self.index)

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.vectors)

    @cached_property
    def _member_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.vectors)

    def __contains__(self, v: object) -> bool:
        return v in self._member_set

    def _check_coords(self, coords: Sequence[int]) -> tuple[int, ...]:
        cs = tuple(coords)
        if any(c < 0 or c >= self.dim for c in cs):
            raise IndexError(f"coordinates {cs} out of range for dimension {self.dim}")
        if len(set(cs)) != len(cs):
            raise ValueError("coordinate positions must be distinct")
        return cs

    def complement(self, coords: Sequence[int]) -> tuple[int, ...]:
        cs = set(self._check_coords(coords))
        return tuple(j for j in range(self.dim) if j not in cs)

    def project(self, coords: Sequence[int]) -> "LatticeSet":
        """Image under the projection to the given coordinate positions."""
        cs = self._check_coords(coords)
        vecs = sorted({tuple(v[c] for c in cs) for v in self.vectors})
        return LatticeSet(PrimeIndex(tuple(self.primes[c] for c in cs)), tuple(vecs))

    def fibers(self, coords: Sequence[int]) -> dict[tuple[int, ...], tuple[tuple[int, ...], ...]]:
        """Group the complementary parts of every vector by its projection."""
        cs = self._check_coords(coords)
        rest = self.complement(cs)
        groups: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for v in self.vectors:
            groups.setdefault(tuple(v[c] for c in cs), []).append(tuple(v[j] for j in rest))
        return {k: tuple(sorted(vs)) for k, vs in sorted(groups.items())}

    def fiber(self, coords: Sequence[int], base_point: Sequence[int]) -> "LatticeSet":
        """The fiber over one base point (vectors whose projection equals it)."""
        from .errors import BasePointError

        cs = self._check_coords(coords)
        rest = self.complement(cs)
        bp = tuple(base_point)
        vecs = sorted(
            {tuple(v[j] for j in rest) for v in self.vectors if tuple(v[c] for c in cs) == bp}
        )
        if not vecs:
            raise BasePointError(f"{bp} is not in the projection to coordinates {cs}")
        return LatticeSet(PrimeIndex(tuple(self.primes[j] for j in rest)), tuple(vecs))

    def reconstruct(self) -> FiniteIntSet:
        """Multiply out prod p_i**a_i for every vector (exponents must be >= 0)."""
        values = []
        for v in self.vectors:
            if any(c < 0 for c in v):
                raise NonPositiveElementError("negative exponents do not reconstruct to integers")
            x = 1
            for p, c in zip(self.primes, v):
                x *= p**c
            values.append(x)
        return FiniteIntSet.from_iterable(values)

    def to_json(self) -> dict:
        return {"primes": list(self.primes), "vectors": [list(v) for v in self.vectors]}

    @classmethod
    def from_json(cls, data: dict | str) -> "LatticeSet":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_vectors(data["vectors"], primes=data.get("primes"))


@dataclass(frozen=True)
class RankReport:
    """Affine rank with an affinely independent witness of size rank + 1."""

    affine_rank: int
    witness: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class FreimanReport:
    rank: int
    set_size: int
    sumset_size: int  # |AA|, measured through the exponent lattice identity
    lower_bound: int
    tight: bool


def valuate(a: FiniteIntSet) -> LatticeSet:
    """Exponent-vector embedding of a set of positive integers.

    The index is the sorted union of primes dividing any element; the map is
    injective because factorizations are unique.
    """
    if len(a) == 0:
        raise NonPositiveElementError("cannot valuate an empty set")
    facs = [factorize(x) for x in a.elements]
    primes = tuple(sorted({p for f in facs for p in f}))
    vectors = tuple(tuple(f.get(p, 0) for p in primes) for f in facs)
    return LatticeSet(PrimeIndex(primes), vectors, source=a)


def covaluate(*sets: FiniteIntSet) -> list[LatticeSet]:
    """Valuate several sets over one shared prime index (the union of supports)."""
    facs_per_set = [[factorize(x) for x in s.elements] for s in sets]
    primes = tuple(sorted({p for facs in facs_per_set for f in facs for p in f}))
    idx = PrimeIndex(primes)
    out = []
    for s, facs in zip(sets, facs_per_set):
        vectors = tuple(tuple(f.get(p, 0) for p in primes) for f in facs)
        out.append(LatticeSet(idx, vectors, source=s))
    return out


def _row_reduce(rows: list[list[Fraction]]) -> tuple[int, list[int]]:
    """Exact Gaussian elimination; returns (rank, pivot column positions)."""
    mat = [row[:] for row in rows]
    pivots: list[int] = []
    r = 0
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        pivot_row = next((i for i in range(r, len(mat)) if mat[i][col] != 0), None)
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = 1 / mat[r][col]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
    return r, pivots


def _difference_rows(vectors: Sequence[tuple[int, ...]]) -> list[list[Fraction]]:
    base = vectors[0]
    return [[Fraction(v[j] - base[j]) for j in range(len(base))] for v in vectors[1:]]


def lattice_rank(vectors: Sequence[tuple[int, ...]]) -> RankReport:
    """Affine rank over the rationals with an independent witness.

    The witness is the base point plus a greedily chosen maximal set of
    linearly independent difference vectors, so it has size rank + 1.
    """
    vecs = list(vectors)
    if len(vecs) <= 1:
        return RankReport(0, tuple(vecs))
    rows = _difference_rows(vecs)
    rank, _ = _row_reduce(rows)
    witness = [vecs[0]]
    chosen: list[int] = []
    for i in range(len(rows)):
        trial = chosen + [i]
        sub_rank, _ = _row_reduce([rows[j] for j in trial])
        if sub_rank > len(chosen):
            chosen = trial
        if len(chosen) == rank:
            break
    witness.extend(vecs[j + 1] for j in chosen)
    return RankReport(rank, tuple(witness))


def mult_dimension(a: FiniteIntSet) -> RankReport:
    """Multiplicative dimension: affine rank of the exponent vectors of A."""
    return lattice_rank(valuate(a).vectors)


def freiman_check(a: FiniteIntSet) -> FreimanReport:
    """Compare |AA| against the rank-m sumset lower bound (m+1)|A| - m(m+1)/2.

    The product set corresponds to the sumset of exponent vectors, so the
    bound applies on the multiplicative side.
    """
    report = mult_dimension(a)
    m = report.affine_rank
    aa = len(productset(a, a))
    bound = (m + 1) * len(a) - m * (m + 1) // 2
    assert bound <= aa, f"sumset bound violated: {bound} > {aa}"
    return FreimanReport(m, len(a), aa, bound, tight=bound == aa)


def injective_projection(a: FiniteIntSet) -> PrimeIndex:
    """A prime sub-index of size <= affine rank whose projection separates A.

    Greedy column selection, lowest prime first, certified by exact rank: once
    the chosen columns carry the full rank of the difference vectors, the
    projection is injective on the affine hull and hence on A.
    """
    ls = valuate(a)
    vecs = list(ls.vectors)
    if len(vecs) <= 1:
        return PrimeIndex(())
    rows = _difference_rows(vecs)
    target, _ = _row_reduce(rows)
    chosen: list[int] = []
    rank_so_far = 0
    for j in range(ls.dim):
        cand = chosen + [j]
        r, _ = _row_reduce([[row[c] for c in cand] for row in rows])
        if r > rank_so_far:
            chosen, rank_so_far = cand, r
        if rank_so_far == target:
            break
    projected = {tuple(v[c] for c in chosen) for v in vecs}
    assert len(projected) == len(vecs), "rank certificate failed to separate points"
    return PrimeIndex(tuple(ls.primes[c] for c in chosen))
