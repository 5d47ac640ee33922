"""Exact arithmetic over finite integer sets.

The carrier is an immutable, strictly increasing tuple of arbitrary-precision
integers.  All statistics (representation functions, additive energies,
doubling constants) are computed exactly: integers and `Fraction`s only,
floating point never decides anything.  Every function is pure, so values may
be shared between concurrent tasks without coordination.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import isqrt
from typing import TYPE_CHECKING, Iterable, Iterator

from .errors import CapExceededError, DanglingEdgeError, EmptyOperandError

if TYPE_CHECKING:  # pragma: no cover
    from .bigraph import BiGraph

# Enumeration caps: exceeding one raises, it never silently approximates.
ORACLE_PAIR_CAP = 10**6  # max |A|*|B| for the quadruple-counting oracle
KTUPLE_CAP = 10**8  # max |A|**k for k-fold energy
DENSE_WIDTH_LIMIT = 1 << 20  # widest value range for the dense counting path


@dataclass(frozen=True)
class FiniteIntSet:
    """A finite set of integers, stored sorted ascending without duplicates."""

    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        els = self.elements
        if not all(isinstance(e, int) for e in els):
            raise TypeError("elements must be integers")
        if any(els[i] >= els[i + 1] for i in range(len(els) - 1)):
            raise ValueError("elements must be strictly increasing")

    @classmethod
    def from_iterable(cls, items: Iterable[int]) -> "FiniteIntSet":
        return cls(tuple(sorted({int(x) for x in items})))

    @classmethod
    def parse(cls, text: str) -> "FiniteIntSet":
        """Parse the line-oriented text format (one integer per line) or a
        JSON array."""
        stripped = text.strip()
        if not stripped:
            return cls(())
        if stripped.startswith("["):
            return cls.from_iterable(json.loads(stripped))
        return cls.from_iterable(int(line) for line in stripped.splitlines() if line.strip())

    def to_text(self) -> str:
        return "\n".join(str(e) for e in self.elements) + ("\n" if self.elements else "")

    def to_json(self) -> list[int]:
        return list(self.elements)

    @cached_property
    def _member_set(self) -> frozenset[int]:
        return frozenset(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self._member_set

    def index(self, x: int) -> int:
        """Position of ``x`` in the sorted element tuple."""
        from bisect import bisect_left

        i = bisect_left(self.elements, x)
        if i == len(self.elements) or self.elements[i] != x:
            raise KeyError(x)
        return i

    def dilate(self, c: int) -> "FiniteIntSet":
        if c == 0:
            raise ValueError("dilation by zero collapses the set")
        return FiniteIntSet.from_iterable(c * a for a in self.elements)

    def translate(self, d: int) -> "FiniteIntSet":
        return FiniteIntSet(tuple(a + d for a in self.elements))


@dataclass(frozen=True)
class RepFunction:
    """Representation counts r(x) = #{(a, b) : a ± b = x} for a pair of sets."""

    support: dict[int, int]
    size_left: int
    size_right: int

    def __getitem__(self, x: int) -> int:
        return self.support.get(x, 0)

    def total_mass(self) -> int:
        return sum(self.support.values())

    def values_set(self) -> FiniteIntSet:
        return FiniteIntSet(tuple(sorted(self.support)))

    def energy(self) -> int:
        return sum(c * c for c in self.support.values())


@dataclass(frozen=True)
class EnergyReport:
    """Additive energy together with the method that produced it."""

    energy: int
    method: str  # "convolution" | "quadruple-oracle"
    size_left: int
    size_right: int


@dataclass(frozen=True)
class DoublingStats:
    """Multiplicative and (graph-)additive doubling statistics.

    ``k_plus`` is |A +_G B| / sqrt(|A||B|); only its square is rational in
    general, so the exact value is carried as ``k_plus_sq`` and ``k_plus``
    returns a Fraction exactly when |A||B| is a perfect square.
    """

    k_mult: Fraction | None
    k_plus_sq: Fraction
    sumset_size: int
    size_left: int
    size_right: int

    @property
    def k_plus(self) -> Fraction | float:
        n = self.size_left * self.size_right
        r = isqrt(n)
        if r * r == n:
            return Fraction(self.sumset_size, r)
        return self.sumset_size / n**0.5


def _require_nonempty(*sets: FiniteIntSet) -> None:
    for s in sets:
        if len(s) == 0:
            raise EmptyOperandError("operation requires non-empty sets")


def sumset(a: FiniteIntSet, b: FiniteIntSet) -> FiniteIntSet:
    """All pairwise sums {x + y : x in A, y in B}."""
    _require_nonempty(a, b)
    return FiniteIntSet(tuple(sorted({x + y for x in a.elements for y in b.elements})))


def productset(a: FiniteIntSet, b: FiniteIntSet) -> FiniteIntSet:
    """All pairwise products {x * y}."""
    _require_nonempty(a, b)
    return FiniteIntSet(tuple(sorted({x * y for x in a.elements for y in b.elements})))


def difference_set(a: FiniteIntSet, b: FiniteIntSet) -> FiniteIntSet:
    """All pairwise differences {x - y}."""
    _require_nonempty(a, b)
    return FiniteIntSet(tuple(sorted({x - y for x in a.elements for y in b.elements})))


def _rep_counts(a: tuple[int, ...], b: tuple[int, ...]) -> dict[int, int]:
    """Counts of pairwise sums; dense array path when the value range is small."""
    lo = a[0] + b[0]
    hi = a[-1] + b[-1]
    width = hi - lo
    if width <= DENSE_WIDTH_LIMIT:
        arr = [0] * (width + 1)
        for x in a:
            base = x - lo
            for y in b:
                arr[base + y] += 1
        return {lo + i: c for i, c in enumerate(arr) if c}
    return dict(Counter(x + y for x in a for y in b))


def rep_function(a: FiniteIntSet, b: FiniteIntSet, sign: str = "plus") -> RepFunction:
    """r_{A±B}: how many ways each value is written as a ± b."""
    _require_nonempty(a, b)
    if sign not in ("plus", "minus"):
        raise ValueError("sign must be 'plus' or 'minus'")
    b_els = b.elements if sign == "plus" else tuple(-y for y in reversed(b.elements))
    return RepFunction(_rep_counts(a.elements, b_els), len(a), len(b))


def _energy_convolution(a: FiniteIntSet, b: FiniteIntSet) -> int:
    counts = _rep_counts(a.elements, b.elements)
    return sum(c * c for c in counts.values())


def _energy_oracle(a: FiniteIntSet, b: FiniteIntSet, cap: int) -> int:
    # Quadruples (a1, b1, a2, b2) with a1 + b1 = a2 + b2, enumerated by their
    # first three coordinates (b2 is determined and checked for membership).
    if len(a) * len(b) > cap:
        raise CapExceededError(
            f"oracle refuses |A||B| = {len(a) * len(b)} > {cap}; use the convolution method"
        )
    b_members = b._member_set
    a_els = a.elements
    count = 0
    for a1 in a_els:
        for b1 in b.elements:
            s = a1 + b1
            count += sum(1 for a2 in a_els if s - a2 in b_members)
    return count


def energy_plus(
    a: FiniteIntSet,
    b: FiniteIntSet | None = None,
    method: str = "convolution",
    oracle_cap: int = ORACLE_PAIR_CAP,
) -> EnergyReport:
    """Additive energy E_+(A, B): the number of quadruples with a1+b1 = a2+b2.

    ``convolution`` squares the representation function; ``quadruple-oracle``
    counts quadruples directly and exists as an independent cross-check.
    """
    if b is None:
        b = a
    _require_nonempty(a, b)
    if method == "convolution":
        e = _energy_convolution(a, b)
    elif method == "quadruple-oracle":
        e = _energy_oracle(a, b, oracle_cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    return EnergyReport(e, method, len(a), len(b))


def energy_k(a: FiniteIntSet, k: int, cap: int = KTUPLE_CAP) -> int:
    """Number of 2k-tuples with equal k-fold sums; E_2 equals E_+(A, A)."""
    _require_nonempty(a)
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(a) ** k > cap:
        raise CapExceededError(f"|A|^k = {len(a) ** k} exceeds the cap {cap}")
    counts: dict[int, int] = {x: 1 for x in a.elements}
    for _ in range(k - 1):
        nxt: Counter[int] = Counter()
        for s, c in counts.items():
            for x in a.elements:
                nxt[s + x] += c
        counts = dict(nxt)
    return sum(c * c for c in counts.values())


def restricted_sumset(a: FiniteIntSet, b: FiniteIntSet, g: "BiGraph") -> FiniteIntSet:
    """Sums a + b taken only over the edges of a bipartite graph on A x B."""
    _require_nonempty(a, b)
    for u, v in g.edge_members():
        if u not in a or v not in b:
            raise DanglingEdgeError(f"edge ({u}, {v}) leaves the supplied sets")
    return FiniteIntSet(tuple(sorted({u + v for u, v in g.edge_members()})))


def doubling_stats(
    a: FiniteIntSet, b: FiniteIntSet | None = None, g: "BiGraph | None" = None
) -> DoublingStats:
    """K_mult = |AA|/|A| (when B is A) and K_plus = |A +_G B| / sqrt(|A||B|).

    With no graph the sumset is unrestricted (complete graph).
    """
    same = b is None or a.elements == b.elements
    if b is None:
        b = a
    _require_nonempty(a, b)
    if g is None:
        s = len(sumset(a, b))
    else:
        s = len(restricted_sumset(a, b, g))
    k_mult = Fraction(len(productset(a, a)), len(a)) if same else None
    return DoublingStats(
        k_mult=k_mult,
        k_plus_sq=Fraction(s * s, len(a) * len(b)),
        sumset_size=s,
        size_left=len(a),
        size_right=len(b),
    )
