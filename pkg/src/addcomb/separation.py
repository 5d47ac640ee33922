"""Separation constants for unions of dilated slices, and energy covers.

A coefficient set A together with coprime slices X_a produces the union
Y = U a*X_a.  The central quantity is the ratio

    sqrt(E(Y)) / sum_a sqrt(E(X_a)),

measured here exactly: energies are integers and every comparison against a
rational bound psi is decided by outward-rounded integer square roots with
escalating precision, falling back to an exact same-radical-class path, and
raising rather than guessing if still undecided.

Theoretical bounds provided: the cardinality bound psi = |A| (always valid),
psi = 6 for coefficient sets that are powers of one prime, the 6^ceil(K)
bound for sets with multiplicative doubling K, and products of bounds for
orthogonally composed coefficient sets.  The cover side implements the
fourth-power energy bound for systems covering every point at least M times,
and the dilate-cover assembly that bounds E(A) through a dense subset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, isqrt, lcm, sqrt
from typing import Mapping, Sequence

from .errors import (
    EmptyOperandError,
    NonPositiveElementError,
    PrecisionError,
    StructureError,
)
from .intset import FiniteIntSet, energy_plus, productset
from .valuation import mult_dimension, injective_projection, PrimeIndex

_SQRT_BITS = (0, 16, 64, 128, 256)


def _energy(s: FiniteIntSet) -> int:
    return energy_plus(s).energy


def sqrt_leq(lhs_sq: int, rhs_sqs: Sequence[int], psi: Fraction) -> bool:
    """Decide sqrt(lhs_sq) <= psi * sum_i sqrt(rhs_sqs[i]) exactly.

    Interval arithmetic with outward rounding at escalating precision; exact
    square comparison when a single radical (or a shared square class) makes
    the inequality algebraic.
    """
    psi = Fraction(psi)
    p, q = psi.numerator, psi.denominator
    if len(rhs_sqs) == 1:
        return q * q * lhs_sq <= p * p * rhs_sqs[0]
    for bits in _SQRT_BITS[1:]:
        shift = 2 * bits
        lo = sum(isqrt(e << shift) for e in rhs_sqs)
        hi = lo + len(rhs_sqs)
        ul = isqrt(lhs_sq << shift)
        if q * (ul + 1) <= p * lo:
            return True
        if q * ul > p * hi:
            return False
    # shared square class: all sqrt(e_i) = s_i / sqrt(e_0) with s_i integer
    e0 = rhs_sqs[0]
    roots = []
    for e in rhs_sqs:
        r = isqrt(e * e0)
        if r * r != e * e0:
            raise PrecisionError("radical comparison undecided at maximum precision")
        roots.append(r)
    total = sum(roots)
    return q * q * lhs_sq * e0 <= p * p * total * total


@dataclass(frozen=True)
class SlicedFamily:
    """Coefficients A and one integer slice X_a per coefficient.

    Validated on construction: every slice is non-empty and gcd(a, x) = 1 for
    every coefficient a and every element x of every slice.
    """

    coefficients: FiniteIntSet
    slices: Mapping[int, FiniteIntSet]

    def __post_init__(self) -> None:
        if len(self.coefficients) == 0:
            raise EmptyOperandError("a sliced family needs coefficients")
        if set(self.slices) != set(self.coefficients.elements):
            raise StructureError("slices must be keyed by exactly the coefficients")
        for a, x in self.slices.items():
            if len(x) == 0:
                raise EmptyOperandError(f"slice for coefficient {a} is empty")
        for a in self.coefficients:
            for x_set in self.slices.values():
                for x in x_set:
                    if gcd(a, x) != 1:
                        raise StructureError(
                            f"coprimality violated: gcd({a}, {x}) != 1"
                        )

    def union(self) -> FiniteIntSet:
        vals: set[int] = set()
        for a in self.coefficients:
            vals.update(a * x for x in self.slices[a])
        return FiniteIntSet.from_iterable(vals)

    def to_json(self) -> dict:
        return {
            "coefficients": self.coefficients.to_json(),
            "slices": {str(a): x.to_json() for a, x in sorted(self.slices.items())},
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "SlicedFamily":
        if isinstance(data, str):
            data = json.loads(data)
        coeffs = FiniteIntSet.from_iterable(data["coefficients"])
        slices = {
            int(a): FiniteIntSet.from_iterable(x) for a, x in data["slices"].items()
        }
        return cls(coeffs, slices)


@dataclass(frozen=True)
class SeparationBound:
    value: Fraction
    provenance: str  # trivial | one_prime | chang | composed | empirical


@dataclass(frozen=True)
class RatioReport:
    """Measured separation data for one family; `ratio` is a float rendering,
    the exact ingredients (integer energies) ride along for exact checks."""

    union_energy: int
    slice_energies: tuple[int, ...]
    size_coefficients: int

    @property
    def lhs(self) -> float:
        return sqrt(self.union_energy)

    @property
    def rhs(self) -> float:
        return sum(sqrt(e) for e in self.slice_energies)

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    def within(self, psi) -> bool:
        return sqrt_leq(self.union_energy, self.slice_energies, Fraction(psi))


def empirical_ratio(fam: SlicedFamily) -> RatioReport:
    """Measure sqrt(E(union)) against the sum of slice root-energies.

    The cardinality bound ratio <= |A| always holds and is asserted exactly.
    """
    union_e = _energy(fam.union())
    slice_es = tuple(_energy(fam.slices[a]) for a in fam.coefficients)
    report = RatioReport(union_e, slice_es, len(fam.coefficients))
    assert report.within(len(fam.coefficients)), "cardinality bound violated"
    return report


def trivial_bound(a: FiniteIntSet) -> SeparationBound:
    """Any coefficient set separates with its own cardinality."""
    if len(a) == 0:
        raise EmptyOperandError("empty coefficient set")
    return SeparationBound(Fraction(len(a)), "trivial")


def one_prime_bound(a: FiniteIntSet, p: int) -> SeparationBound:
    """Powers of a single prime separate with the constant 6."""
    for x in a:
        y = x
        if y < 1:
            raise StructureError(f"{x} is not a power of {p}")
        while y % p == 0:
            y //= p
        if y != 1:
            raise StructureError(f"{x} is not a power of {p}")
    return SeparationBound(Fraction(6), "one_prime")


@dataclass(frozen=True)
class ChangReport:
    bound: SeparationBound  # 6**ceil(K), K the multiplicative doubling
    psi_rank: Fraction  # sharper alternative 6**rank
    k_mult: Fraction
    rank: int
    projection: PrimeIndex


def chang_bound(a: FiniteIntSet) -> ChangReport:
    """Separation from small multiplicative doubling: psi = 6**ceil(|AA|/|A|).

    The report carries the sharper 6**rank value and the injective prime
    projection witnessing it.
    """
    if len(a) == 0:
        raise EmptyOperandError("empty coefficient set")
    k_mult = Fraction(len(productset(a, a)), len(a))
    rank = mult_dimension(a).affine_rank
    proj = injective_projection(a)
    ceil_k = -((-k_mult.numerator) // k_mult.denominator)
    return ChangReport(
        bound=SeparationBound(Fraction(6**ceil_k), "chang"),
        psi_rank=Fraction(6**rank),
        k_mult=k_mult,
        rank=rank,
        projection=proj,
    )


def compose_bounds(
    psi1: SeparationBound,
    psi2: SeparationBound,
    decomposition: SlicedFamily | None = None,
) -> SeparationBound:
    """Bounds multiply across an orthogonal two-level decomposition.

    When lattice data is supplied (the outer coefficients with their inner
    sets as slices) the coprimality hypothesis is re-validated; a violation
    raises rather than composing an unjustified bound.
    """
    if decomposition is not None:
        SlicedFamily(decomposition.coefficients, decomposition.slices)
    return SeparationBound(psi1.value * psi2.value, "composed")


@dataclass(frozen=True)
class CoverSystem:
    """Parts covering a set, every element at least ``multiplicity`` times."""

    covered: FiniteIntSet
    parts: tuple[FiniteIntSet, ...]
    multiplicity: int

    def __post_init__(self) -> None:
        if len(self.covered) == 0 or not self.parts:
            raise EmptyOperandError("cover needs a non-empty set and parts")
        if self.multiplicity < 1:
            raise StructureError("multiplicity must be a positive integer")
        for a in self.covered:
            hits = sum(1 for part in self.parts if a in part)
            if hits < self.multiplicity:
                raise StructureError(
                    f"element {a} covered {hits} < {self.multiplicity} times"
                )

    @classmethod
    def build(cls, covered: FiniteIntSet, parts: Sequence[FiniteIntSet]) -> "CoverSystem":
        """Cover with the best (largest) valid multiplicity."""
        m = min(sum(1 for part in parts if a in part) for a in covered)
        return cls(covered, tuple(parts), m)

    def to_json(self) -> dict:
        return {
            "covered": self.covered.to_json(),
            "parts": [p.to_json() for p in self.parts],
            "multiplicity": self.multiplicity,
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "CoverSystem":
        if isinstance(data, str):
            data = json.loads(data)
        covered = FiniteIntSet.from_iterable(data["covered"])
        parts = [FiniteIntSet.from_iterable(p) for p in data["parts"]]
        if "multiplicity" in data and data["multiplicity"] is not None:
            return cls(covered, tuple(parts), int(data["multiplicity"]))
        return cls.build(covered, parts)


def _fourth_root_leq(lhs: int, m: int, part_energies: Sequence[int]) -> bool:
    """Decide m^4 * lhs <= (sum_i e_i^(1/4))^4 exactly."""
    if len(set(part_energies)) == 1:
        # equal part energies: the bound is the rational L^4 e / m^4
        e = part_energies[0]
        return lhs * m**4 <= len(part_energies) ** 4 * e
    for bits in _SQRT_BITS[1:]:
        shift = 4 * bits
        lo = sum(isqrt(isqrt(e << shift)) for e in part_energies)
        hi = lo + len(part_energies)
        scale = 1 << (4 * bits)
        if lhs * m**4 * scale <= lo**4:
            return True
        if lhs * m**4 * scale > hi**4:
            return False
    raise PrecisionError("fourth-root comparison undecided at maximum precision")


@dataclass(frozen=True)
class CoverReport:
    actual: int
    bound: float
    bound_exact: Fraction | None  # rational whenever all part energies agree
    part_energies: tuple[int, ...]
    multiplicity: int
    passed: bool


def energy_cover_bound(cov: CoverSystem) -> CoverReport:
    """E(A) <= M^-4 (sum_i E(A_i)^(1/4))^4 for a multiplicity-M cover."""
    actual = _energy(cov.covered)
    energies = tuple(_energy(p) for p in cov.parts)
    m = cov.multiplicity
    passed = _fourth_root_leq(actual, m, energies)
    assert passed, "cover energy bound violated"
    exact = None
    if len(set(energies)) == 1:
        exact = Fraction(len(energies) ** 4 * energies[0], m**4)
    bound = (sum(e**0.25 for e in energies) / m) ** 4
    return CoverReport(actual, bound, exact, energies, m, passed)


@dataclass(frozen=True)
class AssemblyReport:
    """Dilate-cover bound for E(A) through a subset A' of A."""

    cover: CoverSystem
    multiplicity: int  # |A'|
    parts: int  # |A / A'|
    energy_bound: Fraction  # (L/M)^4 * E(A')
    actual_energy: int
    subset_energy: int
    ratio_set_full: int  # |A / A|
    k_mult: Fraction
    pr_bound: Fraction  # K^2 |A|, checked numerically against |A/A|
    pr_ok: bool
    scale: int  # common denominator used to realize rational dilates


def final_assembly(a: FiniteIntSet, a_prime: FiniteIntSet) -> AssemblyReport:
    """Cover A by the dilates (a/a')*A' over the ratio set A/A'.

    Every element of A lies in at least |A'| parts (a = (a/a') a'), each part
    has the energy of A' by dilation invariance, so the cover bound yields
    E(A) <= (|A/A'| / |A'|)^4 E(A'), an exact rational inequality.
    """
    if len(a) == 0 or len(a_prime) == 0:
        raise EmptyOperandError("assembly needs non-empty sets")
    if any(x <= 0 for x in a):
        raise NonPositiveElementError("ratio-set machinery needs positive elements")
    if not set(a_prime.elements) <= set(a.elements):
        raise StructureError("the dense subset must be contained in the set")

    ratios = sorted({Fraction(x, y) for x in a for y in a_prime})
    big_l = len(ratios)
    m = len(a_prime)
    scale = reduce(lcm, (r.denominator for r in ratios), 1)
    covered = a.dilate(scale)
    parts = []
    for r in ratios:
        c = r * scale
        assert c.denominator == 1
        parts.append(a_prime.dilate(int(c)))
    cover = CoverSystem(covered, tuple(parts), m)

    e_sub = _energy(a_prime)
    e_actual = _energy(a)
    bound = Fraction(big_l**4 * e_sub, m**4)
    assert e_actual <= bound, "assembled bound fell below the true energy"

    full_ratios = {Fraction(x, y) for x in a for y in a}
    k_mult = Fraction(len(productset(a, a)), len(a))
    pr_bound = k_mult**2 * len(a)
    return AssemblyReport(
        cover=cover,
        multiplicity=m,
        parts=big_l,
        energy_bound=bound,
        actual_energy=e_actual,
        subset_energy=e_sub,
        ratio_set_full=len(full_ratios),
        k_mult=k_mult,
        pr_bound=pr_bound,
        pr_ok=len(full_ratios) <= pr_bound,
        scale=scale,
    )
