"""Partitions, necklaces, cycle-typed permutations, and the classical
polynomial families (complete Bell, cyclic, complete homogeneous) that the
trace-moment formulas reduce to.

Enumeration orders are fixed and documented so outputs are deterministic:
integer partitions come in reverse-lexicographic order, multi-index
partitions in reverse-lexicographic order on their column sequences (larger
columns consumed first), necklace representatives in lexicographic order.
All coefficient arithmetic is exact (Python big integers); conversion to
floating point happens at the final multiply in the callers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .budgets import MAX_PERMUTATION_SIZE, check_budget
from .errors import ValidationError


# ---------------------------------------------------------------------------
# integer partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegerPartition:
    """A partition of an integer: weakly decreasing positive parts."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if any(p < 1 for p in self.parts):
            raise ValidationError(f"parts must be positive: {self.parts}")
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise ValidationError(f"parts must be weakly decreasing: {self.parts}")

    @property
    def size(self) -> int:
        """The integer being partitioned."""
        return sum(self.parts)

    @property
    def length(self) -> int:
        """Number of parts."""
        return len(self.parts)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        """(r_1, ..., r_max): r_j counts parts equal to j."""
        if not self.parts:
            return ()
        out = [0] * self.parts[0]
        for p in self.parts:
            out[p - 1] += 1
        return tuple(out)

    def part_counts(self) -> list[tuple[int, int]]:
        """Distinct parts with multiplicities, largest part first."""
        out = []
        for p in self.parts:
            if out and out[-1][0] == p:
                out[-1] = (p, out[-1][1] + 1)
            else:
                out.append((p, 1))
        return out


def integer_partitions(i: int) -> list[IntegerPartition]:
    """All partitions of i, in reverse-lexicographic order.

    i = 0 yields the single empty partition.
    """
    if i < 0:
        raise ValidationError(f"cannot partition a negative integer: {i}")
    out: list[IntegerPartition] = []
    prefix: list[int] = []

    def rec(remaining, cap):
        if remaining == 0:
            out.append(IntegerPartition(tuple(prefix)))
            return
        for part in range(min(cap, remaining), 0, -1):
            prefix.append(part)
            rec(remaining - part, part)
            prefix.pop()

    rec(i, i)
    return out


def partition_coefficients(lam: IntegerPartition, i: int) -> tuple[int, int, int]:
    """The three factorial weights of a partition of i, as exact integers.

    Returns (d, d_tilde, c) with
        d       = i! / prod_j (j!)^{r_j} r_j!      (set-partition count)
        d_tilde = i! / prod_j r_j!                 (ordered-block weight)
        c       = i! / prod_j j^{r_j} r_j!         (cycle-class count)
    """
    if lam.size != i:
        raise ValidationError(f"{lam.parts} is not a partition of {i}")
    fact = math.factorial(i)
    den_d = den_td = den_c = 1
    for part, r in lam.part_counts():
        rf = math.factorial(r)
        den_d *= math.factorial(part) ** r * rf
        den_td *= rf
        den_c *= part ** r * rf
    return fact // den_d, fact // den_td, fact // den_c


# ---------------------------------------------------------------------------
# multi-index partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiIndexPartition:
    """A partition of a multi-index into nonzero column vectors.

    `columns` holds the distinct columns in strictly increasing
    lexicographic order; `multiplicities` counts how often each occurs.
    """

    columns: tuple[tuple[int, ...], ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        if len(self.columns) != len(self.multiplicities):
            raise ValidationError("columns/multiplicities length mismatch")
        for col in self.columns:
            if all(v == 0 for v in col):
                raise ValidationError("zero column in multi-index partition")
            if any(v < 0 for v in col):
                raise ValidationError(f"negative entry in column {col}")
        if any(a >= b for a, b in zip(self.columns, self.columns[1:])):
            raise ValidationError("columns must be strictly increasing")
        if any(r < 1 for r in self.multiplicities):
            raise ValidationError("multiplicities must be positive")

    @property
    def target(self) -> tuple[int, ...]:
        """Componentwise sum of all columns with multiplicity."""
        if not self.columns:
            return ()
        m = len(self.columns[0])
        out = [0] * m
        for col, r in zip(self.columns, self.multiplicities):
            for k in range(m):
                out[k] += r * col[k]
        return tuple(out)

    @property
    def length(self) -> int:
        """Total number of columns, counted with multiplicity."""
        return sum(self.multiplicities)

    def multiplicity_factorial(self) -> int:
        """m(lambda)! = prod_j r_j!"""
        out = 1
        for r in self.multiplicities:
            out *= math.factorial(r)
        return out

    def columns_factorial(self) -> int:
        """lambda! = prod over columns (with multiplicity) of the column factorial."""
        out = 1
        for col, r in zip(self.columns, self.multiplicities):
            cf = 1
            for v in col:
                cf *= math.factorial(v)
            out *= cf ** r
        return out

    def coefficient(self) -> int:
        """i! / (m(lambda)! lambda!), exact."""
        i_fact = 1
        for v in self.target:
            i_fact *= math.factorial(v)
        num, den = i_fact, self.multiplicity_factorial() * self.columns_factorial()
        q, r = divmod(num, den)
        if r:  # the weight is a multinomial count, always integral
            raise AssertionError(f"non-integral partition coefficient for {self}")
        return q


def multiindex_partitions(t) -> list[MultiIndexPartition]:
    """All partitions of the multi-index t, each exactly once.

    Recursion consumes candidate columns in decreasing lexicographic order,
    taking the highest multiplicity first, so the output order is the
    multi-index analogue of reverse-lexicographic.  A one-dimensional
    multi-index (i,) reproduces integer_partitions(i).
    """
    t = tuple(int(v) for v in t)
    if any(v < 0 for v in t):
        raise ValidationError(f"multi-index must be componentwise >= 0: {t}")
    if all(v == 0 for v in t):
        return [MultiIndexPartition((), ())]

    candidates = sorted(
        (c for c in itertools.product(*(range(v + 1) for v in t)) if any(c)),
        reverse=True,
    )
    out: list[MultiIndexPartition] = []
    chosen: list[tuple[tuple[int, ...], int]] = []

    def rec(idx, remaining):
        if not any(remaining):
            cols = tuple(col for col, _ in reversed(chosen))
            mults = tuple(r for _, r in reversed(chosen))
            out.append(MultiIndexPartition(cols, mults))
            return
        if idx == len(candidates):
            return
        col = candidates[idx]
        cap = min(rem // c for rem, c in zip(remaining, col) if c)
        for mult in range(cap, 0, -1):
            chosen.append((col, mult))
            rec(idx + 1, tuple(r - mult * c for r, c in zip(remaining, col)))
            chosen.pop()
        rec(idx + 1, remaining)

    rec(0, t)
    return out


# ---------------------------------------------------------------------------
# necklaces of fixed kind
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Necklace:
    """A rotation class of strings over {1..m}, holding its representative.

    The representative is the lexicographically smallest rotation;
    `block_length` is the smallest period, and `repetitions` times
    `block_length` equals the string length.  `repetitions == 1` iff the
    representative is a Lyndon word.
    """

    representative: tuple[int, ...]
    kind: tuple[int, ...]
    block_length: int
    repetitions: int

    @property
    def word(self) -> str:
        return "".join(str(s) for s in self.representative)

    @property
    def is_lyndon(self) -> bool:
        return self.repetitions == 1


def necklaces_of_kind(kind) -> list[Necklace]:
    """Necklace representatives whose strings use symbol k exactly kind[k-1]
    times, in lexicographic order.

    Fixed-content FKM-style generation: depth-first over prenecklaces,
    tracking the prefix period p and emitting a[1..n] whenever p divides n.
    """
    kind = tuple(int(v) for v in kind)
    if any(v < 0 for v in kind):
        raise ValidationError(f"kind must be componentwise >= 0: {kind}")
    n = sum(kind)
    if n < 1:
        raise ValidationError("necklace kind must have weight >= 1")
    m = len(kind)
    counts = list(kind)
    a = [0] * (n + 1)  # a[0] is the sentinel smallest symbol
    out: list[Necklace] = []

    def gen(t, p):
        if t > n:
            if n % p == 0:
                rep = tuple(s + 1 for s in a[1:])
                out.append(Necklace(rep, kind, p, n // p))
            return
        lo = a[t - p]
        for j in range(lo, m):
            if counts[j]:
                a[t] = j
                counts[j] -= 1
                gen(t + 1, p if j == lo else t)
                counts[j] += 1

    gen(1, 1)
    return out


def necklace_rotations(neck: Necklace) -> list[tuple[int, ...]]:
    """All distinct rotations of the representative (block_length many)."""
    rep = neck.representative
    return [rep[r:] + rep[:r] for r in range(neck.block_length)]


def strings_of_kind(kind):
    """Yield every string over {1..m} of the given kind, in lexicographic
    order.  Brute-force support for oracles and coverage tests."""
    kind = tuple(int(v) for v in kind)
    n = sum(kind)
    counts = list(kind)
    prefix: list[int] = []

    def rec():
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for j in range(len(counts)):
            if counts[j]:
                counts[j] -= 1
                prefix.append(j + 1)
                yield from rec()
                prefix.pop()
                counts[j] += 1

    yield from rec()


# ---------------------------------------------------------------------------
# permutations with explicit cycle structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CyclePermutation:
    """A permutation of {1..k} as canonically ordered disjoint cycles.

    Each cycle starts at its smallest element; cycles are sorted by their
    smallest elements.
    """

    cycles: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        elems = [e for c in self.cycles for e in c]
        k = len(elems)
        if sorted(elems) != list(range(1, k + 1)):
            raise ValidationError(f"cycles must partition 1..k: {self.cycles}")

    @property
    def size(self) -> int:
        return sum(len(c) for c in self.cycles)

    @property
    def cycle_count(self) -> int:
        return len(self.cycles)

    @property
    def cycle_class(self) -> IntegerPartition:
        return IntegerPartition(tuple(sorted((len(c) for c in self.cycles), reverse=True)))

    def images(self) -> tuple[int, ...]:
        """One-line notation: images()[j-1] is the image of j."""
        img = [0] * self.size
        for c in self.cycles:
            for a, b in zip(c, c[1:] + c[:1]):
                img[a - 1] = b
        return tuple(img)

    @classmethod
    def from_images(cls, images) -> "CyclePermutation":
        """Build from one-line notation (1-based images)."""
        images = tuple(int(v) for v in images)
        k = len(images)
        if sorted(images) != list(range(1, k + 1)):
            raise ValidationError(f"not a permutation of 1..{k}: {images}")
        seen = [False] * k
        cycles = []
        for s in range(1, k + 1):
            if seen[s - 1]:
                continue
            c = [s]
            seen[s - 1] = True
            j = images[s - 1]
            while j != s:
                c.append(j)
                seen[j - 1] = True
                j = images[j - 1]
            cycles.append(tuple(c))
        return cls(tuple(cycles))


def permutations_by_cycles(k: int):
    """Iterate over all k! permutations of {1..k} with their cycle
    decompositions, in lexicographic one-line order."""
    if k < 1:
        raise ValidationError(f"permutation degree must be >= 1: {k}")
    check_budget("permutation degree", k, MAX_PERMUTATION_SIZE)
    for images in itertools.permutations(range(1, k + 1)):
        yield CyclePermutation.from_images(images)


# ---------------------------------------------------------------------------
# polynomial families
# ---------------------------------------------------------------------------

def complete_bell(c) -> complex:
    """Complete exponential Bell polynomial Y_i(c_1, ..., c_i).

    The order i is len(c); an empty input gives Y_0 = 1.  Converts a
    cumulant sequence into the moment of the same order.
    """
    c = list(c)
    i = len(c)
    total = 0
    for lam in integer_partitions(i):
        d, _, _ = partition_coefficients(lam, i)
        term = d
        for part, r in lam.part_counts():
            term = term * c[part - 1] ** r
        total += term
    return total


def cyclic_polynomial(a) -> complex:
    """Cyclic polynomial C_i(a_1, ..., a_i) = sum over cycle classes of
    c_lambda a_1^{r_1} ... a_i^{r_i}; the order i is len(a).

    Satisfies C_i(a) = Y_i(a_1, 1! a_2, ..., (i-1)! a_i) and, on power sums,
    C_i(s_1, ..., s_i) = i! h_i.
    """
    a = list(a)
    i = len(a)
    if i < 1:
        raise ValidationError("cyclic polynomial needs order >= 1")
    total = 0
    for lam in integer_partitions(i):
        _, _, c_lam = partition_coefficients(lam, i)
        term = c_lam
        for part, r in lam.part_counts():
            term = term * a[part - 1] ** r
        total += term
    return total


def complete_homogeneous(x, i: int) -> complex:
    """Complete homogeneous symmetric polynomial h_i(x_1, ..., x_p).

    Evaluated through the Newton-style recurrence
    i h_i = sum_{k=1..i} s_k h_{i-k} on power sums, not by monomial
    enumeration.
    """
    if i < 0:
        raise ValidationError(f"order must be >= 0: {i}")
    x = list(x)
    s = [sum(v ** k for v in x) for k in range(1, i + 1)]
    h = [1]
    for k in range(1, i + 1):
        h.append(sum(s[j - 1] * h[k - j] for j in range(1, k + 1)) / k)
    return h[i]


def falling_factorial(x, k: int):
    """x (x-1) ... (x-k+1); k = 0 gives 1.  Exact for integer x."""
    if k < 0:
        raise ValidationError(f"order must be >= 0: {k}")
    out = x ** 0  # 1 in the type of x
    for j in range(k):
        out = out * (x - j)
    return out
