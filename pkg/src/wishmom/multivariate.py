"""Joint moments and cumulants of (Tr[W H_1], ..., Tr[W H_m]).

The central building block is the pair of multivariate base moments

    rho[i] = necklace-grouped sum of Tr[prod_{k in word} (Sigma H_k)]
             over rotation classes of kind i (periodic classes weighted by
             1 / repetitions), equal to the plain average over all strings
             of kind i divided by |i|;
    eta[i] = sum over every string of kind i of a trace word carrying the
             non-centrality matrix Omega (no cyclic grouping: the Omega
             factor breaks rotation invariance).

The eta word ordering follows the sign convention.  Under "paper" it is
Tr[Omega (Sigma H_k1)(Sigma H_k2)...], reproducing the source formulas
verbatim.  Under "standard" it is Tr[Omega (H_k1 Sigma)(H_k2 Sigma)...],
which cyclically equals Tr[M H_k1 Sigma H_k2 ...] and is the expansion of
the sampled distribution's generating function: already the first moment
E[Tr W H] = n Tr(Sigma H) + Tr(M H) forces this order whenever Sigma and M
do not commute.  The two orderings coincide for H_k = I, so univariate
results never depend on it.

Joint moments expand these over multi-index partitions with a binomial
convolution of the central and non-centrality parts; joint cumulants are
i! (n rho[i] + sign eta[i]).  Brute-force all-strings versions of rho and
eta are shipped as oracles.

Alternating partition sums are accumulated with compensated (Kahan)
summation in a fixed enumeration order, so results are reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import matrix_core
from .budgets import (
    MAX_EXPANSION_CYCLES,
    MAX_JOINT_WEIGHT,
    MAX_PRODUCT_FACTORS,
    MAX_STRING_WEIGHT,
    check_budget,
)
from .combinatorics import (
    CyclePermutation,
    multiindex_partitions,
    necklace_rotations,
    necklaces_of_kind,
)
from .errors import DimensionMismatchError, InsufficientOrdersError, ValidationError
from .model import WishartParams
from .univariate import CUMULANTS, MomentSequence


class _Kahan:
    """Neumaier-compensated complex accumulator."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0 + 0.0j
        self.comp = 0.0 + 0.0j

    def add(self, x):
        x = complex(x)
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    @property
    def value(self) -> complex:
        return self.total + self.comp


def _direction_products(params: WishartParams, h) -> list[np.ndarray]:
    """[Sigma H_1, ..., Sigma H_m] with dimension validation."""
    hs = [matrix_core.as_matrix(hk) for hk in h]
    if not hs:
        raise ValidationError("need at least one direction matrix")
    if any(hk.shape[0] != params.p for hk in hs):
        raise DimensionMismatchError("direction matrices must match params dimension")
    return [params.sigma @ hk for hk in hs]


def _eta_direction_products(params: WishartParams, h) -> list[np.ndarray]:
    """Factors of the eta trace words, ordered per the sign convention."""
    hs = [matrix_core.as_matrix(hk) for hk in h]
    if not hs:
        raise ValidationError("need at least one direction matrix")
    if any(hk.shape[0] != params.p for hk in hs):
        raise DimensionMismatchError("direction matrices must match params dimension")
    if params.convention == "paper":
        return [params.sigma @ hk for hk in hs]
    return [hk @ params.sigma for hk in hs]


def _as_kind(i, m: int) -> tuple[int, ...]:
    kind = tuple(int(v) for v in i)
    if len(kind) != m:
        raise DimensionMismatchError(f"index has {len(kind)} components, expected {m}")
    if any(v < 0 for v in kind):
        raise ValidationError(f"index must be componentwise >= 0: {kind}")
    return kind


def _word_product(sh, word, left=None) -> np.ndarray:
    acc = left
    for sym in word:
        f = sh[sym - 1]
        acc = f if acc is None else acc @ f
    return acc


# ---------------------------------------------------------------------------
# base moments: necklace route and all-strings oracles
# ---------------------------------------------------------------------------

def _rho_of_kind(sh, kind) -> complex:
    acc = _Kahan()
    for neck in necklaces_of_kind(kind):
        tr = np.trace(_word_product(sh, neck.representative))
        acc.add(tr if neck.repetitions == 1 else tr / neck.repetitions)
    return acc.value


def _eta_of_kind(sh, omega, kind) -> complex:
    acc = _Kahan()
    for neck in necklaces_of_kind(kind):
        for rot in necklace_rotations(neck):
            acc.add(np.trace(_word_product(sh, rot, left=omega)))
    return acc.value


def _strings_trace_sum(sh, kind, left) -> complex:
    """Sum of Tr[left * prod(word)] over every string of the given kind.

    Depth-first with a running prefix product, so shared prefixes cost one
    multiply.
    """
    counts = list(kind)
    acc = _Kahan()

    def rec(prefix):
        if not any(counts):
            acc.add(np.trace(prefix if prefix is not None else left))
            return
        for j in range(len(counts)):
            if counts[j]:
                counts[j] -= 1
                nxt = sh[j] if prefix is None else prefix @ sh[j]
                rec(nxt)
                counts[j] += 1

    rec(left)
    return acc.value


def rho_moment(params: WishartParams, h, i) -> complex:
    """Central base moment rho[i], grouped over necklaces of kind i."""
    kind = _as_kind(i, len(h))
    if sum(kind) < 1:
        raise ValidationError("rho_moment needs |i| >= 1")
    return _rho_of_kind(_direction_products(params, h), kind)


def rho_moment_strings(params: WishartParams, h, i) -> complex:
    """Brute-force oracle for rho: (1/|i|) sum over all strings of kind i."""
    kind = _as_kind(i, len(h))
    weight = sum(kind)
    if weight < 1:
        raise ValidationError("rho_moment_strings needs |i| >= 1")
    check_budget("string weight", weight, MAX_STRING_WEIGHT)
    return _strings_trace_sum(_direction_products(params, h), kind, None) / weight


def eta_moment(params: WishartParams, h, i) -> complex:
    """Non-centrality base moment eta[i]; needs Omega explicitly.

    The trace words are Tr[Omega prod(Sigma H_k)] under the paper
    convention and Tr[Omega prod(H_k Sigma)] under the standard one (see
    the module docstring).
    """
    kind = _as_kind(i, len(h))
    if sum(kind) < 1:
        raise ValidationError("eta_moment needs |i| >= 1")
    return _eta_of_kind(_eta_direction_products(params, h),
                        params.noncentrality(), kind)


def eta_moment_strings(params: WishartParams, h, i) -> complex:
    """Brute-force oracle for eta: plain sum over all strings of kind i."""
    kind = _as_kind(i, len(h))
    weight = sum(kind)
    if weight < 1:
        raise ValidationError("eta_moment_strings needs |i| >= 1")
    check_budget("string weight", weight, MAX_STRING_WEIGHT)
    return _strings_trace_sum(_eta_direction_products(params, h), kind,
                              np.asarray(params.noncentrality()))


# ---------------------------------------------------------------------------
# joint moments and cumulants
# ---------------------------------------------------------------------------

def _sub_indices(kind):
    return itertools.product(*(range(c + 1) for c in kind))

def _base_tables(params, h, kind, need_eta):
    """rho (and eta) values for every nonzero sub-index of `kind`."""
    sh = _direction_products(params, h)
    if need_eta:
        eta_factors = _eta_direction_products(params, h)
        omega = params.noncentrality()
    rho_tab, eta_tab = {}, {}
    for v in _sub_indices(kind):
        if not any(v):
            continue
        rho_tab[v] = _rho_of_kind(sh, v)
        if need_eta:
            eta_tab[v] = _eta_of_kind(eta_factors, omega, v)
    return rho_tab, eta_tab


def _partition_sum(kind, table, weight) -> complex:
    """sum over partitions of `kind` of weight(l) / m! * prod table[col]^r."""
    if not any(kind):
        return 1.0 + 0.0j
    acc = _Kahan()
    for lam in multiindex_partitions(kind):
        term = weight(lam.length) / lam.multiplicity_factorial()
        for col, r in zip(lam.columns, lam.multiplicities):
            term = term * table[col] ** r
        acc.add(term)
    return acc.value


def _index_factorial(kind) -> int:
    out = 1
    for v in kind:
        out *= math.factorial(v)
    return out


def joint_moment(params: WishartParams, h, i) -> complex:
    """E[prod_j Tr(W H_j)^{i_j}].

    Binomial convolution over splits i = t1 + t2 of the non-centrality
    partition sum (sign^l weights on eta) and the central partition sum
    (n^l weights on rho).  The eta side needs Omega, hence a nonsingular
    Sigma, unless M = 0.
    """
    kind = _as_kind(i, len(h))
    weight = sum(kind)
    check_budget("joint weight", weight, MAX_JOINT_WEIGHT)
    if weight == 0:
        return 1.0 + 0.0j
    central = params.is_central
    rho_tab, eta_tab = _base_tables(params, h, kind, need_eta=not central)

    acc = _Kahan()
    for t2 in _sub_indices(kind):
        t1 = tuple(a - b for a, b in zip(kind, t2))
        if central and any(t1):
            continue
        r_val = _partition_sum(t2, rho_tab, lambda l: params.n ** l)
        a_val = _partition_sum(t1, eta_tab, lambda l: params.sign ** l)
        acc.add(a_val * r_val)
    return _index_factorial(kind) * acc.value


def joint_cumulant(params: WishartParams, h, i) -> complex:
    """Cum_i(Tr[W H_1], ..., Tr[W H_m]) = i! (n rho[i] + sign eta[i])."""
    kind = _as_kind(i, len(h))
    weight = sum(kind)
    if weight < 1:
        raise ValidationError("joint cumulant needs |i| >= 1")
    check_budget("joint weight", weight, MAX_JOINT_WEIGHT)
    total = params.n * _rho_of_kind(_direction_products(params, h), kind)
    if not params.is_central:
        total += params.sign * _eta_of_kind(_eta_direction_products(params, h),
                                            params.noncentrality(), kind)
    return _index_factorial(kind) * total


def joint_cumulant_randomized(alpha_cumulants: MomentSequence,
                              params: WishartParams, h, i) -> complex:
    """Joint cumulant when the central block's index is randomized.

    `alpha_cumulants` carries the cumulant sequence c_k of the random index;
    the n^{l} head of the deterministic formula becomes the full partition
    sum with c_{l(lambda)} weights:
        i! ( sum_{lambda |= i} c_l / m! prod rho[col]^r + sign eta[i] ).

    Only the central part is randomized: the eta term enters once,
    unweighted, so conditionally on the index being k the object is
    W(k, Sigma, M) with the non-centrality held fixed.  (This differs from
    the univariate `randomized_moment`, a random sum whose summed
    non-centrality grows with the index.)
    """
    if alpha_cumulants.kind != CUMULANTS:
        raise ValidationError("alpha_cumulants must be a cumulant sequence")
    kind = _as_kind(i, len(h))
    weight = sum(kind)
    if weight < 1:
        raise ValidationError("joint cumulant needs |i| >= 1")
    check_budget("joint weight", weight, MAX_JOINT_WEIGHT)
    if alpha_cumulants.depth < weight:
        raise InsufficientOrdersError(
            f"alpha carries {alpha_cumulants.depth} orders, need {weight}")
    sh = _direction_products(params, h)
    rho_tab = {v: _rho_of_kind(sh, v) for v in _sub_indices(kind) if any(v)}
    total = _partition_sum(kind, rho_tab, alpha_cumulants.order)
    if not params.is_central:
        total += params.sign * _eta_of_kind(_eta_direction_products(params, h),
                                            params.noncentrality(), kind)
    return _index_factorial(kind) * total


# ---------------------------------------------------------------------------
# generalized (multi-factor trace) moments
# ---------------------------------------------------------------------------

def _cycles_of_images(images):
    m = len(images)
    seen = [False] * m
    out = []
    for s in range(m):
        if seen[s]:
            continue
        c = [s]
        seen[s] = True
        j = images[s]
        while j != s:
            c.append(j)
            seen[j] = True
            j = images[j]
        out.append(tuple(c))
    return out


def _cycle_count(images) -> int:
    return len(_cycles_of_images(images))


def _perm_to_images0(sigma_perm: CyclePermutation) -> tuple[int, ...]:
    return tuple(v - 1 for v in sigma_perm.images())


def _genmom_cycles(n, sh, sigma_images) -> complex:
    """Group-action sum for the central part:
    sum_tau n^{#cycles(sigma tau^-1)} prod over cycles of tau of the trace
    of the Sigma H product along the cycle."""
    m = len(sigma_images)
    if m == 0:
        return 1.0 + 0.0j
    acc = _Kahan()
    for tau in itertools.permutations(range(m)):
        inv = [0] * m
        for a, b in enumerate(tau):
            inv[b] = a
        comp = tuple(sigma_images[inv[j]] for j in range(m))
        term = n ** _cycle_count(comp)
        for c in _cycles_of_images(tau):
            term = term * np.trace(_word_product(sh, [j + 1 for j in c]))
        acc.add(term)
    return acc.value


def _genmom1_cycles(sign, eta_factors, omega, sigma_images) -> complex:
    """Group-action sum for the formal non-centrality part:
    sum_tau sign^{#cycles(sigma tau^-1)} prod over cycles of tau of the
    length-of-cycle weighted Omega trace word, realized as the sum of the
    word over the cycle's rotations (which is what makes the singleton
    assignment decomposition exact, the word not being rotation invariant).
    """
    m = len(sigma_images)
    if m == 0:
        return 1.0 + 0.0j
    acc = _Kahan()
    for tau in itertools.permutations(range(m)):
        inv = [0] * m
        for a, b in enumerate(tau):
            inv[b] = a
        comp = tuple(sigma_images[inv[j]] for j in range(m))
        term = sign ** _cycle_count(comp)
        for c in _cycles_of_images(tau):
            rot_sum = _Kahan()
            for r in range(len(c)):
                word = [j + 1 for j in c[r:] + c[:r]]
                rot_sum.add(np.trace(_word_product(eta_factors, word, left=omega)))
            term = term * rot_sum.value
        acc.add(term)
    return acc.value


def _restrict(sigma_cycles, sh):
    """Relabel a set of cycles over arbitrary positions to a compact
    permutation, with the matching Sigma H sublist."""
    positions = sorted(j for c in sigma_cycles for j in c)
    pos_index = {j: k for k, j in enumerate(positions)}
    images = [0] * len(positions)
    for c in sigma_cycles:
        for a, b in zip(c, c[1:] + c[:1]):
            images[pos_index[a]] = pos_index[b]
    return tuple(images), [sh[j] for j in positions]


def central_product_moment(params: WishartParams, h, sigma_perm: CyclePermutation) -> complex:
    """E[prod over cycles c of sigma of Tr(prod_{j in c} W_central H_j)]."""
    m = len(h)
    if sigma_perm.size != m:
        raise DimensionMismatchError("permutation size must match len(h)")
    check_budget("product factors", m, MAX_PRODUCT_FACTORS)
    sh = _direction_products(params, h)
    return _genmom_cycles(params.n, sh, _perm_to_images0(sigma_perm))


def a_product_moment(params: WishartParams, h, sigma_perm: CyclePermutation) -> complex:
    """Generalized moment of the formal non-centrality component A.

    The base of the alternating weight is the convention sign (-1 under
    "paper", +1 under "standard").  Needs Omega, hence nonsingular Sigma.
    """
    m = len(h)
    if sigma_perm.size != m:
        raise DimensionMismatchError("permutation size must match len(h)")
    check_budget("product factors", m, MAX_PRODUCT_FACTORS)
    return _genmom1_cycles(params.sign, _eta_direction_products(params, h),
                           params.noncentrality(), _perm_to_images0(sigma_perm))


# ---------------------------------------------------------------------------
# central/formal assignment expansion of generalized moments
# ---------------------------------------------------------------------------

CENTRAL_LETTER = "W"   # the central component W_hat
FORMAL_LETTER = "A"    # the formal non-centrality component


@dataclass(frozen=True)
class TraceFactor:
    """One cycle of the expansion: which component sits at each position.

    `assignment` spells the component letter per cycle position (W for the
    central part, A for the formal part); `cycle` lists the 1-based H
    indices in traversal order.  `value` is the single-trace expectation of
    a pure factor, None when the cycle mixes both components (symbolic).
    """

    assignment: str
    cycle: tuple[int, ...]
    value: complex | None

    @property
    def symbolic(self) -> bool:
        return self.value is None

    def canonical_word(self) -> tuple[tuple[str, int], ...]:
        """Rotation-canonical (letter, index) sequence, for merging factors
        that are equal by trace cyclicity."""
        pairs = tuple(zip(self.assignment, self.cycle))
        return min(pairs[r:] + pairs[:r] for r in range(len(pairs)))


@dataclass(frozen=True)
class ExpansionTerm:
    """One component assignment: per-cycle factors plus the term value.

    `value` is the exact expectation of the product of traces.  It is
    computed jointly (all pure-central cycles through one group-action sum,
    all pure-formal cycles through the other): the expectation does not
    factor per cycle because cycles share the same matrix.  The per-factor
    values are the single-cycle expectations and are informational.
    """

    coefficient: complex
    factors: tuple[TraceFactor, ...]
    value: complex | None

    @property
    def symbolic(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class GeneralizedMomentExpansion:
    """Expansion of a generalized moment over component assignments.

    `evaluated_sum` totals the fully evaluated terms; `symbolic_factors`
    collects the distinct mixed-cycle factors (canonicalized by rotation)
    whose evaluation has no closed form here.
    """

    terms: tuple[ExpansionTerm, ...]
    evaluated_sum: complex
    symbolic_factors: tuple[TraceFactor, ...]

    @property
    def fully_evaluated(self) -> bool:
        return not self.symbolic_factors


def generalized_moment_expansion(params: WishartParams, h,
                                 sigma_perm: CyclePermutation) -> GeneralizedMomentExpansion:
    """Expand E[prod over cycles of Tr(prod_j W H_j)] over all 2^k
    assignments of the central/formal components to the k positions.

    Terms whose cycles are all pure evaluate exactly; a cycle mixing both
    components yields a symbolic factor (the whole term is then symbolic).
    When M = 0 the formal component vanishes identically, every factor
    touching it evaluates to zero, and the expansion is fully evaluated.
    """
    m = len(h)
    if sigma_perm.size != m:
        raise DimensionMismatchError("permutation size must match len(h)")
    check_budget("expansion positions", m, MAX_EXPANSION_CYCLES)
    sh = _direction_products(params, h)
    central = params.is_central
    eta_factors = None if central else _eta_direction_products(params, h)
    omega = None if central else params.noncentrality()
    sign = params.sign
    cycles0 = [tuple(v - 1 for v in c) for c in sigma_perm.cycles]

    def single_cycle_value(cycle0, letter):
        if letter == CENTRAL_LETTER:
            images, sub = _restrict([cycle0], sh)
            return _genmom_cycles(params.n, sub, images)
        if central:
            return 0.0 + 0.0j
        images, sub = _restrict([cycle0], eta_factors)
        return _genmom1_cycles(sign, sub, omega, images)

    terms = []
    sum_acc = _Kahan()
    symbolic: dict[tuple, TraceFactor] = {}
    for bits in itertools.product((CENTRAL_LETTER, FORMAL_LETTER), repeat=m):
        factors = []
        central_cycles, formal_cycles = [], []
        mixed = False
        for cyc in cycles0:
            letters = "".join(bits[j] for j in cyc)
            cycle1 = tuple(j + 1 for j in cyc)
            if letters.count(CENTRAL_LETTER) == len(cyc):
                central_cycles.append(cyc)
                factors.append(TraceFactor(letters, cycle1,
                                           single_cycle_value(cyc, CENTRAL_LETTER)))
            elif letters.count(FORMAL_LETTER) == len(cyc):
                formal_cycles.append(cyc)
                factors.append(TraceFactor(letters, cycle1,
                                           single_cycle_value(cyc, FORMAL_LETTER)))
            elif central:
                # mixed word, but the formal component is identically zero
                factors.append(TraceFactor(letters, cycle1, 0.0 + 0.0j))
            else:
                mixed = True
                factors.append(TraceFactor(letters, cycle1, None))

        if mixed:
            value = None
            for f in factors:
                if f.symbolic:
                    symbolic.setdefault(f.canonical_word(), f)
        elif central and any(b == FORMAL_LETTER for b in bits):
            value = 0.0 + 0.0j
        else:
            w_img, w_sh = _restrict(central_cycles, sh) if central_cycles else ((), [])
            a_img, a_sub = (_restrict(formal_cycles, eta_factors)
                            if formal_cycles else ((), []))
            value = (_genmom_cycles(params.n, w_sh, w_img)
                     * _genmom1_cycles(sign, a_sub, omega, a_img))
            sum_acc.add(value)
        terms.append(ExpansionTerm(1.0 + 0.0j, tuple(factors), value))

    return GeneralizedMomentExpansion(tuple(terms), sum_acc.value,
                                      tuple(symbolic.values()))
