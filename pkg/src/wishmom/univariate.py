"""Exact moments and cumulants of the trace of a (non-)central complex
Wishart matrix.

Two independent routes are shipped for each quantity and pinned together by
the test suite: partition sums over the trace caches versus complete Bell
polynomials of the cumulant sequence, and the trace-cache cumulant formula
versus its eigenvalue form.  All partition coefficients are exact integers;
floating arithmetic enters at the final multiply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matrix_core
from .budgets import MAX_UNIVARIATE_ORDER, check_budget
from .combinatorics import (
    complete_bell,
    cyclic_polynomial,
    falling_factorial,
    integer_partitions,
    partition_coefficients,
)
from .errors import InsufficientOrdersError, ValidationError
from .model import WishartParams, build

MOMENTS = "moments"
CUMULANTS = "cumulants"


@dataclass(frozen=True)
class MomentSequence:
    """A finite moment or cumulant sequence.

    `values[k]` is the order-k entry; index 0 holds 1 for moments and 0 for
    cumulants by convention.
    """

    values: tuple[complex, ...]
    kind: str

    def __post_init__(self):
        if self.kind not in (MOMENTS, CUMULANTS):
            raise ValidationError(f"kind must be {MOMENTS!r} or {CUMULANTS!r}")
        if not self.values:
            raise ValidationError("empty sequence")
        if self.kind == MOMENTS and self.values[0] != 1:
            raise ValidationError("a moment sequence must start with 1")
        if any(not np.isfinite(complex(v)) for v in self.values):
            raise ValidationError("non-finite entry in sequence")

    @property
    def depth(self) -> int:
        """Highest order carried."""
        return len(self.values) - 1

    def order(self, k: int) -> complex:
        if k < 0 or k > self.depth:
            raise InsufficientOrdersError(
                f"order {k} not available (depth {self.depth})")
        return complex(self.values[k])

    @classmethod
    def from_moments(cls, orders_1_up) -> "MomentSequence":
        return cls((1,) + tuple(orders_1_up), MOMENTS)

    @classmethod
    def from_cumulants(cls, orders_1_up) -> "MomentSequence":
        return cls((0,) + tuple(orders_1_up), CUMULANTS)


def _check_order(i: int) -> None:
    if i < 0:
        raise ValidationError(f"order must be >= 0: {i}")
    check_budget("moment order", i, MAX_UNIVARIATE_ORDER)


# ---------------------------------------------------------------------------
# central distribution
# ---------------------------------------------------------------------------

def central_moment(params: WishartParams, i: int) -> complex:
    """E[(Tr W)^i] for the central distribution (M ignored).

    Partition sum with falling-factorial weights over products of cyclic
    polynomials of the power traces T_1..T_i.
    """
    _check_order(i)
    if i == 0:
        return 1.0 + 0.0j
    cache = params.trace_cache(i)
    cyc = [cyclic_polynomial([cache.t_power(k) for k in range(1, j + 1)])
           for j in range(1, i + 1)]
    total = 0.0 + 0.0j
    for lam in integer_partitions(i):
        d, _, _ = partition_coefficients(lam, i)
        term = d * falling_factorial(params.n, lam.length)
        for part, r in lam.part_counts():
            term = term * cyc[part - 1] ** r
        total += term
    return complex(total)


def central_cumulant(params: WishartParams, i: int) -> complex:
    """Cum_i(Tr W) for the central distribution: n (i-1)! T_i."""
    if i < 1:
        raise ValidationError(f"cumulant order must be >= 1: {i}")
    check_budget("cumulant order", i, MAX_UNIVARIATE_ORDER)
    cache = params.trace_cache(i)
    return params.n * math.factorial(i - 1) * cache.t_power(i)


# ---------------------------------------------------------------------------
# non-central distribution
# ---------------------------------------------------------------------------

def noncentral_cumulant(params: WishartParams, i: int) -> complex:
    """Cum_i(Tr W) = n (i-1)! T_i + sign * i! S_i.

    `sign` is -1 under the paper convention and +1 under the standard one.
    """
    if i < 1:
        raise ValidationError(f"cumulant order must be >= 1: {i}")
    check_budget("cumulant order", i, MAX_UNIVARIATE_ORDER)
    cache = params.trace_cache(i)
    return (params.n * math.factorial(i - 1) * cache.t_power(i)
            + params.sign * math.factorial(i) * cache.s_power(i))


def noncentral_cumulant_eigen(params: WishartParams, i: int) -> complex:
    """Cum_i(Tr W) through the eigenvalues of Sigma.

    (i-1)! sum_j (n + sign * i * b_jj) theta_j^i with theta the eigenvalues
    and b the diagonal of Q^dag Omega Q.  Needs Sigma nonsingular.
    """
    if i < 1:
        raise ValidationError(f"cumulant order must be >= 1: {i}")
    check_budget("cumulant order", i, MAX_UNIVARIATE_ORDER)
    theta, q = matrix_core.hermitian_eigen(params.sigma)
    b = np.diagonal(q.conj().T @ params.noncentrality() @ q)
    total = sum((params.n + params.sign * i * b[j]) * theta[j] ** i
                for j in range(params.p))
    return math.factorial(i - 1) * complex(total)


def noncentral_moment(params: WishartParams, i: int) -> complex:
    """E[(Tr W)^i] by the binomial-convolution partition sum.

    i! sum_{j+k=i} A_j R_k where A_j sums sign^l / prod r! over partitions
    of j on the S-traces and R_k sums n^l / prod r! over partitions of k on
    T_m / m.  Reduces to the central moment when M = 0.
    """
    _check_order(i)
    if i == 0:
        return 1.0 + 0.0j
    cache = params.trace_cache(i)

    def partition_sum(order, base_powers, weight):
        total = 0.0 + 0.0j
        for lam in integer_partitions(order):
            term = weight(lam.length)
            den = 1
            for part, r in lam.part_counts():
                term = term * base_powers[part - 1] ** r
                den *= math.factorial(r)
            total += term / den
        return total

    s_base = [cache.s_power(k) for k in range(1, i + 1)]
    t_base = [cache.t_power(k) / k for k in range(1, i + 1)]
    a_part = [partition_sum(j, s_base, lambda l: params.sign ** l)
              for j in range(i + 1)]
    r_part = [partition_sum(k, t_base, lambda l: params.n ** l)
              for k in range(i + 1)]
    total = sum(a_part[j] * r_part[i - j] for j in range(i + 1))
    return math.factorial(i) * complex(total)


def noncentral_moment_bell(params: WishartParams, i: int) -> complex:
    """E[(Tr W)^i] as the complete Bell polynomial of the cumulants.

    Independent route used to cross-check `noncentral_moment`.
    """
    _check_order(i)
    cums = [noncentral_cumulant(params, k) for k in range(1, i + 1)]
    return complex(complete_bell(cums))


def cumulant_sequence(params: WishartParams, i_max: int) -> MomentSequence:
    """Cumulants of Tr W for orders 1..i_max."""
    return MomentSequence.from_cumulants(
        [noncentral_cumulant(params, k) for k in range(1, i_max + 1)])


def moment_sequence(params: WishartParams, i_max: int) -> MomentSequence:
    """Moments of Tr W for orders 0..i_max."""
    return MomentSequence.from_moments(
        [noncentral_moment(params, k) for k in range(1, i_max + 1)])


# ---------------------------------------------------------------------------
# randomized degrees of freedom
# ---------------------------------------------------------------------------

def randomized_moment(alpha: MomentSequence, params: WishartParams, i: int) -> complex:
    """E[(Tr W(N))^i] for a random number of draws N with moments `alpha`.

    W(N) sums N independent single draws with common per-draw parameters
    (Sigma, M); params.n is ignored.  The random-sum composition gives
    sum over partitions of alpha_{l(lambda)} d_lambda times products of the
    per-draw trace *cumulants*, i.e. the moment sequence of N composed with
    the single-draw log-transform.  For N fixed at an integer n this equals
    the n-draw moment with non-centrality n * M.
    """
    if alpha.kind != MOMENTS:
        raise ValidationError("alpha must be a moment sequence")
    _check_order(i)
    if i == 0:
        return 1.0 + 0.0j
    if alpha.depth < i:
        raise InsufficientOrdersError(
            f"alpha carries {alpha.depth} orders, need {i}")
    cache = params.trace_cache(i)
    draw_cums = [math.factorial(k - 1) * cache.t_power(k)
                 + params.sign * math.factorial(k) * cache.s_power(k)
                 for k in range(1, i + 1)]
    total = 0.0 + 0.0j
    for lam in integer_partitions(i):
        d, _, _ = partition_coefficients(lam, i)
        term = d * alpha.order(lam.length)
        for part, r in lam.part_counts():
            term = term * draw_cums[part - 1] ** r
        total += term
    return complex(total)


# ---------------------------------------------------------------------------
# dimension-normalized cumulants
# ---------------------------------------------------------------------------

def normalized_cumulant_moments(params: WishartParams, i_max: int) -> MomentSequence:
    """Moments of the dimension-normalized trace component.

    Defined by the triangular system
        E[(Tr W)^i] = sum over partitions of p^{l} d_lambda prod e_{part}^r
    and solved for the e_i by forward substitution; reinserting the solved
    sequence reproduces the trace moments exactly.
    """
    if i_max < 1:
        raise ValidationError(f"i_max must be >= 1: {i_max}")
    check_budget("moment order", i_max, MAX_UNIVARIATE_ORDER)
    p = params.p
    e = [1.0 + 0.0j]
    for i in range(1, i_max + 1):
        mom = noncentral_moment(params, i)
        rest = 0.0 + 0.0j
        for lam in integer_partitions(i):
            if lam.length == 1:
                continue  # the p * e_i head term
            d, _, _ = partition_coefficients(lam, i)
            term = d * p ** lam.length
            for part, r in lam.part_counts():
                term = term * e[part] ** r
            rest += term
        e.append((mom - rest) / p)
    return MomentSequence(tuple(e), MOMENTS)


def compose_normalized_moments(e: MomentSequence, p: int, i: int) -> complex:
    """Forward expansion: trace moment of order i from the normalized
    sequence e (round-trip companion of `normalized_cumulant_moments`)."""
    if e.kind != MOMENTS:
        raise ValidationError("e must be a moment sequence")
    total = 0.0 + 0.0j
    for lam in integer_partitions(i):
        d, _, _ = partition_coefficients(lam, i)
        term = d * p ** lam.length
        for part, r in lam.part_counts():
            term = term * e.order(part) ** r
        total += term
    return complex(total)


# ---------------------------------------------------------------------------
# convolution identities
# ---------------------------------------------------------------------------

def binomial_convolution_check(params: WishartParams, n1: float, n2: float,
                               i_max: int, m_split=None) -> dict[int, float]:
    """Verify the binomial convolution of trace moment sequences.

    Checks, order by order up to i_max,
        E[(Tr W(n1+n2, Sigma, M1+M2))^i]
          = sum_k C(i,k) E[(Tr W(n1, Sigma, M1))^k] E[(Tr W(n2, Sigma, M2))^{i-k}]
    with (M1, M2) = `m_split` (default: all of M on the n1 block, so the
    second factor is central).  Returns {order: max relative deviation}.
    """
    if not (n1 > 0 and n2 > 0):
        raise ValidationError("n1 and n2 must be positive")
    if i_max < 1:
        raise ValidationError(f"i_max must be >= 1: {i_max}")
    sigma, conv = params.sigma, params.convention
    if m_split is None:
        m1, m2 = params.m_matrix, np.zeros_like(params.m_matrix)
    else:
        m1 = matrix_core.as_matrix(m_split[0])
        m2 = matrix_core.as_matrix(m_split[1])
        if np.abs((m1 + m2) - params.m_matrix).max() > 1e-12 * max(
                matrix_core.mat_norm(params.m_matrix), 1.0):
            raise ValidationError("m_split does not sum to params.m_matrix")
    whole, _ = build(n1 + n2, sigma, params.m_matrix, conv)
    left, _ = build(n1, sigma, m1, conv)
    right, _ = build(n2, sigma, m2, conv)

    lm = [noncentral_moment(left, k) for k in range(i_max + 1)]
    rm = [noncentral_moment(right, k) for k in range(i_max + 1)]
    report = {}
    for i in range(1, i_max + 1):
        lhs = noncentral_moment(whole, i)
        rhs = sum(math.comb(i, k) * lm[k] * rm[i - k] for k in range(i + 1))
        report[i] = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    return report
