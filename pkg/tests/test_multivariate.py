import itertools
import math

import numpy as np
import pytest

from wishmom import (
    BudgetExceededError,
    CyclePermutation,
    MomentSequence,
    SingularMatrixError,
    ValidationError,
    a_product_moment,
    build,
    central_product_moment,
    eta_moment,
    eta_moment_strings,
    generalized_moment_expansion,
    joint_cumulant,
    joint_cumulant_randomized,
    joint_moment,
    multiindex_partitions,
    noncentral_moment,
    rho_moment,
    rho_moment_strings,
)
from wishmom.matrix_core import product_trace

from conftest import random_complex, random_psd, rel_err


def make_instance(seed, p=3, n=4.0, m=2, convention="standard", central=False,
                  m_scale=0.5):
    rng = np.random.default_rng(seed)
    sigma = random_psd(rng, p)
    m_matrix = None if central else random_psd(rng, p, m_scale)
    params, _ = build(n, sigma, m_matrix, convention)
    h = [random_complex(rng, p) for _ in range(m)]
    return params, h


def nonzero_kinds(m, max_weight):
    for kind in itertools.product(range(max_weight + 1), repeat=m):
        if 1 <= sum(kind) <= max_weight:
            yield kind


# ---------------------------------------------------------------------------
# base moments
# ---------------------------------------------------------------------------

def test_rho_closed_forms():
    params, h = make_instance(0, m=2)
    sigma = params.sigma
    # single letter: the fully periodic word contributes Tr(Sigma^j)/j
    for j in (1, 2, 3):
        want = product_trace([sigma] * j) / j
        assert rel_err(rho_moment(params, [np.eye(3)], (j,)), want) < 1e-13
    # (1,1): one Lyndon word
    want = product_trace([sigma @ h[0], sigma @ h[1]])
    assert rel_err(rho_moment(params, h, (1, 1)), want) < 1e-13
    # (2,2): Lyndon 1122 plus half of the periodic 1212
    s1, s2 = sigma @ h[0], sigma @ h[1]
    want = product_trace([s1, s1, s2, s2]) + product_trace([s1, s2, s1, s2]) / 2
    assert rel_err(rho_moment(params, h, (2, 2)), want) < 1e-13


@pytest.mark.parametrize("m", [1, 2, 3])
def test_rho_matches_strings_oracle(m):
    params, h = make_instance(m, m=m)
    for kind in nonzero_kinds(m, 6 if m < 3 else 5):
        assert rel_err(rho_moment(params, h, kind),
                       rho_moment_strings(params, h, kind)) < 1e-12


@pytest.mark.parametrize("convention", ["paper", "standard"])
@pytest.mark.parametrize("m", [2, 3])
def test_eta_matches_strings_oracle(m, convention):
    params, h = make_instance(10 + m, m=m, convention=convention)
    for kind in nonzero_kinds(m, 8 if m == 2 else 6):
        assert rel_err(eta_moment(params, h, kind),
                       eta_moment_strings(params, h, kind)) < 1e-12
    if m == 3:  # full-budget spot checks
        for kind in [(3, 3, 2), (4, 2, 2), (1, 3, 4)]:
            assert rel_err(eta_moment(params, h, kind),
                           eta_moment_strings(params, h, kind)) < 1e-12


def test_eta_closed_forms_paper_convention():
    params, h = make_instance(1, m=2, convention="paper")
    sigma, omega = params.sigma, params.noncentrality()
    s1, s2 = sigma @ h[0], sigma @ h[1]
    # single letter, identity direction: the S_j cache values
    cache = params.trace_cache(3)
    for j in (1, 2, 3):
        got = eta_moment(params, [np.eye(3)], (j,))
        assert rel_err(got, cache.s_power(j)) < 1e-10
    # kind (1,1): both rotations of the word 12
    want = product_trace([omega, s1, s2]) + product_trace([omega, s2, s1])
    assert rel_err(eta_moment(params, h, (1, 1)), want) < 1e-13
    # kind (1,2): the three rotations of 122
    want = (product_trace([omega, s1, s2, s2])
            + product_trace([omega, s2, s1, s2])
            + product_trace([omega, s2, s2, s1]))
    assert rel_err(eta_moment(params, h, (1, 2)), want) < 1e-13


def test_eta_closed_forms_standard_convention():
    # standard-order words place M directly before the first direction
    params, h = make_instance(2, m=2, convention="standard")
    sigma, m_mat = params.sigma, params.m_matrix
    want = (product_trace([m_mat, h[0], sigma, h[1]])
            + product_trace([m_mat, h[1], sigma, h[0]]))
    assert rel_err(eta_moment(params, h, (1, 1)), want) < 1e-13
    # first moment of Tr W H must be n Tr(Sigma H) + Tr(M H)
    got = joint_moment(params, h[:1], (1,))
    want1 = params.n * np.trace(sigma @ h[0]) + np.trace(m_mat @ h[0])
    assert rel_err(got, want1) < 1e-13


def test_eta_identity_direction_is_convention_independent():
    pp, h = make_instance(3, m=1, convention="paper")
    ps, _ = build(pp.n, pp.sigma, pp.m_matrix, "standard")
    eye = [np.eye(3)]
    for j in (1, 2, 3, 4):
        assert rel_err(eta_moment(pp, eye, (j,)), eta_moment(ps, eye, (j,))) < 1e-12


def test_base_moment_validation():
    params, h = make_instance(4, m=2)
    with pytest.raises(ValidationError):
        rho_moment(params, h, (0, 0))
    with pytest.raises(BudgetExceededError):
        rho_moment_strings(params, h, (5, 4))
    sigma = np.diag([1.0, 0.0, 2.0]).astype(complex)
    singular, _ = build(2, sigma, np.eye(3))
    with pytest.raises(SingularMatrixError):
        eta_moment(singular, h, (1, 1))


# ---------------------------------------------------------------------------
# joint moments and cumulants
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("convention", ["paper", "standard"])
def test_joint_specializes_to_univariate(convention):
    params, _ = make_instance(5, convention=convention)
    eye = [np.eye(3)]
    for i in range(7):
        assert rel_err(joint_moment(params, eye, (i,)),
                       noncentral_moment(params, i)) < 1e-11


def test_joint_moment_trivial_and_budget():
    params, h = make_instance(6)
    assert joint_moment(params, h, (0, 0)) == 1
    with pytest.raises(BudgetExceededError):
        joint_moment(params, h, (6, 5))


def test_joint_moment_singular_sigma():
    sigma = np.diag([1.0, 0.0]).astype(complex)
    h = [np.eye(2), np.eye(2)]
    noncentral, _ = build(2, sigma, np.eye(2))
    with pytest.raises(SingularMatrixError):
        joint_moment(noncentral, h, (1, 1))
    central, _ = build(2, sigma, None)
    assert np.isfinite(joint_moment(central, h, (1, 1)).real)


def test_joint_relabeling_symmetry():
    params, h = make_instance(7, m=3)
    base = joint_moment(params, h, (2, 1, 0))
    assert joint_moment(params, [h[1], h[0], h[2]], (1, 2, 0)) == base
    assert joint_moment(params, [h[2], h[1], h[0]], (0, 1, 2)) == base


def test_joint_cumulant_central_pair():
    params, h = make_instance(8, central=True)
    want = params.n * product_trace([params.sigma @ h[0], params.sigma @ h[1]])
    assert rel_err(joint_cumulant(params, h, (1, 1)), want) < 1e-13


def test_joint_cumulant_reference_shape_paper_convention():
    # order (1,2): 2! { n Tr[SH1 (SH2)^2] - the three rotation words }
    params, h = make_instance(9, convention="paper")
    s1, s2 = params.sigma @ h[0], params.sigma @ h[1]
    omega = params.noncentrality()
    want = 2 * (params.n * product_trace([s1, s2, s2])
                - product_trace([omega, s1, s2, s2])
                - product_trace([omega, s2, s1, s2])
                - product_trace([omega, s2, s2, s1]))
    assert rel_err(joint_cumulant(params, h, (1, 2)), want) < 1e-13


def test_joint_cumulant_univariate_specialization():
    from wishmom import noncentral_cumulant
    params, _ = make_instance(10, convention="paper")
    eye = [np.eye(3)]
    for i in range(1, 6):
        assert rel_err(joint_cumulant(params, eye, (i,)),
                       noncentral_cumulant(params, i)) < 1e-12


def test_joint_cumulant_direction_homogeneity():
    params, h = make_instance(11)
    c = 0.5 + 1.25j
    scaled = [c * h[0], h[1]]
    i = (2, 1)
    assert rel_err(joint_cumulant(params, scaled, i),
                   c ** 2 * joint_cumulant(params, h, i)) < 1e-12


def joint_cumulant_from_moments(params, h, kind):
    """Moebius route: Cum_i = sum over partitions of
    (-1)^{l-1} (l-1)! d_lambda prod of joint moments."""
    total = 0.0
    for lam in multiindex_partitions(kind):
        term = lam.coefficient() * (-1) ** (lam.length - 1) * math.factorial(lam.length - 1)
        for col, r in zip(lam.columns, lam.multiplicities):
            term = term * joint_moment(params, h, col) ** r
        total += term
    return total


@pytest.mark.parametrize("convention", ["paper", "standard"])
def test_joint_cumulant_consistent_with_moments(convention):
    params, h = make_instance(12, convention=convention)
    for kind in [(1, 1), (2, 0), (1, 2), (2, 2)]:
        assert rel_err(joint_cumulant(params, h, kind),
                       joint_cumulant_from_moments(params, h, kind)) < 1e-10


def joint_moment_from_cumulants(params, h, kind):
    """Unity-sequence expansion: mom_i = sum over partitions of
    d_lambda prod of joint cumulants."""
    total = 0.0
    for lam in multiindex_partitions(kind):
        term = complex(lam.coefficient())
        for col, r in zip(lam.columns, lam.multiplicities):
            term = term * joint_cumulant(params, h, col) ** r
        total += term
    return total


@pytest.mark.parametrize("convention", ["paper", "standard"])
def test_joint_moment_from_cumulant_expansion(convention):
    params, h = make_instance(13, convention=convention)
    for kind in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)]:
        assert rel_err(joint_moment(params, h, kind),
                       joint_moment_from_cumulants(params, h, kind)) < 1e-10


# ---------------------------------------------------------------------------
# randomized joint cumulants
# ---------------------------------------------------------------------------

def test_randomized_degenerate_index():
    params, h = make_instance(14, convention="paper")
    n = int(params.n)
    point = MomentSequence.from_cumulants([float(n), 0.0, 0.0, 0.0])
    for kind in [(1, 0), (1, 1), (1, 2), (2, 2)]:
        assert rel_err(joint_cumulant_randomized(point, params, h, kind),
                       joint_cumulant(params, h, kind)) < 1e-13


def test_randomized_weight_one():
    params, h = make_instance(15, convention="standard")
    alpha = MomentSequence.from_cumulants([1.3, 0.7])
    got = joint_cumulant_randomized(alpha, params, h, (1, 0))
    want = (1.3 * np.trace(params.sigma @ h[0])
            + np.trace(params.m_matrix @ h[0]))
    assert rel_err(got, want) < 1e-12


def test_randomized_poisson_against_mixture_oracle():
    # randomization touches the central block only: conditional on the index
    # being k, the object is W(k, Sigma, M) with the non-centrality fixed
    rng = np.random.default_rng(16)
    sigma = random_psd(rng, 2, 0.3)
    m = random_psd(rng, 2, 0.2)
    h = [random_complex(rng, 2) for _ in range(2)]
    per_draw, _ = build(1.0, sigma, m, "standard")
    rate = 1.5
    poisson = MomentSequence.from_cumulants([rate] * 4)

    def formal_moment(kind):
        # index 0 leaves the bare non-centrality block: i! sum over
        # partitions of 1/m! prod eta[col]^r
        total = 0.0
        for lam in multiindex_partitions(kind):
            term = 1.0 / math.prod(math.factorial(r) for r in lam.multiplicities)
            for col, r in zip(lam.columns, lam.multiplicities):
                term = term * eta_moment(per_draw, h, col) ** r
            total += term
        return total * math.prod(math.factorial(v) for v in kind)

    def mixture_moment(kind):
        total = math.exp(-rate) * formal_moment(kind)
        for k in range(1, 41):
            weight = math.exp(-rate) * rate ** k / math.factorial(k)
            params_k, _ = build(float(k), sigma, m, "standard")
            total += weight * joint_moment(params_k, h, kind)
        return total

    for kind in [(1, 1), (1, 2)]:
        total = 0.0
        for lam in multiindex_partitions(kind):
            term = lam.coefficient() * (-1) ** (lam.length - 1) * math.factorial(lam.length - 1)
            for col, r in zip(lam.columns, lam.multiplicities):
                term = term * mixture_moment(col) ** r
            total += term
        got = joint_cumulant_randomized(poisson, per_draw, h, kind)
        assert rel_err(got, total) < 1e-9


# ---------------------------------------------------------------------------
# generalized product moments
# ---------------------------------------------------------------------------

def test_central_product_moment_closed_forms():
    params, h = make_instance(17, central=True)
    sigma, n = params.sigma, params.n
    e1 = CyclePermutation(((1,),))
    assert rel_err(central_product_moment(params, h[:1], e1),
                   n * np.trace(sigma @ h[0])) < 1e-13
    e2 = CyclePermutation(((1,), (2,)))
    want = (n ** 2 * np.trace(sigma @ h[0]) * np.trace(sigma @ h[1])
            + n * product_trace([sigma @ h[0], sigma @ h[1]]))
    assert rel_err(central_product_moment(params, h, e2), want) < 1e-13
    # identity permutation = the plain central joint moment at (1, 1)
    assert rel_err(central_product_moment(params, h, e2),
                   joint_moment(params, h, (1, 1))) < 1e-13


def test_a_product_moment_single():
    params, h = make_instance(18, convention="paper")
    e1 = CyclePermutation(((1,),))
    want = -product_trace([params.noncentrality(), params.sigma @ h[0]])
    assert rel_err(a_product_moment(params, h[:1], e1), want) < 1e-13
    # identity direction reduces to -Tr(M)
    got = a_product_moment(params, [np.eye(3)], e1)
    assert rel_err(got, -np.trace(params.m_matrix)) < 1e-12


@pytest.mark.parametrize("convention", ["paper", "standard"])
@pytest.mark.parametrize("m", [2, 3])
def test_singleton_assignment_decomposition(m, convention):
    # product over subsets of the two pure formulas = joint moment at (1,..,1)
    params, h = make_instance(19 + m, m=m, convention=convention)
    total = 0.0
    for mask in itertools.product((0, 1), repeat=m):
        w_pos = [j for j in range(m) if mask[j] == 0]
        a_pos = [j for j in range(m) if mask[j] == 1]
        w_val = central_product_moment(
            params, [h[j] for j in w_pos],
            CyclePermutation(tuple((k + 1,) for k in range(len(w_pos))))) if w_pos else 1.0
        a_val = a_product_moment(
            params, [h[j] for j in a_pos],
            CyclePermutation(tuple((k + 1,) for k in range(len(a_pos))))) if a_pos else 1.0
        total += w_val * a_val
    want = joint_moment(params, h, (1,) * m)
    assert rel_err(total, want) < 1e-12


# ---------------------------------------------------------------------------
# assignment expansion
# ---------------------------------------------------------------------------

def test_expansion_singletons_fully_evaluated():
    params, h = make_instance(22, convention="standard")
    perm = CyclePermutation(((1,), (2,)))
    expansion = generalized_moment_expansion(params, h, perm)
    assert expansion.fully_evaluated
    assert len(expansion.terms) == 4
    assert rel_err(expansion.evaluated_sum, joint_moment(params, h, (1, 1))) < 1e-12


def test_expansion_central_collapse():
    params, h = make_instance(23, m=3, central=True)
    for cycles in [((1,), (2,), (3,)), ((1, 2), (3,)), ((1, 2, 3),)]:
        perm = CyclePermutation(cycles)
        expansion = generalized_moment_expansion(params, h, perm)
        assert expansion.fully_evaluated
        want = central_product_moment(params, h, perm)
        assert rel_err(expansion.evaluated_sum, want) < 1e-12


def test_expansion_two_cycle_symbolic_factors():
    params, h = make_instance(24, convention="standard")
    perm = CyclePermutation(((1, 2),))
    expansion = generalized_moment_expansion(params, h, perm)
    assert not expansion.fully_evaluated
    assert len(expansion.symbolic_factors) == 2
    symbolic_terms = [t for t in expansion.terms if t.symbolic]
    assert len(symbolic_terms) == 2
    for term in symbolic_terms:
        (factor,) = term.factors
        assert factor.symbolic
        assert sorted(factor.assignment) == ["A", "W"]
    # the evaluated part holds the two pure assignments
    pure = [t for t in expansion.terms if not t.symbolic]
    assert len(pure) == 2


def test_expansion_pure_factor_values_are_single_cycle_expectations():
    params, h = make_instance(25, convention="standard")
    perm = CyclePermutation(((1, 2),))
    expansion = generalized_moment_expansion(params, h, perm)
    for term in expansion.terms:
        for factor in term.factors:
            if factor.assignment == "WW":
                want = central_product_moment(params, h, perm)
                assert rel_err(factor.value, want) < 1e-12
            if factor.assignment == "AA":
                want = a_product_moment(params, h, perm)
                assert rel_err(factor.value, want) < 1e-12


def test_expansion_budget():
    params, h = make_instance(26, m=7)
    perm = CyclePermutation(tuple((k,) for k in range(1, 8)))
    with pytest.raises(BudgetExceededError):
        generalized_moment_expansion(params, h, perm)
