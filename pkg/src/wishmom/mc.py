"""Monte Carlo ground truth: Wishart sampling, Haar compressions, and
estimators with standard errors.

Complex Gaussian convention: a standard complex Gaussian entry has unit
total variance (real and imaginary parts each of variance 1/2), so a single
row x satisfies E[x^dag x] = Sigma.  Under this convention the central
formulas match sampling exactly, and the non-central ones match under the
"standard" sign convention; paper-convention non-central values are *not*
comparable to samples.

Randomness is counter-based (Philox) keyed by (seed, stream_id): identical
keys reproduce identical draws bit-exactly, and disjoint stream_ids give
independent streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matrix_core
from .applications import PolykaySample
from .combinatorics import CyclePermutation
from .errors import (
    DimensionMismatchError,
    NonIntegerNError,
    NotHermitianError,
    NotPSDError,
    ValidationError,
)
from .model import WishartParams, build

_BATCH = 8192


@dataclass(frozen=True)
class RngStream:
    """A reproducible, splittable random stream."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.Philox(np.random.SeedSequence((self.seed, self.stream_id))))

    def substreams(self, k: int) -> list[np.random.Generator]:
        """k independent child generators, deterministic in (seed, stream_id)."""
        seq = np.random.SeedSequence((self.seed, self.stream_id))
        return [np.random.Generator(np.random.Philox(child)) for child in seq.spawn(k)]


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ValidationError("rng must be an RngStream or numpy Generator")


# ---------------------------------------------------------------------------
# running estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error.

    For complex-valued samples the standard error is the root of the total
    scatter E|x - mean|^2 / ((n-1) n), covering both components.
    """

    mean: complex
    std_error: float
    n_samples: int

    def _m2(self) -> float:
        return self.std_error ** 2 * self.n_samples * max(self.n_samples - 1, 0)

    def merge(self, other: "Estimate") -> "Estimate":
        """Pooled estimate of two disjoint sample batches (Welford merge);
        associative up to floating-point roundoff."""
        na, nb = self.n_samples, other.n_samples
        if nb == 0:
            return self
        if na == 0:
            return other
        n = na + nb
        delta = other.mean - self.mean
        mean = self.mean + delta * nb / n
        m2 = self._m2() + other._m2() + abs(delta) ** 2 * na * nb / n
        se = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
        return Estimate(mean, se, n)


class _Accumulator:
    """Welford accumulator over complex values, batch-merged."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0 + 0.0j
        self.m2 = 0.0

    def add_batch(self, values: np.ndarray):
        values = np.asarray(values, dtype=complex).ravel()
        nb = values.size
        if nb == 0:
            return
        bmean = complex(values.mean())
        bm2 = float((np.abs(values - bmean) ** 2).sum())
        if self.n == 0:
            self.n, self.mean, self.m2 = nb, bmean, bm2
            return
        n = self.n + nb
        delta = bmean - self.mean
        self.mean += delta * nb / n
        self.m2 += bm2 + abs(delta) ** 2 * self.n * nb / n
        self.n = n

    def estimate(self) -> Estimate:
        se = math.sqrt(self.m2 / (self.n - 1) / self.n) if self.n > 1 else 0.0
        return Estimate(self.mean, se, self.n)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _integer_n(params: WishartParams) -> int:
    n = params.n
    if abs(n - round(n)) > 1e-9:
        raise NonIntegerNError(f"sampling needs integer degrees of freedom, got {n}")
    return int(round(n))


def _psd_cholesky(a: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Lower Cholesky factor with a pivot tolerance; accepts semidefinite
    input and raises NotPSDError on a negative pivot."""
    a = np.asarray(a)
    n = a.shape[0]
    scale = max(matrix_core.mat_norm(a), 1e-300)
    tol = rtol * scale
    zero_piv = math.sqrt(tol * scale)  # pivots below this are a zero direction
    low = np.zeros_like(a)
    for j in range(n):
        d = float((a[j, j] - np.sum(np.abs(low[j, :j]) ** 2)).real)
        if d < -tol:
            raise NotPSDError(f"negative pivot {d:.3e} at column {j}")
        piv = math.sqrt(max(d, 0.0))
        low[j, j] = piv
        if j + 1 < n:
            col = a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j].conj()
            if piv > zero_piv:
                low[j + 1:, j] = col / piv
            elif np.abs(col).max(initial=0.0) > zero_piv:
                raise NotPSDError(f"rank deficiency inconsistent at column {j}")
    return low


def _mean_rows(params: WishartParams, n: int) -> np.ndarray | None:
    """Rows m_1..m_n with sum of outer products equal to M (None when M=0).

    Requires M Hermitian PSD with rank at most n; built from the
    eigendecomposition, one row per positive eigenvalue.
    """
    if params.is_central:
        return None
    m_mat = params.m_matrix
    if not params.m_is_hermitian:
        raise NotPSDError("sampling needs a Hermitian PSD non-centrality contribution")
    vals, vecs = matrix_core.hermitian_eigen(m_mat)
    tol = 1e-12 * max(matrix_core.mat_norm(m_mat), 1e-300)
    if vals[-1] < -tol:
        raise NotPSDError(f"m_matrix has negative eigenvalue {vals[-1]:.3e}")
    positive = [k for k in range(params.p) if vals[k] > tol]
    if len(positive) > n:
        raise ValidationError(
            f"m_matrix has rank {len(positive)} > n = {n}; cannot split into n rows")
    rows = np.zeros((n, params.p), dtype=complex)
    for slot, k in enumerate(positive):
        rows[slot] = math.sqrt(vals[k]) * vecs[:, k].conj()
    return rows


def _wishart_batches(params: WishartParams, means, gen, n_samples, batch=_BATCH):
    """Yield stacked draws W of shape (b, p, p)."""
    n = _integer_n(params)
    p = params.p
    lh = _psd_cholesky(params.sigma).conj().T
    if means is None:
        means = _mean_rows(params, n)
    else:
        means = np.array(means, dtype=complex)
        if means.shape != (n, p):
            raise DimensionMismatchError(
                f"means must have shape ({n}, {p}), got {means.shape}")
    remaining = int(n_samples)
    scale = 1.0 / math.sqrt(2.0)
    while remaining > 0:
        b = min(batch, remaining)
        g = (gen.standard_normal((b, n, p)) + 1j * gen.standard_normal((b, n, p))) * scale
        x = g @ lh
        if means is not None:
            x -= means
        yield np.einsum("sij,sik->sjk", x.conj(), x)
        remaining -= b


def sample_wishart(params: WishartParams, means=None, rng=None) -> np.ndarray:
    """One draw of the p x p Wishart matrix.

    Each of the n rows is a standard complex Gaussian row times the Cholesky
    factor of Sigma, shifted by its mean row.  When `means` is given (an
    (n, p) array) it overrides params.m_matrix for this draw; otherwise mean
    rows are derived from M, which must then be Hermitian PSD of rank <= n.
    """
    gen = _as_generator(rng)
    for w in _wishart_batches(params, means, gen, 1, batch=1):
        return w[0]
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def _batch_traces(w: np.ndarray, h: np.ndarray) -> np.ndarray:
    return np.einsum("sab,ba->s", w, h)


def estimate_joint_moment(params: WishartParams, h, i, n_samples, rng) -> Estimate:
    """Sample mean and standard error of prod_j Tr(W H_j)^{i_j}.

    Intended for n_samples in the thousands or more; the estimate is
    reproducible bit-exactly for a fixed (seed, stream_id, n_samples).
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    hs = [matrix_core.as_matrix(hk) for hk in h]
    kind = tuple(int(v) for v in i)
    if len(kind) != len(hs):
        raise DimensionMismatchError("index length must match len(h)")
    gen = _as_generator(rng)
    acc = _Accumulator()
    for w in _wishart_batches(params, None, gen, n_samples):
        vals = np.ones(w.shape[0], dtype=complex)
        for hk, ik in zip(hs, kind):
            if ik:
                vals *= _batch_traces(w, hk) ** ik
        acc.add_batch(vals)
    return acc.estimate()


def estimate_generalized_moment(params: WishartParams, h,
                                sigma_perm: CyclePermutation,
                                n_samples, rng) -> Estimate:
    """Sample mean of prod over cycles c of sigma of Tr(prod_{j in c} W H_j).

    W itself is samplable even though its formal non-centrality component
    alone is not, so this estimates the full quantity that the symbolic
    expansion decomposes.
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    hs = [matrix_core.as_matrix(hk) for hk in h]
    if sigma_perm.size != len(hs):
        raise DimensionMismatchError("permutation size must match len(h)")
    gen = _as_generator(rng)
    acc = _Accumulator()
    for w in _wishart_batches(params, None, gen, n_samples):
        vals = np.ones(w.shape[0], dtype=complex)
        for cyc in sigma_perm.cycles:
            prod = None
            for j in cyc:
                step = w @ hs[j - 1]
                prod = step if prod is None else prod @ step
            vals *= np.einsum("saa->s", prod)
        acc.add_batch(vals)
    return acc.estimate()


def estimate_trace_cumulants(params: WishartParams, i_max: int,
                             n_samples, rng) -> list[Estimate]:
    """MC estimates of Cum_1..Cum_{i_max} of Tr W (i_max <= 3).

    Cumulants are estimated through bias-corrected central moments of the
    (real) trace samples, with large-sample delta-method standard errors.
    """
    if not 1 <= i_max <= 3:
        raise ValidationError("estimate_trace_cumulants supports orders 1..3")
    if n_samples < 10:
        raise ValidationError("n_samples too small for cumulant estimation")
    gen = _as_generator(rng)
    raw = np.zeros(7)  # raw power sums of orders 0..6
    for w in _wishart_batches(params, None, gen, n_samples):
        tr = np.einsum("saa->s", w).real
        for k in range(7):
            raw[k] += float(np.sum(tr ** k))
    n = raw[0]
    mean = raw[1] / n
    # central moments m_k = E[(x - mean)^k]
    cm = [1.0, 0.0]
    for k in range(2, 7):
        s = sum(math.comb(k, j) * raw[j] / n * (-mean) ** (k - j) for j in range(k + 1))
        cm.append(float(s))
    out = [Estimate(mean, math.sqrt(max(cm[2], 0.0) / n), int(n))]
    if i_max >= 2:
        k2 = n / (n - 1) * cm[2]
        var_k2 = max(cm[4] - cm[2] ** 2, 0.0) / n
        out.append(Estimate(k2, math.sqrt(var_k2), int(n)))
    if i_max >= 3:
        k3 = n ** 2 / ((n - 1) * (n - 2)) * cm[3]
        var_k3 = max(cm[6] - cm[3] ** 2 - 6 * cm[2] * cm[4] + 9 * cm[2] ** 3, 0.0) / n
        out.append(Estimate(k3, math.sqrt(var_k3), int(n)))
    return out


# ---------------------------------------------------------------------------
# Haar compressions
# ---------------------------------------------------------------------------

def haar_unitary(p: int, rng) -> np.ndarray:
    """Haar-distributed p x p unitary: Ginibre then QR, with the phase fix
    that makes R's diagonal positive real."""
    gen = _as_generator(rng)
    z = (gen.standard_normal((p, p)) + 1j * gen.standard_normal((p, p))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_compression(x, m: int, rng) -> PolykaySample:
    """Spectral sample: eigenvalues of H X H^dag for a Haar m x p frame H."""
    x = matrix_core.as_matrix(x)
    if not matrix_core.is_hermitian(x):
        raise NotHermitianError("haar_compression needs a Hermitian matrix")
    p = x.shape[0]
    if not 1 <= m <= p:
        raise ValidationError(f"compressed size must satisfy 1 <= m <= p: {m}")
    frame = haar_unitary(p, rng)[:m, :]
    y = frame @ x @ frame.conj().T
    vals, _ = matrix_core.hermitian_eigen(y)
    return PolykaySample.from_eigenvalues(vals)


# ---------------------------------------------------------------------------
# distributional identity checks
# ---------------------------------------------------------------------------

IDENTITIES = ("df-additivity", "sheffer", "m-split")


def distribution_identity_check(params1: WishartParams, params2: WishartParams,
                                identity: str, n_samples, rng) -> dict:
    """Compare Tr W(n1+n2, Sigma, M1+M2) against the independent sum
    Tr W(params1) + Tr W(params2) on empirical moments of orders 1..4.

    identity selects the claimed decomposition: "df-additivity" requires
    both sides central, "sheffer" a central second block, "m-split" allows
    any split of M.  Returns a JSON-ready report with per-order z-scores.
    """
    if identity not in IDENTITIES:
        raise ValidationError(f"identity must be one of {IDENTITIES}: {identity!r}")
    if np.abs(params1.sigma - params2.sigma).max() > 1e-12 * max(
            matrix_core.mat_norm(params1.sigma), 1e-300):
        raise ValidationError("both parameter sets must share Sigma")
    if identity == "df-additivity" and not (params1.is_central and params2.is_central):
        raise ValidationError("df-additivity requires central parameters")
    if identity == "sheffer" and not params2.is_central:
        raise ValidationError("sheffer requires a central second block")
    if not isinstance(rng, RngStream):
        raise ValidationError("identity checks need an RngStream for substreams")
    n_samples = int(n_samples)

    n1, n2 = _integer_n(params1), _integer_n(params2)
    whole, _ = build(n1 + n2, params1.sigma,
                     params1.m_matrix + params2.m_matrix, "standard")
    gen_l, gen_a, gen_b = rng.substreams(3)

    def moment_sums(batches_of_values):
        raw = np.zeros(9)
        for vals in batches_of_values:
            for k in range(9):
                raw[k] += float(np.sum(vals ** k))
        return raw

    def lhs_batches():
        for w in _wishart_batches(whole, None, gen_l, n_samples):
            yield np.einsum("saa->s", w).real

    def rhs_batches():
        it_a = _wishart_batches(params1, None, gen_a, n_samples)
        it_b = _wishart_batches(params2, None, gen_b, n_samples)
        for wa, wb in zip(it_a, it_b):
            yield np.einsum("saa->s", wa).real + np.einsum("saa->s", wb).real

    raw_l = moment_sums(lhs_batches())
    raw_r = moment_sums(rhs_batches())

    orders = []
    for k in range(1, 5):
        ml, mr = raw_l[k] / n_samples, raw_r[k] / n_samples
        vl = max(raw_l[2 * k] / n_samples - ml ** 2, 0.0) / n_samples
        vr = max(raw_r[2 * k] / n_samples - mr ** 2, 0.0) / n_samples
        se = math.sqrt(vl + vr)
        orders.append({
            "order": k,
            "lhs_mean": ml,
            "rhs_mean": mr,
            "std_error": se,
            "z": (ml - mr) / se if se > 0 else 0.0,
        })
    return {
        "identity": identity,
        "convention": "standard",
        "rng": "philox",
        "seed": rng.seed,
        "stream_id": rng.stream_id,
        "n_samples": n_samples,
        "orders": orders,
        "max_abs_z": max(abs(o["z"]) for o in orders),
    }
