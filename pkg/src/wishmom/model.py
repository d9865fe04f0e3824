"""Validated parameter bundle for a non-central complex Wishart distribution.

A `WishartParams` holds (n, Sigma, M) plus the sign convention; `build`
also returns the derived `TraceCache` with T_i = Tr(Sigma^i) and
S_i = Tr(M Sigma^{i-1}).  The S_i are computed without ever forming
Sigma^{-1}: by trace cyclicity Tr(Omega Sigma^i) = Tr(M Sigma^{i-1}).

Sign convention:

* ``"paper"`` (default): every contribution of the non-centrality part
  enters with a minus sign, reproducing the source formulas verbatim
  (e.g. Cum_i = n (i-1)! T_i - i! S_i).
* ``"standard"``: the same contribution enters with a plus sign, which is
  what matches Monte Carlo sampling of the defining sum of outer products.

The convention affects no value in this module; it is consumed by the
moment/cumulant engines downstream.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import matrix_core
from .errors import DimensionMismatchError, NotHermitianError, ValidationError

CONVENTIONS = ("paper", "standard")
DEFAULT_DEPTH = 12


@dataclass(frozen=True)
class TraceCache:
    """Power-trace caches T_i = Tr(Sigma^i) and S_i = Tr(M Sigma^{i-1})."""

    t: tuple[complex, ...]
    s: tuple[complex, ...]

    @property
    def depth(self) -> int:
        return len(self.t)

    def t_power(self, i: int) -> complex:
        """T_i, 1-based."""
        return self.t[i - 1]

    def s_power(self, i: int) -> complex:
        """S_i, 1-based; S_1 = Tr(M)."""
        return self.s[i - 1]


def _compute_cache(sigma: np.ndarray, m_matrix: np.ndarray, depth: int) -> TraceCache:
    t, s = [], []
    pow_sigma = sigma
    m_pow = m_matrix
    for _ in range(depth):
        t.append(complex(np.trace(pow_sigma)))
        s.append(complex(np.trace(m_pow)))
        pow_sigma = pow_sigma @ sigma
        m_pow = m_pow @ sigma
    return TraceCache(tuple(t), tuple(s))


class WishartParams:
    """Immutable parameters (n, Sigma, M, convention) with lazy derived data.

    `n` may be any positive real for formula evaluation; sampling requires
    an integer.  Sigma must be Hermitian; M may be non-Hermitian (the
    `m_is_hermitian` flag records which) since only its trace products
    enter the univariate formulas.

    The trace cache grows monotonically on demand and the non-centrality
    matrix is computed at most once, both under a lock, so concurrent
    readers are safe.
    """

    def __init__(self, n, sigma, m_matrix=None, convention: str = "paper",
                 depth: int = DEFAULT_DEPTH):
        n = float(n)
        if not n > 0:
            raise ValidationError(f"degrees of freedom must be > 0: {n}")
        sigma = matrix_core.as_matrix(sigma)
        if not matrix_core.is_hermitian(sigma):
            raise NotHermitianError("sigma must be Hermitian")
        if m_matrix is None:
            m_matrix = np.zeros_like(sigma)
        else:
            m_matrix = matrix_core.as_matrix(m_matrix)
        if m_matrix.shape != sigma.shape:
            raise DimensionMismatchError(
                f"m_matrix shape {m_matrix.shape} != sigma shape {sigma.shape}")
        if convention not in CONVENTIONS:
            raise ValidationError(f"convention must be one of {CONVENTIONS}: {convention!r}")

        sigma.flags.writeable = False
        m_matrix.flags.writeable = False
        self.n = n
        self.sigma = sigma
        self.m_matrix = m_matrix
        self.convention = convention
        self.p = sigma.shape[0]
        self.m_is_hermitian = matrix_core.is_hermitian(m_matrix)
        self._lock = threading.Lock()
        self._cache = _compute_cache(sigma, m_matrix, max(depth, 1))
        self._omega = None

    @property
    def sign(self) -> float:
        """Sign carried by every non-centrality contribution."""
        return -1.0 if self.convention == "paper" else 1.0

    @property
    def is_central(self) -> bool:
        return not np.any(self.m_matrix)

    def trace_cache(self, min_depth: int = 0) -> TraceCache:
        """The cache, extended (and kept) if shallower than min_depth."""
        cache = self._cache
        if cache.depth >= min_depth:
            return cache
        with self._lock:
            if self._cache.depth < min_depth:
                self._cache = _compute_cache(self.sigma, self.m_matrix, min_depth)
            return self._cache

    def noncentrality(self) -> np.ndarray:
        """Omega = Sigma^{-1} M via linear solve, cached after first use.

        Raises SingularMatrixError when Sigma is numerically singular; the
        univariate formulas (which only need the S_i) remain available.
        """
        if self._omega is None:
            with self._lock:
                if self._omega is None:
                    omega = matrix_core.solve(self.sigma, self.m_matrix)
                    omega.flags.writeable = False
                    self._omega = omega
        return self._omega

    def with_convention(self, convention: str) -> "WishartParams":
        """A copy under the other sign convention (caches recomputed)."""
        return WishartParams(self.n, self.sigma, self.m_matrix, convention,
                             depth=self._cache.depth)

    def __repr__(self):
        return (f"WishartParams(n={self.n}, p={self.p}, "
                f"convention={self.convention!r}, central={self.is_central})")


def build(n, sigma, m_matrix=None, convention: str = "paper",
          depth: int = DEFAULT_DEPTH) -> tuple[WishartParams, TraceCache]:
    """Validate parameters and precompute trace caches to `depth`.

    The non-centrality matrix is *not* computed here; see
    `WishartParams.noncentrality`.
    """
    params = WishartParams(n, sigma, m_matrix, convention, depth)
    return params, params.trace_cache(depth)


def noncentrality(params: WishartParams) -> np.ndarray:
    """Omega = Sigma^{-1} M (module-level alias of the cached accessor)."""
    return params.noncentrality()
