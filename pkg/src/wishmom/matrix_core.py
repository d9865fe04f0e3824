"""Dense complex matrix kernels, sized for desk-scale dimensions (p <= ~64).

Self-contained factorizations: linear solves go through a hand-rolled
partial-pivot LU so singularity is detected at pivot level, and the
Hermitian eigendecomposition is a cyclic Jacobi iteration with an explicit
sweep budget.  Tolerances are stated relative to mat_norm (max absolute
entry times dimension) and can be overridden per call.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatchError,
    NoConvergenceError,
    NotHermitianError,
    SingularMatrixError,
    ValidationError,
)

PIVOT_RTOL = 1e-12
HERMITIAN_RTOL = 1e-10
JACOBI_SWEEPS = 50


def as_matrix(a) -> np.ndarray:
    """Validate and convert to a square complex128 array (copy)."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValidationError("matrix has non-finite entries")
    return m


def mat_norm(a) -> float:
    """Reference norm for tolerances: dimension times max absolute entry."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return a.shape[0] * float(np.abs(a).max())


def trace(a) -> complex:
    """Unnormalized trace."""
    return complex(np.trace(as_matrix(a)))


def product_trace(factors) -> complex:
    """Tr(F_1 F_2 ... F_s), multiplied left to right.

    Invariant under cyclic rotation of the factor list.
    """
    factors = [as_matrix(f) for f in factors]
    if not factors:
        raise ValidationError("product_trace needs at least one factor")
    p = factors[0].shape[0]
    if any(f.shape[0] != p for f in factors):
        raise DimensionMismatchError("product_trace factors differ in dimension")
    acc = factors[0]
    for f in factors[1:]:
        acc = acc @ f
    return complex(np.trace(acc))


def power_traces(a, k_max: int) -> list[complex]:
    """[Tr(A), Tr(A^2), ..., Tr(A^k_max)] via repeated multiplication."""
    if k_max < 1:
        raise ValidationError(f"k_max must be >= 1: {k_max}")
    a = as_matrix(a)
    out = []
    acc = a
    for _ in range(k_max):
        out.append(complex(np.trace(acc)))
        acc = acc @ a
    return out


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    a = as_matrix(a)
    scale = mat_norm(a)
    return float(np.abs(a - a.conj().T).max()) <= rtol * max(scale, 1e-300)


def solve(a, b, pivot_rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Solve A X = B by partial-pivot LU.

    Raises SingularMatrixError when a pivot falls below
    pivot_rtol * mat_norm(A).
    """
    a = as_matrix(a)
    b = np.array(b, dtype=complex)
    squeeze = b.ndim == 1
    if squeeze:
        b = b[:, None]
    n = a.shape[0]
    if b.shape[0] != n:
        raise DimensionMismatchError(f"rhs rows {b.shape[0]} != matrix dim {n}")

    lu = a.copy()
    rhs = b.copy()
    tol = pivot_rtol * mat_norm(a)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[piv, k]) <= tol:
            raise SingularMatrixError(f"pivot {abs(lu[piv, k]):.3e} below tolerance {tol:.3e}")
        if piv != k:
            lu[[k, piv]] = lu[[piv, k]]
            rhs[[k, piv]] = rhs[[piv, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])

    # forward then back substitution on the packed factors
    for k in range(n):
        rhs[k + 1:] -= np.outer(lu[k + 1:, k], rhs[k])
    for k in range(n - 1, -1, -1):
        rhs[k] /= lu[k, k]
        rhs[:k] -= np.outer(lu[:k, k], rhs[k])
    return rhs[:, 0] if squeeze else rhs


def hermitian_eigen(a, rtol: float = HERMITIAN_RTOL, max_sweeps: int = JACOBI_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, Q) with real eigenvalues in descending order and
    Q unitary, A Q = Q diag(eigenvalues).  Raises NotHermitianError when the
    input fails the Hermitian check and NoConvergenceError when the sweep
    budget is exhausted.
    """
    a = as_matrix(a)
    if not is_hermitian(a, rtol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    n = a.shape[0]
    w = (a + a.conj().T) / 2
    q = np.eye(n, dtype=complex)
    scale = float(np.abs(w).max())
    if n == 1 or scale == 0.0:
        vals = np.real(np.diag(w)).copy()
        order = np.argsort(vals)[::-1]
        return vals[order], q[:, order]

    thresh = 1e-14 * scale
    converged = False
    for _ in range(max_sweeps):
        off = np.abs(w - np.diag(np.diag(w))).max()
        if off <= thresh:
            converged = True
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                z = w[p, r]
                if abs(z) <= thresh * 1e-2:
                    continue
                tau = (w[r, r].real - w[p, p].real) / (2 * abs(z))
                t = 1.0 if tau == 0 else np.sign(tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # unitary g = diag(1, conj(phase)) . [[c, s], [-s, c]] on (p, r)
                ph = np.conj(z / abs(z))
                g00, g01, g10, g11 = c, s, -s * ph, c * ph
                col_p, col_r = w[:, p].copy(), w[:, r].copy()
                w[:, p] = col_p * g00 + col_r * g10
                w[:, r] = col_p * g01 + col_r * g11
                row_p, row_r = w[p, :].copy(), w[r, :].copy()
                w[p, :] = np.conj(g00) * row_p + np.conj(g10) * row_r
                w[r, :] = np.conj(g01) * row_p + np.conj(g11) * row_r
                col_p, col_r = q[:, p].copy(), q[:, r].copy()
                q[:, p] = col_p * g00 + col_r * g10
                q[:, r] = col_p * g01 + col_r * g11
    if not converged and np.abs(w - np.diag(np.diag(w))).max() > thresh:
        raise NoConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    vals = np.real(np.diag(w)).copy()
    order = np.argsort(vals)[::-1]
    return vals[order], q[:, order]
