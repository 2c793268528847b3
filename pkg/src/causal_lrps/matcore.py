"""Symmetric-matrix numerics.

Norms, structural diagnostics (degree, incoherence), partial correlations
and the fisher-style h transform. All functions operate on plain dense
symmetric float arrays; `as_sym_matrix` is the validating entry point.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonPositiveDefiniteInput, SingularSubmatrix

ZERO_TOL = 1e-9
PSD_TOL = 1e-10
COND_LIMIT = 1e12


def as_sym_matrix(m) -> np.ndarray:
    """Validate and return a dense symmetric float matrix.

    Raises ValueError if the input is not square, not finite, or not
    symmetric to within 1e-12 relative; tiny asymmetries are averaged away
    so the result is exactly symmetric.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return (a + a.T) / 2.0


@dataclass(frozen=True)
class CovarianceEstimate:
    """A symmetric PSD matrix together with the sample size behind it."""

    matrix: np.ndarray
    sample_size: int

    def __post_init__(self):
        m = as_sym_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if self.sample_size < 1:
            raise ValueError("sample_size must be a positive integer")
        if np.any(np.diag(m) <= 0):
            raise NonPositiveDefiniteInput("covariance diagonal must be strictly positive")
        w = np.linalg.eigvalsh(m)
        if w[0] < -PSD_TOL * max(abs(w[-1]), abs(w[0])):
            raise NonPositiveDefiniteInput(
                f"covariance has eigenvalue {w[0]:.3e} below the PSD tolerance"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def spectral_norm(m) -> float:
    """Largest absolute eigenvalue (= largest singular value for symmetric m)."""
    a = as_sym_matrix(m)
    return float(np.abs(np.linalg.eigvalsh(a)).max())


def max_abs_norm(m) -> float:
    """Largest entry in magnitude."""
    return float(np.abs(as_sym_matrix(m)).max())


def entrywise_l1(m) -> float:
    """Sum of all entry magnitudes."""
    return float(np.abs(as_sym_matrix(m)).sum())


def max_col_sum(m) -> float:
    """Maximum absolute column sum."""
    return float(np.abs(as_sym_matrix(m)).sum(axis=0).max())


def max_row_sum(m) -> float:
    """Maximum absolute row sum."""
    return float(np.abs(as_sym_matrix(m)).sum(axis=1).max())


def sign_matrix(m, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Elementwise sign, with |entry| <= zero_tol treated as zero."""
    a = as_sym_matrix(m)
    s = np.sign(a).astype(np.int64)
    s[np.abs(a) <= zero_tol] = 0
    return s


def nnz_matrix(m, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Binary support pattern: 1 where |entry| > zero_tol."""
    return np.abs(sign_matrix(m, zero_tol))


def degree(m, zero_tol: float = ZERO_TOL) -> int:
    """Maximum number of non-zero entries in any row (diagonal included)."""
    a = as_sym_matrix(m)
    return int((np.abs(a) > zero_tol).sum(axis=1).max())


def incoherence(m, rank_tol: float = 1e-9) -> float:
    """Max norm of a standard basis vector projected onto the retained span.

    The span is that of eigenvectors whose |eigenvalue| exceeds
    rank_tol * spectral_norm(m). Returns 0 for the zero matrix, 1 for any
    full-rank matrix.
    """
    a = as_sym_matrix(m)
    w, v = np.linalg.eigh(a)
    top = np.abs(w).max()
    if top == 0.0:
        return 0.0
    keep = np.abs(w) > rank_tol * top
    u = v[:, keep]
    # ||U U^T e_i||_2 == ||U^T e_i||_2 == row norm of U
    return float(np.sqrt((u * u).sum(axis=1)).max())


def _inv_checked(psi: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh(psi)
    if w[0] <= 0 or w[-1] / w[0] > COND_LIMIT:
        raise SingularSubmatrix(
            f"principal submatrix not invertible at working precision "
            f"(eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}])"
        )
    return np.linalg.inv(psi)


def partial_correlation(cov: CovarianceEstimate, i: int, j: int, u=()) -> float:
    """Partial correlation of variables i and j given the index set u.

    Extracts the principal submatrix over {i, j} | u, inverts it and reads
    the correlation off the inverse with the usual minus sign.
    """
    u = tuple(u)
    if i == j:
        raise ValueError("i and j must differ")
    if i in u or j in u:
        raise ValueError("conditioning set may not contain i or j")
    idx = (i, j) + u
    psi = cov.matrix[np.ix_(idx, idx)]
    k = _inv_checked(psi)
    rho = -k[0, 1] / np.sqrt(k[0, 0] * k[1, 1])
    return float(np.clip(rho, -1.0, 1.0))


def fisher_h(rho: float) -> float:
    """(-0.5 * ln(1 - rho^2))^(1/2); even in rho and increasing in |rho|."""
    if abs(rho) >= 1:
        raise DomainError(f"|rho| must be < 1, got {rho}")
    return float(np.sqrt(-0.5 * np.log1p(-rho * rho)))
