"""Independent reference implementations used only for validation.

These deliberately avoid the code paths they check: the eigensolver is
a from-scratch cyclic Jacobi iteration (the production embedding uses
thin SVD), and the chi-square CDF here is composite-Simpson quadrature
of the density (production uses the incomplete-gamma expansion).
"""

from __future__ import annotations

import math

import numpy as np


def jacobi_eigh(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvalues sorted descending
    and eigenvectors as matching rows.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected square matrix, got shape {A.shape}")
    if not np.allclose(A, A.T, atol=1e-10):
        raise ValueError("matrix must be symmetric")
    n = A.shape[0]
    M = A.copy()
    V = np.eye(n)
    scale = np.abs(M).max() or 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.tril(M, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(M[p, q]) <= 1e-300:
                    continue
                # rotation angle zeroing M[p, q]
                theta = 0.5 * (M[q, q] - M[p, p]) / M[p, q]
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * M[:, p] - s * M[:, q]
                rot_q = s * M[:, p] + c * M[:, q]
                M[:, p], M[:, q] = rot_p, rot_q
                rot_p = c * M[p, :] - s * M[q, :]
                rot_q = s * M[p, :] + c * M[q, :]
                M[p, :], M[q, :] = rot_p, rot_q
                rot_p = c * V[p, :] - s * V[q, :]
                rot_q = s * V[p, :] + c * V[q, :]
                V[p, :], V[q, :] = rot_p, rot_q
    eigvals = np.diag(M).copy()
    order = np.argsort(-eigvals)
    return eigvals[order], V[order]


def chi_square_cdf_quadrature(r: float, k: int, panels: int = 20_000) -> float:
    """Chi-square CDF via Simpson integration of the density.

    Substituting x = u^2 removes the k=1 endpoint singularity, so one
    rule covers every degree of freedom.
    """
    if r <= 0.0:
        return 0.0
    half_k = k / 2.0
    log_norm = -half_k * math.log(2.0) - math.lgamma(half_k)

    def integrand(u: float) -> float:
        # density at x = u^2 times the Jacobian 2u
        if u == 0.0:
            return 0.0 if k != 1 else 2.0 * math.exp(log_norm)
        x = u * u
        return 2.0 * u * math.exp(log_norm + (half_k - 1.0) * math.log(x) - x / 2.0)

    hi = math.sqrt(r)
    if panels % 2:
        panels += 1
    h = hi / panels
    total = integrand(0.0) + integrand(hi)
    for i in range(1, panels):
        total += (4.0 if i % 2 else 2.0) * integrand(i * h)
    return total * h / 3.0
