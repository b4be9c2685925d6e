"""Rank-revealing helpers shared by every module.

All rank decisions go through :func:`numerical_rank` so there is a single
tolerance in the package: singular values below ``RTOL * max(s_max, 1)`` are
zero.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

RTOL = 1e-9


def _tol(s):
    smax = s[0] if s.size else 0.0
    return RTOL * max(smax, 1.0)


def numerical_rank(A):
    A = np.atleast_2d(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > _tol(s)))


def null_space(A):
    """Orthonormal basis (columns) of ker A."""
    A = np.atleast_2d(np.asarray(A))
    m, n = A.shape
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    if m == 0:
        return np.eye(n, dtype=complex)
    u, s, vh = np.linalg.svd(A, full_matrices=True)
    r = int(np.sum(s > _tol(s)))
    return vh[r:].conj().T.astype(complex)


def col_space(A):
    """Orthonormal basis (columns) of Im A."""
    A = np.atleast_2d(np.asarray(A))
    m, n = A.shape
    if m == 0 or n == 0:
        return np.zeros((m, 0), dtype=complex)
    u, s, vh = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > _tol(s)))
    return u[:, :r].astype(complex)


def hstack(dim, *blocks):
    blocks = [np.asarray(b, dtype=complex).reshape(dim, -1) for b in blocks]
    if not blocks:
        return np.zeros((dim, 0), dtype=complex)
    return np.hstack(blocks)


def span(dim, *blocks):
    """Orthonormal basis of the sum of the column spaces."""
    return col_space(hstack(dim, *blocks))


def intersect(A, B):
    """Orthonormal basis of span(A) & span(B) (Euclidean)."""
    dim = A.shape[0]
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros((dim, 0), dtype=complex)
    qa, qb = col_space(A), col_space(B)
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return np.zeros((dim, 0), dtype=complex)
    k = null_space(np.hstack([qa, -qb]))
    return col_space(qa @ k[: qa.shape[1]])


def contains(A, B):
    """True iff span(B) is contained in span(A)."""
    if B.shape[1] == 0:
        return True
    return numerical_rank(np.hstack([A, B])) == numerical_rank(A)


def in_span(A, x):
    return contains(A, np.asarray(x).reshape(-1, 1))


def residual_from_span(A, x):
    """Euclidean distance from x to span(A)."""
    x = np.asarray(x, dtype=complex).ravel()
    q = col_space(A) if A.shape[1] else np.zeros((x.size, 0))
    return float(np.linalg.norm(x - q @ (q.conj().T @ x)))


def lstsq_min_norm(A, b):
    """Minimum Euclidean-norm least-squares solution using the package rank cut."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    b = np.asarray(b, dtype=complex)
    if A.shape[1] == 0:
        return np.zeros((0,) + b.shape[1:], dtype=complex)
    if A.shape[0] == 0:
        return np.zeros((A.shape[1],) + b.shape[1:], dtype=complex)
    u, s, vh = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > _tol(s)))
    coef = (u[:, :r].conj().T @ b)
    coef = coef / s[:r].reshape((-1,) + (1,) * (coef.ndim - 1))
    return vh[:r].conj().T @ coef


def sqrt_gram(M):
    """Upper-triangular R with M = R^H R for a Hermitian positive definite M."""
    L = np.linalg.cholesky(M)
    return L.conj().T


def weighted_min_norm(A, b, M):
    """Solve A x = b (least squares) with minimal x^H M x among minimizers."""
    R = sqrt_gram(M)
    y = lstsq_min_norm(A @ np.linalg.inv(R), b)
    return scipy.linalg.solve_triangular(R, y, lower=False)


def gram_orthonormal(B, M):
    """M-orthonormal basis of span(B)."""
    if B.shape[1] == 0:
        return B.astype(complex)
    R = sqrt_gram(M)
    q = col_space(R @ B)
    return scipy.linalg.solve_triangular(R, q, lower=False)


def gram_projector(B, M):
    """M-orthogonal projector onto span(B) as a matrix acting on coefficients."""
    dim = M.shape[0]
    if B.shape[1] == 0:
        return np.zeros((dim, dim), dtype=complex)
    Q = gram_orthonormal(B, M)
    return Q @ Q.conj().T @ M


def gram_complement(Z, B, M):
    """M-orthogonal complement of span(B) inside span(Z) (B assumed in Z)."""
    if Z.shape[1] == 0:
        return Z.astype(complex)
    P = gram_projector(B, M)
    return gram_orthonormal((np.eye(M.shape[0]) - P) @ Z, M)


def real_null_space(A):
    """Basis (real columns) of {r real : A r = 0} for complex A."""
    A = np.atleast_2d(np.asarray(A))
    stacked = np.vstack([A.real, A.imag]) if np.iscomplexobj(A) else A
    return null_space(stacked).real if stacked.shape[1] else np.zeros((0, 0))


def real_orth(V):
    """Orthonormal real basis of the real column span of V (V real)."""
    return col_space(np.asarray(V, dtype=float)).real
