"""Dense small-n spectral machinery for validating filters in the frequency domain.

Nothing here is used on the training path; it exists so that every filter's
measured per-eigenvalue multiplier can be compared against its closed form.
The lazy walk P is not symmetric, so walk-based filters are measured through
the similarity transform D^-1/2 P D^1/2 = I - L/2, which is symmetric and
shares P's eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IsolatedNodeError,
    NoConvergence,
    NotSymmetric,
    TooLargeForDense,
)
from .graph import Graph

DEFAULT_DENSE_LIMIT = 2048


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and an orthonormal eigenvector matrix Q (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def dense_adjacency(g: Graph, dense_limit: int = DEFAULT_DENSE_LIMIT) -> np.ndarray:
    if g.n > dense_limit:
        raise TooLargeForDense(f"n={g.n} exceeds dense limit {dense_limit}")
    W = np.zeros((g.n, g.n), dtype=np.float64)
    for u in range(g.n):
        W[u, g.neighbors(u)] = g.neighbor_weights(u)
    return W


def sym_normalized_laplacian(g: Graph, dense_limit: int = DEFAULT_DENSE_LIMIT) -> np.ndarray:
    """L = I - D^-1/2 W D^-1/2, symmetrized after rounding."""
    if g.has_isolated_nodes:
        raise IsolatedNodeError("normalized Laplacian undefined with degree-zero nodes")
    W = dense_adjacency(g, dense_limit)
    s = 1.0 / np.sqrt(g.degrees)
    L = np.eye(g.n) - (s[:, None] * W) * s[None, :]
    return 0.5 * (L + L.T)


def eigendecompose(M: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for symmetric dense matrices.

    Sweeps until the off-diagonal Frobenius norm falls below tol, raising
    NoConvergence past max_sweeps. Eigenvalues come out ascending; each
    eigenvector is signed so its largest-magnitude entry (lowest index on
    ties) is positive.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected square matrix, got {M.shape}")
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-10:
        raise NotSymmetric("matrix is not symmetric within 1e-10")
    n = M.shape[0]
    A = 0.5 * (M + M.T)
    V = np.eye(n)

    def offdiag_norm(a):
        return np.sqrt(np.sum(np.triu(a, 1) ** 2) * 2.0)

    converged = n < 2 or offdiag_norm(A) <= tol
    for _ in range(max_sweeps):
        if converged:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                # stable rotation: t is the smaller-magnitude root of t^2 + 2*tau*t - 1
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0.0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        converged = offdiag_norm(A) <= tol
    else:
        if not converged:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    lam = np.diag(A).copy()
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    Q = V[:, order]
    # deterministic sign: first largest-magnitude entry of each column positive
    for j in range(n):
        k = int(np.argmax(np.abs(Q[:, j])))
        if Q[k, j] < 0:
            Q[:, j] = -Q[:, j]
    return EigenDecomposition(eigenvalues=lam, eigenvectors=Q)


def graph_fourier(X: np.ndarray, eig: EigenDecomposition) -> np.ndarray:
    """Fourier coefficients Q^T X of a signal or feature matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != eig.eigenvectors.shape[0]:
        raise DimensionMismatch(
            f"signal length {X.shape[0]} != basis size {eig.eigenvectors.shape[0]}")
    return eig.eigenvectors.T @ X


def inverse_fourier(Xhat: np.ndarray, eig: EigenDecomposition) -> np.ndarray:
    """Inverse transform Q Xhat."""
    Xhat = np.asarray(Xhat, dtype=np.float64)
    if Xhat.shape[0] != eig.eigenvectors.shape[0]:
        raise DimensionMismatch(
            f"coefficient length {Xhat.shape[0]} != basis size {eig.eigenvectors.shape[0]}")
    return eig.eigenvectors @ Xhat


@dataclass(frozen=True)
class FilterSpec:
    """Selector for spectral_response.

    kinds: "gcn_unnormalized" (theta optional), "wavelet" (scale k),
    "lowpass" (max scale K), "chebyshev" (coefficient list thetas).
    """

    kind: str
    k: int | None = None
    thetas: tuple[float, ...] | None = None
    theta: float = 1.0


def gcn_unnormalized(theta: float = 1.0) -> FilterSpec:
    return FilterSpec("gcn_unnormalized", theta=theta)


def wavelet_filter(k: int) -> FilterSpec:
    return FilterSpec("wavelet", k=int(k))


def lowpass_filter(K: int) -> FilterSpec:
    return FilterSpec("lowpass", k=int(K))


def chebyshev_filter(thetas) -> FilterSpec:
    return FilterSpec("chebyshev", thetas=tuple(float(t) for t in thetas))


def _filter_matrix(flt: FilterSpec, L: np.ndarray) -> np.ndarray:
    """Dense symmetric realization of a filter in terms of the Laplacian.

    Walk filters use the symmetrized conjugate P_sym = I - L/2 of the lazy
    walk; the similarity transform preserves the spectrum.
    """
    n = L.shape[0]
    eye = np.eye(n)
    if flt.kind == "gcn_unnormalized":
        return flt.theta * (2.0 * eye - L)
    if flt.kind in ("wavelet", "lowpass"):
        P = eye - 0.5 * L
        if flt.kind == "lowpass":
            return np.linalg.matrix_power(P, 2 ** flt.k)
        if flt.k == 0:
            return eye - P
        return np.linalg.matrix_power(P, 2 ** (flt.k - 1)) - np.linalg.matrix_power(P, 2 ** flt.k)
    if flt.kind == "chebyshev":
        lam_max = float(np.max(eigendecompose(L).eigenvalues))
        Lt = 2.0 * L / lam_max - eye
        acc = np.zeros_like(L)
        t_prev, t_cur = eye, Lt
        for j, theta in enumerate(flt.thetas):
            tj = t_prev if j == 0 else t_cur
            acc = acc + theta * tj
            if j >= 1:
                t_prev, t_cur = t_cur, 2.0 * Lt @ t_cur - t_prev
        return acc
    raise ValueError(f"unknown filter kind {flt.kind!r}")


def spectral_response(g: Graph, flt: FilterSpec,
                      dense_limit: int = DEFAULT_DENSE_LIMIT) -> tuple[np.ndarray, np.ndarray]:
    """Measure a filter's per-eigenvalue multipliers by conjugating with Q.

    Returns (eigenvalues of the normalized Laplacian, multipliers). All the
    supported filters commute with the Laplacian, so the conjugated matrix is
    diagonal up to roundoff and its diagonal is the measured response.
    """
    L = sym_normalized_laplacian(g, dense_limit)
    eig = eigendecompose(L)
    M = _filter_matrix(flt, L)
    R = eig.eigenvectors.T @ M @ eig.eigenvectors
    return eig.eigenvalues.copy(), np.diag(R).copy()
