"""Dense complex linear algebra primitives shared by every other module.

Index layout convention, used everywhere: a tripartite amplitude tensor with
dimensions ``(n, p, q)`` is stored as a flat vector in lexicographic order of
``(i, j, k)``, i.e. entry ``(i, j, k)`` sits at flat position ``i*p*q + j*q + k``.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-10
DEFAULT_HERM_TOL = 1e-9


@dataclass(frozen=True)
class SVDFactors:
    """Compact SVD in the transpose convention ``M = U @ diag(D) @ V.T``.

    ``V`` is transposed without conjugation, so both ``U`` and ``V`` have
    orthonormal columns and ``M = U D V^t`` exactly mirrors the factor form
    used for the block matrices ``R_i``.
    """

    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    rank: int

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.D) @ self.V.T


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def svd(M: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> SVDFactors:
    """Compact SVD of ``M`` with singular values below ``rank_tol * smax`` dropped."""
    M = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise ValueError("svd: input contains non-finite entries")
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(s > rank_tol * s[0]))
    return SVDFactors(U=U[:, :rank], D=s[:rank], V=Vh[:rank].T, rank=rank)


def trace_norm(M: np.ndarray) -> float:
    """Sum of singular values of ``M``."""
    M = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise ValueError("trace_norm: input contains non-finite entries")
    return float(np.linalg.svd(M, compute_uv=False).sum())


def hermitian_eig(
    M: np.ndarray, herm_tol: float = DEFAULT_HERM_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is symmetrized as ``(M + M*)/2`` before factoring; inputs whose
    anti-Hermitian part exceeds ``herm_tol`` in Frobenius norm are rejected.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"hermitian_eig: expected a square matrix, got shape {M.shape}")
    defect = np.linalg.norm(M - dagger(M))
    if defect > herm_tol:
        raise ValueError(f"hermitian_eig: matrix is not Hermitian (defect {defect:.3e})")
    w, V = np.linalg.eigh((M + dagger(M)) / 2.0)
    return w[::-1], V[:, ::-1]


def project_psd(M: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix to ``(M + M*)/2``."""
    H = (M + dagger(M)) / 2.0
    w, V = np.linalg.eigh(H)
    w = np.maximum(w, 0.0)
    return (V * w) @ dagger(V)


def min_eig(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((M + dagger(M)) / 2.0)[0])


def partial_trace(rho: np.ndarray, dims: tuple[int, int, int], subsystem: int) -> np.ndarray:
    """Trace out one subsystem of a tripartite operator in lexicographic layout.

    ``subsystem`` is 1-based (1, 2 or 3); the result is indexed lexicographically
    by the remaining two indices.
    """
    rho = np.asarray(rho, dtype=complex)
    n, p, q = dims
    total = n * p * q
    if rho.shape != (total, total):
        raise ValueError(
            f"partial_trace: operator shape {rho.shape} does not match dims {dims}"
        )
    if subsystem not in (1, 2, 3):
        raise ValueError(f"partial_trace: subsystem must be 1, 2 or 3, got {subsystem}")
    sizes = (n, p, q)
    strides = (p * q, q, 1)
    traced = subsystem - 1
    kept = [a for a in range(3) if a != traced]
    da, db, dt = sizes[kept[0]], sizes[kept[1]], sizes[traced]
    flat = (
        np.arange(da)[:, None, None] * strides[kept[0]]
        + np.arange(db)[None, :, None] * strides[kept[1]]
        + np.arange(dt)[None, None, :] * strides[traced]
    ).reshape(da * db, dt)
    return rho[flat[:, None, :], flat[None, :, :]].sum(axis=2)


def gram(vectors: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Gram matrix with entry ``(i, j) = u_i^* u_j``."""
    vs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    length = vs[0].size
    if any(v.size != length for v in vs):
        raise ValueError("gram: vectors have mismatched lengths")
    M = np.column_stack(vs)
    return dagger(M) @ M


def hvec(H: np.ndarray) -> np.ndarray:
    """Isometric real parameterization of a Hermitian matrix.

    Layout: diagonal, then sqrt(2) * real and sqrt(2) * imaginary parts of the
    strict upper triangle (row-major), so that the Euclidean norm equals the
    Frobenius norm and real inner products are preserved.
    """
    m = H.shape[0]
    iu, ju = np.triu_indices(m, k=1)
    upper = H[iu, ju]
    return np.concatenate(
        [H.diagonal().real, np.sqrt(2.0) * upper.real, np.sqrt(2.0) * upper.imag]
    )


def unhvec(x: np.ndarray, m: int) -> np.ndarray:
    """Inverse of ``hvec`` for an ``m x m`` Hermitian matrix."""
    k = m * (m - 1) // 2
    if x.size != m * m:
        raise ValueError(f"unhvec: expected {m * m} components, got {x.size}")
    H = np.zeros((m, m), dtype=complex)
    iu, ju = np.triu_indices(m, k=1)
    upper = (x[m : m + k] + 1j * x[m + k :]) / np.sqrt(2.0)
    H[iu, ju] = upper
    H[ju, iu] = upper.conj()
    H[np.diag_indices(m)] = x[:m]
    return H


@dataclass(frozen=True)
class ReducedAffine:
    """Affine set ``{x : A x = b}`` rewritten as ``Q x = c`` with orthonormal rows.

    ``inconsistency`` is the relative residual of the min-norm solution; a value
    well above the reduction tolerance proves the original system has no solution.
    """

    Q: np.ndarray
    c: np.ndarray
    rank: int
    inconsistency: float


def reduce_rows(A: np.ndarray, b: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> ReducedAffine:
    """SVD row reduction of a real linear system to independent orthonormal rows."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    rank = int(np.count_nonzero(s > tol * s[0])) if s.size and s[0] > 0 else 0
    Q = Vt[:rank]
    c = (U[:, :rank].T @ b) / s[:rank]
    x_min = Q.T @ c
    inconsistency = float(np.linalg.norm(A @ x_min - b) / (1.0 + np.linalg.norm(b)))
    return ReducedAffine(Q=Q, c=c, rank=rank, inconsistency=inconsistency)


@dataclass(frozen=True)
class ProjectionResult:
    """Outcome of the alternating-projection run.

    ``point`` is the last PSD-cone iterate and ``affine_point`` the last affine
    iterate; at convergence they agree to within the tolerances.
    """

    point: np.ndarray
    affine_point: np.ndarray
    residual_affine: float
    residual_psd: float
    iterations: int
    converged: bool
    stalled: bool


def alternating_projections(
    project_affine: Callable[[np.ndarray], np.ndarray],
    affine_residual: Callable[[np.ndarray], float],
    start: np.ndarray,
    *,
    max_iter: int = 20000,
    feas_tol: float = 1e-8,
    psd_tol: float = 1e-9,
    stall_window: int = 500,
    stall_tol: float = 1e-12,
) -> ProjectionResult:
    """Dykstra-style alternating projections between the PSD cone and an affine set.

    The correction term is applied on the cone projection only (the affine set is
    a subspace, where plain projection suffices). The routine reports convergence
    or stalling; it never claims the intersection is empty.
    """
    if max_iter <= 0 or feas_tol <= 0 or psd_tol <= 0 or stall_window <= 0 or stall_tol <= 0:
        raise ValueError("alternating_projections: tolerances and budgets must be positive")
    Y = np.asarray(start, dtype=complex)
    S = np.zeros_like(Y)
    X = Y
    res_aff = affine_residual(Y)
    res_psd = max(0.0, -min_eig(Y))
    window_best = np.inf
    prev_window_best = np.inf
    for it in range(1, max_iter + 1):
        T = Y - S
        X = project_psd(T)
        S = X - T
        Y = project_affine(X)
        res_aff = affine_residual(X)
        if res_aff <= feas_tol:
            res_psd = max(0.0, -min_eig(Y))
            if res_psd <= psd_tol:
                return ProjectionResult(
                    point=X,
                    affine_point=Y,
                    residual_affine=res_aff,
                    residual_psd=res_psd,
                    iterations=it,
                    converged=True,
                    stalled=False,
                )
        window_best = min(window_best, res_aff)
        if it % stall_window == 0:
            if np.isfinite(prev_window_best):
                improvement = (prev_window_best - window_best) / max(prev_window_best, 1e-300)
                if improvement < stall_tol:
                    res_psd = max(0.0, -min_eig(Y))
                    return ProjectionResult(
                        point=X,
                        affine_point=Y,
                        residual_affine=res_aff,
                        residual_psd=res_psd,
                        iterations=it,
                        converged=False,
                        stalled=True,
                    )
            prev_window_best = window_best
            window_best = np.inf
    res_psd = max(0.0, -min_eig(Y))
    return ProjectionResult(
        point=X,
        affine_point=Y,
        residual_affine=res_aff,
        residual_psd=res_psd,
        iterations=max_iter,
        converged=False,
        stalled=False,
    )


def complete_psd(
    fixed: np.ndarray,
    mask: np.ndarray,
    start: np.ndarray | None = None,
    *,
    max_iter: int = 20000,
    feas_tol: float = 1e-8,
    psd_tol: float = 1e-9,
    stall_window: int = 500,
    stall_tol: float = 1e-12,
) -> ProjectionResult:
    """Complete a partial Hermitian matrix (entries where ``mask`` is set) to PSD.

    ``mask`` must be symmetric and include the diagonal; ``fixed`` must be
    Hermitian on the masked entries.
    """
    mask = np.asarray(mask, dtype=bool)
    if not np.array_equal(mask, mask.T):
        raise ValueError("complete_psd: mask must be symmetric")
    scale = 1.0 + float(np.linalg.norm(fixed[mask]))

    def project_affine(X: np.ndarray) -> np.ndarray:
        Y = (X + dagger(X)) / 2.0
        Y = Y.copy()
        Y[mask] = fixed[mask]
        return Y

    def affine_residual(X: np.ndarray) -> float:
        return float(np.linalg.norm((X - fixed)[mask]) / scale)

    if start is None:
        start = fixed * mask
    return alternating_projections(
        project_affine,
        affine_residual,
        start,
        max_iter=max_iter,
        feas_tol=feas_tol,
        psd_tol=psd_tol,
        stall_window=stall_window,
        stall_tol=stall_tol,
    )
