"""Exact fast path for block families whose R_i are all rank one.

With R_i = u_i d_i v_i^t, a channel taking {R_u R_v*} to {S_u S_v*} exists
iff the Gram matrices satisfy (u_i*u_j) = (v_i*v_j) ∘ C for some correlation
matrix C (Hermitian, unit diagonal, PSD). Two-way degradability further
forces C to be a diagonal-unitary conjugation, i.e. C_ij = e^{i(θ_j - θ_i)}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .states import BlockFamily

DEFAULT_DIV_TOL = 1e-10
DEFAULT_MATCH_TOL = 1e-8


@dataclass(frozen=True)
class RankOneDecomposition:
    """Factors R_i = u_i d_i v_i^t with unit u_i in C^q, unit v_i in C^p, d_i > 0."""

    u: list[np.ndarray]
    d: list[float]
    v: list[np.ndarray]

    @property
    def count(self) -> int:
        return len(self.u)

    def swapped(self) -> RankOneDecomposition:
        """Decomposition of the transposed family S_i = v_i d_i u_i^t."""
        return RankOneDecomposition(u=self.v, d=self.d, v=self.u)

    def gram_u(self) -> np.ndarray:
        return linalg.gram(self.u)

    def gram_v(self) -> np.ndarray:
        return linalg.gram(self.v)


@dataclass(frozen=True)
class CorrelationCertificate:
    """Correlation matrix C with the mask of entries forced by Gram division."""

    C: np.ndarray
    fixed_mask: np.ndarray
    completed: bool


@dataclass(frozen=True)
class TwoWayCertificate:
    """Phases θ (θ_0 = 0) of the diagonal unitary E = diag(e^{iθ})."""

    phases: np.ndarray

    def diagonal_unitary(self) -> np.ndarray:
        return np.diag(np.exp(1j * self.phases))


def detect_rank_one(
    blocks: BlockFamily, tol: float = linalg.DEFAULT_RANK_TOL
) -> RankOneDecomposition | None:
    """Rank-one factors of every R_i, or None if any block fails the test."""
    u, d, v = [], [], []
    for f in blocks.svd_factors:
        if f.rank == 0:
            return None
        if f.rank > 1 and f.D[1] > tol * f.D[0]:
            return None
        u.append(f.U[:, 0].copy())
        d.append(float(f.D[0]))
        v.append(f.V[:, 0].copy())
    return RankOneDecomposition(u=u, d=d, v=v)


def check_condition_e(
    dec: RankOneDecomposition,
    div_tol: float = DEFAULT_DIV_TOL,
    match_tol: float = DEFAULT_MATCH_TOL,
    max_iter: int = 5000,
) -> tuple[str, CorrelationCertificate | None, str]:
    """Decide whether a correlation matrix C with (u_i*u_j) = (v_i*v_j) ∘ C exists.

    Returns (verdict, certificate, reason) with verdict Yes, No or Inconclusive.
    Entries with |v_i*v_j| <= div_tol stay free and are PSD-completed; a forced
    entry with |C_ij| > 1 kills the 2x2 principal minor and settles No exactly.
    """
    n = dec.count
    G_u = dec.gram_u()
    G_v = dec.gram_v()
    fixed = np.eye(n, dtype=complex)
    fixed_mask = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if abs(G_v[i, j]) > div_tol:
                c = G_u[i, j] / G_v[i, j]
                if abs(c) ** 2 > 1 + match_tol:
                    return (
                        "No",
                        None,
                        f"forced |C({i},{j})| = {abs(c):.6g} > 1: principal minor "
                        f"1 - |C|^2 = {1 - abs(c) ** 2:.3g} < 0",
                    )
                fixed[i, j] = c
                fixed_mask[i, j] = True
            elif abs(G_u[i, j]) > match_tol:
                return (
                    "No",
                    None,
                    f"u-Gram entry ({i},{j}) = {abs(G_u[i, j]):.6g} is nonzero where "
                    f"the v-Gram vanishes",
                )

    needs_completion = bool((~fixed_mask & ~np.eye(n, dtype=bool)).any())
    if not needs_completion:
        low = linalg.min_eig(fixed)
        if low < -match_tol:
            return "No", None, f"fully forced C has min eigenvalue {low:.3g} < 0"
        cert = CorrelationCertificate(C=fixed, fixed_mask=fixed_mask, completed=False)
        return "Yes", cert, "all entries forced; PSD verified"

    mask = fixed_mask | np.eye(n, dtype=bool)
    result = linalg.complete_psd(fixed * mask, mask, max_iter=max_iter)
    if not result.converged:
        return (
            "Inconclusive",
            None,
            f"PSD completion stalled after {result.iterations} iterations "
            f"(affine residual {result.residual_affine:.3g})",
        )
    C = result.affine_point
    if linalg.min_eig(C) < -match_tol:
        return (
            "Inconclusive",
            None,
            f"completed C drifted indefinite (min eig {linalg.min_eig(C):.3g})",
        )
    cert = CorrelationCertificate(C=C, fixed_mask=fixed_mask, completed=True)
    return "Yes", cert, f"completed in {result.iterations} iterations"


def check_two_way(
    dec: RankOneDecomposition,
    div_tol: float = DEFAULT_DIV_TOL,
    match_tol: float = DEFAULT_MATCH_TOL,
) -> tuple[str, TwoWayCertificate | None, str]:
    """Decide whether (u_i*u_j) = E*(v_i*v_j)E for a diagonal unitary E."""
    n = dec.count
    G_u = dec.gram_u()
    G_v = dec.gram_v()
    mismatch = np.abs(np.abs(G_u) - np.abs(G_v))
    if np.max(mismatch) > match_tol:
        i, j = np.unravel_index(np.argmax(mismatch), mismatch.shape)
        return (
            "No",
            None,
            f"|u-Gram| != |v-Gram| at ({i},{j}): "
            f"{abs(G_u[i, j]):.6g} vs {abs(G_v[i, j]):.6g}",
        )

    theta = np.zeros(n)
    seen = np.zeros(n, dtype=bool)
    adjacency = (np.abs(G_u) > div_tol) & ~np.eye(n, dtype=bool)
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        queue = [root]
        while queue:
            i = queue.pop(0)
            for j in np.nonzero(adjacency[i])[0]:
                if seen[j]:
                    continue
                theta[j] = np.mod(
                    theta[i] + np.angle(G_u[i, j]) - np.angle(G_v[i, j]), 2 * np.pi
                )
                seen[j] = True
                queue.append(int(j))

    phase = np.exp(1j * theta)
    residual = np.max(np.abs(G_u - np.outer(phase.conj(), phase) * G_v))
    if residual > match_tol:
        return (
            "No",
            None,
            f"phase assignment inconsistent on a cycle (residual {residual:.3g})",
        )
    return "Yes", TwoWayCertificate(phases=theta), f"residual {residual:.3g}"


def kraus_from_correlation(
    dec: RankOneDecomposition,
    cert: CorrelationCertificate,
) -> list[np.ndarray]:
    """Explicit Kraus set realizing {R_uR_v*} -> {S_uS_v*} from a certificate C.

    Factor C = Γ*Γ with unit columns γ_i; the targets t_i = v_i ⊗ γ_i share the
    Gram of the u_i, so an isometry with V u_i = t_i exists once the environment
    is padded to p·r >= q. V is the Procrustes polar factor of M_t M_u*, which
    is exact whenever the Grams match and involves no inversion, so nearly
    dependent u_i cannot blow up; tracing out the γ register gives the map.
    """
    q = dec.u[0].shape[0]
    p = dec.v[0].shape[0]
    n = dec.count
    w, W = linalg.hermitian_eig(cert.C)
    w = np.clip(w, 0.0, None)
    rank = max(int(np.sum(w > 1e-12 * max(w[0], 1.0))), 1)
    r = max(rank, -(-q // p))
    Gamma = np.zeros((r, n), dtype=complex)
    Gamma[:rank, :] = np.sqrt(w[:rank])[:, None] * linalg.dagger(W[:, :rank])

    M_u = np.column_stack(dec.u)
    M_t = np.column_stack(
        [np.kron(dec.v[i], Gamma[:, i]) for i in range(n)]
    )
    U_x, _, Vh_x = np.linalg.svd(M_t @ linalg.dagger(M_u), full_matrices=False)
    V_iso = U_x @ Vh_x
    return [V_iso.reshape(p, r, q)[:, s, :] for s in range(r)]
