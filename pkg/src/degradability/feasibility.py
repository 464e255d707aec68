"""Choi-matrix feasibility engine for the block transformability condition.

The existence of a channel Φ with Φ(R_uR_v*) = S_uS_v* for all u, v is encoded
as an affine system on the Hermitian Choi matrix J = Σ_kl E_kl ⊗ Φ(E_kl)
(input index slow, output fast) intersected with the PSD cone, and attacked by
alternating projections. The solver never claims infeasibility; only trace-norm
filter witnesses rule out.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from . import linalg, rank_one
from .filters import (
    DEFAULT_SLACK_TOL,
    FilterWitness,
    combination,
    oriented_families,
    pair_filter,
    random_witness_filter,
)
from .states import BlockFamily, TripartiteState, extract_blocks


@dataclass(frozen=True)
class SolveConfig:
    max_iter: int = 20000
    feas_tol: float = 1e-8
    psd_tol: float = 1e-9
    stall_window: int = 500
    stall_tol: float = 1e-12
    verify_tol: float = 1e-7
    rank_tol: float = 1e-10
    slack_tol: float = DEFAULT_SLACK_TOL
    witnesses: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("feas_tol", "psd_tol", "stall_tol", "verify_tol", "rank_tol",
                     "slack_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_iter < 1 or self.stall_window < 1:
            raise ValueError("max_iter and stall_window must be >= 1")
        if self.witnesses < 0:
            raise ValueError("witnesses must be >= 0")


@dataclass(frozen=True)
class AffineSystem:
    """Reduced real-linear constraints Q hvec(J) = c on the Choi matrix.

    operator/rhs hold the reduced row-orthonormal system used for projection;
    raw_operator/raw_rhs keep the full generated rows so residuals are measured
    against the true constraints (an inconsistent system then has a positive
    residual floor equal to ``inconsistency`` and can never converge).
    """

    direction: str
    in_dim: int
    out_dim: int
    operator: np.ndarray
    rhs: np.ndarray
    reduced_rank: int
    raw_operator: np.ndarray = field(repr=False, default=None)
    raw_rhs: np.ndarray = field(repr=False, default=None)
    inconsistency: float = 0.0
    dependency_witness: FilterWitness | None = None
    dependency_detail: str = ""

    @property
    def raw_rows(self) -> int:
        return self.raw_operator.shape[0]


@dataclass(frozen=True)
class ChoiMatrix:
    """J = Σ_kl E_kl^in ⊗ Φ(E_kl); row index (k, a) = k·out_dim + a."""

    matrix: np.ndarray
    in_dim: int
    out_dim: int

    def __post_init__(self) -> None:
        d = self.in_dim * self.out_dim
        if self.matrix.shape != (d, d):
            raise ValueError(f"Choi matrix must be {d}x{d}, got {self.matrix.shape}")
        herm = float(np.max(np.abs(self.matrix - linalg.dagger(self.matrix))))
        if herm > 1e-10:
            raise ValueError(f"Choi matrix is not Hermitian (defect {herm:.3g})")

    def apply(self, A: np.ndarray) -> np.ndarray:
        """Φ(A)_ab = Σ_kl A_kl J[(k,a),(l,b)]."""
        J4 = self.matrix.reshape(self.in_dim, self.out_dim, self.in_dim, self.out_dim)
        return np.einsum("kl,kalb->ab", A, J4)

    def trace_out_output(self) -> np.ndarray:
        J4 = self.matrix.reshape(self.in_dim, self.out_dim, self.in_dim, self.out_dim)
        return np.einsum("kala->kl", J4)


@dataclass(frozen=True)
class KrausSet:
    operators: list[np.ndarray]

    @property
    def r(self) -> int:
        return len(self.operators)

    @property
    def in_dim(self) -> int:
        return self.operators[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness_defect(self) -> float:
        acc = sum(linalg.dagger(F) @ F for F in self.operators)
        return float(np.max(np.abs(acc - np.eye(self.in_dim))))

    def apply(self, X: np.ndarray) -> np.ndarray:
        return sum(F @ X @ linalg.dagger(F) for F in self.operators)


@dataclass(frozen=True)
class FeasibilityOutcome:
    status: str
    stage: str
    residual_affine: float | None = None
    residual_psd: float | None = None
    iterations: int = 0
    certificate: KrausSet | None = None
    filter_witness: FilterWitness | None = None
    choi: ChoiMatrix | None = field(default=None, repr=False)
    detail: str = ""


def choi_from_kraus(kraus: KrausSet) -> ChoiMatrix:
    """J = Σ_j vec'(F_j) vec'(F_j)* under the (input slow, output fast) convention."""
    d = kraus.in_dim * kraus.out_dim
    J = np.zeros((d, d), dtype=complex)
    for F in kraus.operators:
        w = F.T.reshape(-1)
        J += np.outer(w, w.conj())
    return ChoiMatrix(matrix=J, in_dim=kraus.in_dim, out_dim=kraus.out_dim)


def build_constraints(
    blocks: BlockFamily,
    direction: str,
    pairs: str = "all",
    dep_tol: float = 1e-10,
    slack_tol: float = DEFAULT_SLACK_TOL,
) -> AffineSystem:
    """Affine system for Φ(M_in^{uv}) = M_out^{uv} plus trace preservation.

    Constraint pairs run over a maximal linearly independent subset of the
    source blocks; each dependent source block must obey the same linear
    relation on the target side, otherwise the relation itself is a violated
    combination witness (the zero input matrix must map to zero).
    pairs="diagonal" restricts to u = v over that subset.
    """
    if pairs not in ("all", "diagonal"):
        raise ValueError(f"pairs must be 'all' or 'diagonal', got {pairs!r}")
    fam_in, fam_out = oriented_families(blocks, direction)
    n = len(fam_in)
    in_dim = fam_in[0].shape[0]
    out_dim = fam_out[0].shape[0]
    dim = in_dim * out_dim

    stacked = np.column_stack([m.reshape(-1) for m in fam_in])
    _, Rq, piv = scipy.linalg.qr(stacked, mode="economic", pivoting=True)
    diag = np.abs(np.diag(Rq))
    k = int(np.sum(diag > dep_tol * max(diag[0], 1e-300))) if diag.size else 0
    keep = sorted(piv[:k].tolist())
    dropped = [i for i in range(n) if i not in keep]

    witness = None
    detail = ""
    if dropped:
        basis = stacked[:, keep]
        for d in dropped:
            coef, *_ = np.linalg.lstsq(basis, stacked[:, d], rcond=None)
            delta = fam_out[d] - sum(
                coef[m] * fam_out[keep[m]] for m in range(len(keep))
            )
            lam = np.zeros((n, n), dtype=complex)
            w = np.zeros(n, dtype=complex)
            w[d] = 1.0
            for m, idx in enumerate(keep):
                w[idx] = -coef[m]
            lam += np.outer(w, w.conj())
            d_in = linalg.trace_norm(combination(fam_in, lam))
            d_out = linalg.trace_norm(combination(fam_out, lam))
            if d_in < d_out - slack_tol:
                witness = FilterWitness(
                    coefficients=lam,
                    d_in=d_in,
                    d_out=d_out,
                    violated=True,
                    label=f"dependency combination for block {d}",
                )
                detail = (
                    f"source block {d} depends linearly on blocks {keep} but the "
                    f"target side differs (|Δ| = {np.max(np.abs(delta)):.3g})"
                )
                break

    rows: list[np.ndarray] = []
    rhs: list[float] = []

    def add_complex_row(G: np.ndarray, z: complex) -> None:
        # tr(H J) = Re tr(G^† J) and tr(K J) = Im tr(G^† J) for Hermitian J.
        H = (G + linalg.dagger(G)) / 2
        K = (linalg.dagger(G) - G) / 2j
        rows.append(linalg.hvec(H))
        rhs.append(float(z.real))
        rows.append(linalg.hvec(K))
        rhs.append(float(z.imag))

    for kk in range(in_dim):
        for ll in range(kk, in_dim):
            E = np.zeros((in_dim, in_dim), dtype=complex)
            E[kk, ll] = 1.0
            add_complex_row(np.kron(E, np.eye(out_dim)), complex(kk == ll))

    pair_list = (
        [(u, v) for ui, u in enumerate(keep) for v in keep[ui:]]
        if pairs == "all"
        else [(u, u) for u in keep]
    )
    for u, v in pair_list:
        M_in = fam_in[u] @ linalg.dagger(fam_in[v])
        M_out = fam_out[u] @ linalg.dagger(fam_out[v])
        for a in range(out_dim):
            for b in range(out_dim):
                G = np.kron(M_in.conj(), _unit_matrix(out_dim, a, b))
                add_complex_row(G, complex(M_out[a, b]))

    A = np.vstack(rows)
    b = np.asarray(rhs)
    reduced = linalg.reduce_rows(A, b)
    return AffineSystem(
        direction=direction,
        in_dim=in_dim,
        out_dim=out_dim,
        operator=reduced.Q,
        rhs=reduced.c,
        reduced_rank=reduced.rank,
        raw_operator=A,
        raw_rhs=b,
        inconsistency=reduced.inconsistency,
        dependency_witness=witness,
        dependency_detail=detail,
    )


def _unit_matrix(d: int, a: int, b: int) -> np.ndarray:
    E = np.zeros((d, d), dtype=complex)
    E[a, b] = 1.0
    return E


def solve_feasibility(
    system: AffineSystem,
    config: SolveConfig = SolveConfig(),
    initial: np.ndarray | None = None,
) -> FeasibilityOutcome:
    """Alternating projections between the affine set and the PSD cone.

    Feasible outcomes carry the extracted Kraus certificate. The solver never
    returns RuledOut on its own; a dependency witness recorded on the system is
    the only way this stage rules out.
    """
    if system.dependency_witness is not None:
        return FeasibilityOutcome(
            status="RuledOut",
            stage="sdp",
            filter_witness=system.dependency_witness,
            detail=system.dependency_detail,
        )
    dim = system.in_dim * system.out_dim
    Q = system.operator
    c = system.rhs
    A = system.raw_operator
    b = system.raw_rhs
    scale = 1.0 + float(np.linalg.norm(b))

    def project_affine(X: np.ndarray) -> np.ndarray:
        x = linalg.hvec((X + linalg.dagger(X)) / 2)
        x = x + Q.T @ (c - Q @ x)
        return linalg.unhvec(x, dim)

    def affine_residual(X: np.ndarray) -> float:
        x = linalg.hvec((X + linalg.dagger(X)) / 2)
        return float(np.linalg.norm(A @ x - b)) / scale

    start = initial if initial is not None else np.eye(dim, dtype=complex) / system.out_dim
    result = linalg.alternating_projections(
        project_affine,
        affine_residual,
        start,
        max_iter=config.max_iter,
        feas_tol=config.feas_tol,
        psd_tol=config.psd_tol,
        stall_window=config.stall_window,
        stall_tol=config.stall_tol,
    )
    def wrap(X: np.ndarray) -> ChoiMatrix:
        return ChoiMatrix(
            matrix=(X + linalg.dagger(X)) / 2,
            in_dim=system.in_dim,
            out_dim=system.out_dim,
        )

    if not result.converged:
        reason = "stalled" if result.stalled else "iteration budget exhausted"
        return FeasibilityOutcome(
            status="Inconclusive",
            stage="sdp",
            residual_affine=result.residual_affine,
            residual_psd=result.residual_psd,
            iterations=result.iterations,
            choi=wrap(result.point),
            detail=f"projections {reason} after {result.iterations} iterations",
        )
    J = wrap(result.point)
    kraus = extract_kraus(J, config.rank_tol)
    return FeasibilityOutcome(
        status="Feasible",
        stage="sdp",
        residual_affine=result.residual_affine,
        residual_psd=result.residual_psd,
        iterations=result.iterations,
        certificate=kraus,
        choi=J,
        detail=f"converged in {result.iterations} iterations",
    )


def extract_kraus(J: ChoiMatrix, rank_tol: float = 1e-10) -> KrausSet:
    """Kraus operators from the eigendecomposition of a (near-)PSD Choi matrix."""
    w, V = linalg.hermitian_eig(J.matrix)
    top = max(float(w[0]), 0.0)
    if w[-1] < -max(1e-7, 10 * rank_tol * max(top, 1.0)):
        raise ValueError(f"Choi matrix is materially non-PSD (min eig {w[-1]:.3g})")
    ops = []
    for lam, vec in zip(w, V.T):
        if lam > rank_tol * max(top, 1e-300):
            ops.append(np.sqrt(lam) * vec.reshape(J.in_dim, J.out_dim).T)
    if not ops:
        ops.append(np.zeros((J.out_dim, J.in_dim), dtype=complex))
    return KrausSet(operators=ops)


def verify_channel(
    kraus: KrausSet, state: TripartiteState, direction: str
) -> float:
    """Frobenius distance between (I ⊗ Φ)(source reduction) and the target one."""
    blocks = extract_blocks(state)
    fam_in, fam_out = oriented_families(blocks, direction)
    if kraus.in_dim != fam_in[0].shape[0] or kraus.out_dim != fam_out[0].shape[0]:
        raise ValueError(
            f"channel maps {kraus.in_dim}->{kraus.out_dim} but blocks need "
            f"{fam_in[0].shape[0]}->{fam_out[0].shape[0]}"
        )
    n = len(fam_in)
    err = 0.0
    for u in range(n):
        for v in range(n):
            got = kraus.apply(fam_in[u] @ linalg.dagger(fam_in[v]))
            want = fam_out[u] @ linalg.dagger(fam_out[v])
            err += float(np.linalg.norm(got - want) ** 2)
    return float(np.sqrt(err))


def decide(
    state: TripartiteState, direction: str, config: SolveConfig = SolveConfig()
) -> FeasibilityOutcome:
    """Full pipeline: filters, rank-one fast path, then Choi feasibility.

    The state is normalized first so verdicts are scale invariant. Returns the
    first conclusive outcome; Feasible always carries a Kraus set that
    re-verifies on the normalized state within verify_tol.
    """
    state = state.unit()
    blocks = extract_blocks(state, config.rank_tol)

    report = pair_filter(blocks, direction, config.slack_tol)
    if report.violated:
        return FeasibilityOutcome(
            status="RuledOut",
            stage="filter",
            filter_witness=report.witnesses[0],
            detail=f"pair filter: {len(report.witnesses)} violating witnesses",
        )
    if config.witnesses > 0:
        report = random_witness_filter(
            blocks, direction, config.witnesses, config.seed, config.slack_tol
        )
        if report.violated:
            return FeasibilityOutcome(
                status="RuledOut",
                stage="filter",
                filter_witness=report.witnesses[0],
                detail=f"random filter: {len(report.witnesses)} violating witnesses",
            )

    dec = rank_one.detect_rank_one(blocks, config.rank_tol)
    if dec is not None:
        outcome = _decide_rank_one(blocks, dec, direction, config, state)
        if outcome is not None:
            return outcome

    system = build_constraints(blocks, direction, slack_tol=config.slack_tol)
    outcome = solve_feasibility(system, config)
    if outcome.status != "Feasible":
        return outcome
    residual = verify_channel(outcome.certificate, state, direction)
    defect = outcome.certificate.completeness_defect()
    if residual <= config.verify_tol and defect <= 1e-8:
        return replace(outcome, detail=outcome.detail + f"; verified {residual:.3g}")
    return replace(
        outcome,
        status="Inconclusive",
        certificate=None,
        detail=(
            f"solver converged but certificate failed verification "
            f"(residual {residual:.3g}, completeness defect {defect:.3g})"
        ),
    )


def _decide_rank_one(
    blocks: BlockFamily,
    dec: rank_one.RankOneDecomposition,
    direction: str,
    config: SolveConfig,
    state: TripartiteState,
) -> FeasibilityOutcome | None:
    """Resolve via the rank-one correlation conditions; None defers to the SDP stage."""
    oriented = dec if direction == "EtoB" else dec.swapped()
    verdict, cert, reason = rank_one.check_condition_e(oriented)
    if verdict == "Yes":
        kraus = KrausSet(rank_one.kraus_from_correlation(oriented, cert))
        residual = verify_channel(kraus, state, direction)
        if residual <= config.verify_tol and kraus.completeness_defect() <= 1e-8:
            return FeasibilityOutcome(
                status="Feasible",
                stage="rank_one",
                certificate=kraus,
                choi=choi_from_kraus(kraus),
                detail=f"condition (e): {reason}; verified {residual:.3g}",
            )
        return None
    if verdict == "No":
        witness = _rank_one_witness(blocks, direction, reason, config.slack_tol)
        if witness is not None:
            return FeasibilityOutcome(
                status="RuledOut",
                stage="rank_one",
                filter_witness=witness,
                detail=f"condition (e) fails: {reason}",
            )
        return None
    return None


def _rank_one_witness(
    blocks: BlockFamily, direction: str, reason: str, slack_tol: float
) -> FilterWitness | None:
    """Violated pair witness matching a condition-(e) refutation, if one exists."""
    m = re.search(r"\((\d+),(\d+)\)", reason)
    if m is None:
        return None
    i, j = int(m.group(1)), int(m.group(2))
    fam_in, fam_out = oriented_families(blocks, direction)
    n = len(fam_in)
    for lam, label in (
        (_diag_diff(n, i, j), f"pair ({i},{i}) - ({j},{j})"),
        (_cross_diff(n, i, j), f"pair ({i},{j}) - ({j},{i})"),
    ):
        d_in = linalg.trace_norm(combination(fam_in, lam)) / 2
        d_out = linalg.trace_norm(combination(fam_out, lam)) / 2
        if d_in < d_out - slack_tol:
            return FilterWitness(
                coefficients=lam, d_in=d_in, d_out=d_out, violated=True, label=label
            )
    return None


def _diag_diff(n: int, i: int, j: int) -> np.ndarray:
    lam = np.zeros((n, n), dtype=complex)
    lam[i, i] = 1.0
    lam[j, j] = -1.0
    return lam


def _cross_diff(n: int, i: int, j: int) -> np.ndarray:
    lam = np.zeros((n, n), dtype=complex)
    lam[i, j] = 1.0
    lam[j, i] = -1.0
    return lam
