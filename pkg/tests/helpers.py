"""Shared oracles and random generators for the test suite."""
from __future__ import annotations

import numpy as np


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def crandn(gen: np.random.Generator, *shape: int) -> np.ndarray:
    """Complex standard normal array."""
    return gen.standard_normal(shape) + 1j * gen.standard_normal(shape)


def random_unitary(gen: np.random.Generator, d: int) -> np.ndarray:
    Q, R = np.linalg.qr(crandn(gen, d, d))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_isometry(gen: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Random isometry with orthonormal columns (rows >= cols)."""
    if rows < cols:
        raise ValueError(f"isometry needs rows >= cols, got {rows} < {cols}")
    Q, R = np.linalg.qr(crandn(gen, rows, cols))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_kraus(gen: np.random.Generator, out_dim: int, in_dim: int, r: int) -> list[np.ndarray]:
    """Random CPTP Kraus set: row blocks of a Haar-ish isometry from C^in to C^r x C^out."""
    V = random_isometry(gen, out_dim * r, in_dim)
    return [V[j * out_dim : (j + 1) * out_dim, :] for j in range(r)]


def random_state_vector(gen: np.random.Generator, dim: int) -> np.ndarray:
    x = crandn(gen, dim)
    return x / np.linalg.norm(x)


def apply_kraus(kraus: list[np.ndarray], X: np.ndarray) -> np.ndarray:
    return sum(F @ X @ F.conj().T for F in kraus)


def partial_trace_oracle(rho: np.ndarray, dims: tuple[int, int, int], subsystem: int) -> np.ndarray:
    """Reference partial trace via 6-axis reshape and einsum (independent of the package)."""
    n, p, q = dims
    T = rho.reshape(n, p, q, n, p, q)
    if subsystem == 1:
        return np.einsum("ijkilm->jklm", T).reshape(p * q, p * q)
    if subsystem == 2:
        return np.einsum("ijkljm->iklm", T).reshape(n * q, n * q)
    if subsystem == 3:
        return np.einsum("ijklmk->ijlm", T).reshape(n * p, n * p)
    raise ValueError(subsystem)


def block_map_error(
    blocks, kraus: list[np.ndarray], direction: str
) -> tuple[float, float]:
    """Worst-pair error of sum_s F M_in F* = M_out and the completeness defect."""
    fam_in = blocks.R if direction == "EtoB" else blocks.S
    fam_out = blocks.S if direction == "EtoB" else blocks.R
    worst = 0.0
    for i in range(len(fam_in)):
        for j in range(len(fam_in)):
            target = fam_out[i] @ fam_out[j].conj().T
            got = apply_kraus(kraus, fam_in[i] @ fam_in[j].conj().T)
            worst = max(worst, float(np.max(np.abs(got - target))))
    comp = sum(F.conj().T @ F for F in kraus)
    defect = float(np.max(np.abs(comp - np.eye(comp.shape[0]))))
    return worst, defect


def random_product_state(gen, n: int, p: int, q: int):
    """State whose slices are rank one by construction: S_i = s_i t_i^t."""
    T = np.zeros((n, p, q), dtype=complex)
    s_norms, t_norms = [], []
    for i in range(n):
        s = crandn(gen, p)
        t = crandn(gen, q)
        s_norms.append(np.linalg.norm(s))
        t_norms.append(np.linalg.norm(t))
        T[i] = np.outer(s, t)
    return T.ravel(), s_norms, t_norms


def depolarizing_lift_state(eps: float):
    """Closed-form amplitudes of the lifted depolarizing channel, norm^2 = 2."""
    from degradability import states

    a = np.sqrt(1 - eps)
    b = np.sqrt(eps / 3)
    S0 = np.array([[a, b, 0, 0], [0, 0, b, b]], dtype=complex)
    S1 = np.array([[0, 0, -b, b], [a, -b, 0, 0]], dtype=complex)
    return states.TripartiteState((2, 2, 4), np.stack([S0, S1]).ravel())


def brute_force_feasibility(
    blocks, direction: str, max_iter: int = 200000
) -> tuple[bool, float]:
    """Independent dense feasibility oracle over the full unreduced system.

    Encodes the Choi matrix as a real vector of interleaved real and imaginary
    parts (no Hermitian basis), generates one complex constraint per block pair
    and per trace-preservation entry plus explicit Hermiticity rows, projects
    with a pseudoinverse, and alternates with eigenvalue clipping.
    """
    fam_in = blocks.R if direction == "EtoB" else blocks.S
    fam_out = blocks.S if direction == "EtoB" else blocks.R
    n = len(fam_in)
    din, dout = fam_in[0].shape[0], fam_out[0].shape[0]
    d = din * dout

    def to_real(J):
        return np.concatenate([J.real.ravel(), J.imag.ravel()])

    def to_complex(x):
        return x[: d * d].reshape(d, d) + 1j * x[d * d :].reshape(d, d)

    rows, rhs = [], []

    def add(G, z):
        # Re tr(G^† J) and Im tr(G^† J) as rows over (Re J, Im J).
        rows.append(np.concatenate([G.real.ravel(), G.imag.ravel()]))
        rhs.append(z.real)
        rows.append(np.concatenate([-G.imag.ravel(), G.real.ravel()]))
        rhs.append(z.imag)

    for u in range(n):
        for v in range(n):
            M_in = fam_in[u] @ fam_in[v].conj().T
            M_out = fam_out[u] @ fam_out[v].conj().T
            for a_ in range(dout):
                for b_ in range(dout):
                    E = np.zeros((dout, dout), dtype=complex)
                    E[a_, b_] = 1.0
                    add(np.kron(M_in.conj(), E), complex(M_out[a_, b_]))
    for k in range(din):
        for lv in range(din):
            E = np.zeros((din, din), dtype=complex)
            E[k, lv] = 1.0
            add(np.kron(E, np.eye(dout)), complex(float(k == lv)))
    # Hermiticity: J[r,c] - conj(J[c,r]) = 0 for r < c, plus Im J[r,r] = 0.
    for r in range(d):
        for c in range(r, d):
            row_re = np.zeros(2 * d * d)
            row_im = np.zeros(2 * d * d)
            if r == c:
                row_im[d * d + r * d + c] = 1.0
                rows.append(row_im)
                rhs.append(0.0)
            else:
                row_re[r * d + c] = 1.0
                row_re[c * d + r] = -1.0
                row_im[d * d + r * d + c] = 1.0
                row_im[d * d + c * d + r] = 1.0
                rows.append(row_re)
                rhs.append(0.0)
                rows.append(row_im)
                rhs.append(0.0)

    A = np.vstack(rows)
    b = np.asarray(rhs)
    pinv = np.linalg.pinv(A, rcond=1e-12)
    scale = 1.0 + float(np.linalg.norm(b))

    x = to_real(np.eye(d, dtype=complex) / dout)
    best = np.inf
    last_check = np.inf
    for it in range(max_iter):
        x = x - pinv @ (A @ x - b)
        J = to_complex(x)
        J = (J + J.conj().T) / 2
        w, V = np.linalg.eigh(J)
        J = (V * np.clip(w, 0.0, None)) @ V.conj().T
        x = to_real(J)
        res = float(np.linalg.norm(A @ x - b)) / scale
        best = min(best, res)
        if res <= 1e-7:
            return True, res
        if it % 2000 == 1999:
            if last_check - best < 1e-13:
                break
            last_check = best
    return False, best
