"""Ho-Kalman realization from Markov parameters."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lti import MarkovMatrix, StateSpace, markov_params


class InsufficientMarkovLength(ValueError):
    """Raised when the Markov matrix is too short for the requested Hankel."""


class RankGap(ValueError):
    """Raised when the singular values of H^- do not separate at the requested order."""


@dataclass(frozen=True)
class HankelPair:
    """Block Hankel H with block (i, j) = C A^{i+j-2} B (D is excluded).

    Hminus drops the last block column, Hplus the first; both are
    T1*m x T2*p.
    """

    H: np.ndarray
    Hminus: np.ndarray
    Hplus: np.ndarray
    T1: int
    T2: int
    p: int
    m: int


def hankel(G: MarkovMatrix, T1: int, T2: int) -> HankelPair:
    """Assemble the block Hankel of a Markov matrix; needs T1 + T2 + 1 <= T."""
    if T1 < 1 or T2 < 1:
        raise ValueError("T1, T2 must be >= 1")
    if T1 + T2 + 1 > G.T:
        raise InsufficientMarkovLength(
            f"need T1 + T2 + 1 = {T1 + T2 + 1} Markov blocks, have T = {G.T}")
    m, p = G.m, G.p
    H = np.empty((T1 * m, (T2 + 1) * p))
    for i in range(1, T1 + 1):
        for j in range(1, T2 + 2):
            H[(i - 1) * m:i * m, (j - 1) * p:j * p] = G.block(i + j - 1)
    return HankelPair(H=H, Hminus=H[:, :T2 * p].copy(), Hplus=H[:, p:].copy(),
                      T1=T1, T2=T2, p=p, m=m)


def ho_kalman(G: MarkovMatrix, n: int, T1: Optional[int] = None,
              T2: Optional[int] = None, rank_gap: float = 10.0) -> StateSpace:
    """Order-n balanced realization of a Markov matrix.

    Takes the rank-n truncated SVD of H^- = U S V^T, splits it into
    observability and controllability factors O = U S^{1/2}, Q = S^{1/2} V^T,
    and reads off C (first block row of O), B (first block column of Q),
    A = O^+ H^+ Q^+, D (block 0 of G). T1 = T2 = floor((T-1)/2) by default.

    Raises RankGap when sigma_n / sigma_{n+1} of H^- is below ``rank_gap``,
    which signals that the order n is ambiguous for this data.
    """
    if T1 is None and T2 is None:
        T1 = T2 = (G.T - 1) // 2
    if T1 is None or T2 is None:
        raise ValueError("give both T1 and T2 or neither")
    pair = hankel(G, T1, T2)
    if n < 1 or n > min(T1 * G.m, T2 * G.p):
        raise ValueError(f"order n = {n} must be in [1, min(T1*m, T2*p)]")
    U, s, Vt = np.linalg.svd(pair.Hminus, full_matrices=False)
    sn = s[n - 1]
    snext = s[n] if n < len(s) else 0.0
    if sn <= 1e-12 * max(1.0, s[0]) or (snext > 0 and sn / snext < rank_gap):
        raise RankGap(
            f"sigma_{n} = {sn:.3e}, sigma_{n + 1} = {snext:.3e}: order {n} ambiguous")
    root = np.sqrt(s[:n])
    O = U[:, :n] * root
    Q = root[:, None] * Vt[:n]
    A = np.linalg.pinv(O) @ pair.Hplus @ np.linalg.pinv(Q)
    C = O[:G.m]
    B = Q[:, :G.p]
    return StateSpace(A=A, B=B, C=C, D=G.block(0))


def realization_error(sys_hat: StateSpace, sys_ref: StateSpace, k: int) -> float:
    """Similarity-invariant distance ||M_k(sys_hat) - M_k(sys_ref)||_F."""
    if (sys_hat.m, sys_hat.p) != (sys_ref.m, sys_ref.p):
        raise ValueError("systems must share input/output dimensions")
    Gh = markov_params(sys_hat, k).G
    Gr = markov_params(sys_ref, k).G
    return float(np.linalg.norm(Gh - Gr, ord="fro"))


def minimality_check(sys: StateSpace, tol: float = 1e-10):
    """Numerical ranks of the n-block controllability and observability matrices.

    Returns (controllable, observable, (rank_ctrb, rank_obs)); singular
    values above tol * sigma_max count toward the rank.
    """
    n = sys.n
    ctrb_blocks, obs_blocks = [], []
    X, Z = sys.B, sys.C
    for _ in range(n):
        ctrb_blocks.append(X)
        obs_blocks.append(Z)
        X = sys.A @ X
        Z = Z @ sys.A
    ctrb = np.hstack(ctrb_blocks)
    obs = np.vstack(obs_blocks)

    def num_rank(M):
        s = np.linalg.svd(M, compute_uv=False)
        if s.size == 0 or s[0] == 0:
            return 0
        return int(np.sum(s > tol * s[0]))

    rc, ro = num_rank(ctrb), num_rank(obs)
    return rc == n, ro == n, (rc, ro)
