"""Structural quantities: phase rank, polynomial filters, and theory constants.

Phase rank counts how many witness points in the closed unit disk are needed
so that, after raising to the T-th power, their root phases cover every
near-unit-modulus Jordan block of the transition matrix. Small phase rank
yields short, small-norm annihilating filters; the remaining quantities here
(H_f, K1, K2, the M constants, the Opt_mu bracket) score such filters.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .estimators import gram_opnorm, ridge
from .filters import Filter
from .lti import JordanSpec, NonRealCoefficients, StateSpace

_UNIT_TOL = 1e-12


class PhaseRankNotFound(ValueError):
    """No certificate was found within the search budget (not a proof of absence)."""


class NotStronglyObservable(ValueError):
    """Raised when the subsampled observability matrix is rank-deficient."""


class SingularS(ValueError):
    """Raised when the similarity matrix passed to m_constants is singular."""


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseRankCertificate:
    """Witnesses mu_1..mu_d plus, per large Jordan block, its covering indices."""

    alpha: float
    T: int
    witnesses: tuple
    assignment: dict

    @property
    def d(self) -> int:
        return len(self.witnesses)


@dataclass(frozen=True)
class MonicPolynomial:
    """f(z) = z^d + f_1 z^{d-1} + ... + f_d with real coefficients."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence[float]):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def full(self) -> np.ndarray:
        """Descending-power coefficient vector [1, f_1, ..., f_d]."""
        return np.concatenate([[1.0], np.asarray(self.coeffs)])

    def l1(self) -> float:
        return 1.0 + float(np.sum(np.abs(self.coeffs)))

    def in_mon(self, B: float) -> bool:
        """Membership in Mon(d, B): monic of this degree with l1 norm <= B."""
        return self.l1() <= B

    def __call__(self, z):
        return np.polyval(self.full(), z)

    def of_matrix(self, A: np.ndarray) -> np.ndarray:
        out = np.eye(A.shape[0])
        for c in self.coeffs:
            out = out @ A + c * np.eye(A.shape[0])
        return out


# ---------------------------------------------------------------------------
# phase rank
# ---------------------------------------------------------------------------

def _roots_of_power(mu: complex, T: int) -> np.ndarray:
    """The T explicit T-th roots of mu^T."""
    w = mu ** T
    r = abs(w) ** (1.0 / T)
    base = np.angle(w)
    angles = (base + 2.0 * np.pi * np.arange(T)) / T
    return r * np.exp(1j * angles)


def _cover_dist(mu: complex, lam: complex, T: int) -> float:
    return float(np.min(np.abs(lam - _roots_of_power(mu, T))))


def _large_blocks(spec: JordanSpec, alpha: float, T: int):
    thr = 1.0 - 1.0 / ((1.0 + alpha) * T)
    return [(lam, k) for lam, k in spec.blocks if abs(lam) >= thr - _UNIT_TOL]


def check_phase_rank(spec: JordanSpec, alpha: float, T: int,
                     witnesses: Sequence[complex], tol: float = 1e-9) -> bool:
    """Whether the witnesses certify (alpha, T)-phase rank len(witnesses).

    Every Jordan block (lambda, k) with |lambda| >= 1 - 1/((1+alpha)T) must be
    covered by at least k witnesses, where witness mu covers lambda when some
    T-th root of mu^T lies within alpha * (1 - |lambda|) of lambda.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if T < 1:
        raise ValueError("T must be >= 1")
    witnesses = [complex(mu) for mu in witnesses]
    if any(abs(mu) > 1.0 + tol for mu in witnesses):
        raise ValueError("witnesses must lie in the closed unit disk")
    for lam, k in _large_blocks(spec, alpha, T):
        width = alpha * (1.0 - abs(lam)) + tol
        covered = sum(1 for mu in witnesses if _cover_dist(mu, lam, T) <= width)
        if covered < k:
            return False
    return True


def phase_rank(spec: JordanSpec, alpha: float, T: int,
               d_max: int = 8, tol: float = 1e-9) -> PhaseRankCertificate:
    """Smallest certified d <= d_max, searching a canonical witness pool.

    The pool consists of the large eigenvalues themselves and their phases
    projected to modulus one; the search is exhaustive over multisets of the
    pool up to size d_max, smallest first, so the returned d is an upper
    bound on the true phase rank (witnesses outside the pool are never
    considered). Raises PhaseRankNotFound when the budget is exhausted.
    """
    if d_max > 12:
        raise ValueError("d_max > 12 exceeds the search budget")
    large = _large_blocks(spec, alpha, T)
    if not large:
        return PhaseRankCertificate(alpha=alpha, T=T, witnesses=(), assignment={})

    pool = []
    seen = set()
    for lam, _ in large:
        cands = [lam] if abs(lam) < _UNIT_TOL else [lam / abs(lam), lam]
        for c in cands:
            if abs(c) > 1.0:
                c = c / abs(c)
            key = (round(c.real, 12), round(c.imag, 12))
            if key not in seen:
                seen.add(key)
                pool.append(complex(*key))
    # keep only candidates that cover something, in a deterministic order
    pool = [mu for mu in pool
            if any(_cover_dist(mu, lam, T) <= alpha * (1.0 - abs(lam)) + tol
                   for lam, _ in large)]
    pool.sort(key=lambda c: (c.real, c.imag))

    for d in range(1, d_max + 1):
        for combo in itertools.combinations_with_replacement(pool, d):
            if check_phase_rank(spec, alpha, T, combo, tol):
                assignment = {}
                for idx, (lam, k) in enumerate(large):
                    dists = sorted(range(d), key=lambda i: _cover_dist(combo[i], lam, T))
                    assignment[idx] = tuple(dists[:k])
                return PhaseRankCertificate(alpha=alpha, T=T, witnesses=tuple(combo),
                                            assignment=assignment)
    raise PhaseRankNotFound(
        f"no certificate of size <= {d_max} over the canonical pool")


def poly_from_witnesses(cert: PhaseRankCertificate) -> MonicPolynomial:
    """Expand f(z) = prod_i (z - mu_i^T) into real coefficients.

    The powered witnesses must be closed under conjugation, otherwise the
    coefficients would be complex.
    """
    if cert.d == 0:
        return MonicPolynomial([])
    roots = [mu ** cert.T for mu in cert.witnesses]
    unmatched = [r for r in roots if abs(r.imag) > 1e-9]
    while unmatched:
        r = unmatched.pop(0)
        mate = next((i for i, s in enumerate(unmatched) if abs(s - r.conjugate()) < 1e-9), None)
        if mate is None:
            raise NonRealCoefficients(f"witness power {r} lacks a conjugate partner")
        unmatched.pop(mate)
    coeffs = np.poly(np.asarray(roots))
    return MonicPolynomial(coeffs[1:].real)


def filter_from_poly(f: MonicPolynomial, m: int, L: int) -> Filter:
    """Block-identity filter [-f_1 I | -f_2 I | ... | -f_d I | 0 | ...] of length L.

    Built so that the filtered observation matrix of any system equals
    C f(A^T); the trailing blocks are zero padding. Satisfies
    1 + block_op_norm = l1 norm of f.
    """
    if f.degree > L:
        raise ValueError(f"polynomial degree {f.degree} exceeds filter length {L}")
    blocks = [-c * np.eye(m) for c in f.coeffs]
    blocks += [np.zeros((m, m))] * (L - f.degree)
    return Filter(blocks)


def minimal_polynomial(spec: JordanSpec, T: int, tol: float = 1e-9) -> MonicPolynomial:
    """Minimal polynomial of A^T from the declared Jordan structure.

    Distinct eigenvalues whose T-th powers coincide (within tol) merge into
    one root whose order is the largest block size among them, matching the
    Cayley-Hamilton construction of annihilating filters.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    clusters = []  # (representative power, max block size)
    for lam, k in spec.blocks:
        w = lam ** T
        for i, (rep, kmax) in enumerate(clusters):
            if abs(w - rep) <= tol:
                clusters[i] = (rep, max(kmax, k))
                break
        else:
            clusters.append((w, k))
    roots = []
    for rep, kmax in clusters:
        roots.extend([rep] * kmax)
    unmatched = [r for r in roots if abs(r.imag) > tol]
    while unmatched:
        r = unmatched.pop(0)
        mate = next((i for i, s in enumerate(unmatched) if abs(s - r.conjugate()) < 10 * tol), None)
        if mate is None:
            raise NonRealCoefficients(f"eigenvalue power {r} lacks a conjugate partner")
        unmatched.pop(mate)
    coeffs = np.poly(np.asarray(roots)) if roots else np.array([1.0])
    return MonicPolynomial(coeffs[1:].real)


# ---------------------------------------------------------------------------
# complexity terms
# ---------------------------------------------------------------------------

_CQ = {2: math.sqrt(1.0 + 2.0 / math.pi), math.inf: 1.0}


def _q_shift(q) -> float:
    if q not in _CQ:
        raise ValueError("q must be 2 or math.inf")
    return 0.5 if q == 2 else 0.0


def _root_order(f: MonicPolynomial, w: complex, tol: float = 1e-8) -> int:
    """Order of the root of f at w, by derivative magnitudes at w."""
    thr = tol * max(1.0, f.l1())
    poly = f.full()
    for j in range(f.degree + 1):
        if abs(np.polyval(poly, w)) > thr:
            return j
        poly = np.polyder(poly)
    return f.degree + 1


def eval_Hf(f: MonicPolynomial, spec: JordanSpec, T: int, q,
            grid_points: int = 512, root_tol: float = 1e-8) -> float:
    """Complexity term H_f^{(q)}(blkspec, T); math.inf when uncancellable.

    Per block (lambda, k): zero when f(z^T) has a root of order >= k at
    lambda, infinite when |lambda| = 1 and the order falls short, and
    otherwise c_q * max |f(z^T)| over the disk |z - lambda| <= 1 - |lambda|,
    scaled by k^2 / (1-|lambda|)^{k - 1(q=2)/2}. The disk maximum is
    evaluated on a uniform boundary grid (maximum-modulus principle), so the
    result is a grid lower bound in the third case.
    """
    if grid_points < 32:
        raise ValueError("grid_points must be >= 32")
    shift = _q_shift(q)
    cq = _CQ[q]
    worst = 0.0
    for lam, k in spec.blocks:
        r = abs(lam)
        order = _root_order(f, lam ** T, root_tol)
        if order >= k:
            continue
        if abs(r - 1.0) <= _UNIT_TOL:
            return math.inf
        if r > 1.0:
            raise ValueError(f"eigenvalue {lam} outside the closed unit disk")
        theta = 2.0 * np.pi * np.arange(grid_points) / grid_points
        z = lam + (1.0 - r) * np.exp(1j * theta)
        fmax = float(np.max(np.abs(f(z ** T))))
        worst = max(worst, cq * k ** 2 * fmax / (1.0 - r) ** (k - shift))
    return worst


def k1(spec: JordanSpec, d: int, T: int, alpha: float, q) -> float:
    """Filter-complexity constant K1(d, T, alpha, q) of the declared spectrum."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    shift = _q_shift(q)
    cq = _CQ[q]
    thr = 1.0 - 1.0 / (T * (1.0 + alpha))
    worst = 0.0
    for lam, k in spec.blocks:
        r = abs(lam)
        if abs(r - 1.0) <= _UNIT_TOL:
            val = 0.0
        elif r > 1.0:
            raise ValueError(f"eigenvalue {lam} outside the closed unit disk")
        elif r > thr:
            val = k ** 2 * cq * (T * (1.0 + alpha)) ** (k - shift) * 2.0 ** (d - k)
        else:
            val = k ** 2 * cq * 2.0 ** d / (1.0 - r) ** (k - shift)
        worst = max(worst, val)
    return worst


def _m_tilde(k: int, N: int) -> float:
    if k == 1:
        return math.sqrt(N)
    if k >= N + 1:
        return math.sqrt(N) * 2.0 ** N
    return N ** (k - 0.5) * (math.e / (k - 1)) ** (k - 1)


def k2(spec: JordanSpec, N: int) -> float:
    """Trajectory-magnitude constant K2(N) = max over blocks of M(k, lambda, N)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    worst = 0.0
    for lam, k in spec.blocks:
        r = abs(lam)
        mt = _m_tilde(k, N)
        if abs(r - 1.0) <= _UNIT_TOL:
            val = mt
        elif r > 1.0:
            raise ValueError(f"eigenvalue {lam} outside the closed unit disk")
        else:
            val = min(k / (1.0 - r) ** (k - 0.5), mt)
        worst = max(worst, val)
    return worst


class MConstants(NamedTuple):
    m0: float
    mb: float
    mc: float
    md: float
    mbar: float


def m_constants(sys: StateSpace, S: np.ndarray, N: int,
                adversarial: Optional[tuple] = None) -> MConstants:
    """Similarity-conditioned magnitude constants and their combination.

    With S the similarity of a Jordan-normal decomposition A = S J S^{-1}:
    M0 = ||S^-1 x1||, MB = ||S^-1 B|| + ||S^-1 Bw||, MC = ||C S||,
    MD = ||D|| + ||Dz||, and

        Mbar = (N^{-1/2} M0 + MB) MC + MD.

    Passing adversarial = (T, d, d_w, d_z) rescales the noise contributions
    to MB(T d d_w) and MD(d d_z) for the bounded noise model.
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    sv = np.linalg.svd(S, compute_uv=False)
    if S.shape[0] != S.shape[1] or sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise SingularS("similarity matrix is singular or badly conditioned")
    Sinv = np.linalg.inv(S)

    def op(M):
        return float(np.linalg.norm(M, ord=2)) if M.size else 0.0

    m0 = float(np.linalg.norm(Sinv @ sys.x1))
    sb, sbw = op(Sinv @ sys.B), op(Sinv @ sys.Bw)
    sd, sdz = op(sys.D), op(sys.Dz)
    mc = op(sys.C @ S)
    mb, md = sb + sbw, sd + sdz
    if adversarial is None:
        mbar = (m0 / math.sqrt(N) + mb) * mc + md
    else:
        T, d, d_w, d_z = adversarial
        mbar = (m0 / math.sqrt(N) + sb + math.sqrt(T * d * d_w) * sbw) * mc \
            + sd + math.sqrt(d * d_z) * sdz
    return MConstants(m0=m0, mb=mb, mc=mc, md=md, mbar=mbar)


# ---------------------------------------------------------------------------
# Opt_mu quantities
# ---------------------------------------------------------------------------

def opt_bracket(Delta: np.ndarray, K: np.ndarray, mu: float):
    """Bracket [lower, upper] around Opt_mu = min_phi ||Delta - K phi^T||_op + mu ||phi||_op.

    Uses the ridge filter phi* = ridge(Delta, mu): the max of its two
    objective terms lower-bounds Opt_mu and their sum upper-bounds it.
    Returns (lower, upper, phi*).
    """
    Delta = np.atleast_2d(np.asarray(Delta, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    m = Delta.shape[1]
    if K.shape[1] % m != 0:
        raise ValueError(f"K has {K.shape[1]} columns, not a multiple of m = {m}")
    phi = ridge(K, Delta, mu)
    fit = gram_opnorm(Delta - K @ phi.T)
    reg = mu * float(np.linalg.norm(phi, ord=2))
    return max(fit, reg), fit + reg, Filter.from_flat(phi, m)


def opt_hat(Y: np.ndarray, K: np.ndarray, mu: float) -> float:
    """Empirical proxy ||Y - K phi_rdg^T||_op + mu ||phi_rdg||_op."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    phi = ridge(K, Y, mu)
    return gram_opnorm(Y - K @ phi.T) + mu * float(np.linalg.norm(phi, ord=2))


# ---------------------------------------------------------------------------
# strong observability and Gramian growth
# ---------------------------------------------------------------------------

def strong_obs_filter(A_plus: np.ndarray, C_plus: np.ndarray, d: int, T: int,
                      tol: float = 1e-10):
    """Pseudoinverse filter annihilating the (A+, C+) modes; returns (phi, sigma).

    Stacks the subsampled observability matrix O = [C+; C+ A+^T; ...;
    C+ A+^{T(d-1)}] and solves C+ A+^{Td} = psi O. sigma is the n+-th
    largest singular value of O with n+ = rank(A+); the blocks are arranged
    so the filter cancels through the filtered observation matrix, i.e.
    Psi_l multiplies C+ A+^{(d-l)T}. The operator norm of the filter is at
    most ||C+ A+^{Td}|| / sigma.
    """
    A_plus = np.atleast_2d(np.asarray(A_plus, dtype=float))
    C_plus = np.atleast_2d(np.asarray(C_plus, dtype=float))
    if d < 1 or T < 1:
        raise ValueError("d and T must be >= 1")
    m = C_plus.shape[0]
    AT = np.linalg.matrix_power(A_plus, T)
    rows = [C_plus]
    for _ in range(d - 1):
        rows.append(rows[-1] @ AT)
    O = np.vstack(rows)
    sA = np.linalg.svd(A_plus, compute_uv=False)
    n_plus = int(np.sum(sA > tol * max(1.0, sA[0])))
    sO = np.linalg.svd(O, compute_uv=False)
    sigma = float(sO[n_plus - 1]) if 1 <= n_plus <= len(sO) else 0.0
    if n_plus == 0 or sigma <= tol:
        raise NotStronglyObservable(
            f"sigma_{n_plus}(O_d) = {sigma:.3e} <= {tol:g}")
    target = rows[-1] @ AT  # C+ A+^{Td}
    psi = target @ np.linalg.pinv(O)
    blocks = [psi[:, (d - l) * m:(d - l + 1) * m] for l in range(1, d + 1)]
    return Filter(blocks), sigma


def gramian_sum_opnorm(sys: StateSpace, N: int) -> float:
    """sqrt ||sum_{t=0}^N GG_t||_op for GG_t = sum_{j<=t} (C A^j B)(C A^j B)^T.

    Accumulated directly; the double sum collapses to
    sum_{j=0}^N (N + 1 - j) (C A^j B)(C A^j B)^T.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    S = np.zeros((sys.m, sys.m))
    X = sys.B
    for j in range(N + 1):
        M = sys.C @ X
        S += (N + 1 - j) * (M @ M.T)
        X = sys.A @ X
    return float(np.sqrt(max(0.0, np.linalg.eigvalsh(S)[-1])))
