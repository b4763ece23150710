"""Regression matrices, OLS, the ridge prefilter, and the two-step estimator.

The two-step estimator first fits a ridge filter phi predicting y_t from the
T-subsampled output history k_t, then regresses the filtered outputs
(y_t - phi . k_t) against the stacked inputs ubar_t.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .filters import Filter
from .lti import MarkovMatrix, Trajectory


class IndexUnderflow(ValueError):
    """Raised when N1 <= T*L so some feature index would fall before t=1."""


class RankDeficient(ValueError):
    """Raised when the stacked-input matrix is too ill-conditioned to invert."""


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RegressionData:
    """Rows t = N1..N of ubar_t, k_t, and y_t.

    ubar_t = [u_t | u_{t-1} | ... | u_{t-T+1}]  (decreasing time order)
    k_t    = [y_{t-T} | y_{t-2T} | ... | y_{t-TL}]
    """

    Ubar: np.ndarray
    K: np.ndarray
    Y: np.ndarray
    N1: int
    N: int
    T: int
    L: int
    p: int
    m: int

    def __post_init__(self):
        for name in ("Ubar", "K", "Y"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        if self.Ubar.shape != (self.n_rows, self.T * self.p):
            raise ValueError("Ubar shape inconsistent with (N1, N, T, p)")
        if self.K.shape != (self.n_rows, self.L * self.m):
            raise ValueError("K shape inconsistent with (N1, N, L, m)")
        if self.Y.shape != (self.n_rows, self.m):
            raise ValueError("Y shape inconsistent with (N1, N, m)")

    @property
    def n_rows(self) -> int:
        return self.N - self.N1 + 1


def build_regression_data(traj: Trajectory, T: int, L: int,
                          N1: Optional[int] = None) -> RegressionData:
    """Assemble the regression matrices from a trajectory.

    N1 defaults to T*L + 1, the smallest start for which every index in k_t
    is a valid time step.
    """
    if T < 1 or L < 1:
        raise ValueError("T and L must be >= 1")
    N = traj.N
    if N1 is None:
        N1 = T * L + 1
    if N1 <= T * L:
        raise IndexUnderflow(f"N1 = {N1} must exceed T*L = {T * L}")
    if N1 > N:
        raise ValueError(f"N1 = {N1} exceeds trajectory length N = {N}")
    p = traj.u.shape[1]
    m = traj.y.shape[1]
    rows = np.arange(N1, N + 1)  # 1-indexed times
    Ubar = np.hstack([traj.u[rows - 1 - j] for j in range(T)])
    K = np.hstack([traj.y[rows - 1 - l * T] for l in range(1, L + 1)])
    Y = traj.y[rows - 1]
    return RegressionData(Ubar=Ubar, K=K, Y=Y, N1=N1, N=N, T=T, L=L, p=p, m=m)


def _lstsq_coeffs(X: np.ndarray, Y: np.ndarray, tol_scale: float = 1e-10) -> np.ndarray:
    """Solve min ||X W - Y||_F by SVD least squares; returns W^T.

    Rejects problems where sigma_min(X)^2 is below tol_scale * n_rows.
    """
    s = np.linalg.svd(X, compute_uv=False)
    smin_sq = float(s[-1] ** 2) if X.shape[0] >= X.shape[1] else 0.0
    if smin_sq <= tol_scale * X.shape[0]:
        raise RankDeficient(
            f"stacked inputs ill-conditioned: sigma_min^2 = {smin_sq:.3e} "
            f"<= {tol_scale:g} * {X.shape[0]}")
    W, *_ = np.linalg.lstsq(X, Y, rcond=None)
    return W.T


def ols(data: RegressionData) -> MarkovMatrix:
    """Ordinary least squares of y_t against ubar_t."""
    G = _lstsq_coeffs(data.Ubar, data.Y)
    return MarkovMatrix(G=G, T=data.T, p=data.p, m=data.m)


def gram_opnorm(X: np.ndarray) -> float:
    """Operator norm of a tall residual matrix via the small Gram form.

    For n_rows >> cols, sqrt(lambda_max(X^T X)) avoids the SVD of the tall
    matrix; conditioning is harmless at the accuracy these norms are used at.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] <= 4 * X.shape[1]:
        return float(np.linalg.norm(X, ord=2))
    return float(np.sqrt(max(0.0, np.linalg.eigvalsh(X.T @ X)[-1])))


def ridge(K: np.ndarray, A: np.ndarray, mu: float) -> np.ndarray:
    """Closed-form ridge solution argmin_phi sum ||phi k_t - a_t||^2 + mu^2 ||phi||_F^2.

    Returns phi with phi^T = (K^T K + mu^2 I)^{-1} K^T A.
    """
    if mu <= 0:
        raise ValueError("mu must be > 0")
    K = np.atleast_2d(np.asarray(K, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    gram = K.T @ K + (mu ** 2) * np.eye(K.shape[1])
    return np.linalg.solve(gram, K.T @ A).T


def ridge_filter(data: RegressionData, mu: float) -> Filter:
    """Ridge prefilter predicting y_t from the subsampled history k_t."""
    return Filter.from_flat(ridge(data.K, data.Y, mu), data.m)


def fixed_filter_estimate(data: RegressionData, phi: Filter) -> MarkovMatrix:
    """Least squares of the filtered outputs (y_t - phi . k_t) against ubar_t."""
    if phi.m != data.m or phi.L != data.L:
        raise ValueError(f"filter of shape ({phi.m}, {phi.L}) does not match data "
                         f"({data.m}, {data.L})")
    G = _lstsq_coeffs(data.Ubar, data.Y - data.K @ phi.flat().T)
    return MarkovMatrix(G=G, T=data.T, p=data.p, m=data.m)


def pfls(data: RegressionData, mu: float):
    """Two-step prefiltered least squares; returns (estimate, filter used)."""
    phi = ridge_filter(data, mu)
    return fixed_filter_estimate(data, phi), phi


def residuals(data: RegressionData, G: MarkovMatrix,
              phi: Optional[Filter] = None) -> np.ndarray:
    """Matrix with rows delta_t - phi . k_t, where delta_t = y_t - G ubar_t."""
    if G.T != data.T or G.p != data.p or G.m != data.m:
        raise ValueError("Markov matrix dimensions do not match data")
    out = data.Y - data.Ubar @ G.G.T
    if phi is not None:
        out = out - data.K @ phi.flat().T
    return out


def check_conditioning(data: RegressionData):
    """Whether (N/2) I <= Ubar^T Ubar <= 2N I; returns (ok, min_eig, max_eig)."""
    eigs = np.linalg.eigvalsh(data.Ubar.T @ data.Ubar)
    lo, hi = float(eigs[0]), float(eigs[-1])
    ok = lo >= data.N / 2.0 and hi <= 2.0 * data.N
    return ok, lo, hi


# ---------------------------------------------------------------------------
# selecting the filter length L
# ---------------------------------------------------------------------------

def _log_plus(x: float) -> float:
    if x <= 0:
        return 1.0
    return max(1.0, math.log(x))


def _lil(x: float) -> float:
    return _log_plus(_log_plus(x))


def _p_tilde(p: int, T: int) -> float:
    lg = math.log(math.e * T * p) ** 2 * (math.log(T * p) ** 2 if T * p > 1 else 0.0)
    return p * min(T, lg)


@dataclass(frozen=True)
class SelectLResult:
    selected: int
    admissible: tuple
    conf: dict
    opt_hat: dict
    empty_admissible: bool


def select_L(traj: Trajectory, T: int, L_max: int, mu: float, delta: float,
             constants=(1.0, 1.0)) -> SelectLResult:
    """Pick the filter length by structural risk minimization.

    All candidates share the same rows (N1 = T*L_max + 1). Each candidate L
    is scored by the upper confidence bound Conf(L, mu) built from the
    empirical proxy opthat_L = ||Y - K phi_rdg^T||_op + mu ||phi_rdg||_op;
    the winner is the smallest minimizer over the admissible set. If no L is
    admissible the minimum is taken over all candidates with a warning.
    """
    if L_max < 1:
        raise ValueError("L_max must be >= 1")
    C1, C2 = constants
    N1 = T * L_max + 1
    N = traj.N
    p = traj.u.shape[1]
    m = traj.y.shape[1]
    ptil = _p_tilde(p, T)

    admissible, conf, opt_hat_by_L = [], {}, {}
    for L in range(1, L_max + 1):
        data = build_regression_data(traj, T, L, N1)
        phi = ridge(data.K, data.Y, mu)
        fit = gram_opnorm(data.Y - data.K @ phi.T)
        phi_op = float(np.linalg.norm(phi, ord=2))
        opt_hat = fit + mu * phi_op
        opt_hat_by_L[L] = opt_hat
        K_op = gram_opnorm(data.K)

        if opt_hat > 0:
            ratio = C2 * K_op / (mu * opt_hat)
        else:
            ratio = math.inf if K_op > 0 else 0.0
        budget = C1 * T * (ptil + m
                           + L * m * (_log_plus(ratio) + _log_plus(mu * phi_op))
                           + math.log(L / delta))
        if budget <= N:
            admissible.append(L)

        d_eff = (ptil + m + _lil(opt_hat / mu)
                 + L * m * _log_plus(opt_hat + math.sqrt(N) * K_op / mu ** 2))
        conf[L] = (opt_hat + mu) / N * math.sqrt(T * (math.log(1.0 / delta) + d_eff))

    pool = admissible if admissible else list(range(1, L_max + 1))
    if not admissible:
        warnings.warn("no admissible L; selecting over all candidates", RuntimeWarning)
    selected = min(pool, key=lambda L: (conf[L], L))
    return SelectLResult(selected=selected, admissible=tuple(admissible), conf=conf,
                         opt_hat=opt_hat_by_L, empty_admissible=not admissible)
