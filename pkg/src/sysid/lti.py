"""Discrete-time LTI systems: simulation, Markov parameters, control norms.

Systems follow the recursion

    x_{t+1} = A x_t + B u_t + Bw w_t
    y_t     = C x_t + D u_t + Dz z_t

with inputs u_t ~ N(0, I_p), process noise w_t and sensor noise z_t drawn
from a :class:`NoiseModel`. No stability is assumed; operations that need
a strictly stable A check the spectral radius and raise otherwise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .filters import Filter


class SpectralRadiusNotStrictlyStable(ValueError):
    """Raised when an operation requires rho(A) < 1 but the input is not."""


class NonRealCoefficients(ValueError):
    """Raised when a construction would produce complex coefficients."""


def _readonly(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateSpace:
    """State-space realization (A, B, C, D, Bw, Dz, x1).

    Noise channels may have zero width (d_w = 0 or d_z = 0), meaning the
    channel is absent. Immutable; arrays are stored read-only.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Bw: np.ndarray = None
    Dz: np.ndarray = None
    x1: np.ndarray = None

    def __post_init__(self):
        A = _readonly(np.atleast_2d(self.A))
        B = _readonly(np.atleast_2d(self.B))
        C = _readonly(np.atleast_2d(self.C))
        D = _readonly(np.atleast_2d(self.D))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise ValueError(f"B has {B.shape[0]} rows, expected {n}")
        m, p = D.shape
        if C.shape != (m, n):
            raise ValueError(f"C shape {C.shape} inconsistent with D {D.shape} and A {A.shape}")
        if B.shape[1] != p:
            raise ValueError(f"B has {B.shape[1]} cols, D has {p}")
        if min(n, p, m) < 1:
            raise ValueError("n, p, m must all be >= 1")
        Bw = _readonly(self.Bw if self.Bw is not None else np.zeros((n, 0)))
        Bw = Bw.reshape(n, -1) if Bw.size else _readonly(np.zeros((n, 0)))
        if Bw.shape[0] != n:
            raise ValueError(f"Bw has {Bw.shape[0]} rows, expected {n}")
        Dz = _readonly(self.Dz if self.Dz is not None else np.zeros((m, 0)))
        Dz = Dz.reshape(m, -1) if Dz.size else _readonly(np.zeros((m, 0)))
        if Dz.shape[0] != m:
            raise ValueError(f"Dz has {Dz.shape[0]} rows, expected {m}")
        x1 = np.zeros(n) if self.x1 is None else np.asarray(self.x1, dtype=float).reshape(-1)
        if x1.shape != (n,):
            raise ValueError(f"x1 has shape {x1.shape}, expected ({n},)")
        for name, val in [("A", A), ("B", B), ("C", C), ("D", D),
                          ("Bw", _readonly(Bw)), ("Dz", _readonly(Dz)), ("x1", _readonly(x1))]:
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def m(self) -> int:
        return self.C.shape[0]

    @property
    def d_w(self) -> int:
        return self.Bw.shape[1]

    @property
    def d_z(self) -> int:
        return self.Dz.shape[1]

    def to_json(self) -> str:
        doc = {k: getattr(self, k).tolist() for k in ("A", "B", "C", "D", "Bw", "Dz", "x1")}
        return json.dumps(doc, indent=2)

    @staticmethod
    def from_json(text: str) -> "StateSpace":
        doc = json.loads(text)
        def arr(key, default=None):
            if key in doc and doc[key] is not None:
                return np.asarray(doc[key], dtype=float)
            return default
        return StateSpace(A=arr("A"), B=arr("B"), C=arr("C"), D=arr("D"),
                          Bw=arr("Bw"), Dz=arr("Dz"), x1=arr("x1"))


class NoiseModel:
    """Base class for the noise models. See subclasses."""

    def draw(self, N: int, d_w: int, d_z: int, rng: np.random.Generator):
        raise NotImplementedError


@dataclass(frozen=True)
class NoNoise(NoiseModel):
    """Noiseless: w_t = 0, z_t = 0."""

    def draw(self, N, d_w, d_z, rng):
        return np.zeros((N, d_w)), np.zeros((N, d_z))


@dataclass(frozen=True)
class StochasticGaussian(NoiseModel):
    """i.i.d. Gaussian noise, w_t ~ N(0, sigma_w^2 I), z_t ~ N(0, sigma_z^2 I).

    With sigma = 1 this is conditionally 1-subgaussian.
    """

    sigma_w: float = 1.0
    sigma_z: float = 1.0

    def draw(self, N, d_w, d_z, rng):
        w = self.sigma_w * rng.standard_normal((N, d_w))
        z = self.sigma_z * rng.standard_normal((N, d_z))
        return w, z


@dataclass(frozen=True)
class AdversarialBounded(NoiseModel):
    """Oblivious bounded noise with ||w_t||^2 <= d_w and ||z_t||^2 <= d_z.

    Generators are pure functions of the time index, so they are measurable
    with respect to any earlier sigma-field by construction:

    - ``constant-sign``: w_t = (1, ..., 1)
    - ``square-wave``: sign flips every ``period`` steps (choose period >= T)
    - ``aligned``: w_t = sqrt(d) * v for a fixed unit direction v (first axis)
    """

    generator: str = "constant-sign"
    period: int = 1

    def __post_init__(self):
        if self.generator not in ("constant-sign", "square-wave", "aligned"):
            raise ValueError(f"unknown adversarial generator {self.generator!r}")
        if self.period < 1:
            raise ValueError("period must be >= 1")

    def _wave(self, N: int, d: int) -> np.ndarray:
        if d == 0:
            return np.zeros((N, 0))
        t = np.arange(1, N + 1)
        if self.generator == "constant-sign":
            return np.ones((N, d))
        if self.generator == "square-wave":
            sign = np.where(((t - 1) // self.period) % 2 == 0, 1.0, -1.0)
            return np.outer(sign, np.ones(d))
        v = np.zeros(d)
        v[0] = 1.0
        return np.outer(np.ones(N), np.sqrt(d) * v)

    def draw(self, N, d_w, d_z, rng):
        w = self._wave(N, d_w)
        z = self._wave(N, d_z)
        for arr, d, name in ((w, d_w, "w"), (z, d_z, "z")):
            if d and np.max(np.sum(arr ** 2, axis=1)) > d + 1e-9:
                raise RuntimeError(f"adversarial generator violated ||{name}_t||^2 <= d_{name}")
        return w, z


@dataclass(frozen=True)
class Trajectory:
    """Simulated sequences for t = 1..N (stored as rows 0..N-1)."""

    u: np.ndarray
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    z: np.ndarray
    seed: int
    noise: NoiseModel

    def __post_init__(self):
        for name in ("u", "x", "y", "w", "z"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def N(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class MarkovMatrix:
    """Length-T response function G in R^{m x Tp}, block j = D (j=0) or C A^{j-1} B."""

    G: np.ndarray
    T: int
    p: int
    m: int

    def __post_init__(self):
        G = _readonly(np.atleast_2d(self.G))
        if G.shape != (self.m, self.T * self.p):
            raise ValueError(f"G shape {G.shape} != ({self.m}, {self.T * self.p})")
        object.__setattr__(self, "G", G)

    def block(self, j: int) -> np.ndarray:
        if not 0 <= j < self.T:
            raise IndexError(f"block {j} out of range for T={self.T}")
        return self.G[:, j * self.p:(j + 1) * self.p]

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.G, ord=2))


@dataclass(frozen=True)
class JordanSpec:
    """Declared Jordan structure: multiset of (eigenvalue, block size) pairs.

    Jordan structure is declared rather than computed; numerical Jordan
    decomposition is ill-conditioned. ``validate_jordan_spec`` checks a
    declaration against the computed spectrum of a matrix.
    """

    blocks: tuple
    cond_constants: Optional[tuple] = None  # (M0, MB, MC, MD) if declared

    def __init__(self, blocks, cond_constants=None):
        norm = []
        for lam, k in blocks:
            k = int(k)
            if k < 1:
                raise ValueError("Jordan block size must be >= 1")
            norm.append((complex(lam), k))
        object.__setattr__(self, "blocks", tuple(norm))
        object.__setattr__(self, "cond_constants", cond_constants)

    @property
    def total_dim(self) -> int:
        return sum(k for _, k in self.blocks)

    def max_block(self) -> int:
        return max(k for _, k in self.blocks)

    def to_json(self) -> str:
        return json.dumps([{"re": lam.real, "im": lam.imag, "k": k} for lam, k in self.blocks])

    @staticmethod
    def from_json(text: str) -> "JordanSpec":
        items = json.loads(text)
        return JordanSpec([(complex(it["re"], it.get("im", 0.0)), it["k"]) for it in items])


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def spectral_radius(A: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def simulate(sys: StateSpace, N: int, noise: NoiseModel, seed: int,
             zero_input: bool = False) -> Trajectory:
    """Simulate the system for N steps with fresh Gaussian inputs.

    Identical (sys, N, noise, seed, zero_input) gives bit-identical output.
    ``zero_input`` is a debug flag forcing u = 0.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = np.random.default_rng(seed)
    u = np.zeros((N, sys.p)) if zero_input else rng.standard_normal((N, sys.p))
    w, z = noise.draw(N, sys.d_w, sys.d_z, rng)

    x = np.empty((N, sys.n))
    y = np.empty((N, sys.m))
    xt = sys.x1.copy()
    A, B, C, D, Bw, Dz = sys.A, sys.B, sys.C, sys.D, sys.Bw, sys.Dz
    for t in range(N):
        x[t] = xt
        y[t] = C @ xt + D @ u[t] + (Dz @ z[t] if sys.d_z else 0.0)
        xt = A @ xt + B @ u[t] + (Bw @ w[t] if sys.d_w else 0.0)
    return Trajectory(u=u, x=x, y=y, w=w, z=z, seed=seed, noise=noise)


_CHANNELS = ("input", "process-noise", "initial-state")


def _channel_BD(sys: StateSpace, channel: str):
    """Input matrix and feedthrough for a response channel.

    Only the input channel has a feedthrough block; the noise and
    initial-state responses have none.
    """
    if channel == "input":
        return sys.B, sys.D
    if channel == "process-noise":
        if sys.d_w == 0:
            raise ValueError("system has no process-noise channel (d_w = 0)")
        return sys.Bw, np.zeros((sys.m, sys.d_w))
    if channel == "initial-state":
        return sys.x1.reshape(-1, 1), np.zeros((sys.m, 1))
    raise ValueError(f"channel must be one of {_CHANNELS}, got {channel!r}")


def markov_params(sys: StateSpace, T: int, channel: str = "input") -> MarkovMatrix:
    """Markov parameter matrix [D | CB | CAB | ... | C A^{T-2} B] for a channel."""
    if T < 1:
        raise ValueError("T must be >= 1")
    B, D = _channel_BD(sys, channel)
    p = B.shape[1]
    blocks = [D]
    X = B
    for _ in range(T - 1):
        blocks.append(sys.C @ X)
        X = sys.A @ X
    return MarkovMatrix(G=np.hstack(blocks), T=T, p=p, m=sys.m)


def mk_opnorm(sys: StateSpace, k: int, channel: str = "input") -> float:
    """Operator norm of the length-k Markov matrix; nondecreasing in k."""
    return markov_params(sys, k, channel).op_norm()


def h2op_norm(sys: StateSpace, channel: str = "input", tol: float = 1e-9,
              eps_rho: float = 1e-9, max_doublings: int = 200) -> float:
    """Limit of mk_opnorm as k -> infinity, for strictly stable A.

    Extends the horizon geometrically, adding the squared row-Gramian
    contribution of each extension, until the estimated tail falls below
    ``tol``. The partial sums are monotone, so the result is a lower bound
    within tol of the limit.
    """
    rho = spectral_radius(sys.A)
    if rho >= 1.0 - eps_rho:
        raise SpectralRadiusNotStrictlyStable(
            f"h2op_norm needs rho(A) < 1 - {eps_rho:g}, got rho = {rho:.12g}")
    B, D = _channel_BD(sys, channel)
    # partial controllability Gramian P_k = sum_{j<k} A^j B B^T (A^j)^T,
    # doubled via P_{2k} = P_k + A^k P_k (A^k)^T
    P = B @ B.T
    Apow = sys.A.copy()
    for _ in range(max_doublings):
        AP = Apow @ P
        P = P + AP @ Apow.T
        Apow = Apow @ Apow
        a2 = float(np.linalg.norm(Apow, ord=2) ** 2)
        if a2 < 1.0:
            # remaining tail of the squared sum: P_inf - P = sum_i A^{ki} P (A^{ki})^T
            tail = a2 * float(np.trace(P)) / (1.0 - a2)
            value = float(np.sqrt(max(0.0, np.linalg.eigvalsh(D @ D.T + sys.C @ P @ sys.C.T)[-1])))
            cnorm2 = float(np.linalg.norm(sys.C, ord=2) ** 2)
            if cnorm2 * tail <= tol * max(value, tol):
                return value
    raise RuntimeError("h2op_norm did not converge; spectral radius too close to 1")


def hinf_norm(sys: StateSpace, channel: str = "input", grid_points: int = 4096,
              eps_rho: float = 1e-9) -> float:
    """Grid lower bound of sup_{|z|=1} ||C (zI - A)^{-1} B + D||_op.

    Evaluates the transfer function on a uniform grid of the unit circle;
    the true supremum can exceed the returned value between grid points.
    """
    if grid_points < 8:
        raise ValueError("grid_points must be >= 8")
    rho = spectral_radius(sys.A)
    if rho >= 1.0 - eps_rho:
        raise SpectralRadiusNotStrictlyStable(
            f"hinf_norm needs rho(A) < 1 - {eps_rho:g}, got rho = {rho:.12g}")
    B, D = _channel_BD(sys, channel)
    I = np.eye(sys.n)
    best = 0.0
    for theta in 2.0 * np.pi * np.arange(grid_points) / grid_points:
        z = np.exp(1j * theta)
        G = sys.C @ np.linalg.solve(z * I - sys.A, B) + D
        best = max(best, float(np.linalg.norm(G, ord=2)))
    return best


def c_phi(sys: StateSpace, phi: Filter, T: int) -> np.ndarray:
    """Filtered observation matrix C A^{LT} - sum_l Psi_l C A^{(L-l)T}."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if phi.m != sys.m:
        raise ValueError(f"filter block size {phi.m} != system output dim {sys.m}")
    L = phi.L
    AT = np.linalg.matrix_power(sys.A, T)
    # powers[j] = C A^{jT}
    powers = [sys.C]
    for _ in range(L):
        powers.append(powers[-1] @ AT)
    out = powers[L].copy()
    for l, Psi in enumerate(phi.blocks, start=1):
        out -= Psi @ powers[L - l]
    return out


def phi_systems(sys: StateSpace, phi: Filter, T: int):
    """The filtered systems (A, B, C_phi, 0), (A, Bw, C_phi, 0), (A, x1, C_phi, 0).

    The process-noise system is None when d_w = 0.
    """
    Cp = c_phi(sys, phi, T)
    m, n = Cp.shape
    G = StateSpace(A=sys.A, B=sys.B, C=Cp, D=np.zeros((m, sys.p)))
    F = None
    if sys.d_w:
        F = StateSpace(A=sys.A, B=sys.Bw, C=Cp, D=np.zeros((m, sys.d_w)))
    H = StateSpace(A=sys.A, B=sys.x1.reshape(n, 1), C=Cp, D=np.zeros((m, 1)))
    return G, F, H


# ---------------------------------------------------------------------------
# Jordan structure helpers
# ---------------------------------------------------------------------------

def jordan_matrix(spec: JordanSpec) -> np.ndarray:
    """Real block-diagonal matrix realizing the declared Jordan structure.

    Complex eigenvalues must appear in conjugate pairs (same block size);
    each pair becomes one real 2k x 2k block with rotation blocks on the
    diagonal and I_2 on the superdiagonal.
    """
    remaining = list(spec.blocks)
    real_blocks = []
    while remaining:
        lam, k = remaining.pop(0)
        if abs(lam.imag) < 1e-14:
            J = np.eye(k) * lam.real + np.diag(np.ones(k - 1), 1) if k > 1 else np.array([[lam.real]])
            real_blocks.append(J)
            continue
        mate = None
        for i, (lam2, k2) in enumerate(remaining):
            if k2 == k and abs(lam2 - lam.conjugate()) < 1e-12:
                mate = i
                break
        if mate is None:
            raise NonRealCoefficients(
                f"eigenvalue {lam} has no conjugate partner of block size {k}")
        remaining.pop(mate)
        a, b = lam.real, abs(lam.imag)
        R = np.array([[a, b], [-b, a]])
        J = np.zeros((2 * k, 2 * k))
        for i in range(k):
            J[2 * i:2 * i + 2, 2 * i:2 * i + 2] = R
            if i + 1 < k:
                J[2 * i:2 * i + 2, 2 * i + 2:2 * i + 4] = np.eye(2)
        real_blocks.append(J)
    n = sum(b.shape[0] for b in real_blocks)
    J = np.zeros((n, n))
    at = 0
    for b in real_blocks:
        s = b.shape[0]
        J[at:at + s, at:at + s] = b
        at += s
    return J


def validate_jordan_spec(spec: JordanSpec, A: np.ndarray, tol: float = 1e-8):
    """Check declared eigenvalues against the computed spectrum of A.

    Greedily matches each declared eigenvalue instance (with multiplicity k)
    to the nearest unused computed eigenvalue. Returns (ok, max_mismatch).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if spec.total_dim > A.shape[0]:
        return False, float("inf")
    computed = list(np.linalg.eigvals(A))
    worst = 0.0
    for lam, k in spec.blocks:
        for _ in range(k):
            if not computed:
                return False, float("inf")
            dists = [abs(lam - c) for c in computed]
            i = int(np.argmin(dists))
            worst = max(worst, dists[i])
            computed.pop(i)
    return worst <= tol, worst
