import numpy as np
import pytest

import sysid as S

# eigenvalues exactly representable in binary floating point, so declared
# Jordan structure and realized matrices agree to rounding error
REAL_EIGS = [1.0, -1.0, 0.5, -0.5, 0.25, 0.75, 0.0]
COMPLEX_EIGS = [1j, 0.5 + 0.5j, -0.5 + 0.5j, 0.5j, 0.25 + 0.25j]


def random_jordan_spec(rng, n_max=5, rho_max=1.0, unit_ok=True):
    """Conjugate-closed JordanSpec with total dimension <= n_max."""
    while True:
        blocks, dim = [], 0
        for _ in range(rng.integers(1, 4)):
            if rng.random() < 0.6:
                lam = REAL_EIGS[rng.integers(len(REAL_EIGS))]
                if not unit_ok and abs(lam) >= rho_max:
                    lam *= 0.5
                k = int(rng.integers(1, 3))
                if dim + k > n_max:
                    break
                blocks.append((lam, k))
                dim += k
            else:
                lam = COMPLEX_EIGS[rng.integers(len(COMPLEX_EIGS))]
                if not unit_ok and abs(lam) >= rho_max:
                    lam *= 0.5
                k = 1
                if dim + 2 > n_max:
                    break
                blocks.extend([(lam, k), (lam.conjugate(), k)])
                dim += 2
        if blocks:
            return S.JordanSpec(blocks)


def realize(spec, rng, m=None, p=1, cond=(0.5, 2.0)):
    """State space with A = S J S^{-1} for a moderately conditioned S."""
    J = S.jordan_matrix(spec)
    n = J.shape[0]
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    Sm = Q @ np.diag(rng.uniform(*cond, n))
    A = Sm @ J @ np.linalg.inv(Sm)
    m = m or int(rng.integers(1, 3))
    C = rng.standard_normal((m, n))
    B = rng.standard_normal((n, p))
    return S.StateSpace(A=A, B=B, C=C, D=np.zeros((m, p))), Sm


def random_minimal_system(rng, n_max=4, rho=(0.3, 0.9)):
    """Strictly stable minimal system with random dimensions."""
    n = int(rng.integers(1, n_max + 1))
    p = int(rng.integers(1, 3))
    m = int(rng.integers(1, 3))
    while True:
        A = rng.standard_normal((n, n))
        A *= rng.uniform(*rho) / max(1e-12, np.max(np.abs(np.linalg.eigvals(A))))
        sys_ = S.StateSpace(A=A, B=rng.standard_normal((n, p)),
                            C=rng.standard_normal((m, n)), D=rng.standard_normal((m, p)))
        ctrb, obs, _ = S.minimality_check(sys_)
        if ctrb and obs:
            return sys_


@pytest.fixture
def rng():
    return np.random.default_rng(20240810)


@pytest.fixture
def double_integrator():
    return S.preset_system("double-integrator")


def scalar_system(a, b=1.0, c=1.0, d=0.0):
    return S.StateSpace(A=[[a]], B=[[b]], C=[[c]], D=[[d]])
