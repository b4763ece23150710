"""Block filters acting on subsampled output histories."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Filter:
    """A length-L block filter phi = [Psi_1 | ... | Psi_L], each block m x m.

    The filter predicts y_t from the T-subsampled history via
    phi . k_t = sum_l Psi_l y_{t - l T}.
    """

    blocks: tuple[np.ndarray, ...] = field()

    def __init__(self, blocks) -> None:
        blocks = tuple(_readonly(np.atleast_2d(b)) for b in blocks)
        if not blocks:
            raise ValueError("Filter needs at least one block")
        m = blocks[0].shape[0]
        for b in blocks:
            if b.shape != (m, m):
                raise ValueError(f"all blocks must be {m}x{m}, got {b.shape}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def L(self) -> int:
        return len(self.blocks)

    @property
    def m(self) -> int:
        return self.blocks[0].shape[0]

    def flat(self) -> np.ndarray:
        """Flat form phi in R^{m x Lm}, blocks concatenated left to right."""
        return np.hstack(self.blocks)

    def block_op_norm(self) -> float:
        """Sum of block operator norms, sum_l ||Psi_l||_op."""
        return float(sum(np.linalg.norm(b, ord=2) for b in self.blocks))

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.flat(), ord=2))

    def padded(self, L: int) -> "Filter":
        """Zero-pad with trailing blocks up to total length L."""
        if L < self.L:
            raise ValueError(f"cannot pad length-{self.L} filter to L={L}")
        zeros = [np.zeros((self.m, self.m))] * (L - self.L)
        return Filter(list(self.blocks) + zeros)

    @staticmethod
    def from_flat(phi: np.ndarray, m: int) -> "Filter":
        phi = np.atleast_2d(np.asarray(phi, dtype=float))
        if phi.shape[0] != m or phi.shape[1] % m != 0:
            raise ValueError(f"flat filter of shape {phi.shape} incompatible with m={m}")
        L = phi.shape[1] // m
        return Filter([phi[:, l * m:(l + 1) * m] for l in range(L)])

    @staticmethod
    def zero(m: int, L: int) -> "Filter":
        return Filter([np.zeros((m, m))] * L)
